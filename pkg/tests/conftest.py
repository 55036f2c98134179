import math

import pytest

from dephasing_geometry.model import NoiseParams

# the two regimes used throughout: lambda = kappa = 1
MARKOV = dict(nu=0.5, lam=1.0, kappa=1.0)
NON_MARKOV = dict(nu=2.0, lam=1.0, kappa=1.0)
REGIMES = {"markov": MARKOV, "nonmarkov": NON_MARKOV}
A_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0)


def params(regime, a=0.0, **kw):
    d = dict(REGIMES[regime] if isinstance(regime, str) else regime)
    d.update(kw)
    return NoiseParams(a=a, **d)


@pytest.fixture(params=sorted(REGIMES))
def regime(request):
    return request.param


HALF_PI = math.pi / 2
