"""Parameter records and time grids.

All rates are expressed in the same (arbitrary) time unit; the CLI and the
presets use the switching rate as that unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


class ParameterError(ValueError):
    """An input record violates one of its invariants.

    ``field`` names the offending attribute so callers (the CLI in
    particular) can report it without parsing the message.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class NoiseParams:
    """Telegraph-noise environment.

    nu: noise amplitude (the two noise values are +nu and -nu)
    lam: switching rate
    kappa: decay rate of the exponential memory kernel; ``math.inf`` is
        the memoryless limit
    a: nonequilibrium parameter, the initial bias P(+nu) - P(-nu)
    """

    nu: float
    lam: float
    kappa: float
    a: float = 0.0

    @property
    def markovian_noise(self) -> bool:
        return math.isinf(self.kappa)

    def replace(self, **changes) -> "NoiseParams":
        return NoiseParams(**{**self.__dict__, **changes})


@dataclass(frozen=True)
class SystemConfig:
    """Qubit frequency and initial state.

    The initial state is either the pure state at polar angle ``theta``
    (Bloch vector (sin theta, 0, cos theta)) or, when ``r0`` is given, an
    arbitrary Bloch vector inside the unit ball.
    """

    omega0: float = 0.0
    theta: float = math.pi / 2
    r0: Optional[Tuple[float, float, float]] = None

    @property
    def initial_bloch(self) -> np.ndarray:
        if self.r0 is not None:
            return np.asarray(self.r0, dtype=float)
        return np.array([math.sin(self.theta), 0.0, math.cos(self.theta)])

    @property
    def is_pure(self) -> bool:
        return self.r0 is None or abs(np.linalg.norm(self.r0) - 1.0) < 1e-12

    @property
    def polar_angle(self) -> float:
        """Polar angle of the initial Bloch vector (meaningful for pure states)."""
        if self.r0 is None:
            return self.theta
        r = self.initial_bloch
        return math.atan2(math.hypot(r[0], r[1]), r[2])


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    n_samples: int
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def step(self) -> float:
        return self.t_max / (self.n_samples - 1)

    def __len__(self) -> int:
        return self.n_samples


def uniform_grid(t_max: float, n: int) -> TimeGrid:
    """``n`` equally spaced samples on [0, t_max]."""
    if not (t_max > 0) or not math.isfinite(t_max):
        raise ParameterError("t_max", f"must be positive and finite, got {t_max}")
    if int(n) != n or n < 2:
        raise ParameterError("n_samples", f"need an integer >= 2, got {n}")
    n = int(n)
    step = t_max / (n - 1)
    samples = np.arange(n, dtype=float) * step
    samples[-1] = t_max
    samples.setflags(write=False)
    return TimeGrid(t_max=float(t_max), n_samples=n, samples=samples)


def grid_from_samples(samples) -> TimeGrid:
    """Wrap an explicit sample array, checking it starts at 0 and increases."""
    samples = np.array(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise ParameterError("samples", "need at least two samples")
    if samples[0] != 0.0:
        raise ParameterError("samples", "first sample must be 0")
    if np.any(np.diff(samples) <= 0):
        raise ParameterError("samples", "samples must be strictly increasing")
    samples.setflags(write=False)
    return TimeGrid(t_max=float(samples[-1]), n_samples=samples.size, samples=samples)


def _check_finite(name, value, allow_inf=False):
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ParameterError(name, f"must be finite, got {value}")


def validate(params: NoiseParams, config: SystemConfig) -> Tuple[NoiseParams, SystemConfig]:
    """Check every invariant and return the pair unchanged.

    Raises ParameterError naming the first offending field.
    """
    _check_finite("nu", params.nu)
    _check_finite("lam", params.lam)
    _check_finite("kappa", params.kappa, allow_inf=True)
    _check_finite("a", params.a)
    if params.nu < 0:
        raise ParameterError("nu", f"must be >= 0, got {params.nu}")
    if params.lam < 0:
        raise ParameterError("lam", f"must be >= 0, got {params.lam}")
    if not params.kappa > 0:
        raise ParameterError("kappa", f"must be > 0, got {params.kappa}")
    if not -1.0 <= params.a <= 1.0:
        raise ParameterError("a", f"must lie in [-1, 1], got {params.a}")

    _check_finite("omega0", config.omega0)
    _check_finite("theta", config.theta)
    if config.r0 is None:
        if not 0.0 <= config.theta <= math.pi:
            raise ParameterError("theta", f"must lie in [0, pi], got {config.theta}")
    else:
        if len(config.r0) != 3:
            raise ParameterError("r0", "Bloch vector needs three components")
        for c in config.r0:
            _check_finite("r0", c)
        norm = float(np.linalg.norm(config.r0))
        if norm > 1.0 + 1e-12:
            raise ParameterError("r0", f"|r0| = {norm:.6g} exceeds 1")
    return params, config
