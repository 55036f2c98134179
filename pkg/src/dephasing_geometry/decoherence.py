"""Exact decoherence factor of a qubit under nonstationary telegraph noise.

The Laplace-domain factor is the rational function

    F(p) = [p^2 + k p + 2 k l + i a v (p + k)] / [p^3 + k p^2 + (2 k l + v^2) p + k v^2]

(k = kappa, l = lambda, v = nu). Its inverse transform is a sum of three
exponential modes F(t) = sum_j R_j exp(p_j t), with p_j the roots of the
cubic denominator and R_j = N(p_j) / D'(p_j) the residues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import NoiseParams, TimeGrid

ZERO_TOL = 1e-12
DEGENERACY_TOL = 1e-9
# sum |R_j| above this means the mode sum cancels away more than ~6 digits
RESIDUE_GROWTH_LIMIT = 1e6


class DegenerateModesError(ArithmeticError):
    """Raised when evaluating a mode sum whose roots (nearly) coincide."""


class UndersampledPhaseError(ArithmeticError):
    def __init__(self, index: int, jump: float):
        super().__init__(
            f"phase increment {jump:+.6f} rad between samples {index} and "
            f"{index + 1} is ambiguous; refine the time grid"
        )
        self.index = index


def _horner(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def cubic_roots(c2: float, c1: float, c0: float) -> np.ndarray:
    """Roots of p^3 + c2 p^2 + c1 p + c0 with real coefficients.

    Closed form (trigonometric when all roots are real, Cardano otherwise)
    followed by one Newton step per root. Complex roots come back as an
    exact conjugate pair. The result is sorted by real part, then imaginary
    part.
    """
    c2, c1, c0 = float(c2), float(c1), float(c0)
    # rescale p = k y so the monic cubic in y has O(1) coefficients
    k = max(abs(c2), math.sqrt(abs(c1)), np.cbrt(abs(c0)))
    if k == 0.0:
        return np.zeros(3, dtype=complex)
    roots = [k * y for y in _unit_cubic(c2 / k, c1 / k / k, c0 / k / k / k)]
    roots = [_polish(r, c2, c1, c0) if r.imag else complex(_polish(r.real, c2, c1, c0).real) for r in roots]
    if roots[1].imag:
        roots[2] = roots[1].conjugate()
    return np.array(sorted(roots, key=lambda z: (z.real, z.imag)), dtype=complex)


def _unit_cubic(c2, c1, c0):
    shift = c2 / 3.0
    P = c1 - c2 * shift
    Q = 2.0 * shift**3 - shift * c1 + c0
    disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
    m = 2.0 * math.sqrt(-P / 3.0) if P < 0 else 0.0

    if disc > 0 or (disc == 0 and P >= 0):
        A = -math.copysign(np.cbrt(abs(Q) / 2.0 + math.sqrt(max(disc, 0.0))), Q)
        B = -P / (3.0 * A) if A != 0.0 else 0.0
        pair = complex(-(A + B) / 2.0 - shift, math.sqrt(3.0) / 2.0 * abs(A - B))
        return [complex(A + B - shift), pair, pair.conjugate()]
    if P * m == 0.0:
        return [complex(-shift)] * 3
    arg = max(-1.0, min(1.0, 3.0 * Q / (P * m)))
    phi = math.acos(arg) / 3.0
    return [complex(m * math.cos(phi - 2.0 * math.pi * j / 3.0) - shift) for j in range(3)]


def _polish(x, c2, c1, c0):
    x = complex(x)
    d = _horner((1.0, c2, c1, c0), x)
    dd = _horner((3.0, 2.0 * c2, c1), x)
    if dd != 0:
        x = x - d / dd
    return x


def denominator_coeffs(params: NoiseParams):
    k, l, v = params.kappa, params.lam, params.nu
    return (k, 2.0 * k * l + v * v, k * v * v)


def numerator(params: NoiseParams, p):
    k, l, v, a = params.kappa, params.lam, params.nu, params.a
    return p * p + k * p + 2.0 * k * l + 1j * a * v * (p + k)


@dataclass(frozen=True)
class ModeDecomposition:
    params: NoiseParams
    roots: np.ndarray
    residues: np.ndarray
    degenerate: bool

    def _check(self):
        if self.degenerate:
            raise DegenerateModesError(
                f"roots {self.roots} nearly coincide; evaluate through the ODE oracle"
            )

    def _terms(self, t, power):
        self._check()
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("mode sums are only defined for t >= 0")
        w = self.residues * self.roots**power
        return (np.exp(np.multiply.outer(t, self.roots)) * w).sum(axis=-1)

    def F(self, t):
        return self._terms(t, 0)

    def dF(self, t):
        return self._terms(t, 1)

    def moments(self, kmax: int = 2) -> np.ndarray:
        """sum_j R_j p_j^k for k = 0..kmax, i.e. F^(k)(0)."""
        return np.array([np.sum(self.residues * self.roots**k) for k in range(kmax + 1)])


def decompose(params: NoiseParams) -> ModeDecomposition:
    """Roots and residues of the Laplace-domain decoherence factor."""
    if params.markovian_noise:
        raise ValueError("infinite kappa has no three-mode form; use MarkovFactor")
    c2, c1, c0 = denominator_coeffs(params)
    roots = cubic_roots(c2, c1, c0)
    scale = max(float(np.max(np.abs(roots))), np.finfo(float).tiny)
    gaps = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
    degenerate = min(gaps) < DEGENERACY_TOL * scale
    if not degenerate:
        dprime = 3.0 * roots**2 + 2.0 * c2 * roots + c1
        residues = numerator(params, roots) / dprime
        degenerate = not np.sum(np.abs(residues)) < RESIDUE_GROWTH_LIMIT
    if degenerate:
        residues = np.full(3, np.nan + 0j)
    return ModeDecomposition(params, roots, residues, bool(degenerate))


def evaluate_F(modes: ModeDecomposition, t):
    return modes.F(t)


def evaluate_dF(modes: ModeDecomposition, t):
    return modes.dF(t)


def shift_and_rate(F, dF):
    """Frequency shift s = -Im(F'/F) and decoherence rate gamma = -Re(F'/F).

    Returns (s, gamma, near_zero). Where |F| <= ZERO_TOL both are set to
    signed infinities and ``near_zero`` is True.
    """
    F = np.asarray(F, dtype=complex)
    dF = np.asarray(dF, dtype=complex)
    near_zero = np.abs(F) <= ZERO_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(near_zero, dF, dF / np.where(near_zero, 1.0, F))
    s = -ratio.imag
    gamma = -ratio.real
    if np.any(near_zero):
        s = np.where(near_zero, np.copysign(np.inf, s), s)
        gamma = np.where(near_zero, np.copysign(np.inf, gamma), gamma)
    return s, gamma, near_zero


def _wrap(x):
    """Reduce to (-pi, pi]."""
    y = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def unwrap_phase(F, near_zero=None, real_tol: float = 1e-10, jump_tol: float = 1e-6):
    """Continuous argument of a sampled decoherence factor, starting at 0.

    Neighbour increments of arg F are reduced to (-pi, pi]. An increment
    within ``jump_tol`` of +-pi is only accepted where F is real at both ends
    (a sign change through zero); the jump is then +pi when F goes from
    positive to negative and -pi on the way back, so a real F keeps its
    phase in {0, pi}. Samples flagged ``near_zero`` hold the previous phase.
    Any other increment that close to pi raises UndersampledPhaseError.
    """
    F = np.asarray(F, dtype=complex)
    n = F.size
    if near_zero is None:
        near_zero = np.abs(F) <= ZERO_TOL
    phi = np.zeros(n)
    raw = np.angle(F)
    last = None  # index of the last unflagged sample
    if n and not near_zero[0]:
        last = 0
    acc = 0.0
    for i in range(1, n):
        if near_zero[i]:
            phi[i] = phi[i - 1]
            continue
        if last is None:
            last = i
            phi[i] = phi[i - 1]
            acc = phi[i]
            continue
        d = float(_wrap(raw[i] - raw[last]))
        if abs(abs(d) - math.pi) < jump_tol:
            if abs(F[i].imag) <= real_tol and abs(F[last].imag) <= real_tol:
                d = math.pi if F[last].real > 0 else -math.pi
            elif last == i - 1:
                raise UndersampledPhaseError(last, d)
        acc += d
        phi[i] = acc
        last = i
    return phi


@dataclass(frozen=True)
class CoherenceSeries:
    """Decoherence factor and derived scalars sampled on a time grid."""

    t: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    absF: np.ndarray
    phi: np.ndarray
    s: np.ndarray
    gamma: np.ndarray
    near_zero: np.ndarray

    def __len__(self):
        return self.t.size


def coherence_series(factor, grid: TimeGrid) -> CoherenceSeries:
    t = grid.samples
    F = np.asarray(factor.F(t), dtype=complex)
    dF = np.asarray(factor.dF(t), dtype=complex)
    s, gamma, near_zero = shift_and_rate(F, dF)
    phi = unwrap_phase(F, near_zero)
    return CoherenceSeries(t, F, dF, np.abs(F), phi, s, gamma, near_zero)


def locate_zeros(factor, t, tol: float = 1e-8) -> np.ndarray:
    """Times in (t[0], t[-1]) where |F| dips below ``tol``.

    Only intervals across which arg F turns by more than pi/2 are searched;
    a zero between two samples forces such a turn unless F stays tiny over
    the whole interval.
    """
    from scipy.optimize import minimize_scalar

    t = np.asarray(t, dtype=float)
    F = np.asarray(factor.F(t), dtype=complex)
    turn = np.abs(_wrap(np.diff(np.angle(F))))
    zeros = []
    for i in np.flatnonzero(turn > math.pi / 2):
        res = minimize_scalar(
            lambda x: abs(complex(factor.F(x))),
            bounds=(t[i], t[i + 1]),
            method="bounded",
            options={"xatol": 1e-13 * max(1.0, t[i + 1])},
        )
        if res.fun < tol and t[0] < res.x < t[-1]:
            zeros.append(float(res.x))
    return np.array(zeros)


def make_factor(params: NoiseParams, t_max: Optional[float] = None):
    """Pick the evaluation route for F(t).

    Mode sum when the roots are well separated, the closed-form factor for
    memoryless noise, and the ODE integrator for degenerate roots (which
    needs ``t_max``).
    """
    from .oracles import MarkovFactor, OdeFactor

    if params.markovian_noise:
        return MarkovFactor(params)
    modes = decompose(params)
    if not modes.degenerate:
        return modes
    if t_max is None:
        raise DegenerateModesError("degenerate roots; t_max needed for the ODE route")
    return OdeFactor(params, t_max)
