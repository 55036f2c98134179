"""Bloch-vector evolution under the time-local dephasing master equation.

With rho = (I + r.sigma)/2 the master equation reduces to

    dr_x/dt = -gamma r_x - (omega0 - s) r_y
    dr_y/dt = (omega0 - s) r_x - gamma r_y
    dr_z/dt = 0

whose solution is r_x + i r_y = (r_x(0) + i r_y(0)) exp(i omega0 t) F(t).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .decoherence import CoherenceSeries, coherence_series, locate_zeros
from .model import SystemConfig, TimeGrid

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
# below this |F| the (r_x, r_y) equations are integrated at the coherence level
ODE_SWITCH_ABSF = 1e-3


@dataclass(frozen=True)
class BlochState:
    r_x: float
    r_y: float
    r_z: float
    t: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.r_x, self.r_y, self.r_z])


@dataclass(frozen=True)
class SpectralState:
    """Eigen-decomposition of rho = (I + r.sigma)/2, vectorized over samples.

    Eigenvectors follow the gauge |Psi_+-> = C_+-e |e> + C_+-g |g> with
    C_+-e proportional to r_x - i r_y and C_+-g real.
    """

    eps_plus: np.ndarray
    eps_minus: np.ndarray
    C_plus_e: np.ndarray
    C_plus_g: np.ndarray
    C_minus_e: np.ndarray
    C_minus_g: np.ndarray
    theta_plus: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    r: np.ndarray  # (n, 3)
    coherence: CoherenceSeries
    spectral: SpectralState
    length: np.ndarray
    method: str

    def state(self, i: int) -> BlochState:
        return BlochState(*self.r[i], t=float(self.t[i]))


def spectral(r) -> SpectralState:
    """Eigenvalues and eigenvectors of the qubit state with Bloch vector ``r``.

    ``r`` is a BlochState, a 3-vector or an (n, 3) array. The eigenvector
    formulas are rewritten without the cancellation in |r| -/+ r_z; on the
    z axis they reduce to basis states.
    """
    if isinstance(r, BlochState):
        r = r.vector
    r = np.asarray(r, dtype=float)
    rx, ry, rz = r[..., 0], r[..., 1], r[..., 2]
    rp = np.hypot(rx, ry)
    rn = np.sqrt(rp * rp + rz * rz)
    on_axis = rp == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        # unit transverse direction, scaled first so subnormal inputs keep precision
        big = np.where(on_axis, 1.0, np.maximum(np.abs(rx), np.abs(ry)))
        ux, uy = rx / big, ry / big
        un = np.hypot(ux, uy)
        u = np.where(on_axis, 1.0 + 0j, (ux - 1j * uy) / un)
        north = rz >= 0
        denom = np.where(north, rn + rz, rn - rz)
        q = np.where(on_axis, 0.0, rp / np.where(denom == 0, 1.0, denom))
    norm = 1.0 / np.sqrt(1.0 + q * q)
    cpe = np.where(north, u, u * q) * norm
    cpg = np.where(north, q, 1.0) * norm
    cme = np.where(north, u * q, u) * norm
    cmg = np.where(north, -1.0, -q) * norm
    return SpectralState(
        eps_plus=0.5 * (1.0 + rn),
        eps_minus=0.5 * (1.0 - rn),
        C_plus_e=cpe,
        C_plus_g=cpg,
        C_minus_e=cme,
        C_minus_g=cmg,
        theta_plus=np.arctan2(cpg, np.abs(cpe)),
    )


def bloch_vectors(factor, r0, omega0: float, t) -> np.ndarray:
    """Analytic Bloch vectors at times ``t`` (shape (len(t), 3))."""
    t = np.asarray(t, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    perp = complex(r0[0], r0[1]) * np.exp(1j * omega0 * t) * factor.F(t)
    return np.stack([perp.real, perp.imag, np.full(t.shape, r0[2])], axis=-1)


def _trajectory(factor, grid, r, method):
    return Trajectory(
        t=grid.samples,
        r=r,
        coherence=coherence_series(factor, grid),
        spectral=spectral(r),
        length=path_length(r),
        method=method,
    )


def evolve_analytic(factor, config: SystemConfig, grid: TimeGrid) -> Trajectory:
    r = bloch_vectors(factor, config.initial_bloch, config.omega0, grid.samples)
    return _trajectory(factor, grid, r, "analytic")


def evolve_ode(factor, config: SystemConfig, grid: TimeGrid) -> Trajectory:
    """Integrate the Bloch equations numerically.

    The shift and rate diverge where F vanishes; if F gets close to zero on
    the grid the transverse part is instead obtained from the coherence
    itself, r_perp(t) = r_perp(0) exp(i omega0 t) F(t), with F integrated
    from its own linear ODE.
    """
    from .oracles import IntegrationError, ode_F

    t = grid.samples
    r0 = config.initial_bloch
    w0 = config.omega0
    absF = np.abs(factor.F(t))
    if absF.min() < ODE_SWITCH_ABSF or locate_zeros(factor, t).size:
        F = ode_F(factor.params, grid, rtol=ODE_RTOL * 1e-1, atol=ODE_ATOL)
        perp = complex(r0[0], r0[1]) * np.exp(1j * w0 * t) * F
        r = np.stack([perp.real, perp.imag, np.full(t.shape, r0[2])], axis=-1)
        return _trajectory(factor, grid, r, "coherence-ode")

    def rhs(tau, y):
        ratio = complex(factor.dF(tau)) / complex(factor.F(tau))
        gamma, s = -ratio.real, -ratio.imag
        w = w0 - s
        return [-gamma * y[0] - w * y[1], w * y[0] - gamma * y[1], 0.0]

    sol = solve_ivp(rhs, (0.0, grid.t_max), r0, method="DOP853", t_eval=t,
                    rtol=ODE_RTOL, atol=ODE_ATOL)
    if not sol.success:
        raise IntegrationError(f"Bloch integration failed: {sol.message}")
    return _trajectory(factor, grid, sol.y.T.copy(), "bloch-ode")


def path_length(r) -> np.ndarray:
    """Cumulative Euclidean arc length of a uniformly sampled Bloch path.

    Chord sums at spacing h and 2h are combined by one Richardson step,
    (4 L_h - L_2h) / 3, on each pair of steps; odd samples get the pair's
    increment split in proportion to their chords. Nondecreasing by the
    triangle inequality.
    """
    if isinstance(r, Trajectory):
        r = r.r
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    L = np.zeros(n)
    if n < 2:
        return L
    chords = np.linalg.norm(np.diff(r, axis=0), axis=1)
    npair = (n - 1) // 2
    c1, c2 = chords[0:2 * npair:2], chords[1:2 * npair:2]
    long = np.linalg.norm(r[2:2 * npair + 1:2] - r[0:2 * npair - 1:2], axis=1) if npair else np.zeros(0)
    pair_sum = c1 + c2
    inc = (4.0 * pair_sum - long) / 3.0
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(pair_sum > 0, inc / np.where(pair_sum > 0, pair_sum, 1.0), 1.0)
    even = np.concatenate([[0.0], np.cumsum(inc)])
    L[0:2 * npair + 1:2] = even
    L[1:2 * npair:2] = even[:-1] + c1 * scale
    if (n - 1) % 2:
        last_scale = scale[-1] if npair else 1.0
        L[-1] = L[-2] + chords[-1] * last_scale
    return L
