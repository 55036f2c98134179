"""Independent routes to the decoherence factor.

* ``OdeFactor`` / ``ode_F``: integrate the constant-coefficient ODE whose
  characteristic polynomial is the denominator of F(p), started from
  F(0) = 1, F'(0) = i a nu, F''(0) = -nu^2 (the large-p expansion of F(p)).
* ``MarkovFactor`` / ``closed_form_markov_F``: the kappa -> infinity limit,
  F'' + 2 lambda F' + nu^2 F = 0.
* ``mc_F``: average of exp(+i int xi dt) over sampled telegraph paths with
  memoryless switching.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .model import NoiseParams, ParameterError, TimeGrid, uniform_grid


class IntegrationError(RuntimeError):
    pass


def ode_initial_data(params: NoiseParams) -> np.ndarray:
    return np.array([1.0, 1j * params.a * params.nu, -params.nu**2], dtype=complex)


def _ode_rhs(params: NoiseParams):
    """Right-hand side on the real 6-vector (Re F, Re F', Re F'', Im ...).

    The coefficients are real, so real and imaginary parts decouple; this
    keeps implicit solvers (which reject complex states) usable.
    """
    k, l, v = params.kappa, params.lam, params.nu
    c1, c0 = 2.0 * k * l + v * v, k * v * v
    block = np.array([[0, 1, 0], [0, 0, 1], [-c0, -c1, -k]], dtype=float)
    jac = np.kron(np.eye(2), block)

    def rhs(t, y):
        return jac @ y

    return rhs, jac


def _ode_method(params: NoiseParams, t_max: float) -> str:
    # the -kappa mode makes explicit stepping hopeless for large kappa * t
    return "Radau" if params.kappa * t_max > 1e4 else "DOP853"


def _solve(params, t_max, t_eval=None, rtol=1e-10, atol=1e-12):
    if params.markovian_noise:
        raise ValueError("ODE route needs finite kappa")
    rhs, jac = _ode_rhs(params)
    method = _ode_method(params, t_max)
    kwargs = dict(jac=jac) if method == "Radau" else {}
    y0 = ode_initial_data(params)
    sol = solve_ivp(
        rhs, (0.0, t_max), np.concatenate([y0.real, y0.imag]), method=method,
        t_eval=t_eval, dense_output=t_eval is None, rtol=rtol, atol=atol, **kwargs,
    )
    if not sol.success:
        raise IntegrationError(f"F(t) integration failed: {sol.message}")
    return sol


def _as_complex(y):
    return y[:3] + 1j * y[3:]


def ode_F(params: NoiseParams, grid: TimeGrid, rtol=1e-10, atol=1e-12) -> np.ndarray:
    """F(t) on ``grid`` by direct integration of the third-order ODE.

    For infinite kappa the second-order memoryless equation is integrated
    instead.
    """
    if params.markovian_noise:
        l, v = params.lam, params.nu
        sol = solve_ivp(
            lambda t, y: np.array([y[1], -2.0 * l * y[1] - v * v * y[0]]),
            (0.0, grid.t_max), ode_initial_data(params)[:2], method="DOP853",
            t_eval=grid.samples, rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise IntegrationError(f"F(t) integration failed: {sol.message}")
        return sol.y[0]
    sol = _solve(params, grid.t_max, t_eval=grid.samples, rtol=rtol, atol=atol)
    return _as_complex(sol.y)[0]


class OdeFactor:
    """F and F' from a dense ODE solution on [0, t_max]."""

    def __init__(self, params: NoiseParams, t_max: float, rtol=1e-10, atol=1e-12):
        self.params = params
        self.t_max = float(t_max)
        self._sol = _solve(params, self.t_max, rtol=rtol, atol=atol).sol

    def _eval(self, t, row):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.t_max * (1 + 1e-12)) or np.any(t < 0):
            raise ValueError(f"OdeFactor only covers [0, {self.t_max}]")
        out = _as_complex(self._sol(t.ravel()))[row]
        return out.reshape(t.shape)

    def F(self, t):
        return self._eval(t, 0)

    def dF(self, t):
        return self._eval(t, 1)


class MarkovFactor:
    """Closed-form factor for memoryless telegraph noise (any ``a``).

    F(t) = exp(-l t) [cosh(W t) + (l + i a v) sinh(W t) / W],  W = sqrt(l^2 - v^2),
    evaluated as a two-mode sum so that large l t does not overflow.
    """

    def __init__(self, params: NoiseParams):
        self.params = params
        l, v, a = params.lam, params.nu, params.a
        self._c = complex(l, a * v)
        self._omega = np.sqrt(complex(l * l - v * v))
        self._confluent = abs(self._omega) <= 1e-8 * max(l, v, 1e-300)
        if not self._confluent:
            w = self._omega
            self.roots = np.array([w - l, -w - l])
            self.residues = np.array([0.5 * (1 + self._c / w), 0.5 * (1 - self._c / w)])

    def F(self, t):
        t = np.asarray(t, dtype=float)
        if self._confluent:
            return np.exp(-self.params.lam * t) * (1 + self._c * t)
        return (self.residues * np.exp(np.multiply.outer(t, self.roots))).sum(axis=-1)

    def dF(self, t):
        t = np.asarray(t, dtype=float)
        l = self.params.lam
        if self._confluent:
            return np.exp(-l * t) * (self._c - l - l * self._c * t)
        w = self.residues * self.roots
        return (w * np.exp(np.multiply.outer(t, self.roots))).sum(axis=-1)


def closed_form_markov_F(params: NoiseParams, t):
    """Memoryless-noise decoherence factor; real-valued when ``a == 0``.

    ``params.kappa`` is ignored.
    """
    F = MarkovFactor(params).F(t)
    return F.real if params.a == 0 else F


@dataclass(frozen=True)
class McConfig:
    n_traj: int = 100_000
    seed: int = 0
    dt: Optional[float] = None  # output spacing when no grid is given
    chunk_size: int = 2000
    workers: int = 1

    def __post_init__(self):
        if self.n_traj < 1:
            raise ParameterError("n_traj", "need at least one trajectory")
        if self.chunk_size < 1:
            raise ParameterError("chunk_size", "must be positive")


class McEstimate(NamedTuple):
    t: np.ndarray
    F: np.ndarray
    stderr: np.ndarray  # sqrt((Var Re + Var Im) / n)
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    n_traj: int


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _telegraph_chunk(args):
    nu, lam, a, t, seed, index, n = args
    rng = _chunk_rng(seed, index)
    t_max = float(t[-1])
    sign0 = np.where(rng.random(n) < 0.5 * (1.0 + a), 1.0, -1.0)

    if lam > 0:
        k = int(lam * t_max + 6.0 * math.sqrt(lam * t_max) + 10)
        tau = np.cumsum(rng.exponential(1.0 / lam, size=(n, k)), axis=1)
        while tau[:, -1].min() <= t_max:
            more = np.cumsum(rng.exponential(1.0 / lam, size=(n, k)), axis=1)
            tau = np.hstack([tau, tau[:, -1:] + more])
        nodes = np.hstack([np.zeros((n, 1)), np.minimum(tau, t_max + 0.5)])
    else:
        nodes = np.zeros((n, 1))

    K = nodes.shape[1]
    seg_sign = sign0[:, None] * np.where(np.arange(K) % 2 == 0, 1.0, -1.0)
    theta_nodes = np.zeros_like(nodes)
    theta_nodes[:, 1:] = np.cumsum(nu * seg_sign[:, :-1] * np.diff(nodes, axis=1), axis=1)

    # row-wise searchsorted on one flattened, offset array
    span = t_max + 1.0
    offs = np.arange(n)[:, None] * span
    flat = (nodes + offs).ravel()
    q = (t[None, :] + offs).ravel()
    pos = np.searchsorted(flat, q, side="right").reshape(n, t.size) - 1
    rows = np.arange(n)[:, None]
    k_idx = pos - rows * K
    theta = theta_nodes[rows, k_idx] + nu * seg_sign[rows, k_idx] * (t[None, :] - nodes[rows, k_idx])

    c, s = np.cos(theta), np.sin(theta)
    mc, ms = c.mean(0), s.mean(0)
    return n, mc, ms, ((c - mc) ** 2).sum(0), ((s - ms) ** 2).sum(0)


def mc_F(params: NoiseParams, mc: McConfig, grid: Optional[TimeGrid] = None,
         t_max: Optional[float] = None) -> McEstimate:
    """Monte Carlo estimate of F(t) for memoryless telegraph noise.

    Initial noise value +nu with probability (1 + a)/2. Each state flips at
    rate lambda; the accumulated phase is integrated exactly between jumps.
    Chunks draw from independent counter-keyed streams and are reduced in
    chunk order, so the estimate does not depend on ``mc.workers``.
    """
    if grid is None:
        if mc.dt is None or t_max is None:
            raise ParameterError("grid", "give a grid or both mc.dt and t_max")
        grid = uniform_grid(t_max, int(round(t_max / mc.dt)) + 1)
    t = np.asarray(grid.samples, dtype=float)
    rate = max(params.lam, params.nu)
    if rate > 0 and grid.step > 0.01 / rate * (1 + 1e-9):
        raise ParameterError("dt", f"output spacing {grid.step} exceeds 0.01/max(lambda, nu)")

    sizes = [mc.chunk_size] * (mc.n_traj // mc.chunk_size)
    if mc.n_traj % mc.chunk_size:
        sizes.append(mc.n_traj % mc.chunk_size)
    jobs = [(params.nu, params.lam, params.a, t, mc.seed, i, n) for i, n in enumerate(sizes)]
    if mc.workers > 1:
        with ProcessPoolExecutor(mc.workers) as pool:
            parts = list(pool.map(_telegraph_chunk, jobs))
    else:
        parts = [_telegraph_chunk(j) for j in jobs]

    # ordered pairwise combination of chunk means and centred square sums
    n, mean_re, mean_im, m2_re, m2_im = parts[0]
    for nb, re_b, im_b, m2r_b, m2i_b in parts[1:]:
        tot = n + nb
        d_re, d_im = re_b - mean_re, im_b - mean_im
        mean_re = mean_re + d_re * (nb / tot)
        mean_im = mean_im + d_im * (nb / tot)
        m2_re = m2_re + m2r_b + d_re**2 * (n * nb / tot)
        m2_im = m2_im + m2i_b + d_im**2 * (n * nb / tot)
        n = tot
    dof = max(n - 1, 1)
    var_re, var_im = m2_re / dof, m2_im / dof
    return McEstimate(
        t=t,
        F=mean_re + 1j * mean_im,
        stderr=np.sqrt((var_re + var_im) / n),
        stderr_re=np.sqrt(var_re / n),
        stderr_im=np.sqrt(var_im / n),
        n_traj=n,
    )
