"""Geometric phases of the dephasing evolution.

For a pure initial state at polar angle theta the phase splits into the
Pancharatnam relative phase (argument of the overlap with the initial
state) and the effective phase accumulated along the dominant eigenvector,

    Phi_e(t) = int_0^t (omega0 - s) cos^2 theta_+ dtau,

and Phi_e further into its unitary value omega0 t cos^2(theta/2) plus a
noise correction. Mixed initial states use the eigenvalue-weighted sum over
both eigenvectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoherence import ZERO_TOL, locate_zeros
from .dynamics import bloch_vectors, spectral
from .model import SystemConfig, TimeGrid
from .quadrature import cumulative_adaptive_simpson

QUAD_TOL = 1e-9
OVERLAP_TOL = 1e-12


@dataclass(frozen=True)
class PhaseBreakdown:
    t: np.ndarray
    Phi_g: np.ndarray  # Phi_P + Phi_e, continuous through Phi_e
    Phi_g_principal: np.ndarray  # Phi_g reduced to (-pi, pi]
    Phi_P: np.ndarray
    Phi_e: np.ndarray
    Phi_e_U: np.ndarray
    delta_Phi_e: np.ndarray
    undefined: np.ndarray  # overlap with the initial state vanished


@dataclass(frozen=True)
class MixedPhaseTerms:
    r_plus: np.ndarray
    r_minus: np.ndarray
    varphi_plus: np.ndarray
    varphi_minus: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray


@dataclass(frozen=True)
class MixedPhase:
    t: np.ndarray
    Phi_g: np.ndarray  # principal value
    Phi_g_branch: np.ndarray  # continuity-accumulated
    terms: MixedPhaseTerms
    undefined: np.ndarray


def wrap_angle(x):
    y = np.mod(np.asarray(x) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def accumulate_branch(principal) -> np.ndarray:
    """Continuous branch of a sampled angle, keeping the first value."""
    p = np.asarray(principal, dtype=float)
    out = p.copy()
    ok = np.isfinite(p)
    idx = np.flatnonzero(ok)
    if idx.size:
        steps = wrap_angle(np.diff(p[idx]))
        out[idx] = p[idx[0]] + np.concatenate([[0.0], np.cumsum(steps)])
    return out


def _eigen_angle(theta, absF):
    """(cos theta_+, sin theta_+) for a pure initial state, cancellation-free."""
    st, ct = math.sin(theta), math.cos(theta)
    perp = st * np.asarray(absF, dtype=float)
    rn = np.sqrt(perp * perp + ct * ct)
    with np.errstate(divide="ignore", invalid="ignore"):
        if ct > 0:
            q = perp / (rn + ct)
            norm = 1.0 / np.sqrt(1.0 + q * q)
            return norm, q * norm
        q = np.where(perp > 0, perp / (rn - ct), 0.0)
        norm = 1.0 / np.sqrt(1.0 + q * q)
        return q * norm, norm


def _shift(factor, tau):
    F = factor.F(tau)
    dF = factor.dF(tau)
    absF = np.abs(F)
    small = absF <= ZERO_TOL
    s = -(dF / np.where(small, 1.0, F)).imag
    return s, absF, small


def pancharatnam_phase(config: SystemConfig, coherence):
    """Argument of <Psi(0)|Psi(t)> for the pure initial state.

    Returns (Phi_P, undefined) where ``undefined`` marks samples whose overlap
    is below OVERLAP_TOL (Phi_P is NaN there).
    """
    theta = config.polar_angle
    t, F = coherence.t, coherence.F
    absF = np.abs(F)
    cos_p, sin_p = _eigen_angle(theta, absF)
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = np.where(absF > 0, np.conj(F) / np.where(absF > 0, absF, 1.0), 1.0)
    overlap = (math.cos(theta / 2) * cos_p * unit * np.exp(-1j * config.omega0 * t)
               + math.sin(theta / 2) * sin_p)
    undefined = np.abs(overlap) < OVERLAP_TOL
    phase = np.where(undefined, np.nan, np.arctan2(overlap.imag, overlap.real))
    return phase, undefined


def effective_phase(factor, config: SystemConfig, grid: TimeGrid, tol: float = QUAD_TOL):
    """Phi_e on the grid by adaptive Simpson between samples.

    Panels are split at zeros of F; the integrand is set to zero wherever
    |F| <= ZERO_TOL. Returns (Phi_e, zero_times).
    """
    theta = config.polar_angle
    w0 = config.omega0

    def integrand(tau):
        s, absF, small = _shift(factor, tau)
        cos_p, _ = _eigen_angle(theta, absF)
        return np.where(small, 0.0, (w0 - s) * cos_p * cos_p)

    t = grid.samples
    zeros = locate_zeros(factor, t)
    nodes = np.union1d(t, zeros)
    res = cumulative_adaptive_simpson(integrand, nodes, tol=tol)
    return res.cumulative[np.searchsorted(nodes, t)], zeros


def total_phase_pure(factor, config: SystemConfig, grid: TimeGrid, coherence=None) -> PhaseBreakdown:
    from .decoherence import coherence_series

    if coherence is None:
        coherence = coherence_series(factor, grid)
    phi_p, undefined = pancharatnam_phase(config, coherence)
    phi_e, _ = effective_phase(factor, config, grid)
    phi_u = config.omega0 * grid.samples * math.cos(config.polar_angle / 2) ** 2
    phi_g = phi_p + phi_e
    return PhaseBreakdown(
        t=grid.samples,
        Phi_g=phi_g,
        Phi_g_principal=wrap_angle(phi_g),
        Phi_P=phi_p,
        Phi_e=phi_e,
        Phi_e_U=phi_u,
        delta_Phi_e=phi_e - phi_u,
        undefined=undefined,
    )


def total_phase_mixed(factor, config: SystemConfig, grid: TimeGrid, tol: float = QUAD_TOL) -> MixedPhase:
    """Geometric phase for an arbitrary initial Bloch vector.

    Each eigenvector contributes sqrt(eps(0) eps(t)) <Psi(0)|Psi(t)> e^{i psi},
    psi being its parallel-transport phase int (omega0 - s) |C_e|^2 dtau in
    the gauge where C_e follows the transverse Bloch phase. When the initial
    vector lies on the z axis the eigenvectors are constant basis states and
    both psi vanish.
    """
    r0 = config.initial_bloch
    w0 = config.omega0
    t = grid.samples
    moving = math.hypot(r0[0], r0[1]) > 0

    def integrand_for(sign):
        def integrand(tau):
            if not moving:
                return np.zeros_like(tau)
            s, _, small = _shift(factor, tau)
            sp = spectral(bloch_vectors(factor, r0, w0, tau))
            ce = sp.C_plus_e if sign > 0 else sp.C_minus_e
            return np.where(small, 0.0, (w0 - s) * np.abs(ce) ** 2)
        return integrand

    zeros = locate_zeros(factor, t) if moving else np.zeros(0)
    nodes = np.union1d(t, zeros)
    pick = np.searchsorted(nodes, t)
    psi_p = cumulative_adaptive_simpson(integrand_for(+1), nodes, tol=tol).cumulative[pick]
    psi_m = cumulative_adaptive_simpson(integrand_for(-1), nodes, tol=tol).cumulative[pick]

    sp0 = spectral(r0)
    sp = spectral(bloch_vectors(factor, r0, w0, t))
    ov_p = np.conj(sp0.C_plus_e) * sp.C_plus_e + sp0.C_plus_g * sp.C_plus_g
    ov_m = np.conj(sp0.C_minus_e) * sp.C_minus_e + sp0.C_minus_g * sp.C_minus_g
    amp_p = np.sqrt(sp0.eps_plus * sp.eps_plus)
    amp_m = np.sqrt(np.maximum(sp0.eps_minus * sp.eps_minus, 0.0))
    total = amp_p * ov_p * np.exp(1j * psi_p) + amp_m * ov_m * np.exp(1j * psi_m)

    r_plus, r_minus = amp_p * np.abs(ov_p), amp_m * np.abs(ov_m)
    undefined = (r_plus < OVERLAP_TOL) & (r_minus < OVERLAP_TOL)
    phi_g = np.where(undefined, np.nan, np.angle(total))
    terms = MixedPhaseTerms(
        r_plus=r_plus,
        r_minus=r_minus,
        varphi_plus=np.angle(ov_p),
        varphi_minus=np.angle(ov_m),
        psi_plus=psi_p,
        psi_minus=psi_m,
    )
    return MixedPhase(t, phi_g, accumulate_branch(phi_g), terms, undefined)
