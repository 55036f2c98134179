"""Adaptive Simpson quadrature vectorized over many panels at once."""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class QuadratureResult(NamedTuple):
    cumulative: np.ndarray  # integral from nodes[0] to each node
    n_evals: int
    unconverged: int  # panels that hit max_depth


def cumulative_adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    nodes: np.ndarray,
    tol: float = 1e-9,
    max_depth: int = 40,
) -> QuadratureResult:
    """Integrate ``f`` over every [nodes[i], nodes[i+1]] and accumulate.

    ``f`` must accept an array of abscissae and return values of the same
    shape. Each initial panel is refined independently until the Simpson
    error estimate is below ``tol`` (halved on every split), all panels of
    one refinement level being evaluated in a single call.
    """
    nodes = np.asarray(nodes, dtype=float)
    a = nodes[:-1].copy()
    b = nodes[1:].copy()
    owner = np.arange(a.size)
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    n_evals = 3 * a.size
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    ptol = np.full(a.size, float(tol))
    depth = 0
    totals = np.zeros(a.size)
    unconverged = 0

    while a.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        n_evals += 2 * a.size
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * ptol
        if depth >= max_depth:
            unconverged += int(np.count_nonzero(~done))
            done[:] = True
        np.add.at(totals, owner[done], (left + right + err / 15.0)[done])

        keep = ~done
        if not keep.any():
            break
        # children: [a, m] and [m, b]
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        flm, frm = flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        owner, ptol = owner[keep], ptol[keep] / 2.0
        a, m, b, fa, fm, fb, whole = (
            np.concatenate([a, m]),
            np.concatenate([lm[keep], rm[keep]]),
            np.concatenate([m, b]),
            np.concatenate([fa, fm]),
            np.concatenate([flm, frm]),
            np.concatenate([fm, fb]),
            np.concatenate([left, right]),
        )
        owner = np.concatenate([owner, owner])
        ptol = np.concatenate([ptol, ptol])
        depth += 1

    cumulative = np.concatenate([[0.0], np.cumsum(totals)])
    return QuadratureResult(cumulative, n_evals, unconverged)
