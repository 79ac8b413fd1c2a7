"""Bellman operator and fixed point on the full (q0, l1, q1, l2) state space.

This is the unreduced formulation: one sweep takes, for every state, the
holding cost plus the discounted expectation over the four events, where
after each event the controller applies the best single admissible action
to the post-event state (the minimization decomposes per event because each
control acts on its own post-event state).

It exists as an independent route to the same fixed point as the collapsed
solver: values must agree under (q0, l1, q1, l2) -> (q0 + l1, q1, l2) on
interior states where the processing server is kept busy.  To make the two
truncations line up exactly, arrivals are blocked once q0 + l1 reaches the
cap (not just q0), and processing hand-offs are blocked at the q1 cap.

Arrays are indexed [q0, l1, q1, l2] with q0 in 0..x_max, so the collapsed
image x = q0 + l1 spans 0..x_max+1; the l1 = 1 slab at q0 = x_max sits
outside the matched region and is ignored by comparisons.
"""

from __future__ import annotations

import numpy as np

from .model import RateParams
from .solver import NoConvergence, TruncationBox


def _cost_array_4d(box: TruncationBox) -> np.ndarray:
    q0 = np.arange(box.x_max + 1, dtype=np.float64)[:, None, None, None]
    l1 = np.arange(2, dtype=np.float64)[None, :, None, None]
    q1 = np.arange(box.q1_max + 1, dtype=np.float64)[None, None, :, None]
    l2 = np.arange(2, dtype=np.float64)[None, None, None, :]
    return q0 + l1 + q1 + l2


def _best_action_values(v: np.ndarray) -> np.ndarray:
    """W(s) = min over admissible actions a of v(a(s)), via shifted slices."""
    w = v.copy()
    # schedule onto idle processing server: (q0,0,*,*) -> (q0-1,1,*,*)
    np.minimum(w[1:, 0], v[:-1, 1], out=w[1:, 0])
    # schedule onto idle sub-6: (q0,*,*,0) -> (q0-1,*,*,1)
    np.minimum(w[1:, :, :, 0], v[:-1, :, :, 1], out=w[1:, :, :, 0])
    # schedule both: (q0,0,*,0) -> (q0-2,1,*,1)
    np.minimum(w[2:, 0, :, 0], v[:-2, 1, :, 1], out=w[2:, 0, :, 0])
    # renege from processing: (q0,1,*,0) -> (q0,0,*,1)
    np.minimum(w[:, 1, :, 0], v[:, 0, :, 1], out=w[:, 1, :, 0])
    # renege from mmWave queue: (q0,*,q1,0) -> (q0,*,q1-1,1)
    np.minimum(w[:, :, 1:, 0], v[:, :, :-1, 1], out=w[:, :, 1:, 0])
    return w


def bellman_operator_4d(v: np.ndarray, p: RateParams, box: TruncationBox) -> np.ndarray:
    """One application of the operator; (L 0)(q) = q0+l1+q1+l2 on the zero function."""
    p.require_uniformized()
    if v.shape != (box.x_max + 1, 2, box.q1_max + 1, 2):
        raise ValueError(f"values shape {v.shape} does not match box {box}")
    w = _best_action_values(v)

    # arrival: q0+1, blocked where the collapsed coordinate q0+l1 hits the cap
    e_arr = np.empty_like(w)
    e_arr[:-1] = w[1:]
    e_arr[-1] = w[-1]
    e_arr[box.x_max - 1, 1] = w[box.x_max - 1, 1]

    # processing hand-off: (q0,1,q1,l2) -> (q0,0,q1+1,l2), blocked at the q1
    # cap; dummy on an idle processing server
    e_proc = np.empty_like(w)
    e_proc[:, 0] = w[:, 0]
    e_proc[:, 1, :-1] = w[:, 0, 1:]
    e_proc[:, 1, -1] = w[:, 1, -1]

    # mmWave departure: (q1-1)+
    e_mm = np.empty_like(w)
    e_mm[:, :, 0] = w[:, :, 0]
    e_mm[:, :, 1:] = w[:, :, :-1]

    # sub-6 departure: l2 -> 0
    e_sub = w[:, :, :, 0:1]

    cost = _cost_array_4d(box)
    return cost + p.beta * (
        p.lam * e_arr + p.mu_p * e_proc + p.mm_effective * e_mm + p.mu_sub6 * e_sub
    )


def solve_discounted_4d(
    p: RateParams,
    box: TruncationBox,
    tol: float = 1e-9,
    max_iter: int = 1_000_000,
) -> tuple[np.ndarray, int, float]:
    """Fixed point by repeated application, started from the cost function."""
    p.require_uniformized()
    v = _cost_array_4d(box)
    for n in range(1, max_iter + 1):
        new = bellman_operator_4d(v, p, box)
        diff = float(np.max(np.abs(new - v)))
        v = new
        if diff < tol:
            return v, n, diff
    raise NoConvergence(
        f"4-D sweep still moving by {diff:.3e} >= tol {tol:.3e} after {max_iter} sweeps"
    )


def collapse_gap(v4: np.ndarray, v3: np.ndarray, box: TruncationBox, band: int = 2) -> float:
    """Max |v4 - v3| over interior states under the collapse map.

    Collapsed x >= 1 corresponds to (q0 = x-1, l1 = 1) (processing server
    busy whenever fast-path work exists); x = 0 to (0, 0).  A band of width
    `band` near the caps is excluded on both coordinates.

    The two truncations are not the same optimization problem at the caps:
    the full representation may renege from the mmWave queue while fast-path
    work remains, which the collapsed recursion cannot express, and near the
    q1 cap that extra move genuinely wins.  The resulting disagreement decays
    geometrically moving away from the caps (one lattice step per sweep,
    shrunk by beta times the largest event rate), so agreement claims should
    use a band wide enough for (beta * max rate)^band to be negligible, not
    the default cosmetic 2.
    """
    xi = box.x_max - band
    qi = box.q1_max - band
    worst = 0.0
    for x in range(xi + 1):
        v4_slice = v4[0, 0] if x == 0 else v4[x - 1, 1]
        gap = np.abs(v4_slice[: qi + 1, :] - v3[x, : qi + 1, :]).max()
        worst = max(worst, float(gap))
    return worst
