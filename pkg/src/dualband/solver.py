"""Discounted-delay value iteration on the collapsed (x, q1, l2) state space.

The recursion advances J via an intermediate "best post-event decision"
value T:

    T(s) = J(s)                                 if s = (0,0,0) or l2 = 1
    T(x,q1,0) = min{J(x,q1,0), J(x-1,q1,1)}     if x >= 1
    T(0,q1,0) = min{J(0,q1,0), J(0,q1-1,1)}     if q1 >= 1

    J'(x,q1,l2) = (x+q1+l2)
                  + beta * [ lam    * T(x+1, q1, l2)
                           + p_a*mu_mm * T(x, (q1-1)+, l2)
                           + mu_sub6   * T(x, q1, 0)
                           + mu_p      * T((x-1)+, x+q1-(x-1)+, l2) ]

with J0(x,q1,l2) = x+q1+l2.  The first T branch is "keep everything on the
fast path" (scheduling onto the idle processing server does not change x, so
holding and scheduling coincide in collapsed coordinates); the second branch
moves one packet to the idle sub-6 server.

Truncation: arrivals at x = x_max and processing hand-offs at q1 = q1_max
are blocked (self-loop, cost still accrues).  This keeps the operator a
contraction; boundary distortion decays geometrically into the interior,
which is why threshold extraction skips a band of width 2 and why results
must be checked for invariance when the box doubles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .model import CollapsedState, RateParams

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_BETAS = (0.9, 0.99, 0.999, 0.9999)

# A hook receives (iteration index, values array) after every sweep,
# index 0 being J0.  The array is live solver state: read, never mutate.
IterateHook = Callable[[int, np.ndarray], None]


class OutOfBox(IndexError):
    """State lies outside the truncation box."""


class NoConvergence(RuntimeError):
    """Sup-norm difference still >= tol after max_iter sweeps."""


class NoStabilization(RuntimeError):
    """Extracted thresholds kept moving across the supplied discount factors."""


@dataclass(frozen=True, slots=True)
class TruncationBox:
    """Box 0..x_max by 0..q1_max; below 4x4 the threshold shape is invisible."""

    x_max: int
    q1_max: int

    def __post_init__(self) -> None:
        if self.x_max < 4 or self.q1_max < 4:
            raise ValueError(f"box must be at least 4x4, got {self.x_max}x{self.q1_max}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.x_max + 1, self.q1_max + 1, 2)

    def contains(self, s: CollapsedState) -> bool:
        return s.x <= self.x_max and s.q1 <= self.q1_max


@dataclass(frozen=True)
class ValueTable:
    """Dense values indexed [x, q1, l2]; treat the array as immutable."""

    box: TruncationBox
    values: np.ndarray
    beta: float
    iteration_count: int = 0


@dataclass(frozen=True)
class PolicyTable:
    """Binary decision at every l2 = 0 state: add to sub-6 or not.

    adding[x, q1] is True where moving a packet to the idle sub-6 server
    strictly improves on keeping everything on the fast path (exact ties
    break toward not adding, so policies are deterministic).
    """

    box: TruncationBox
    adding: np.ndarray
    beta: float


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of reading a threshold out of a policy.

    kind "finite": adding happens exactly where fast-path occupancy
    y = x + q1 exceeds m.  kind "infinite": no interior state adds (the
    box cannot distinguish a huge threshold from none).  kind
    "not-threshold": witness holds ((x_add, q1_add), (x_keep, q1_keep))
    with y_add <= y_keep, i.e. a lower-occupancy state adds while a
    higher-occupancy one does not.

    mismatches: number of interior states disagreeing with the flat
    boundary at m.  Zero from extract_threshold; nearest_threshold returns
    the best flat fit and counts the states it got wrong.
    """

    kind: str
    m: int | None = None
    witness: tuple[tuple[int, int], tuple[int, int]] | None = None
    mismatches: int = 0

    def as_number(self) -> float:
        """Threshold as an ordinary number, +inf for "infinite"."""
        if self.kind == "finite":
            return float(self.m)  # type: ignore[arg-type]
        if self.kind == "infinite":
            return float("inf")
        raise ValueError("no numeric threshold for a not-threshold policy")


class SolveResult(NamedTuple):
    values: ValueTable
    policy: PolicyTable
    iterations: int
    residual: float  # final sup-norm step; ||v - J*||_inf <= residual * beta/(1-beta)


class AverageDelayResult(NamedTuple):
    threshold: ThresholdResult
    trajectory: list[tuple[float, ThresholdResult]]
    solve: SolveResult  # instance solved at the largest beta reached


def _cost_array(box: TruncationBox) -> np.ndarray:
    x = np.arange(box.x_max + 1, dtype=np.float64)[:, None, None]
    q = np.arange(box.q1_max + 1, dtype=np.float64)[None, :, None]
    l2 = np.arange(2, dtype=np.float64)[None, None, :]
    return x + q + l2


def initial_values(box: TruncationBox, beta: float) -> ValueTable:
    """J0(x, q1, l2) = x + q1 + l2."""
    return ValueTable(box, _cost_array(box), beta, 0)


def _intermediate_array(values: np.ndarray) -> np.ndarray:
    """T over the whole box.  Only l2 = 0 states with a packet to move change."""
    t = values.copy()
    t[1:, :, 0] = np.minimum(values[1:, :, 0], values[:-1, :, 1])
    t[0, 1:, 0] = np.minimum(values[0, 1:, 0], values[0, :-1, 1])
    return t


def intermediate_value(v: ValueTable, s: CollapsedState) -> float:
    """Scalar T(s); raises OutOfBox outside the table."""
    if not v.box.contains(s):
        raise OutOfBox(f"{s.astuple()} outside {v.box.x_max}x{v.box.q1_max} box")
    a = v.values
    if s.l2 == 1 or (s.x == 0 and s.q1 == 0):
        return float(a[s.x, s.q1, s.l2])
    if s.x >= 1:
        return min(float(a[s.x, s.q1, 0]), float(a[s.x - 1, s.q1, 1]))
    return min(float(a[0, s.q1, 0]), float(a[0, s.q1 - 1, 1]))


def _step_array(values: np.ndarray, cost: np.ndarray, p: RateParams) -> np.ndarray:
    t = _intermediate_array(values)

    # arrival: x+1, blocked (self-loop) at the x cap
    arr = np.empty_like(t)
    arr[:-1] = t[1:]
    arr[-1] = t[-1]

    # mmWave departure: (q1-1)+, dummy at q1 = 0
    mm = np.empty_like(t)
    mm[:, 0] = t[:, 0]
    mm[:, 1:] = t[:, :-1]

    # processing hand-off: (x, q1) -> (x-1, q1+1) when x >= 1, dummy at x = 0,
    # blocked at the q1 cap
    pr = np.empty_like(t)
    pr[0] = t[0]
    pr[1:, :-1] = t[:-1, 1:]
    pr[1:, -1] = t[1:, -1]

    # sub-6 departure: l2 -> 0, dummy when already 0
    sb = t[:, :, 0:1]

    return cost + p.beta * (
        p.lam * arr + p.mm_effective * mm + p.mu_sub6 * sb + p.mu_p * pr
    )


def value_iteration_step(v: ValueTable, p: RateParams) -> ValueTable:
    """One sweep of the recursion; params must be uniformized."""
    p.require_uniformized()
    new = _step_array(v.values, _cost_array(v.box), p)
    return ValueTable(v.box, new, v.beta, v.iteration_count + 1)


def extract_policy(v: ValueTable) -> PolicyTable:
    """Adding decision per l2 = 0 state; ties break to not adding."""
    vals = v.values
    adding = np.zeros(vals.shape[:2], dtype=bool)
    adding[1:, :] = vals[:-1, :, 1] < vals[1:, :, 0]
    adding[0, 1:] = vals[0, :-1, 1] < vals[0, 1:, 0]
    return PolicyTable(v.box, adding, v.beta)


def extract_threshold(pt: PolicyTable, band: int = 2) -> ThresholdResult:
    """Read the adding region as a threshold on y = x + q1, interior only.

    A boundary band (default width 2) is excluded: truncation distorts
    decisions near the caps, and under tight tolerances the distortion
    reaches further in than 2 (see verifier.truncation_band for a width
    with a guarantee).  States with y = 0 have nothing to move and are
    skipped.
    """
    xi = pt.box.x_max - band
    qi = pt.box.q1_max - band
    adding = pt.adding[: xi + 1, : qi + 1]
    x = np.arange(xi + 1)[:, None]
    q = np.arange(qi + 1)[None, :]
    y = x + q
    decidable = y >= 1

    add_cells = adding & decidable
    if not add_cells.any():
        return ThresholdResult(kind="infinite")

    m = int(y[add_cells].min()) - 1
    missing = decidable & (y > m) & ~adding
    if missing.any():
        bad = np.argwhere(missing)
        worst = bad[np.argmax(y[missing])]
        lowest = np.argwhere(add_cells & (y == m + 1))[0]
        return ThresholdResult(
            kind="not-threshold",
            witness=(tuple(int(c) for c in lowest), tuple(int(c) for c in worst)),
        )
    return ThresholdResult(kind="finite", m=m)


def nearest_threshold(pt: PolicyTable, band: int = 2) -> ThresholdResult:
    """Best flat threshold fit to a policy that need not be exactly flat.

    Converged policies can deviate from a flat boundary by a couple of
    states (a shallow dip where the switching curve meets q1 = 0, plus
    truncation distortion near the caps), which makes the exact reading
    refuse a number the rest of the pipeline needs.  This picks the m
    minimizing the count of interior states on the wrong side of the flat
    boundary (ties to the smallest m) and reports that count, so callers
    can tell an exact threshold (mismatches = 0) from a near one.  Same
    interior clipping as extract_threshold.
    """
    xi = pt.box.x_max - band
    qi = pt.box.q1_max - band
    adding = pt.adding[: xi + 1, : qi + 1]
    x = np.arange(xi + 1)[:, None]
    q = np.arange(qi + 1)[None, :]
    y = x + q
    decidable = y >= 1

    act = adding[decidable]
    if not act.any():
        return ThresholdResult(kind="infinite")
    ys = y[decidable]
    y_top = int(ys.max())
    add_cnt = np.bincount(ys[act], minlength=y_top + 1)
    keep_cnt = np.bincount(ys[~act], minlength=y_top + 1)
    # wrong(m) = adders at y <= m, plus keepers at y > m
    add_prefix = np.cumsum(add_cnt)
    keep_above = keep_cnt.sum() - np.cumsum(keep_cnt)
    wrong = add_prefix + keep_above
    m_best = int(np.argmin(wrong))
    inf_wrong = int(act.sum())  # "never add" mispredicts every adder
    if inf_wrong < wrong[m_best]:
        return ThresholdResult(kind="infinite", mismatches=inf_wrong)
    return ThresholdResult(kind="finite", m=m_best, mismatches=int(wrong[m_best]))


def solve_discounted(
    p: RateParams,
    box: TruncationBox,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    iterate_hook: IterateHook | None = None,
) -> SolveResult:
    """Iterate to the fixed point; stop when the sup-norm step drops below tol.

    The returned values v satisfy ||v - Lv||_inf <= residual * beta < tol,
    hence ||v - J*||_inf <= residual * beta / (1 - beta); pick tol with the
    discount factor in mind when absolute value accuracy matters.
    """
    p.require_uniformized()
    if tol <= 0:
        raise ValueError("tol must be > 0")
    cost = _cost_array(box)
    v = cost
    if iterate_hook is not None:
        iterate_hook(0, v)
    for n in range(1, max_iter + 1):
        new = _step_array(v, cost, p)
        diff = float(np.max(np.abs(new - v)))
        v = new
        if iterate_hook is not None:
            iterate_hook(n, v)
        if diff < tol:
            vt = ValueTable(box, v, p.beta, n)
            return SolveResult(vt, extract_policy(vt), n, diff)
    raise NoConvergence(
        f"sup-norm step {diff:.3e} >= tol {tol:.3e} after {max_iter} sweeps"
    )


def average_delay_threshold(
    p: RateParams,
    box: TruncationBox,
    betas: tuple[float, ...] = DEFAULT_BETAS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> AverageDelayResult:
    """Threshold of the average-delay problem via discounted solves as beta -> 1.

    Solves at each beta in ascending order and returns as soon as two
    consecutive discount factors extract the same threshold; the remaining
    (more expensive) betas are skipped.  Raises NoStabilization when the
    thresholds are still moving at the largest beta or a solve comes back
    non-threshold (enlarge the box or extend the beta list).
    """
    if list(betas) != sorted(set(betas)) or len(betas) < 2:
        raise ValueError("betas must be strictly increasing with at least 2 entries")
    p.require_uniformized()

    trajectory: list[tuple[float, ThresholdResult]] = []
    prev: ThresholdResult | None = None
    last_solve: SolveResult | None = None
    for beta in betas:
        pb = RateParams(p.lam, p.mu_p, p.mu_mm, p.mu_sub6, p.p_a, beta)
        last_solve = solve_discounted(pb, box, tol=tol, max_iter=max_iter)
        cur = extract_threshold(last_solve.policy)
        if cur.kind == "not-threshold":
            # near-threshold policy: take the best flat fit, keep the count
            cur = nearest_threshold(last_solve.policy)
        trajectory.append((beta, cur))
        if prev is not None and prev.kind == cur.kind and prev.m == cur.m:
            return AverageDelayResult(cur, trajectory, last_solve)
        prev = cur
    # thresholds still inching up at the largest beta: accept a terminal
    # step of 1 (discretization jitter of the beta -> 1 limit), else fail
    if len(trajectory) >= 2:
        a, b = trajectory[-2][1], trajectory[-1][1]
        if a.kind == "finite" and b.kind == "finite" and abs(a.m - b.m) <= 1:
            return AverageDelayResult(b, trajectory, last_solve)
    raise NoStabilization(
        "threshold trajectory "
        + ", ".join(f"beta={b}: {t.kind}/{t.m}" for b, t in trajectory)
        + " did not settle; enlarge the box or extend betas"
    )


def threshold_policy_table(box: TruncationBox, m: int, beta: float = 0.0) -> PolicyTable:
    """PolicyTable that adds exactly where y = x + q1 exceeds m (round-trip aid)."""
    x = np.arange(box.x_max + 1)[:, None]
    q = np.arange(box.q1_max + 1)[None, :]
    return PolicyTable(box, (x + q) > m, beta)


def dump_values_csv(vt: ValueTable, pt: PolicyTable, path: str, header_comment: str | None = None) -> None:
    """Rows x,q1,l2,value,action; action column says adding/not-adding at l2=0
    (l2 = 1 states have no adding action and always read not-adding)."""
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("x,q1,l2,value,action\n")
        for x in range(vt.box.x_max + 1):
            for q1 in range(vt.box.q1_max + 1):
                for l2 in (0, 1):
                    act = "not-adding"
                    if l2 == 0 and pt.adding[x, q1]:
                        act = "adding"
                    fh.write(f"{x},{q1},{l2},{vt.values[x, q1, l2]:.12g},{act}\n")
