"""Numerical verification of the structural properties of solved value tables.

Three families:

* check_class_F / check_extended: inequalities every collapsed-space iterate
  must satisfy -- threshold-difference bounds, the switch inequality,
  supermodularity, monotonicity, convexity and exchange variants.  Property
  ids: thr-x, thr-xq, thr-q0, switch, smod-x, smod-q, mono-x, mono-q,
  mono-slow (class F) and cvx-x-busy, cvx-edge-busy, cvx-q-busy, cvx-x-idle,
  cvx-q-idle, xchg-busy, xchg-edge, xchg-idle (extended).
* check_theorem_fixedpoint: action-priority and monotonicity facts about the
  converged full-state table -- scheduling beats holding, serving from the
  head buffer beats reneging, finishing processing never hurts, the fast
  path beats the slow server for a lone packet, componentwise monotonicity,
  and the renege ordering (processing server before mmWave queue).
* check_iteration_thresholds: every per-sweep greedy policy should be
  threshold-type and the threshold should climb by at most one per sweep.

Every check scans its whole region and reports every violation (no early
exit), so failures carry complete witnesses.  All checks skip a band at the
truncation caps (default width 2): blocked transitions distort values
there, and an inequality instance is only evaluated when all of its
argument states are inside the interior.  The distortion is not confined
to the cap rows: it decays geometrically moving inward, by a factor of
roughly beta times the largest normalized rate per lattice step, so a
width-2 band only suffices for loose tolerances.  truncation_band computes
the width that pushes the residual below a given tolerance; callers that
want strict reports should use it instead of the default.  Because value
influence also travels one lattice step per sweep, iterate n is exact
outside a band of width n, which is why IterateAudit widens its band with
the sweep count.  Default tolerance 1e-7 leaves two orders of headroom
over the 1e-9 solver tolerance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import AssumptionViolated, RateParams, check_fastpath_assumption
from .solver import (
    ThresholdResult,
    TruncationBox,
    ValueTable,
    extract_policy,
    extract_threshold,
    nearest_threshold,
)

DEFAULT_CHECK_TOL = 1e-7


def truncation_band(params: RateParams, box: TruncationBox, tol: float = DEFAULT_CHECK_TOL) -> int:
    """Cap-exclusion width that pushes truncation distortion below tol.

    Blocked transitions perturb the cap rows, and the perturbation shrinks
    by about beta * mu_max per lattice step moving inward (mu_max the
    largest normalized rate).  The collapsed-space inequality checks only
    feel value differences, for which the cap-row *cost* would do as scale;
    the full-state priority checks compare states with the same collapsed
    coordinates, where the blocked hand-off leaves a shadow price of order
    max cost / (1 - beta), so that conservative scale is used for both.
    Width solves (beta * mu_max)^band * scale <= tol plus 2 steps of
    safety.

    When hand-offs outpace the mmWave drain (mu_p > p_a * mu_mm) the shadow
    of the blocked hand-off is not purely geometric: spare fast-path work
    acts as fuel for a drift-assisted climb to the q1 cap, so states with
    x of order the cap distance stay contaminated however far in they sit.
    The width then also grows with the box itself; 0.67 * min dimension
    keeps the window corner's fuel-to-distance ratio at about 0.5, which
    measurement puts safely clean (60x60 box, beta 0.999, tol 1e-7: dirty
    at 36, clean from 40; 80x80: dirty at 48, clean from 52; the rule gives
    41 and 54).  Everything is clipped so at least a 4-wide window survives.
    """
    params.require_uniformized()
    mu_max = max(params.lam, params.mu_p, params.mm_effective, params.mu_sub6)
    rho = params.beta * mu_max
    if rho <= 0.0:
        return 2
    scale = float(box.x_max + box.q1_max + 1) / (1.0 - params.beta)
    need = math.ceil(math.log(scale / tol) / -math.log(rho)) + 2
    if params.mu_p > params.mm_effective:
        need = max(need, math.ceil(0.67 * min(box.x_max, box.q1_max)))
    feasible = min(box.x_max, box.q1_max) - 4
    return max(2, min(need, feasible))


@dataclass(frozen=True, slots=True)
class Violation:
    property_id: str
    state: tuple
    lhs: float
    rhs: float
    iteration: int | str

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


@dataclass
class ViolationReport:
    tol: float = DEFAULT_CHECK_TOL
    entries: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def extend(self, other: "ViolationReport") -> None:
        self.entries.extend(other.entries)

    def worst(self) -> Violation | None:
        return max(self.entries, key=lambda v: v.gap, default=None)

    def to_csv(self, path: str, header_comment: str | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["property_id", "state", "lhs", "rhs", "gap", "iteration"])
            for v in self.entries:
                state = "(" + ";".join(str(c) for c in v.state) + ")"
                w.writerow(
                    [v.property_id, state, f"{v.lhs:.12g}", f"{v.rhs:.12g}",
                     f"{v.gap:.6g}", v.iteration]
                )


def _scan(
    rep: ViolationReport,
    pid: str,
    lhs: np.ndarray,
    rhs: np.ndarray,
    anchor: Callable[[tuple[int, ...]], tuple],
    iteration: int | str,
) -> None:
    bad = np.argwhere(lhs > rhs + rep.tol)
    for raw in bad:
        idx = tuple(int(k) for k in raw)
        rep.entries.append(
            Violation(pid, anchor(idx), float(lhs[idx]), float(rhs[idx]), iteration)
        )


def check_class_F(
    values: np.ndarray,
    box: TruncationBox,
    tol: float = DEFAULT_CHECK_TOL,
    iteration: int | str = 0,
    band: int = 2,
) -> ViolationReport:
    """The nine base inequalities on a collapsed-space table, interior only."""
    rep = ViolationReport(tol=tol)
    c = values[: box.x_max + 1 - band, : box.q1_max + 1 - band, :]

    # threshold differences
    _scan(rep, "thr-x",
          c[1:-1, :, 0] + c[1:-1, :, 1], c[:-2, :, 1] + c[2:, :, 0],
          lambda i: (i[0], i[1]), iteration)
    _scan(rep, "thr-xq",
          c[1:, :-1, 0] + c[:-1, 1:, 1], c[:-1, :-1, 1] + c[1:, 1:, 0],
          lambda i: (i[0], i[1]), iteration)
    _scan(rep, "thr-q0",
          c[0, 1:-1, 0] + c[0, 1:-1, 1], c[0, :-2, 1] + c[0, 2:, 0],
          lambda i: (0, i[0] + 1), iteration)
    # moving a packet forward along the fast path helps
    _scan(rep, "switch",
          c[:-1, 1:, :], c[1:, :-1, :],
          lambda i: (i[0], i[1], i[2]), iteration)
    # supermodularity in (x, l2) and (q1, l2)
    _scan(rep, "smod-x",
          c[:-1, :, 1] + c[1:, :, 0], c[:-1, :, 0] + c[1:, :, 1],
          lambda i: (i[0], i[1]), iteration)
    _scan(rep, "smod-q",
          c[:, :-1, 1] + c[:, 1:, 0], c[:, :-1, 0] + c[:, 1:, 1],
          lambda i: (i[0], i[1]), iteration)
    # monotonicity
    _scan(rep, "mono-x", c[:-1], c[1:],
          lambda i: (i[0], i[1], i[2]), iteration)
    _scan(rep, "mono-q", c[:, :-1], c[:, 1:],
          lambda i: (i[0], i[1], i[2]), iteration)
    _scan(rep, "mono-slow", c[:, :, 0], c[:, :, 1],
          lambda i: (i[0], i[1]), iteration)
    return rep


def check_extended(
    values: np.ndarray,
    box: TruncationBox,
    tol: float = DEFAULT_CHECK_TOL,
    iteration: int | str = 0,
    band: int = 2,
) -> ViolationReport:
    """The eight derived convexity/exchange inequalities, interior only."""
    rep = ViolationReport(tol=tol)
    c = values[: box.x_max + 1 - band, : box.q1_max + 1 - band, :]

    _scan(rep, "cvx-x-busy",
          2.0 * c[1:-1, :, 1], c[2:, :, 1] + c[:-2, :, 1],
          lambda i: (i[0] + 1, i[1]), iteration)
    _scan(rep, "cvx-edge-busy",
          2.0 * c[0, 1:, 1], c[1, 1:, 1] + c[0, :-1, 1],
          lambda i: (0, i[0] + 1), iteration)
    _scan(rep, "cvx-q-busy",
          2.0 * c[0, 1:-1, 1], c[0, 2:, 1] + c[0, :-2, 1],
          lambda i: (0, i[0] + 1), iteration)
    _scan(rep, "cvx-x-idle",
          2.0 * c[1:-1, :, 0], c[2:, :, 0] + c[:-2, :, 0],
          lambda i: (i[0] + 1, i[1]), iteration)
    _scan(rep, "cvx-q-idle",
          2.0 * c[0, 1:-1, 0], c[0, 2:, 0] + c[0, :-2, 0],
          lambda i: (0, i[0] + 1), iteration)
    _scan(rep, "xchg-busy",
          c[1:, :-1, 1] + c[:-1, 1:, 1], c[1:, 1:, 1] + c[:-1, :-1, 1],
          lambda i: (i[0] + 1, i[1]), iteration)
    _scan(rep, "xchg-edge",
          c[0, 1:, 0] + c[0, 1:, 1], c[0, :-1, 1] + c[1, 1:, 0],
          lambda i: (0, i[0] + 1), iteration)
    _scan(rep, "xchg-idle",
          c[1:, :-1, 0] + c[:-1, 1:, 0], c[1:, 1:, 0] + c[:-1, :-1, 0],
          lambda i: (i[0], i[1]), iteration)
    return rep


def check_theorem_fixedpoint(
    v4: np.ndarray,
    params: RateParams,
    box: TruncationBox,
    tol: float = DEFAULT_CHECK_TOL,
    iteration: int | str = "fixed-point",
    band: int = 2,
) -> ViolationReport:
    """Action-priority and monotonicity facts on the converged full-state table.

    Requires the fast-path assumption (the priorities genuinely flip without
    it).  v4 is indexed [q0, l1, q1, l2].
    """
    if not check_fastpath_assumption(params):
        raise AssumptionViolated(
            "fast-path transit is not faster than the sub-6 server: "
            f"1/(p_a*mu_mm) + 1/mu_p >= 1/mu_sub6 for {params}"
        )
    rep = ViolationReport(tol=tol)
    # one extra row clipped so q0 + l1 stays inside the collapsed interior
    c = v4[: box.x_max - band, :, : box.q1_max + 1 - band, :]

    # (a) scheduling onto the idle processing server beats holding
    _scan(rep, "prio-schedule-over-hold",
          c[:-1, 1], c[1:, 0],
          lambda i: (i[0] + 1, 0, i[1], i[2]), iteration)

    # (b) serving the sub-6 from the head buffer beats reneging;
    # compare against the better admissible renege variant
    lhs_busy = c[:-1, 1, :, 1]
    rhs_busy = c[1:, 0, :, 1].copy()
    rhs_busy[:, 1:] = np.minimum(rhs_busy[:, 1:], c[1:, 1, :-1, 1])
    _scan(rep, "prio-head-over-renege",
          lhs_busy, rhs_busy,
          lambda i: (i[0] + 1, 1, i[1], 0), iteration)
    _scan(rep, "prio-head-over-renege",
          c[:-1, 0, 1:, 1], c[1:, 0, :-1, 1],
          lambda i: (i[0] + 1, 0, i[1] + 1, 0), iteration)

    # (c) completing the processing hand-off never hurts
    _scan(rep, "handoff-no-worse",
          c[:, 0, 1:, :], c[:, 1, :-1, :],
          lambda i: (i[0], 1, i[1], i[2]), iteration)

    # (d) a lone packet prefers the fast path to the slow server
    _scan(rep, "fast-over-slow-single",
          c[:-1, 1, 0, 0], c[:-1, 0, 0, 1],
          lambda i: (i[0] + 1, 0, 0, 0), iteration)

    # (e) componentwise monotonicity in all four coordinates
    _scan(rep, "mono-q0", c[:-1], c[1:],
          lambda i: (i[0], i[1], i[2], i[3]), iteration)
    _scan(rep, "mono-l1", c[:, 0], c[:, 1],
          lambda i: (i[0], 0, i[1], i[2]), iteration)
    _scan(rep, "mono-q1", c[:, :, :-1], c[:, :, 1:],
          lambda i: (i[0], i[1], i[2], i[3]), iteration)
    _scan(rep, "mono-l2", c[:, :, :, 0], c[:, :, :, 1],
          lambda i: (i[0], i[1], i[2], 0), iteration)

    # emptying the processing server is the better renege when both apply
    _scan(rep, "renege-order",
          c[:, 0, 1:, 1], c[:, 1, :-1, 1],
          lambda i: (i[0], 1, i[1] + 1, 0), iteration)
    return rep


def check_total_order_info(
    v4: np.ndarray,
    box: TruncationBox,
    tol: float = DEFAULT_CHECK_TOL,
    band: int = 2,
) -> ViolationReport:
    """Informational scan: value ordering by total packet count alone.

    The blanket claim "fewer packets in total means lower value" compares
    states whose ordering actually depends on where the packets sit (a lone
    packet on the slow server costs more than one in the head buffer), so
    violations here are expected and are reported with an info- prefix;
    they never gate anything.  One row per offending total (spread within a
    total) or per adjacent total pair (crossing).
    """
    rep = ViolationReport(tol=tol)
    c = v4[: box.x_max - band, :, : box.q1_max + 1 - band, :]
    q0 = np.arange(c.shape[0])[:, None, None, None]
    l1 = np.arange(2)[None, :, None, None]
    q1 = np.arange(c.shape[2])[None, None, :, None]
    l2 = np.arange(2)[None, None, None, :]
    totals = (q0 + l1 + q1 + l2).astype(np.int64)
    totals = np.broadcast_to(totals, c.shape)

    tmax = int(totals.max())
    lo: list[tuple[float, tuple]] = []
    hi: list[tuple[float, tuple]] = []
    for t in range(tmax + 1):
        mask = totals == t
        vals = c[mask]
        states = np.argwhere(mask)
        i_min = int(np.argmin(vals))
        i_max = int(np.argmax(vals))
        lo.append((float(vals[i_min]), tuple(int(k) for k in states[i_min])))
        hi.append((float(vals[i_max]), tuple(int(k) for k in states[i_max])))

    for t in range(tmax + 1):
        if hi[t][0] > lo[t][0] + tol:
            rep.entries.append(Violation(
                "info-equal-total", hi[t][1] + lo[t][1], hi[t][0], lo[t][0],
                "fixed-point"))
        if t + 1 <= tmax and hi[t][0] > lo[t + 1][0] + tol:
            rep.entries.append(Violation(
                "info-cross-total", hi[t][1] + lo[t + 1][1], hi[t][0], lo[t + 1][0],
                "fixed-point"))
    return rep


@dataclass
class IterationThresholdTrace:
    """Per-sweep thresholds plus the two structural verdicts about them."""

    per_iteration: list[ThresholdResult]
    all_threshold_type: bool
    monotone_ok: bool
    violations: list[str]

    @property
    def ok(self) -> bool:
        return self.all_threshold_type and self.monotone_ok


def check_iteration_thresholds(trajectory: list[ThresholdResult]) -> IterationThresholdTrace:
    """Each sweep's policy must be threshold-type, with the threshold rising
    by at most 1 per sweep.  Pairs involving a non-threshold sweep cannot be
    compared and are skipped (they are already reported as violations)."""
    violations: list[str] = []
    numeric: list[float | None] = []
    for n, tr in enumerate(trajectory):
        if tr.kind == "not-threshold":
            numeric.append(None)
            violations.append(
                f"iteration {n}: policy not threshold-type, witness {tr.witness}"
            )
        else:
            numeric.append(tr.as_number())
    all_threshold = all(v is not None for v in numeric)

    monotone_ok = True
    for n in range(1, len(numeric)):
        a, b = numeric[n - 1], numeric[n]
        if a is None or b is None:
            continue
        if b > a + 1:
            monotone_ok = False
            violations.append(
                f"iteration {n - 1} -> {n}: threshold jumped {a:g} -> {b:g}"
            )
    return IterationThresholdTrace(list(trajectory), all_threshold, monotone_ok, violations)


class IterateAudit:
    """iterate_hook that streams the per-sweep checks.

    Keeping every iterate of a near-1 discount run would cost gigabytes, so
    this checks each table as it is produced and stores only the extracted
    threshold plus any violations.

    band is the asymptotic cap-exclusion width (see truncation_band).  Cap
    influence travels one lattice step per sweep, so sweep n is checked with
    width min(n + 1, band): early iterates are exact almost to the cap and
    get a nearly full window, late ones fall back to the geometric bound.
    Threshold extraction ignores band and always uses width 2 (argmins are
    offset-invariant, and on small boxes the value band would leave a window
    smaller than the threshold being read).
    """

    def __init__(
        self,
        box: TruncationBox,
        beta: float,
        tol: float = DEFAULT_CHECK_TOL,
        check_values: bool = True,
        band: int = 2,
    ) -> None:
        self.box = box
        self.beta = beta
        self.tol = tol
        self.check_values = check_values
        self.band = band
        self.report = ViolationReport(tol=tol)
        self.thresholds: list[ThresholdResult] = []
        # numeric companion: exact when the sweep is flat, best fit otherwise
        self.nearest: list[ThresholdResult] = []

    def __call__(self, n: int, values: np.ndarray) -> None:
        b = max(2, min(n + 1, self.band))
        if self.check_values:
            self.report.extend(check_class_F(values, self.box, self.tol, n, band=b))
            self.report.extend(check_extended(values, self.box, self.tol, n, band=b))
        vt = ValueTable(self.box, values, self.beta, n)
        pt = extract_policy(vt)
        # thresholds always read at width 2: the policy is an argmin, so the
        # common truncation offset cancels and the wide value band would only
        # shrink the window below the threshold itself on small boxes
        strict = extract_threshold(pt)
        self.thresholds.append(strict)
        self.nearest.append(
            strict if strict.kind != "not-threshold" else nearest_threshold(pt)
        )

    def threshold_trace(self) -> IterationThresholdTrace:
        return check_iteration_thresholds(self.thresholds)

    def nearest_trace(self) -> IterationThresholdTrace:
        """Trace over the numeric trajectory (never not-threshold)."""
        return check_iteration_thresholds(self.nearest)


def trace_rows(trace: IterationThresholdTrace, tol: float = DEFAULT_CHECK_TOL) -> ViolationReport:
    """IterationThresholdTrace recast as Violation rows for CSV export.

    A non-threshold sweep becomes one `policy-threshold-type` row: state holds
    the witness pair (adding then keeping), lhs the keep state's occupancy,
    rhs the implied threshold it should have been compared against.  A jump
    becomes a `threshold-monotone-step` row with lhs = new m, rhs = old m + 1.
    """
    rep = ViolationReport(tol=tol)
    numeric: list[float | None] = []
    for n, tr in enumerate(trace.per_iteration):
        if tr.kind == "not-threshold":
            numeric.append(None)
            (x_add, q_add), (x_keep, q_keep) = tr.witness  # type: ignore[misc]
            rep.entries.append(Violation(
                "policy-threshold-type",
                (x_add, q_add, x_keep, q_keep),
                float(x_keep + q_keep),
                float(x_add + q_add - 1),
                n,
            ))
        else:
            numeric.append(tr.as_number())
    for n in range(1, len(numeric)):
        a, b = numeric[n - 1], numeric[n]
        if a is None or b is None:
            continue
        if b > a + 1:
            rep.entries.append(
                Violation("threshold-monotone-step", (), float(b), float(a + 1), n)
            )
    return rep


def perturbed(values: np.ndarray, index: tuple, delta: float = -1.0) -> np.ndarray:
    """Copy of a table with one entry nudged; self-test hook for the checks."""
    out = values.copy()
    out[index] += delta
    return out
