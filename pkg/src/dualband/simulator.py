"""Stochastic simulation of the uniformized slot chain under a policy.

Each slot draws one event with probabilities (lam, mu_p, p_a*mu_mm, mu_sub6)
(rates uniformized to sum to 1), applies it, then lets the policy act until
it holds.  Because uniformized slot durations are i.i.d. exponentials with
mean 1/Lambda regardless of the state, time averages equal slot averages:
occupancy is accumulated as a plain integer sum over post-decision states.
mmWave channel availability is folded into the effective drain rate
p_a*mu_mm per slot, matching the solved model exactly so simulated and
solved thresholds are comparable.

Delay comes out through the occupancy (delay = occupancy / arrival rate in
real time units, using the measured arrival count so the identity is exact
by construction and the nominal-rate comparison is a genuine statistical
test).  Throughput counts real departures times Lambda per measured slot.

Determinism: one replication = one seed = one fixed event stream that does
not depend on the policy (the event type is drawn from the same uniform
regardless of the state, with dummies absorbing the difference).  Arms that
share a seed therefore see literally the same event sequence, which is what
makes common-random-number comparisons across policies and sweep points
noise-free in the ranking sense.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import InvalidConfig
from .model import RateParams, SystemState4D, stability_region, uniformize

POLICY_CODES = {"hold": 0, "threshold": 1, "maxweight": 2, "mmwave-only": 3}

# 95% two-sided normal quantile, used for replication confidence half-widths
Z95 = 1.959963984540054


@dataclass(frozen=True, slots=True)
class SimConfig:
    """One simulation batch: a policy, a horizon in events, and replications.

    params carries raw (unnormalized) rates; uniformization happens inside.
    Replication r runs with seed + r.
    """

    params: RateParams
    policy: str
    m: int = 0
    horizon_events: int = 100_000
    warmup_events: int | None = None
    seed: int = 20240901
    replications: int = 5

    def __post_init__(self) -> None:
        if self.policy not in POLICY_CODES:
            raise InvalidConfig(f"unknown policy {self.policy!r}, know {sorted(POLICY_CODES)}")
        if self.horizon_events <= 0:
            raise InvalidConfig("horizon_events must be positive")
        wu = self.effective_warmup
        if not 0 <= wu < self.horizon_events:
            raise InvalidConfig(f"warmup {wu} must lie in [0, horizon)")
        if self.replications < 1:
            raise InvalidConfig("replications must be >= 1")
        if self.m < 0:
            raise InvalidConfig("threshold m must be >= 0")
        if self.seed < 0:
            raise InvalidConfig("seed must be a nonnegative integer")

    @property
    def effective_warmup(self) -> int:
        """Explicit warmup, or the default 10% of the horizon."""
        if self.warmup_events is not None:
            return self.warmup_events
        return self.horizon_events // 10


@dataclass(frozen=True, slots=True)
class RepStats:
    """Raw counters from one replication (counts are exact integers)."""

    seed: int
    occupancy_sum: int
    slots_measured: int
    arrivals_measured: int
    departures_measured: int
    arrivals_total: int
    departures_total: int
    final_state: tuple[int, int, int, int]
    event_counts: tuple[int, int, int, int]
    max_actions_per_slot: int
    avg_occupancy: float
    avg_delay: float
    throughput: float


@dataclass(frozen=True, slots=True)
class SimStats:
    """Replication averages with 95% half-widths."""

    avg_occupancy: float
    avg_delay: float
    throughput: float
    ci_occupancy: float
    ci_delay: float
    ci_throughput: float
    events_simulated: int
    reps: tuple[RepStats, ...]


@njit(cache=True, nogil=True)
def _run_chain(lam, mu_p, mm_eff, mu_sub6, policy_code, m, horizon, warmup, seed):
    # One uniform per slot picks the event from fixed cumulative thresholds;
    # the stream is identical for every policy run with the same seed.
    np.random.seed(seed)
    p1 = lam
    p2 = lam + mu_p
    p3 = lam + mu_p + mm_eff

    q0 = 0
    l1 = 0
    q1 = 0
    l2 = 0
    occ_sum = np.int64(0)
    slots_meas = 0
    arr_meas = 0
    dep_meas = 0
    arrivals = 0
    departures = 0
    n_arr = 0
    n_proc = 0
    n_mm = 0
    n_sub = 0
    max_chain = 0

    for slot in range(horizon):
        u = np.random.random()
        if u < p1:
            n_arr += 1
            q0 += 1
            arrivals += 1
            if slot >= warmup:
                arr_meas += 1
        elif u < p2:
            n_proc += 1
            if l1 == 1:
                l1 = 0
                q1 += 1
        elif u < p3:
            n_mm += 1
            if q1 >= 1:
                q1 -= 1
                departures += 1
                if slot >= warmup:
                    dep_meas += 1
        else:
            n_sub += 1
            if l2 == 1:
                l2 = 0
                departures += 1
                if slot >= warmup:
                    dep_meas += 1

        chain = 0
        while True:
            act = 0
            if policy_code == 1:
                if q0 >= 1 and l1 == 0 and (l2 == 1 or q0 + q1 <= m):
                    act = 1
                elif l2 == 0:
                    if (q0 >= 1 and l1 == 1 and q0 + q1 + 1 > m) or (
                        q0 == 1 and l1 == 0 and q1 >= m
                    ):
                        act = 2
                    elif q0 == 0 and l1 + q1 > m:
                        act = 4 if l1 == 1 else 5
                    elif q0 >= 2 and l1 == 0 and q0 + q1 > m:
                        act = 3
            elif policy_code == 2:
                w_mm = -1.0
                w_sub = -1.0
                if q0 >= 1 and l1 == 0:
                    w_mm = (q0 - (l1 + q1)) * mm_eff
                if q0 >= 1 and l2 == 0:
                    w_sub = (q0 - l2) * mu_sub6
                if w_mm > 0.0 and w_mm >= w_sub:
                    act = 1
                elif w_sub > 0.0:
                    act = 2
            elif policy_code == 3:
                if q0 >= 1 and l1 == 0:
                    act = 1

            if act == 0:
                break
            if act == 1:
                q0 -= 1
                l1 = 1
            elif act == 2:
                q0 -= 1
                l2 = 1
            elif act == 3:
                q0 -= 2
                l1 = 1
                l2 = 1
            elif act == 4:
                l1 = 0
                l2 = 1
            else:
                q1 -= 1
                l2 = 1
            chain += 1
            # backpressure routes at most one packet per event epoch
            if policy_code == 2:
                break
            if chain > 4:
                break

        if chain > max_chain:
            max_chain = chain
        if slot >= warmup:
            occ_sum += q0 + l1 + q1 + l2
            slots_meas += 1

    return (
        occ_sum, slots_meas, arr_meas, dep_meas, arrivals, departures,
        q0, l1, q1, l2, n_arr, n_proc, n_mm, n_sub, max_chain,
    )


def _halfwidth(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return Z95 * math.sqrt(var / len(values))


def simulate(cfg: SimConfig) -> SimStats:
    """Run all replications; deterministic given cfg (bit-identical reruns)."""
    norm, big = uniformize(cfg.params)
    region = stability_region(cfg.params)
    unstable = (
        (cfg.policy in ("threshold", "maxweight") and not region.stable_with_sub6)
        or (cfg.policy == "mmwave-only" and not region.stable_without_sub6)
        or (cfg.policy == "hold" and cfg.params.lam > 0)
    )
    if unstable:
        warnings.warn(
            f"policy {cfg.policy!r} is not stable at lam={cfg.params.lam}; "
            "delay figures are horizon-truncated",
            RuntimeWarning,
            stacklevel=2,
        )

    code = POLICY_CODES[cfg.policy]
    warmup = cfg.effective_warmup
    reps: list[RepStats] = []
    for r in range(cfg.replications):
        seed = cfg.seed + r
        (occ, slots, arr, dep, arr_all, dep_all, q0, l1, q1, l2,
         n_arr, n_proc, n_mm, n_sub, max_chain) = _run_chain(
            norm.lam, norm.mu_p, norm.mm_effective, norm.mu_sub6,
            code, cfg.m, cfg.horizon_events, warmup, seed,
        )
        avg_occ = occ / slots if slots else 0.0
        # real-time delay via the measured arrival rate; exact Little identity
        delay = occ / (arr * big) if arr else 0.0
        tput = dep * big / slots if slots else 0.0
        reps.append(RepStats(
            seed=seed,
            occupancy_sum=int(occ),
            slots_measured=int(slots),
            arrivals_measured=int(arr),
            departures_measured=int(dep),
            arrivals_total=int(arr_all),
            departures_total=int(dep_all),
            final_state=(int(q0), int(l1), int(q1), int(l2)),
            event_counts=(int(n_arr), int(n_proc), int(n_mm), int(n_sub)),
            max_actions_per_slot=int(max_chain),
            avg_occupancy=avg_occ,
            avg_delay=delay,
            throughput=tput,
        ))

    occs = [r.avg_occupancy for r in reps]
    delays = [r.avg_delay for r in reps]
    tputs = [r.throughput for r in reps]
    n = len(reps)
    return SimStats(
        avg_occupancy=sum(occs) / n,
        avg_delay=sum(delays) / n,
        throughput=sum(tputs) / n,
        ci_occupancy=_halfwidth(occs),
        ci_delay=_halfwidth(delays),
        ci_throughput=_halfwidth(tputs),
        events_simulated=cfg.horizon_events * n,
        reps=tuple(reps),
    )


def sweep_threshold(
    params: RateParams,
    m_values: list[int],
    cfg: SimConfig,
) -> list[tuple[int, SimStats]]:
    """One batch per m, all with the same seeds (common random numbers), so
    the delay-vs-m curve and its argmin are free of cross-point seed noise."""
    if not m_values:
        raise InvalidConfig("m_values must be non-empty")
    out = []
    for m in m_values:
        one = SimConfig(
            params=params, policy="threshold", m=m,
            horizon_events=cfg.horizon_events, warmup_events=cfg.warmup_events,
            seed=cfg.seed, replications=cfg.replications,
        )
        out.append((m, simulate(one)))
    return out


@dataclass(frozen=True, slots=True)
class ImprovementResult:
    """Relative delay improvement of the integrated system over mmWave-only."""

    w_hat: float
    censored: bool  # mmWave-only arm unstable: its delay is horizon-truncated
    delay_with: float
    delay_without: float
    stats_with: SimStats
    stats_without: SimStats


def relative_improvement(params: RateParams, m: int, cfg: SimConfig) -> ImprovementResult:
    """Both arms run on common random numbers; an unstable baseline arm is
    still simulated but flagged censored (its 'delay' depends on the horizon).
    """
    base = dict(
        horizon_events=cfg.horizon_events, warmup_events=cfg.warmup_events,
        seed=cfg.seed, replications=cfg.replications,
    )
    censored = not stability_region(params).stable_without_sub6
    with warnings.catch_warnings():
        if censored:
            warnings.simplefilter("ignore", RuntimeWarning)
        with_sub6 = simulate(SimConfig(params=params, policy="threshold", m=m, **base))
        without = simulate(SimConfig(params=params, policy="mmwave-only", **base))
    w_hat = 0.0
    if without.avg_delay > 0:
        w_hat = (without.avg_delay - with_sub6.avg_delay) / without.avg_delay
    return ImprovementResult(
        w_hat=w_hat,
        censored=censored,
        delay_with=with_sub6.avg_delay,
        delay_without=without.avg_delay,
        stats_with=with_sub6,
        stats_without=without,
    )


@dataclass(frozen=True, slots=True)
class CompareRow:
    lam: float
    m: int
    delay_threshold: float
    ci_delay_threshold: float
    delay_maxweight: float
    ci_delay_maxweight: float
    tput_threshold: float
    ci_tput_threshold: float
    tput_maxweight: float
    ci_tput_maxweight: float
    stats_threshold: SimStats
    stats_maxweight: SimStats


def compare_maxweight(
    params_list: list[RateParams],
    m_per_lambda: list[int],
    cfg: SimConfig,
) -> list[CompareRow]:
    """Threshold policy (with the supplied per-rate m) vs the backpressure
    baseline, common seeds per rate point."""
    if len(params_list) != len(m_per_lambda):
        raise InvalidConfig("need exactly one threshold per rate point")
    rows = []
    for params, m in zip(params_list, m_per_lambda):
        base = dict(
            horizon_events=cfg.horizon_events, warmup_events=cfg.warmup_events,
            seed=cfg.seed, replications=cfg.replications,
        )
        thr = simulate(SimConfig(params=params, policy="threshold", m=m, **base))
        mw = simulate(SimConfig(params=params, policy="maxweight", **base))
        rows.append(CompareRow(
            lam=params.lam, m=m,
            delay_threshold=thr.avg_delay, ci_delay_threshold=thr.ci_delay,
            delay_maxweight=mw.avg_delay, ci_delay_maxweight=mw.ci_delay,
            tput_threshold=thr.throughput, ci_tput_threshold=thr.ci_throughput,
            tput_maxweight=mw.throughput, ci_tput_maxweight=mw.ci_throughput,
            stats_threshold=thr, stats_maxweight=mw,
        ))
    return rows


RUN_CSV_HEADER = (
    "lambda,mu_p,mu_mm,mu_sub6,p_a,policy,m,avg_occupancy,avg_delay,"
    "throughput,ci_delay,ci_tput,seed,horizon"
)


def run_csv_row(params: RateParams, cfg: SimConfig, stats: SimStats) -> str:
    """One RUN_CSV_HEADER record for a finished batch (raw-rate units)."""
    fields = [
        format(params.lam, ".12g"), format(params.mu_p, ".12g"),
        format(params.mu_mm, ".12g"), format(params.mu_sub6, ".12g"),
        format(params.p_a, ".12g"), cfg.policy, str(cfg.m),
        format(stats.avg_occupancy, ".12g"), format(stats.avg_delay, ".12g"),
        format(stats.throughput, ".12g"), format(stats.ci_delay, ".12g"),
        format(stats.ci_throughput, ".12g"), str(cfg.seed),
        str(cfg.horizon_events),
    ]
    return ",".join(fields)


def run_python_reference(
    params: RateParams,
    decide,
    horizon: int,
    warmup: int,
    seed: int,
    single_action: bool = False,
) -> tuple[float, SystemState4D]:
    """Slow pure-Python twin of the kernel loop for cross-checking.

    Uses the same generator and event thresholds, model.apply_event, and the
    supplied decide function via the fixpoint wrapper (or a single decision
    per slot when single_action is set, matching the backpressure contract);
    returns the average occupancy and final state.  Test oracle; do not use
    for long horizons.
    """
    from .model import Action, Event, apply_action, apply_event
    from .policies import apply_policy_to_fixpoint

    norm, _ = uniformize(params)
    np.random.seed(seed)
    p1 = norm.lam
    p2 = p1 + norm.mu_p
    p3 = p2 + norm.mm_effective
    s = SystemState4D(0, 0, 0, 0)
    occ = 0
    slots = 0
    for slot in range(horizon):
        u = np.random.random()
        if u < p1:
            e = Event.ARRIVAL
        elif u < p2:
            e = Event.PROCESSING_DONE
        elif u < p3:
            e = Event.MM_DEPARTURE
        else:
            e = Event.SUB6_DEPARTURE
        s = apply_event(s, e)
        if single_action:
            a = decide(s)
            if a is not Action.HOLD:
                s = apply_action(s, a)
        else:
            s = apply_policy_to_fixpoint(s, decide)
        if slot >= warmup:
            occ += s.total
            slots += 1
    return occ / slots if slots else 0.0, s
