"""Kernel correctness: exact identities, oracle agreement, reproducibility."""

import functools

import pytest

from dualband.config import InvalidConfig
from dualband.model import Action, RateParams, uniformize
from dualband.policies import maxweight_decide, mmwave_only_decide, threshold_decide
from dualband.simulator import (
    RUN_CSV_HEADER,
    SimConfig,
    compare_maxweight,
    relative_improvement,
    run_csv_row,
    run_python_reference,
    simulate,
    sweep_threshold,
)

from oracles import stationary_occupancy

UNIT = RateParams(0.2, 0.3, 0.8, 0.1, 0.5)
PAPER = RateParams(45.0, 100.0, 100.0, 1.0, 0.6)


def unit_cfg(**kw):
    base = dict(params=UNIT, policy="threshold", m=3,
                horizon_events=100_000, seed=42, replications=3)
    base.update(kw)
    return SimConfig(**base)


# ------------------------------------------------------------ exact identities


def test_rerun_is_bit_identical():
    a = simulate(unit_cfg())
    b = simulate(unit_cfg())
    assert a == b


def test_little_identity_holds_exactly():
    stats = simulate(unit_cfg(params=PAPER, m=18))
    _, big = uniformize(PAPER)
    for rep in stats.reps:
        assert rep.avg_delay == rep.occupancy_sum / (rep.arrivals_measured * big)
        assert rep.avg_occupancy == rep.occupancy_sum / rep.slots_measured


def test_packet_conservation_is_exact():
    for cfg in (unit_cfg(), unit_cfg(policy="maxweight", m=0),
                unit_cfg(params=PAPER, m=18)):
        stats = simulate(cfg)
        for rep in stats.reps:
            assert rep.arrivals_total == rep.departures_total + sum(rep.final_state)


def test_event_frequencies_match_uniformized_rates():
    stats = simulate(unit_cfg(horizon_events=200_000, replications=1))
    norm, _ = uniformize(UNIT)
    probs = (norm.lam, norm.mu_p, norm.mm_effective, norm.mu_sub6)
    counts = stats.reps[0].event_counts
    n = sum(counts)
    assert n == 200_000
    for got, p in zip(counts, probs):
        sigma = (p * (1 - p) / n) ** 0.5
        assert abs(got / n - p) < 4 * sigma


def test_hold_policy_never_departs():
    with pytest.warns(RuntimeWarning, match="not stable"):
        stats = simulate(unit_cfg(policy="hold", m=0, horizon_events=20_000))
    rep = stats.reps[0]
    assert rep.departures_total == 0
    assert rep.final_state[0] == rep.arrivals_total


def test_unstable_threshold_load_warns():
    hot = RateParams(70.0, 100.0, 100.0, 1.0, 0.6)
    with pytest.warns(RuntimeWarning, match="not stable"):
        simulate(unit_cfg(params=hot, m=18, horizon_events=10_000, replications=1))


# ------------------------------------------------------ common random numbers


def test_same_seed_means_same_event_stream():
    thr = simulate(unit_cfg())
    mw = simulate(unit_cfg(policy="maxweight", m=0))
    for a, b in zip(thr.reps, mw.reps):
        assert a.event_counts == b.event_counts
        assert a.arrivals_total == b.arrivals_total


def test_sweep_shares_seeds_across_points():
    pts = sweep_threshold(UNIT, [1, 2, 5], unit_cfg(horizon_events=50_000))
    assert [m for m, _ in pts] == [1, 2, 5]
    streams = {s.reps[0].event_counts for _, s in pts}
    assert len(streams) == 1
    with pytest.raises(InvalidConfig):
        sweep_threshold(UNIT, [], unit_cfg())


def test_action_chain_bounds():
    thr = simulate(unit_cfg(params=PAPER, m=4))
    assert max(r.max_actions_per_slot for r in thr.reps) <= 3
    mw = simulate(unit_cfg(policy="maxweight", m=0))
    # backpressure routes at most one packet per event epoch
    assert max(r.max_actions_per_slot for r in mw.reps) <= 1


# --------------------------------------------------------- reference twin


def test_python_reference_matches_kernel_exactly():
    norm, _ = uniformize(UNIT)
    cases = [
        ("threshold", 3, functools.partial(threshold_decide, m=3), False),
        ("maxweight", 0, functools.partial(maxweight_decide, p=norm), True),
        ("mmwave-only", 0, mmwave_only_decide, False),
        ("hold", 0, lambda s: Action.HOLD, False),
    ]
    for policy, m, decide, single in cases:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            stats = simulate(SimConfig(
                params=UNIT, policy=policy, m=m, horizon_events=4_000,
                warmup_events=800, seed=99, replications=1,
            ))
        occ, final = run_python_reference(UNIT, decide, 4_000, 800, 99,
                                          single_action=single)
        rep = stats.reps[0]
        assert rep.avg_occupancy == occ, policy
        assert rep.final_state == (final.q0, final.l1, final.q1, final.l2), policy


# ------------------------------------------------------- stationary oracle


def test_stationary_oracle_mmwave_only():
    p = RateParams(1.0, 20.0, 20.0, 1.0, 0.5)
    norm, _ = uniformize(p)
    exact = stationary_occupancy(norm, mmwave_only_decide, cap=15)
    stats = simulate(SimConfig(
        params=p, policy="mmwave-only", horizon_events=400_000,
        warmup_events=100_000, seed=11, replications=5,
    ))
    assert abs(stats.avg_occupancy - exact) < max(3 * stats.ci_occupancy, 2e-3)


def test_stationary_oracle_threshold():
    norm, _ = uniformize(UNIT)
    exact = stationary_occupancy(norm, functools.partial(threshold_decide, m=2), cap=24)
    stats = simulate(SimConfig(
        params=UNIT, policy="threshold", m=2, horizon_events=2_000_000,
        warmup_events=500_000, seed=101, replications=8,
    ))
    assert abs(stats.avg_occupancy - exact) < max(3 * stats.ci_occupancy, 1e-2)


def test_stationary_oracle_maxweight_single_action():
    norm, _ = uniformize(UNIT)
    exact = stationary_occupancy(
        norm, functools.partial(maxweight_decide, p=norm), cap=24, single_action=True,
    )
    stats = simulate(SimConfig(
        params=UNIT, policy="maxweight", horizon_events=2_000_000,
        warmup_events=500_000, seed=103, replications=8,
    ))
    assert abs(stats.avg_occupancy - exact) < max(3 * stats.ci_occupancy, 1e-2)


# ------------------------------------------------------------- composites


def test_relative_improvement_censoring_flags():
    cfg = unit_cfg(horizon_events=50_000, replications=2)
    hot = RateParams(60.0, 100.0, 100.0, 1.0, 0.6)  # fast path alone saturates
    res = relative_improvement(hot, m=12, cfg=cfg)
    assert res.censored
    cool = RateParams(30.0, 100.0, 100.0, 1.0, 0.6)
    res2 = relative_improvement(cool, m=18, cfg=cfg)
    assert not res2.censored
    assert res2.delay_with > 0 and res2.delay_without > 0


def test_compare_maxweight_row_shape():
    cfg = unit_cfg(horizon_events=50_000, replications=2)
    rows = compare_maxweight([PAPER], [18], cfg)
    (row,) = rows
    assert row.lam == 45.0 and row.m == 18
    assert row.delay_threshold == row.stats_threshold.avg_delay
    assert row.tput_maxweight == row.stats_maxweight.throughput
    with pytest.raises(InvalidConfig):
        compare_maxweight([PAPER], [18, 19], cfg)


def test_run_csv_row_format():
    cfg = unit_cfg(horizon_events=10_000, replications=2)
    stats = simulate(cfg)
    row = run_csv_row(UNIT, cfg, stats)
    fields = row.split(",")
    assert len(fields) == len(RUN_CSV_HEADER.split(","))
    assert fields[0] == "0.2" and fields[5] == "threshold" and fields[6] == "3"
    assert fields[-1] == "10000"


# ------------------------------------------------------------- validation


def test_config_validation():
    with pytest.raises(InvalidConfig):
        unit_cfg(policy="fifo")
    with pytest.raises(InvalidConfig):
        unit_cfg(horizon_events=0)
    with pytest.raises(InvalidConfig):
        unit_cfg(warmup_events=100_000)  # == horizon
    with pytest.raises(InvalidConfig):
        unit_cfg(replications=0)
    with pytest.raises(InvalidConfig):
        unit_cfg(m=-1)
    with pytest.raises(InvalidConfig):
        unit_cfg(seed=-5)


def test_default_warmup_is_tenth_of_horizon():
    assert unit_cfg(horizon_events=50_000).effective_warmup == 5_000
    assert unit_cfg(warmup_events=7).effective_warmup == 7
