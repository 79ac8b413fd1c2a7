"""State, event, action, and rate-normalization behavior."""

import itertools
import math

import pytest

from dualband.model import (
    Action,
    CollapsedState,
    Event,
    InadmissibleAction,
    NonPositiveRate,
    RateParams,
    SystemState4D,
    admissible_actions,
    apply_action,
    apply_event,
    check_fastpath_assumption,
    resolve_renege,
    stability_region,
    uniformize,
)

PAPER = dict(lam=45.0, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.6)


def small_states(q_max=3):
    for q0, l1, q1, l2 in itertools.product(
        range(q_max + 1), (0, 1), range(q_max + 1), (0, 1)
    ):
        yield SystemState4D(q0, l1, q1, l2)


# ---------------------------------------------------------------- state types


def test_state_accessors():
    s = SystemState4D(2, 1, 3, 0)
    assert s.total == 6
    assert s.fastpath == 6
    assert s.astuple() == (2, 1, 3, 0)
    assert s.collapse() == CollapsedState(3, 3, 0)


def test_state_validation():
    with pytest.raises(ValueError):
        SystemState4D(-1, 0, 0, 0)
    with pytest.raises(ValueError):
        SystemState4D(0, 2, 0, 0)
    with pytest.raises(ValueError):
        CollapsedState(0, -1, 0)
    with pytest.raises(ValueError):
        CollapsedState(0, 0, 3)


def test_rate_validation():
    with pytest.raises(NonPositiveRate):
        RateParams(lam=-1.0, mu_p=1.0, mu_mm=1.0, mu_sub6=1.0, p_a=0.5)
    with pytest.raises(NonPositiveRate):
        RateParams(lam=1.0, mu_p=0.0, mu_mm=1.0, mu_sub6=1.0, p_a=0.5)
    with pytest.raises(ValueError):
        RateParams(lam=1.0, mu_p=1.0, mu_mm=1.0, mu_sub6=1.0, p_a=1.5)
    with pytest.raises(ValueError):
        RateParams(lam=1.0, mu_p=1.0, mu_mm=1.0, mu_sub6=1.0, p_a=0.5, beta=1.0)
    # lam = 0 itself is a legal corner (empty load)
    p = RateParams(lam=0.0, mu_p=1.0, mu_mm=1.0, mu_sub6=1.0, p_a=0.5)
    assert p.lam == 0.0


# -------------------------------------------------------------------- events


def test_apply_event_examples():
    assert apply_event(SystemState4D(0, 0, 0, 0), Event.ARRIVAL).astuple() == (1, 0, 0, 0)
    # transfer moves the processing packet into the mmWave queue
    assert apply_event(
        SystemState4D(2, 1, 3, 0), Event.PROCESSING_DONE
    ).astuple() == (2, 0, 4, 0)
    # empty mmWave queue: the departure is a dummy
    s = SystemState4D(1, 0, 0, 1)
    assert apply_event(s, Event.MM_DEPARTURE) == s


def test_event_counting_invariant():
    for s in small_states():
        for e in Event:
            d = apply_event(s, e).total - s.total
            assert d in (-1, 0, 1)
            if d == 1:
                assert e is Event.ARRIVAL
            if e is Event.ARRIVAL:
                assert d == 1


def test_dummy_departures_are_identity():
    for s in small_states():
        if s.q1 == 0:
            assert apply_event(s, Event.MM_DEPARTURE) == s
        if s.l2 == 0:
            assert apply_event(s, Event.SUB6_DEPARTURE) == s


def test_transfer_preserves_fastpath_and_total():
    for s in small_states():
        t = apply_event(s, Event.PROCESSING_DONE)
        assert t.total == s.total
        assert t.fastpath == s.fastpath
        assert t.l1 == 0


def test_collapse_commutes_with_departures():
    for s in small_states():
        for e in (Event.MM_DEPARTURE, Event.SUB6_DEPARTURE):
            t = apply_event(s, e)
            c = s.collapse()
            if e is Event.MM_DEPARTURE:
                cc = CollapsedState(c.x, max(c.q1 - 1, 0), c.l2)
            else:
                cc = CollapsedState(c.x, c.q1, 0)
            assert t.collapse() == cc


# -------------------------------------------------------------------- actions


def test_admissible_examples():
    assert admissible_actions(SystemState4D(0, 0, 0, 0)) == {Action.HOLD}
    assert admissible_actions(SystemState4D(2, 0, 0, 0)) == {
        Action.HOLD,
        Action.SCHEDULE_MM,
        Action.SCHEDULE_SUB6,
        Action.SCHEDULE_BOTH,
    }
    assert admissible_actions(SystemState4D(0, 1, 1, 0)) == {
        Action.HOLD,
        Action.RENEGE_PROCESSING,
        Action.RENEGE_MM_QUEUE,
    }


def test_admissibility_rules_exhaustive():
    for s in small_states():
        acts = admissible_actions(s)
        assert Action.HOLD in acts
        assert (Action.SCHEDULE_MM in acts) == (s.q0 >= 1 and s.l1 == 0)
        assert (Action.SCHEDULE_SUB6 in acts) == (s.q0 >= 1 and s.l2 == 0)
        assert (Action.SCHEDULE_BOTH in acts) == (
            s.q0 >= 2 and s.l1 == 0 and s.l2 == 0
        )
        assert (Action.RENEGE_PROCESSING in acts) == (s.l1 == 1 and s.l2 == 0)
        assert (Action.RENEGE_MM_QUEUE in acts) == (s.q1 >= 1 and s.l2 == 0)


def test_apply_action_examples():
    assert apply_action(
        SystemState4D(1, 0, 2, 0), Action.SCHEDULE_MM
    ).astuple() == (0, 1, 2, 0)
    assert apply_action(
        SystemState4D(0, 1, 3, 0), Action.RENEGE_PROCESSING
    ).astuple() == (0, 0, 3, 1)
    s = SystemState4D(5, 1, 0, 1)
    assert apply_action(s, Action.HOLD) == s


def test_apply_action_rejects_inadmissible():
    with pytest.raises(InadmissibleAction):
        apply_action(SystemState4D(0, 0, 0, 0), Action.SCHEDULE_MM)
    with pytest.raises(InadmissibleAction):
        apply_action(SystemState4D(1, 0, 0, 1), Action.SCHEDULE_SUB6)


def test_conservation_invariant():
    for s in small_states():
        for a in admissible_actions(s):
            assert apply_action(s, a).total == s.total


def test_renege_consistency():
    for s in small_states():
        if Action.RENEGE_PROCESSING in admissible_actions(s):
            t = apply_action(s, Action.RENEGE_PROCESSING)
            assert (t.q0, t.l1, t.q1, t.l2) == (s.q0, 0, s.q1, 1)


def test_resolve_renege_prefers_processing():
    assert resolve_renege(SystemState4D(0, 1, 1, 0)) is Action.RENEGE_PROCESSING
    assert resolve_renege(SystemState4D(0, 0, 2, 0)) is Action.RENEGE_MM_QUEUE
    with pytest.raises(InadmissibleAction):
        resolve_renege(SystemState4D(3, 0, 0, 0))


# ------------------------------------------------------------- normalization


def test_uniformize_heavy_traffic():
    p, big = uniformize(RateParams(**PAPER))
    assert big == pytest.approx(206.0)
    assert p.lam == pytest.approx(45.0 / 206.0)
    assert p.mu_p == pytest.approx(100.0 / 206.0)
    assert p.mu_sub6 == pytest.approx(1.0 / 206.0)
    assert p.p_a == 0.6
    assert p.is_uniformized


def test_uniformize_idempotent():
    p, _ = uniformize(RateParams(**PAPER))
    q, big = uniformize(p)
    assert big == pytest.approx(1.0)
    assert q.lam == pytest.approx(p.lam)
    assert q.mu_mm == pytest.approx(p.mu_mm)


def test_uniformize_already_normalized():
    raw = RateParams(lam=0.2, mu_p=0.3, mu_mm=0.8, mu_sub6=0.1, p_a=0.5)
    p, big = uniformize(raw)
    assert big == pytest.approx(1.0)
    for name in ("lam", "mu_p", "mu_mm", "mu_sub6"):
        assert getattr(p, name) == pytest.approx(getattr(raw, name))


def test_uniformize_preserves_ratios():
    raw = RateParams(lam=7.0, mu_p=3.0, mu_mm=11.0, mu_sub6=2.0, p_a=0.25)
    p, big = uniformize(raw)
    assert p.lam / p.mu_p == pytest.approx(raw.lam / raw.mu_p)
    assert p.mu_mm / p.mu_sub6 == pytest.approx(raw.mu_mm / raw.mu_sub6)
    assert big == pytest.approx(raw.total_rate)
    assert p.total_rate == pytest.approx(1.0)


def test_uniformize_requires_arrivals():
    with pytest.raises(NonPositiveRate):
        uniformize(RateParams(lam=0.0, mu_p=1.0, mu_mm=1.0, mu_sub6=1.0, p_a=0.5))


# ------------------------------------------------ assumption and stability


def test_fastpath_assumption_examples():
    assert check_fastpath_assumption(RateParams(**PAPER))
    slow = RateParams(lam=1.0, mu_p=2.0, mu_mm=2.0, mu_sub6=1.0, p_a=0.5)
    assert not check_fastpath_assumption(slow)
    # boundary must fail the strict inequality; dyadic rates keep it exact
    # (1/(0.5*8) + 1/4 = 0.5 = 1/2, no rounding)
    edge = RateParams(lam=1.0, mu_p=4.0, mu_mm=8.0, mu_sub6=2.0, p_a=0.5)
    assert not check_fastpath_assumption(edge)
    # the check ignores normalization
    assert check_fastpath_assumption(uniformize(RateParams(**PAPER))[0])


def test_fastpath_assumption_blocked_channel():
    p = RateParams(lam=1.0, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.0)
    assert not check_fastpath_assumption(p)


def test_stability_examples():
    r = stability_region(RateParams(lam=60.0, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.6))
    assert r.border_lambda == pytest.approx(61.0)
    assert r.stable_with_sub6
    # lam sits exactly on the mmWave-only capacity, and the region is open
    assert not r.stable_without_sub6
    r = stability_region(
        RateParams(lam=59.9, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.6)
    )
    assert r.stable_without_sub6
    r = stability_region(RateParams(lam=61.0, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.6))
    assert not r.stable_with_sub6
    r = stability_region(RateParams(lam=0.0, mu_p=100.0, mu_mm=100.0, mu_sub6=1.0, p_a=0.6))
    assert r.stable_with_sub6 and r.stable_without_sub6


def test_stability_scale_invariant():
    raw = RateParams(**PAPER)
    r_raw = stability_region(raw)
    r_norm = stability_region(uniformize(raw)[0])
    assert r_raw.stable_with_sub6 == r_norm.stable_with_sub6
    assert r_raw.stable_without_sub6 == r_norm.stable_without_sub6
    assert math.isclose(r_norm.border_lambda * 206.0, r_raw.border_lambda)
