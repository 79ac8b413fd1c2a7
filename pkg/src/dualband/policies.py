"""Concrete scheduling policies over full states.

threshold_decide implements the five-case threshold rule: keep work on the
fast path while its occupancy is at most m, start adding to the sub-6 server
once it exceeds m (from the head buffer when possible, by reneging when the
head buffer is empty).  maxweight_decide is a backpressure baseline; it
routes at most one head-buffer packet per decision and never reneges.
mmwave_only_decide ignores the sub-6 server entirely, modelling a system
that has no fallback interface.

Every policy returns exactly one action for one state.  threshold_decide and
mmwave_only_decide settle under apply_policy_to_fixpoint after at most one
non-hold action.  maxweight_decide routes one packet per decision epoch by
contract, so simulations step it with maxweight_step rather than the fixpoint
wrapper (which would greedily fill both idle servers in the same epoch).
"""

from __future__ import annotations

from typing import Callable

from .model import Action, RateParams, SystemState4D, apply_action

DecideFn = Callable[[SystemState4D], Action]


class PolicyLoop(RuntimeError):
    """A decide function kept returning non-hold actions; the policy is ill-formed."""


def threshold_decide(s: SystemState4D, m: int) -> Action:
    """Threshold rule with parameter m on fast-path occupancy q0 + l1 + q1."""
    if m < 0:
        raise ValueError(f"threshold must be >= 0, got {m}")
    q0, l1, q1, l2 = s.q0, s.l1, s.q1, s.l2
    if q0 >= 1 and l1 == 0 and (l2 == 1 or q0 + q1 <= m):
        return Action.SCHEDULE_MM
    if l2 == 0:
        if (q0 >= 1 and l1 == 1 and q0 + q1 + 1 > m) or (q0 == 1 and l1 == 0 and q1 >= m):
            return Action.SCHEDULE_SUB6
        if q0 == 0 and l1 + q1 > m:
            # head buffer empty: renege, emptying the processing server first
            return Action.RENEGE_PROCESSING if l1 == 1 else Action.RENEGE_MM_QUEUE
        if q0 >= 2 and l1 == 0 and q0 + q1 > m:
            return Action.SCHEDULE_BOTH
    return Action.HOLD


def maxweight_decide(s: SystemState4D, p: RateParams) -> Action:
    """Backpressure routing of one head-buffer packet.

    Weight of a destination = (queue differential) * (service rate), with the
    mmWave side using the effective rate p_a * mu_mm and counting l1 + q1 as
    its backlog, the sub-6 side counting l2.  The largest strictly positive
    weight wins; exact ties go to mmWave; nothing positive means hold.
    """
    w_mm = float("-inf")
    w_sub = float("-inf")
    if s.q0 >= 1 and s.l1 == 0:
        w_mm = (s.q0 - (s.l1 + s.q1)) * p.mm_effective
    if s.q0 >= 1 and s.l2 == 0:
        w_sub = (s.q0 - s.l2) * p.mu_sub6
    if w_mm > 0.0 and w_mm >= w_sub:
        return Action.SCHEDULE_MM
    if w_sub > 0.0:
        return Action.SCHEDULE_SUB6
    return Action.HOLD


def maxweight_step(s: SystemState4D, p: RateParams) -> SystemState4D:
    """One backpressure decision epoch: route at most one packet, then stop."""
    a = maxweight_decide(s, p)
    return s if a is Action.HOLD else apply_action(s, a)


def mmwave_only_decide(s: SystemState4D) -> Action:
    """Schedule onto the processing server whenever possible; sub-6 never used."""
    if s.q0 >= 1 and s.l1 == 0:
        return Action.SCHEDULE_MM
    return Action.HOLD


def apply_policy_to_fixpoint(s: SystemState4D, decide: DecideFn) -> SystemState4D:
    """Apply decide repeatedly until it holds.

    threshold_decide and mmwave_only_decide settle within one non-hold action
    (each fills a previously idle server or removes the single excess packet).
    Do not use this for maxweight_decide: its per-epoch contract is one routed
    packet, and re-asking would fill the second idle server in the same epoch.

    More than 4 non-hold actions cannot happen for any sane policy (there are
    two servers to fill and reneging frees at most one slot), so that raises.
    """
    steps = 0
    while True:
        a = decide(s)
        if a is Action.HOLD:
            return s
        steps += 1
        if steps > 4:
            raise PolicyLoop(f"more than 4 non-hold actions, now at {s.astuple()}")
        s = apply_action(s, a)
