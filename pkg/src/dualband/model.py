"""State space, events, actions, and rate bookkeeping for a dual-interface downlink.

Packets wait in an infinite head buffer and can be dispatched either onto a
fast path (a processing server feeding an mmWave transmit queue that drains
only while the mmWave channel is available, probability ``p_a`` per slot) or
onto a slow but always-available sub-6 GHz server that holds at most one
packet.  The continuous-time dynamics are uniformized: total event rate is
scaled to 1 and every discrete slot carries exactly one event, possibly a
dummy (a "departure" from an empty server is a no-op, implemented by the
clamping in apply_event).

All types are immutable values and all operations are pure functions, so
everything here is safe to share across worker threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

# Tolerance on |sum of rates - 1| below which params count as uniformized.
# Raw event rates are at most a few hundred in every scenario of interest,
# so dividing by the total loses well under 1e-12 of relative precision.
NORMALIZATION_TOL = 1e-12


class NonPositiveRate(ValueError):
    """A rate that must be positive is zero or negative."""


class InadmissibleAction(ValueError):
    """An action was applied in a state where its admissibility condition fails."""


class ParamsNotUniformized(ValueError):
    """The operation needs rates summing to 1; call uniformize() first."""


class AssumptionViolated(ValueError):
    """The fast-path speed premise does not hold for the supplied rates."""


class Event(Enum):
    """The four event types of the uniformized chain, exhaustive."""

    ARRIVAL = "arrival"
    PROCESSING_DONE = "processing_done"
    MM_DEPARTURE = "mm_departure"
    SUB6_DEPARTURE = "sub6_departure"


class Action(Enum):
    """Scheduling decisions applied between events.

    The two renege members jointly realize the composite "move a fast-path
    packet to the idle sub-6 server"; resolve_renege picks between them.
    """

    HOLD = "hold"
    SCHEDULE_MM = "schedule_mm"
    SCHEDULE_SUB6 = "schedule_sub6"
    SCHEDULE_BOTH = "schedule_both"
    RENEGE_PROCESSING = "renege_processing"
    RENEGE_MM_QUEUE = "renege_mm_queue"


@dataclass(frozen=True, slots=True)
class SystemState4D:
    """Full state (q0, l1, q1, l2).

    q0: packets in the head buffer; l1: processing server busy flag;
    q1: packets in the mmWave queue; l2: sub-6 server busy flag.
    """

    q0: int
    l1: int
    q1: int
    l2: int

    def __post_init__(self) -> None:
        if self.q0 < 0 or self.q1 < 0:
            raise ValueError(f"negative queue length in {self!r}")
        if self.l1 not in (0, 1) or self.l2 not in (0, 1):
            raise ValueError(f"server flags must be 0 or 1 in {self!r}")

    @property
    def total(self) -> int:
        """Packets in the system; the per-slot holding cost."""
        return self.q0 + self.l1 + self.q1 + self.l2

    @property
    def fastpath(self) -> int:
        """Occupancy of head buffer + processing server + mmWave queue."""
        return self.q0 + self.l1 + self.q1

    def collapse(self) -> CollapsedState:
        return CollapsedState(self.q0 + self.l1, self.q1, self.l2)

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.q0, self.l1, self.q1, self.l2)


@dataclass(frozen=True, slots=True)
class CollapsedState:
    """Reduced state (x, q1, l2) with x = head buffer + processing server.

    Valid whenever the processing server is kept busy while head-buffer
    packets are present (x >= 1 implies l1 = 1 in the matching full state);
    the optimal policy always operates in that regime.
    """

    x: int
    q1: int
    l2: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.q1 < 0:
            raise ValueError(f"negative queue length in {self!r}")
        if self.l2 not in (0, 1):
            raise ValueError(f"sub-6 flag must be 0 or 1 in {self!r}")

    @property
    def total(self) -> int:
        return self.x + self.q1 + self.l2

    @property
    def fastpath(self) -> int:
        """Fast-path occupancy y = x + q1, the threshold variable."""
        return self.x + self.q1

    def astuple(self) -> tuple[int, int, int]:
        return (self.x, self.q1, self.l2)


@dataclass(frozen=True, slots=True)
class RateParams:
    """Event rates plus the discount factor.

    lam may be zero (useful for no-load edge cases); service rates must be
    strictly positive.  Stored raw or uniformized; is_uniformized tells which.
    """

    lam: float
    mu_p: float
    mu_mm: float
    mu_sub6: float
    p_a: float
    beta: float = 0.999

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise NonPositiveRate(f"lam must be >= 0, got {self.lam}")
        for name in ("mu_p", "mu_mm", "mu_sub6"):
            if getattr(self, name) <= 0:
                raise NonPositiveRate(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.p_a <= 1.0:
            raise ValueError(f"p_a must lie in [0, 1], got {self.p_a}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")

    @property
    def p_na(self) -> float:
        """Probability the mmWave channel is unavailable."""
        return 1.0 - self.p_a

    @property
    def mm_effective(self) -> float:
        """Effective mmWave drain rate p_a * mu_mm."""
        return self.p_a * self.mu_mm

    @property
    def total_rate(self) -> float:
        return self.lam + self.mu_p + self.p_a * self.mu_mm + self.mu_sub6

    @property
    def is_uniformized(self) -> bool:
        return abs(self.total_rate - 1.0) <= NORMALIZATION_TOL

    def require_uniformized(self) -> None:
        if not self.is_uniformized:
            raise ParamsNotUniformized(
                f"rates sum to {self.total_rate!r}, expected 1; call uniformize()"
            )


def uniformize(raw: RateParams) -> tuple[RateParams, float]:
    """Scale all rates by the total event rate Lambda so they sum to 1.

    Returns (scaled params, Lambda); Lambda converts slot counts back to real
    time (one slot lasts 1/Lambda time units on average).  p_a and beta are
    dimensionless and stay untouched.  Idempotent: already-normalized input
    comes back unchanged with Lambda = 1.
    """
    if raw.lam <= 0:
        raise NonPositiveRate("uniformize needs lam > 0")
    if raw.is_uniformized:
        return raw, 1.0
    big = raw.total_rate
    scaled = RateParams(
        lam=raw.lam / big,
        mu_p=raw.mu_p / big,
        mu_mm=raw.mu_mm / big,
        mu_sub6=raw.mu_sub6 / big,
        p_a=raw.p_a,
        beta=raw.beta,
    )
    return scaled, big


def apply_event(s: SystemState4D, e: Event) -> SystemState4D:
    """Post-event state; clamps make every event applicable everywhere.

    ARRIVAL adds to the head buffer.  PROCESSING_DONE hands the processed
    packet to the mmWave queue (no-op when the processing server is idle).
    MM_DEPARTURE / SUB6_DEPARTURE remove a packet if one is present, else are
    dummies.  Total count changes by +1 (arrival), -1 (real departure), or 0.
    """
    if e is Event.ARRIVAL:
        return SystemState4D(s.q0 + 1, s.l1, s.q1, s.l2)
    if e is Event.PROCESSING_DONE:
        return SystemState4D(s.q0, max(s.l1 - 1, 0), s.l1 + s.q1, s.l2)
    if e is Event.MM_DEPARTURE:
        return SystemState4D(s.q0, s.l1, max(s.q1 - 1, 0), s.l2)
    return SystemState4D(s.q0, s.l1, s.q1, max(s.l2 - 1, 0))


def admissible_actions(s: SystemState4D) -> frozenset[Action]:
    """Actions allowed in s; HOLD is always allowed."""
    out = {Action.HOLD}
    if s.q0 >= 1 and s.l1 == 0:
        out.add(Action.SCHEDULE_MM)
    if s.q0 >= 1 and s.l2 == 0:
        out.add(Action.SCHEDULE_SUB6)
    if s.q0 >= 2 and s.l1 == 0 and s.l2 == 0:
        out.add(Action.SCHEDULE_BOTH)
    if s.l1 == 1 and s.l2 == 0:
        out.add(Action.RENEGE_PROCESSING)
    if s.q1 >= 1 and s.l2 == 0:
        out.add(Action.RENEGE_MM_QUEUE)
    return frozenset(out)


def apply_action(s: SystemState4D, a: Action) -> SystemState4D:
    """Post-action state; every action preserves the total packet count."""
    if a is Action.HOLD:
        return s
    if a not in admissible_actions(s):
        raise InadmissibleAction(f"{a.name} not admissible in {s.astuple()}")
    if a is Action.SCHEDULE_MM:
        return SystemState4D(s.q0 - 1, 1, s.q1, s.l2)
    if a is Action.SCHEDULE_SUB6:
        return SystemState4D(s.q0 - 1, s.l1, s.q1, 1)
    if a is Action.SCHEDULE_BOTH:
        return SystemState4D(s.q0 - 2, 1, s.q1, 1)
    if a is Action.RENEGE_PROCESSING:
        return SystemState4D(s.q0, 0, s.q1, 1)
    return SystemState4D(s.q0, s.l1, s.q1 - 1, 1)


def resolve_renege(s: SystemState4D) -> Action:
    """Pick the concrete renege variant: the processing server empties first.

    Moving the processing-server packet dominates moving a queued one (the
    hand-off it skips can only help), so when both variants are admissible
    the composite renege resolves to RENEGE_PROCESSING.
    """
    acts = admissible_actions(s)
    if Action.RENEGE_PROCESSING in acts:
        return Action.RENEGE_PROCESSING
    if Action.RENEGE_MM_QUEUE in acts:
        return Action.RENEGE_MM_QUEUE
    raise InadmissibleAction(f"no renege variant admissible in {s.astuple()}")


def check_fastpath_assumption(p: RateParams) -> bool:
    """True iff an empty fast path beats an empty sub-6 server in expectation.

    Condition: 1/(p_a*mu_mm) + 1/mu_p < 1/mu_sub6 (strict).  Scale-invariant,
    so raw and uniformized params give the same answer.
    """
    if p.p_a == 0.0:
        return False
    return 1.0 / (p.p_a * p.mu_mm) + 1.0 / p.mu_p < 1.0 / p.mu_sub6


@dataclass(frozen=True, slots=True)
class StabilityRegion:
    """Stability verdicts for a rate point, plus the capacity border."""

    stable_with_sub6: bool
    stable_without_sub6: bool
    border_lambda: float


def stability_region(p: RateParams) -> StabilityRegion:
    """Capacity check: the integrated system serves at rate mu_sub6 + p_a*mu_mm,
    the mmWave-only system at p_a*mu_mm (the processing stage, being faster,
    is never the bottleneck under the fast-path assumption).
    """
    border = p.mu_sub6 + p.p_a * p.mu_mm
    return StabilityRegion(
        stable_with_sub6=p.lam < border,
        stable_without_sub6=p.lam < p.p_a * p.mu_mm,
        border_lambda=border,
    )
