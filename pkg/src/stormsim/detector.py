"""The detection core: running per-TA counts inside the current interval,
anomaly scoring against the KPI profile, flags and reject policies.

Scoring happens on every arriving request using the partial count of the
interval so far against the full-interval profile; partial counts are biased
low early in an interval, which makes the detector conservative rather than
trigger-happy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import Decision, RsrEvent, SlotIndex, Verdict, slot_of
from .profiler import KpiProfile


@dataclass(frozen=True)
class DetectorConfig:
    """Detection threshold plus the standard-deviation floor used in scoring."""

    gamma: float
    sigma_floor: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma_floor > 0:
            raise ValueError(f"sigma_floor must be positive, got {self.sigma_floor!r}")


@dataclass(frozen=True)
class Policy:
    """Interval-scoped blanket rejection of one TA bin."""

    ta: int
    day: int
    slot_of_day: int
    issued_at_s: float

    @property
    def text(self) -> str:
        return f"Reject all requests of TA={self.ta}"


def anomaly_score(count: int, mean: float, std: float, sigma_floor: float) -> float:
    """Deviation of the observed count from the profile, in floored-sigma units.

    The floor removes the division singularity of never-populated cells: with
    std below the floor the score is simply the raw excess count over the mean.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count!r}")
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std!r}")
    if not sigma_floor > 0:
        raise ValueError(f"sigma_floor must be positive, got {sigma_floor!r}")
    return (count - mean) / max(std, sigma_floor)


@dataclass
class DetectorState:
    """Mutable per-interval state: running counts, flags, issued policies.

    ``policy_log`` is an append-only history; a policy stops governing
    verdicts once its interval ends, but stays in the log for reporting.
    """

    slot: Optional[SlotIndex] = None
    counts: dict[int, int] = field(default_factory=dict)
    flagged: set[int] = field(default_factory=set)
    policy_log: list[Policy] = field(default_factory=list)

    def active_policies(self) -> list[Policy]:
        if self.slot is None:
            return []
        return [
            p for p in self.policy_log if (p.day, p.slot_of_day) == (self.slot.day, self.slot.slot_of_day)
        ]


def interval_rollover(state: DetectorState, new_slot: SlotIndex) -> None:
    """Advance to a strictly later interval: counts, flags and policies reset.

    Slots with no events are never visited, which is fine: an empty slot
    cannot raise an alarm anyway.
    """
    if state.slot is not None and new_slot <= state.slot:
        raise ValueError(f"rollover must move forward, got {state.slot} -> {new_slot}")
    state.slot = new_slot
    state.counts = {}
    state.flagged = set()


def on_rsr(
    event: RsrEvent,
    profile: KpiProfile,
    config: DetectorConfig,
    state: DetectorState,
) -> Verdict:
    """Process one request and decide accept/reject.

    Steps: roll the state over when the event opens a new interval, bump the
    running count for the event's TA, score it, flag the TA (and issue a
    policy) when the score exceeds gamma. The verdict is Reject exactly when
    the TA is flagged, so the request that crosses the threshold is itself
    rejected. Events must arrive in non-decreasing time order.
    """
    if event.ta > profile.max_ta:
        raise ValueError(
            f"event TA {event.ta} outside profile range 0..{profile.max_ta}; "
            "geometry and profile configuration disagree"
        )
    slot = slot_of(event.time_s, profile.interval_seconds)
    if state.slot is None or slot != state.slot:
        interval_rollover(state, slot)
    count = state.counts.get(event.ta, 0) + 1
    state.counts[event.ta] = count
    mean, std = profile.lookup(slot.slot_of_day, event.ta)
    score = anomaly_score(count, mean, std, config.sigma_floor)
    if score > config.gamma and event.ta not in state.flagged:
        state.flagged.add(event.ta)
        state.policy_log.append(
            Policy(ta=event.ta, day=slot.day, slot_of_day=slot.slot_of_day, issued_at_s=event.time_s)
        )
    decision = Decision.REJECT if event.ta in state.flagged else Decision.ACCEPT
    return Verdict(decision=decision, anomaly=score)
