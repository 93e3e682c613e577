"""End-to-end replay of a labeled trace through the detector.

Each request is the tail of the Msg1/Msg2/Msg3 exchange: the detector sees a
copy, answers accept or reject, and the outcome is recorded against the
event's ground-truth label so detection and false-alarm probabilities can be
computed afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import groupby
from typing import Optional, Sequence

from .config import ScoringMode
from .core import (
    SECONDS_PER_DAY,
    Decision,
    Label,
    RsrEvent,
    Verdict,
    slot_of,
    slots_per_day,
)
from .detector import DetectorConfig, DetectorState, Policy, anomaly_score, on_rsr
from .profiler import KpiProfile
from .traffic import Burst


@dataclass
class RunReport:
    """Everything one replay produced: per-event verdicts, flags, policies."""

    gamma: float
    sigma_floor: float
    scoring_mode: ScoringMode
    interval_seconds: int
    max_ta: int
    horizon_days: int
    events: list[RsrEvent]
    verdicts: list[Verdict]
    flagged: set[tuple[int, int, int]]
    policies: list[Policy]

    @property
    def intervals_total(self) -> int:
        return self.horizon_days * slots_per_day(self.interval_seconds)


@dataclass(frozen=True)
class Metrics:
    """Detection and false-alarm probabilities plus the raw counts behind them.

    ``p_detection`` is None when the run saw no attack bursts at all.
    """

    p_detection: Optional[float]
    p_false_alarm: float
    p_false_alarm_per_cell: float
    numerators: dict
    denominators: dict


def _check_order(trace: Sequence[RsrEvent]) -> None:
    previous = 0.0
    for event in trace:
        if event.time_s < previous:
            raise ValueError("trace must be sorted by time")
        previous = event.time_s


def _run_per_rsr(
    trace: Sequence[RsrEvent], profile: KpiProfile, config: DetectorConfig
) -> tuple[list[Verdict], list[Policy]]:
    state = DetectorState()
    verdicts = [on_rsr(event, profile, config, state) for event in trace]
    return verdicts, state.policy_log


def _run_interval_end(
    trace: Sequence[RsrEvent], profile: KpiProfile, config: DetectorConfig
) -> tuple[list[Verdict], list[Policy]]:
    """Batch variant: score each cell once on its full interval count.

    All events of a flagged cell are marked rejected retrospectively; the
    attached anomaly value is the cell's end-of-interval score.
    """
    verdicts: list[Verdict] = []
    policies: list[Policy] = []
    for slot, group in groupby(trace, key=lambda e: slot_of(e.time_s, profile.interval_seconds)):
        events = list(group)
        counts: dict[int, int] = {}
        for event in events:
            if event.ta > profile.max_ta:
                raise ValueError(
                    f"event TA {event.ta} outside profile range 0..{profile.max_ta}; "
                    "geometry and profile configuration disagree"
                )
            counts[event.ta] = counts.get(event.ta, 0) + 1
        scores: dict[int, float] = {}
        flagged: set[int] = set()
        interval_end_s = float(slot.day * SECONDS_PER_DAY + (slot.slot_of_day + 1) * profile.interval_seconds)
        for ta in sorted(counts):
            mean, std = profile.lookup(slot.slot_of_day, ta)
            scores[ta] = anomaly_score(counts[ta], mean, std, config.sigma_floor)
            if scores[ta] > config.gamma:
                flagged.add(ta)
                policies.append(
                    Policy(ta=ta, day=slot.day, slot_of_day=slot.slot_of_day, issued_at_s=interval_end_s)
                )
        for event in events:
            decision = Decision.REJECT if event.ta in flagged else Decision.ACCEPT
            verdicts.append(Verdict(decision=decision, anomaly=scores[event.ta]))
    return verdicts, policies


def run(
    trace: Sequence[RsrEvent],
    profile: KpiProfile,
    config: DetectorConfig,
    horizon_days: int,
    scoring_mode: ScoringMode = ScoringMode.PER_RSR,
) -> RunReport:
    """Feed every event through the detector in time order; fully deterministic."""
    if horizon_days < 1:
        raise ValueError(f"horizon_days must be at least 1, got {horizon_days!r}")
    if trace and trace[-1].time_s >= horizon_days * SECONDS_PER_DAY:
        raise ValueError("trace extends past the declared horizon")
    _check_order(trace)
    if scoring_mode is ScoringMode.PER_RSR:
        verdicts, policies = _run_per_rsr(trace, profile, config)
    else:
        verdicts, policies = _run_interval_end(trace, profile, config)
    flagged = {(p.day, p.slot_of_day, p.ta) for p in policies}
    return RunReport(
        gamma=config.gamma,
        sigma_floor=config.sigma_floor,
        scoring_mode=scoring_mode,
        interval_seconds=profile.interval_seconds,
        max_ta=profile.max_ta,
        horizon_days=horizon_days,
        events=list(trace),
        verdicts=verdicts,
        flagged=flagged,
        policies=policies,
    )


def compute_metrics(report: RunReport, bursts: Sequence[Burst]) -> Metrics:
    """Detection and false-alarm probabilities for one run.

    A burst counts as detected when at least one of its events was rejected;
    the denominator is every burst with at least one event inside the
    horizon. A false alarm is an interval instance with at least one flagged
    TA whose cell received zero attack events; intervals are counted over the
    whole horizon, including empty ones. The per-cell rate is co-reported
    with (intervals x TA bins) as denominator.
    """
    attack_cells: set[tuple[int, int, int]] = set()
    detected: set[int] = set()
    attack_events = 0
    rejected_attack_events = 0
    for event, verdict in zip(report.events, report.verdicts):
        if event.label is not Label.ATTACK:
            continue
        attack_events += 1
        slot = slot_of(event.time_s, report.interval_seconds)
        attack_cells.add((slot.day, slot.slot_of_day, event.ta))
        if verdict.decision is Decision.REJECT:
            rejected_attack_events += 1
            detected.add(event.burst_id)

    bursts_with_events = sum(1 for b in bursts if b.count > 0)
    false_cells = {cell for cell in report.flagged if cell not in attack_cells}
    fa_intervals = {(day, slot) for day, slot, _ta in false_cells}

    intervals_total = report.intervals_total
    cells_total = intervals_total * (report.max_ta + 1)
    p_detection = len(detected) / bursts_with_events if bursts_with_events else None
    return Metrics(
        p_detection=p_detection,
        p_false_alarm=len(fa_intervals) / intervals_total,
        p_false_alarm_per_cell=len(false_cells) / cells_total,
        numerators={
            "detected_bursts": len(detected),
            "false_alarm_intervals": len(fa_intervals),
            "false_alarm_cells": len(false_cells),
            "rejected_attack_events": rejected_attack_events,
        },
        denominators={
            "bursts": bursts_with_events,
            "intervals": intervals_total,
            "cells": cells_total,
            "attack_events": attack_events,
        },
    )


def write_policy_log(path, policies: Sequence[Policy]) -> None:
    """Emit policies as JSONL records: {time_s, slot, ta, action}."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for policy in policies:
            record = {
                "time_s": policy.issued_at_s,
                "slot": policy.slot_of_day,
                "ta": policy.ta,
                "action": "reject_all_ta",
            }
            fh.write(json.dumps(record, separators=(",", ":")))
            fh.write("\n")


def write_summary(path, gamma: float, metrics: Metrics) -> None:
    """Single-run summary JSON with both false-alarm variants and raw counts."""
    summary = {
        "gamma": gamma,
        "p_detection": metrics.p_detection,
        "p_false_alarm": metrics.p_false_alarm,
        "p_false_alarm_per_cell": metrics.p_false_alarm_per_cell,
        "numerators": metrics.numerators,
        "denominators": metrics.denominators,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
