"""KPI profiles: per-(time-of-day slot, TA) mean and standard deviation of
interval request counts, learned from adversary-free traffic.

Profiles are dense (slots x TA bins) tables in memory and sparse non-zero
rows on disk, behind a one-line metadata header.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import SECONDS_PER_DAY, RsrEvent, slots_per_day


def count_per_interval(
    trace: Sequence[RsrEvent],
    interval_seconds: int,
    max_ta: int,
    days: int,
) -> np.ndarray:
    """Exact histogram of request counts per (day, slot-of-day, TA).

    Returns an int64 array of shape (days, slots_per_day, max_ta + 1); the
    sum over the whole table equals the trace length.
    """
    n_slots = slots_per_day(interval_seconds)
    if days < 1:
        raise ValueError(f"days must be at least 1, got {days!r}")
    shape = (days, n_slots, max_ta + 1)
    if not trace:
        return np.zeros(shape, dtype=np.int64)
    times = np.fromiter((e.time_s for e in trace), dtype=float, count=len(trace))
    tas = np.fromiter((e.ta for e in trace), dtype=np.int64, count=len(trace))
    if int(tas.max()) > max_ta:
        raise ValueError(
            f"event TA {int(tas.max())} exceeds max_ta={max_ta}; "
            "geometry and profile configuration disagree"
        )
    if float(times.min()) < 0.0 or float(times.max()) >= days * SECONDS_PER_DAY:
        raise ValueError(f"events must lie within [0, {days * SECONDS_PER_DAY}) seconds")
    day = (times // SECONDS_PER_DAY).astype(np.int64)
    slot = ((times % SECONDS_PER_DAY) // interval_seconds).astype(np.int64)
    flat = (day * n_slots + slot) * (max_ta + 1) + tas
    counts = np.bincount(flat, minlength=days * n_slots * (max_ta + 1))
    return counts.reshape(shape).astype(np.int64)


@dataclass
class CountAccumulator:
    """Streaming per-cell moments over day samples (Welford's update).

    After k days the cell mean equals the sample mean and m2 the sum of
    squared deviations, matching a two-pass computation to rounding error.
    """

    shape: tuple[int, int]
    days_seen: int = 0
    mean: np.ndarray = field(init=False)
    m2: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.mean = np.zeros(self.shape, dtype=float)
        self.m2 = np.zeros(self.shape, dtype=float)

    def add_day(self, day_counts: np.ndarray) -> None:
        day_counts = np.asarray(day_counts, dtype=float)
        if day_counts.shape != self.shape:
            raise ValueError(f"expected day table of shape {self.shape}, got {day_counts.shape}")
        self.days_seen += 1
        delta = day_counts - self.mean
        self.mean += delta / self.days_seen
        self.m2 += delta * (day_counts - self.mean)

    def std(self) -> np.ndarray:
        """Sample standard deviation (denominator n-1); zero below two days."""
        if self.days_seen < 2:
            return np.zeros(self.shape, dtype=float)
        return np.sqrt(self.m2 / (self.days_seen - 1))


@dataclass(eq=False)
class KpiProfile:
    """Long-term per-(slot-of-day, TA) count statistics from clean traffic."""

    interval_seconds: int
    max_ta: int
    training_days: int
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_slots(self) -> int:
        return slots_per_day(self.interval_seconds)

    def lookup(self, slot_of_day: int, ta: int) -> tuple[float, float]:
        return float(self.mean[slot_of_day, ta]), float(self.std[slot_of_day, ta])


def train(day_counts: np.ndarray) -> KpiProfile:
    """Fold per-day count tables into a profile.

    ``day_counts`` must be shaped (training_days, slots_per_day, max_ta + 1)
    and come from adversary-free traffic. With a single day all standard
    deviations are zero.
    """
    day_counts = np.asarray(day_counts)
    if day_counts.ndim != 3:
        raise ValueError("day_counts must be a (days, slots, ta) array")
    days, n_slots, n_ta = day_counts.shape
    if days < 1:
        raise ValueError("training requires at least one day of counts")
    if n_slots < 1 or SECONDS_PER_DAY % n_slots != 0:
        raise ValueError(f"slot axis of length {n_slots} does not divide the day")
    accumulator = CountAccumulator((n_slots, n_ta))
    for d in range(days):
        accumulator.add_day(day_counts[d])
    return KpiProfile(
        interval_seconds=SECONDS_PER_DAY // n_slots,
        max_ta=n_ta - 1,
        training_days=days,
        mean=accumulator.mean,
        std=accumulator.std(),
    )


def save_profile(profile: KpiProfile, path) -> None:
    """Write a profile as CSV: metadata comment, header, non-zero cells only."""
    lines = [
        f"#interval_seconds={profile.interval_seconds},"
        f"max_ta={profile.max_ta},training_days={profile.training_days}",
        "slot,ta,mean,std",
    ]
    nonzero = np.argwhere((profile.mean != 0.0) | (profile.std != 0.0))
    for slot, ta in nonzero:
        mean = float(profile.mean[slot, ta])
        std = float(profile.std[slot, ta])
        lines.append(f"{int(slot)},{int(ta)},{mean!r},{std!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_profile(path) -> KpiProfile:
    """Read a profile CSV back into dense tables; absent cells are zero."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing metadata line")
    meta: dict[str, int] = {}
    for part in lines[0][1:].split(","):
        key, _, value = part.partition("=")
        if not value:
            raise ValueError(f"{path}: malformed metadata entry {part!r}")
        try:
            meta[key.strip()] = int(value)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed metadata entry {part!r}") from exc
    missing = {"interval_seconds", "max_ta", "training_days"} - set(meta)
    if missing:
        raise ValueError(f"{path}: metadata missing {sorted(missing)}")
    if len(lines) < 2 or lines[1] != "slot,ta,mean,std":
        raise ValueError(f"{path}: missing or bad header line")

    interval_seconds = meta["interval_seconds"]
    max_ta = meta["max_ta"]
    n_slots = slots_per_day(interval_seconds)
    mean = np.zeros((n_slots, max_ta + 1), dtype=float)
    std = np.zeros((n_slots, max_ta + 1), dtype=float)
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            slot, ta = int(parts[0]), int(parts[1])
            cell_mean, cell_std = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
        if not (0 <= slot < n_slots and 0 <= ta <= max_ta):
            raise ValueError(f"{path}:{lineno}: cell ({slot}, {ta}) outside table bounds")
        if (slot, ta) in seen:
            raise ValueError(f"{path}:{lineno}: duplicate cell ({slot}, {ta})")
        seen.add((slot, ta))
        mean[slot, ta] = cell_mean
        std[slot, ta] = cell_std
    return KpiProfile(
        interval_seconds=interval_seconds,
        max_ta=max_ta,
        training_days=meta["training_days"],
        mean=mean,
        std=std,
    )
