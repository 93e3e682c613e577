"""Cell geometry: radial device placement and distance-to-TA quantization.

Stationary devices keep one timing-advance index for the whole simulation,
so the TA bin acts as a stable per-device fingerprint. The quantization step
follows the NR MAC timing-advance granularity: 16 * 64 basic time units,
scaled down by the subcarrier numerology, halved once more because the
command covers the round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0
# NR basic time unit Tc = 1 / (480 kHz * 4096)
BASIC_TIME_UNIT_S = 1.0 / (480_000.0 * 4096.0)


@dataclass(frozen=True)
class TaQuantizer:
    """Maps gNB-device distance to an integer timing-advance index."""

    numerology_mu: int = 2

    def __post_init__(self) -> None:
        if self.numerology_mu not in (0, 1, 2, 3):
            raise ValueError(f"numerology_mu must be one of 0..3, got {self.numerology_mu!r}")

    @property
    def step_m(self) -> float:
        """One TA step in metres: ~78 m at mu=0, halving per numerology increment."""
        return (
            SPEED_OF_LIGHT_M_S
            * 16.0
            * 64.0
            * BASIC_TIME_UNIT_S
            / (2.0 * 2.0**self.numerology_mu)
        )


@dataclass(frozen=True)
class Position:
    """Radial distance to the gNB; the angle never matters for TA."""

    distance_m: float

    def __post_init__(self) -> None:
        if self.distance_m < 0:
            raise ValueError(f"distance_m must be non-negative, got {self.distance_m!r}")


def place_devices(count: int, cell_radius_m: float, rng: np.random.Generator) -> list[Position]:
    """Drop ``count`` devices i.i.d. uniform over the disk of the given radius.

    Uniform area density: radius = R * sqrt(u) with u uniform on [0, 1).
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count!r}")
    if cell_radius_m <= 0:
        raise ValueError(f"cell_radius_m must be positive, got {cell_radius_m!r}")
    radii = cell_radius_m * np.sqrt(rng.random(count))
    return [Position(float(r)) for r in radii]


def ta_index(distance_m: float, quantizer: TaQuantizer) -> int:
    """Quantize a distance to its TA index: floor(distance / step). Noiseless."""
    if distance_m < 0:
        raise ValueError(f"distance_m must be non-negative, got {distance_m!r}")
    return int(distance_m // quantizer.step_m)


def max_ta_index(cell_radius_m: float, quantizer: TaQuantizer) -> int:
    """Largest TA index reachable inside the cell; sizes the profile tables."""
    if cell_radius_m <= 0:
        raise ValueError(f"cell_radius_m must be positive, got {cell_radius_m!r}")
    return ta_index(cell_radius_m, quantizer)
