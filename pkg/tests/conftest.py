import numpy as np
import pytest

from stormsim import AttackSpec, KpiProfile, LegitTrafficSpec, ScenarioConfig


@pytest.fixture
def small_config() -> ScenarioConfig:
    """Reduced scenario for fast end-to-end tests."""
    return ScenarioConfig(
        legit=LegitTrafficSpec(device_count=20),
        attack=AttackSpec(adversary_count=2),
        training_days=2,
        eval_days=2,
        gamma_grid=(0.0, 2.0, 6.5, 10.0),
        seed_train=11,
        seed_eval=22,
    )


def make_profile(
    interval_seconds: int = 300,
    max_ta: int = 10,
    training_days: int = 5,
    mean: np.ndarray | None = None,
    std: np.ndarray | None = None,
) -> KpiProfile:
    """Hand-built profile with explicit tables (zeros unless given)."""
    n_slots = 86400 // interval_seconds
    shape = (n_slots, max_ta + 1)
    return KpiProfile(
        interval_seconds=interval_seconds,
        max_ta=max_ta,
        training_days=training_days,
        mean=np.zeros(shape) if mean is None else mean,
        std=np.zeros(shape) if std is None else std,
    )
