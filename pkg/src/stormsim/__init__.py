"""stormsim: signaling-storm traffic simulator and TA-profile anomaly detector.

Generates legitimate and adversarial RRC-setup-request traffic in a single
5G IIoT cell, learns per-(time-of-day, timing-advance) KPI profiles from
clean days, scores live counts against them, and sweeps the detection
threshold to trade detection probability against false alarms.
"""

from .config import (
    AttackSpec,
    ConfigError,
    LegitTrafficSpec,
    ScenarioConfig,
    ScoringMode,
    config_from_dict,
    config_to_dict,
    parse_config,
)
from .core import (
    SECONDS_PER_DAY,
    Decision,
    Label,
    RsrEvent,
    SlotIndex,
    Verdict,
    read_trace,
    slot_of,
    slots_per_day,
    time_of_day,
    write_trace,
)
from .detector import DetectorConfig, DetectorState, Policy, anomaly_score, interval_rollover, on_rsr
from .geometry import Position, TaQuantizer, max_ta_index, place_devices, ta_index
from .pipeline import Metrics, RunReport, compute_metrics, run, write_policy_log, write_summary
from .profiler import (
    CountAccumulator,
    KpiProfile,
    count_per_interval,
    load_profile,
    save_profile,
    train,
)
from .sweep import (
    ScoreCache,
    SweepResult,
    SweepRow,
    build_score_cache,
    metrics_at,
    run_experiment,
    train_profile_for,
    write_sweep_csv,
)
from .traffic import (
    Burst,
    CellLayout,
    PlacedDevice,
    build_trace,
    derive_layout,
    diurnal_rate,
    gen_attack_bursts,
    gen_legit_events,
)

__version__ = "0.1.0"

__all__ = [
    "AttackSpec",
    "Burst",
    "CellLayout",
    "ConfigError",
    "CountAccumulator",
    "Decision",
    "DetectorConfig",
    "DetectorState",
    "KpiProfile",
    "Label",
    "LegitTrafficSpec",
    "Metrics",
    "PlacedDevice",
    "Policy",
    "Position",
    "RsrEvent",
    "RunReport",
    "ScenarioConfig",
    "ScoreCache",
    "ScoringMode",
    "SECONDS_PER_DAY",
    "SlotIndex",
    "SweepResult",
    "SweepRow",
    "TaQuantizer",
    "Verdict",
    "anomaly_score",
    "build_score_cache",
    "build_trace",
    "compute_metrics",
    "config_from_dict",
    "config_to_dict",
    "count_per_interval",
    "derive_layout",
    "diurnal_rate",
    "gen_attack_bursts",
    "gen_legit_events",
    "interval_rollover",
    "load_profile",
    "max_ta_index",
    "metrics_at",
    "on_rsr",
    "parse_config",
    "place_devices",
    "read_trace",
    "run",
    "run_experiment",
    "save_profile",
    "slot_of",
    "slots_per_day",
    "ta_index",
    "time_of_day",
    "train",
    "train_profile_for",
    "write_policy_log",
    "write_summary",
    "write_sweep_csv",
    "write_trace",
]
