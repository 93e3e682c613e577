import math
from dataclasses import replace

import numpy as np

from stormsim import (
    Decision,
    DetectorConfig,
    SweepResult,
    SweepRow,
    build_score_cache,
    build_trace,
    compute_metrics,
    metrics_at,
    run,
    run_experiment,
    train_profile_for,
    write_sweep_csv,
)
from stormsim.sweep import SWEEP_CSV_HEADER


class TestRunExperiment:
    def test_rows_sorted_and_monotone(self, small_config):
        result = run_experiment(small_config)
        gammas = [row.gamma for row in result.rows]
        assert gammas == sorted(gammas)
        assert len(result.rows) == len(small_config.gamma_grid)
        for earlier, later in zip(result.rows, result.rows[1:]):
            assert later.p_detection <= earlier.p_detection
            assert later.p_false_alarm <= earlier.p_false_alarm
            assert later.p_false_alarm_per_cell <= earlier.p_false_alarm_per_cell

    def test_infinite_gamma_row(self, small_config):
        config = replace(small_config, gamma_grid=(float("inf"),))
        result = run_experiment(config)
        assert len(result.rows) == 1
        assert result.rows[0].p_false_alarm == 0.0
        assert result.rows[0].p_detection == 0.0

    def test_supplying_profile_skips_training(self, small_config):
        profile = train_profile_for(small_config)
        a = run_experiment(small_config)
        b = run_experiment(small_config, profile=profile)
        assert a == b

    def test_deterministic(self, small_config):
        assert run_experiment(small_config) == run_experiment(small_config)

    def test_intervals_total(self, small_config):
        result = run_experiment(small_config)
        assert result.rows[0].intervals_total == small_config.eval_days * 288


class TestCacheVsReplay:
    def test_thresholding_equals_sequential_replay(self, small_config):
        profile = train_profile_for(small_config)
        trace, bursts, _ = build_trace(
            small_config, seed=small_config.seed_eval, days=2, include_attacks=True
        )
        cache = build_score_cache(trace, bursts, profile, small_config.sigma_floor, 2)
        for gamma in (0.0, 2.0, 6.5):
            report = run(trace, profile, DetectorConfig(gamma=gamma), horizon_days=2)
            replay_scores = np.array([v.anomaly for v in report.verdicts])
            assert np.array_equal(replay_scores, cache.scores)
            replay_rejects = np.array(
                [v.decision is Decision.REJECT for v in report.verdicts]
            )
            assert np.array_equal(replay_rejects, cache.scores > gamma)
            metrics = compute_metrics(report, bursts)
            row = metrics_at(cache, gamma)
            assert row.p_detection == metrics.p_detection
            assert row.p_false_alarm == metrics.p_false_alarm
            assert row.p_false_alarm_per_cell == metrics.p_false_alarm_per_cell


class TestSweepCsv:
    def test_header_and_rows(self, small_config, tmp_path):
        result = run_experiment(small_config)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == SWEEP_CSV_HEADER
        assert len(lines) == 1 + len(result.rows)

    def test_empty_result(self, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv(SweepResult(rows=()), path)
        assert path.read_text() == SWEEP_CSV_HEADER + "\n"

    def test_round_trip_precision(self, tmp_path):
        rows = (
            SweepRow(
                gamma=1.5,
                p_detection=0.9231233333712,
                p_false_alarm=0.01518229166,
                p_false_alarm_per_cell=0.000147,
                bursts_total=293,
                intervals_total=5760,
            ),
        )
        path = tmp_path / "sweep.csv"
        write_sweep_csv(SweepResult(rows=rows), path)
        fields = path.read_text().splitlines()[1].split(",")
        assert float(fields[0]) == 1.5
        assert float(fields[1]) == 0.9231233333712
        assert float(fields[2]) == 0.01518229166
        assert float(fields[3]) == 0.000147
        assert int(fields[4]) == 293 and int(fields[5]) == 5760

    def test_undefined_p_detection_written_as_nan(self, tmp_path):
        rows = (
            SweepRow(
                gamma=0.0,
                p_detection=None,
                p_false_alarm=0.25,
                p_false_alarm_per_cell=0.01,
                bursts_total=0,
                intervals_total=576,
            ),
        )
        path = tmp_path / "sweep.csv"
        write_sweep_csv(SweepResult(rows=rows), path)
        fields = path.read_text().splitlines()[1].split(",")
        assert math.isnan(float(fields[1]))

    def test_bytes_deterministic(self, small_config, tmp_path):
        result = run_experiment(small_config)
        path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(result, path_a)
        write_sweep_csv(run_experiment(small_config), path_b)
        assert path_a.read_bytes() == path_b.read_bytes()


class TestNoAdversaries:
    def test_p_detection_undefined_in_rows(self, small_config):
        config = replace(
            small_config, attack=replace(small_config.attack, adversary_count=0)
        )
        result = run_experiment(config)
        assert all(row.p_detection is None for row in result.rows)
        assert all(row.bursts_total == 0 for row in result.rows)
