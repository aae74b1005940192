"""Tests for the sweep harness and its CSV output."""

import numpy as np
import pytest

from radioprint.experiments import (
    EXPERIMENT_KINDS,
    NONIDEAL_RX,
    RX_MODES,
    ExperimentConfig,
    run_experiment,
    write_csv,
)
from radioprint.nist import TEST_NAMES

# smallest frame the blind estimator accepts, to keep these sweeps quick
TINY = dict(n_tx=5, n_train_iterations=3, frame_bits=16400, n_eval_frames=40, n_seeds=2)


@pytest.fixture(scope="module")
def fig6a_rows():
    cfg = ExperimentConfig(master_seed=11, **TINY)
    return run_experiment("fig6a", cfg, sweep=[3, 5], threads=2)


class TestConfig:
    def test_counts_validated(self):
        with pytest.raises(ValueError):
            ExperimentConfig(n_tx=0)
        with pytest.raises(ValueError):
            ExperimentConfig(n_seeds=0)
        with pytest.raises(ValueError):
            ExperimentConfig(ebn0_sigma_db=-1.0)

    def test_rx_mode_validated(self):
        with pytest.raises(ValueError, match="rx_mode"):
            ExperimentConfig(rx_mode="perfect")

    def test_param_spec_carries_the_sigma(self):
        spec = ExperimentConfig(ebn0_sigma_db=6.0).param_spec()
        assert spec.eb_n0_db.std == 6.0
        assert spec.eb_n0_db.mean == 15.0

    def test_nonideal_rx_is_one_sigma(self):
        assert NONIDEAL_RX.lo_offset_ppm == 8.3
        assert NONIDEAL_RX.iq_gain_imbalance_db == 1.0


class TestSweeps:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            run_experiment("fig99", ExperimentConfig())
        assert set(EXPERIMENT_KINDS) == {
            "fig6a", "fig6b", "fig6c", "fig6d", "fig6ef", "fig7", "fig10",
        }

    def test_rows_echo_the_resolved_point(self, fig6a_rows):
        assert [r["n_tx"] for r in fig6a_rows] == [3, 5]
        for r in fig6a_rows:
            assert r["kind"] == "fig6a"
            assert r["status"] == "ok"
            assert r["master_seed"] == 11
            assert 0.0 <= r["error_probability"] <= 1.0
            assert r["ci_low"] <= r["error_probability"] <= r["ci_high"]

    def test_thread_count_does_not_change_results(self, fig6a_rows):
        cfg = ExperimentConfig(master_seed=11, **TINY)
        again = run_experiment("fig6a", cfg, sweep=[3, 5], threads=1)
        assert again == fig6a_rows

    def test_failed_point_is_recorded_and_sweep_continues(self):
        cfg = ExperimentConfig(master_seed=11, **TINY)
        rows = run_experiment("fig6a", cfg, sweep=[0, 3], threads=2)
        assert rows[0]["status"].startswith("failed: ValueError")
        assert "error_probability" not in rows[0]
        assert rows[1]["status"] == "ok"

    def test_fixed_preamble_arm(self):
        cfg = ExperimentConfig(master_seed=7, **TINY)
        rows = run_experiment("fig6c", cfg, sweep=[1, 3], threads=2)
        assert [r["arm"] for r in rows] == ["payload", "payload", "fixed_preamble"]
        assert [r["n_train_iterations"] for r in rows] == [1, 3, 3]

    def test_fig6d_grid(self):
        cfg = ExperimentConfig(master_seed=5, **TINY)
        rows = run_experiment("fig6d", cfg, sweep=[2.0], threads=2)
        assert [(r["ebn0_sigma_db"], r["rrc_enabled"]) for r in rows] == [
            (2.0, True), (2.0, False),
        ]

    def test_fig10_covers_all_rx_modes(self):
        cfg = ExperimentConfig(master_seed=9, **TINY)
        rows = run_experiment("fig10", cfg, sweep=[4], threads=2)
        assert [r["rx_mode"] for r in rows] == list(RX_MODES)
        assert all(r["status"] == "ok" for r in rows)


class TestDistances:
    def test_fig6ef_summary_and_histogram(self):
        cfg = ExperimentConfig(n_tx=6, n_eval_frames=5, frame_bits=16400, master_seed=3)
        rows = run_experiment("fig6ef", cfg, threads=2)
        summary = {r["statistic"]: r["value"] for r in rows if r["record"] == "summary"}
        assert 0.0 <= summary["identifiability"] <= 1.0
        assert summary["median_d_inter_ppm"] > summary["median_d_intra_ppm"]
        n_intra = summary["n_intra_pairs"]
        hist_intra = sum(
            r["count"] for r in rows
            if r["record"] == "histogram" and r["series"] == "intra"
        )
        assert hist_intra == n_intra  # bin edges span every sample


class TestRandomnessTable:
    def test_fig7_rows(self):
        cfg = ExperimentConfig(n_tx=700, master_seed=5)
        rows = run_experiment("fig7", cfg)
        assert [r["test"] for r in rows] == TEST_NAMES
        for r in rows:
            assert 0.0 <= r["puf_pass_rate"] <= 1.0
            assert 0.0 <= r["prng_pass_rate"] <= 1.0
            assert not r["puf_skipped"]

    def test_fig7_needs_a_big_enough_fleet(self):
        with pytest.raises(ValueError, match="n_tx"):
            run_experiment("fig7", ExperimentConfig(n_tx=10))


class TestCsv:
    def test_round_trip_bytes_and_missing_cells(self, tmp_path, fig6a_rows):
        p1 = write_csv(fig6a_rows, tmp_path / "a.csv")
        p2 = write_csv(fig6a_rows, tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()
        header, *body = p1.read_text().splitlines()
        assert header.startswith("kind,n_tx,")
        assert header.endswith(",status")
        assert len(body) == len(fig6a_rows)

    def test_booleans_and_floats_format(self, tmp_path):
        rows = [{"a": True, "b": 0.1, "c": None, "d": 7}]
        text = write_csv(rows, tmp_path / "f.csv").read_text()
        assert text.splitlines()[1] == "true,0.1,,7"

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv([], tmp_path / "x.csv")
