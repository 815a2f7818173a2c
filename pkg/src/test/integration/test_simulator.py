"""End-to-end tests of the experiment engine on small networks."""

from dataclasses import replace

import numpy as np
import pytest

from src.main.python.core.config import SystemConfig
from src.main.python.core.exceptions import ConfigurationError
from src.main.python.models import split_metric_key
from src.main.python.services import build_codebook, build_setup, emit_results, read_results, run_experiment, simulate_trial
from src.main.python.services.codebook import gen_random_codebook, save_codebook
from src.main.python.utils.rng import stream


def small_config(**overrides) -> SystemConfig:
    values = dict(
        M=2, N=4, L=2, T=4, Q=2,
        mode=["ST"], scenario="indoor",
        fsk_order=2, codebook_budget=4,
        n_trials=6, master_seed=11,
    )
    values.update(overrides)
    return SystemConfig(**values)


def close_range(**overrides) -> SystemConfig:
    """Devices within a few metres and no Doppler: decoding is error-free."""
    return small_config(r_min_m=1.0, r_max_m=5.0, tx_power_dbm=20.0, doppler_norm=0.0, **overrides)


class TestDeterminism:
    def test_same_seed_same_table(self):
        config = small_config(mode=["ST", "SF"])
        assert run_experiment(config).to_csv() == run_experiment(config).to_csv()

    def test_seed_changes_results(self):
        first = run_experiment(small_config(master_seed=1))
        second = run_experiment(small_config(master_seed=2))
        assert first.to_csv() != second.to_csv()

    @pytest.mark.parametrize("workers", [2, 4, 16])
    def test_worker_count_does_not_matter(self, workers):
        config = small_config(mode=["none", "STF"], n_trials=9)
        assert run_experiment(config, workers=1).to_csv() == run_experiment(config, workers=workers).to_csv()

    def test_trial_records_repeat(self):
        config = small_config()
        setup = build_setup(config, "ST", "indoor", build_codebook(config))

        a, b = simulate_trial(setup, 3), simulate_trial(setup, 3)

        np.testing.assert_array_equal(a.sinr_db, b.sinr_db)
        np.testing.assert_array_equal(a.bits_decoded, b.bits_decoded)


class TestSpreading:
    def test_single_device_baseline_matches_st(self):
        table = run_experiment(small_config(M=1, L=1, Q=1, mode=["none", "ST"]))

        by_mode = {}
        for row in table.rows:
            name, series = split_metric_key(row.metric)
            by_mode.setdefault(series.split("/")[0], []).append((row.sweep_value, name, row.estimate, row.n))
        assert by_mode["none"] == by_mode["ST"]

    @pytest.mark.parametrize("mode", ["ST", "SF", "STF"])
    def test_exclusive_blocks_see_no_interference(self, mode):
        config = small_config(M=3, L=4, T=4, Q=3)
        setup = build_setup(config, mode, "indoor", build_codebook(config))

        for trial in range(3):
            record = simulate_trial(setup, trial)
            assert np.all(record.interference == 0.0)
            assert record.interference_metric == 0.0

    def test_baseline_devices_interfere(self):
        config = small_config(M=3, L=3, Q=3)
        setup = build_setup(config, "none", "indoor", build_codebook(config))
        record = simulate_trial(setup, 0)
        assert np.all(record.interference > 0)
        assert record.interference_metric > 0

    def test_short_guard_leaks_between_slots(self):
        config = small_config(M=3, L=3, Q=3, guard_samples=1, codebook_construction="unitary")
        setup = build_setup(config, "ST", "indoor", build_codebook(config))
        record = simulate_trial(setup, 0)
        assert record.interference_metric > 0
        assert 0 < record.delay_mean <= 3

    def test_lattice_taps_fit_a_short_guard(self):
        config = small_config(M=3, L=4, T=4, Q=3, guard_samples=1, codebook_construction="unitary")
        setup = build_setup(config, "STF", "indoor", build_codebook(config))

        assert setup.grid.n_subbands == 2
        assert np.count_nonzero(setup.channel_profile) == 2
        for trial in range(3):
            record = simulate_trial(setup, trial)
            assert np.all(record.interference == 0.0)
            assert record.interference_metric == 0.0

    def test_time_spill_needs_to_clear_the_noise_floor(self):
        config = small_config(M=3, L=3, Q=3, guard_samples=1, codebook_construction="unitary")
        book = build_codebook(config)
        quiet = simulate_trial(build_setup(replace(config, tx_power_dbm=-10.0), "ST", "indoor", book), 0)
        loud = simulate_trial(build_setup(replace(config, tx_power_dbm=30.0), "ST", "indoor", book), 0)
        assert quiet.interference_metric > 0
        assert loud.interference_metric / quiet.interference_metric > 1e4

    def test_serving_multipath_can_be_counted(self):
        config = small_config(M=3, L=4, T=4, Q=3)
        book = build_codebook(config)
        alone = simulate_trial(build_setup(config, "ST", "indoor", book), 0)
        counted = simulate_trial(
            build_setup(replace(config, interference_includes_serving=True), "ST", "indoor", book), 0)
        assert alone.interference_metric == 0.0
        assert counted.interference_metric > 0
        np.testing.assert_array_equal(counted.sinr_db, alone.sinr_db)

    def test_subband_leakage(self):
        config = small_config(subband_leakage="doppler", doppler_norm=0.05)
        setup = build_setup(config, "SF", "indoor", build_codebook(config))
        assert setup.leakage > 0
        assert any(simulate_trial(setup, trial).interference_metric > 0 for trial in range(6))

    @pytest.mark.parametrize("mode", ["ST", "SF", "STF"])
    def test_close_range_decodes_everything(self, mode):
        config = close_range(mode=[mode])
        setup = build_setup(config, mode, "indoor", build_codebook(config))

        for trial in range(4):
            record = simulate_trial(setup, trial)
            np.testing.assert_array_equal(record.bits_decoded, record.bits_true)
            np.testing.assert_array_equal(record.vectors_decoded, record.vectors_true)

    def test_perfect_csi(self):
        config = close_range(perfect_csi=True)
        setup = build_setup(config, "ST", "indoor", build_codebook(config))
        record = simulate_trial(setup, 0)
        np.testing.assert_array_equal(record.symbols_decoded, record.symbols_true)
        assert np.all(record.sinr_db > 20)


class TestExperiment:
    def test_rows_per_series(self):
        config = small_config(
            mode=["ST", "STF"], scenario=["indoor", "outdoor"],
            sweep_param="tx_power_dbm", sweep_values=[0.0, 10.0],
        )

        table = run_experiment(config)

        series = table.series()
        assert sorted(series) == ["ST/indoor", "ST/outdoor", "STF/indoor", "STF/outdoor"]
        for rows in series.values():
            assert len(rows) == 2 * 8
            assert sorted({row.sweep_value for row in rows}) == [0.0, 10.0]
        assert all(row.seed == 11 for row in table.rows)

    def test_outage_rows_hold_probabilities(self):
        table = run_experiment(small_config())
        for row in table.select("outage_probability@ST/indoor"):
            assert 0.0 <= row.ci_lo <= row.estimate <= row.ci_hi <= 1.0
            assert row.n == 2 * 6

    def test_device_sweep_scales_grid(self):
        config = small_config(M=2, L=2, T=4, Q=2, sweep_param="M", sweep_values=[1, 3], n_trials=2)
        table = run_experiment(config)
        assert [row.n for row in table.select("ser@ST/indoor")] == [1 * 2, 3 * 2]

    def test_invalid_config_is_rejected(self):
        with pytest.raises(ConfigurationError):
            run_experiment(small_config(T=1))

    def test_result_file_round_trip(self, tmp_path):
        table = run_experiment(small_config())
        path = emit_results(table, "csv", tmp_path / "out.csv")
        assert read_results(path).rows == table.rows


class TestCodebookFile:
    def test_loaded_codebook_is_used(self, tmp_path):
        book = gen_random_codebook(2, 4, stream(5))
        path = save_codebook(book, tmp_path / "book.yaml")
        config = small_config(codebook_file=str(path))

        np.testing.assert_allclose(build_codebook(config).vectors, book.vectors)

    def test_shape_mismatch(self, tmp_path):
        path = save_codebook(gen_random_codebook(3, 4, stream(5)), tmp_path / "book.yaml")
        with pytest.raises(ConfigurationError):
            build_codebook(small_config(codebook_file=str(path)))

    def test_codebook_shared_by_modes(self):
        config = small_config()
        first = build_codebook(config)
        second = build_codebook(replace(config, mode=["SF"]))
        np.testing.assert_array_equal(first.vectors, second.vectors)
