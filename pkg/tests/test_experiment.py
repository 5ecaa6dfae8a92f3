import json

import numpy as np
import pytest

import iclasso.experiment as experiment
from iclasso import (ConfigurationError, ExperimentConfig, emit_table, run_cell,
                     run_experiment, sample_new_user)

SMALL = dict(p_values=(12, 16), n_values=(20, 25), iterations=3, s0=3, master_seed=99)


def small_config(**overrides):
    kwargs = {**SMALL, **overrides}
    return ExperimentConfig(**kwargs)


class TestRunCell:
    def test_truthful_cell_has_equal_mses(self):
        cell = run_cell("lasso", 12, 20, 0.0, small_config())
        assert cell.report_mse == cell.truth_mse
        assert cell.quad_mean == 0.0
        assert cell.cross1_mean == 0.0

    def test_decomposition_identity(self):
        for estimator in ("lasso", "conservative"):
            cell = run_cell(estimator, 16, 25, 2.0, small_config())
            gap = cell.report_mse - cell.truth_mse
            total = cell.quad_mean + cell.cross1_mean + cell.cross2_mean
            assert abs(gap - total) <= 1e-8

    def test_unknown_estimator(self):
        with pytest.raises(ConfigurationError):
            run_cell("ridge", 12, 20, 0.0, small_config())

    def test_lambda_in_grid_range(self):
        cell = run_cell("lasso", 12, 20, 2.0, small_config())
        assert 1.0 < cell.lambda_used < 1.3


class TestQuadScaling:
    def test_hundredfold_quad_between_lies(self):
        cells, failures = run_experiment(small_config(lies=(2.0, 0.2),
                                                      estimators=("lasso",),
                                                      p_values=(12,), n_values=(20,)))
        assert not failures
        big = next(c for c in cells if c.lie == 2.0)
        small = next(c for c in cells if c.lie == 0.2)
        assert big.quad_mean == pytest.approx(100.0 * small.quad_mean, rel=1e-10)
        # cross terms share beta draws, so they scale tenfold
        assert big.cross1_mean == pytest.approx(10.0 * small.cross1_mean, rel=1e-10)


class TestRunExperiment:
    def test_default_grid_is_36_cells(self):
        cfg = small_config(lies=(2.0, 0.2))
        cells, failures = run_experiment(cfg)
        assert not failures
        assert len(cells) == 2 * 2 * 2 * 2  # estimators x p x n x lies
        # full default shape: 2 estimators x 3 p x 3 n x 2 lies = 36
        assert (len(ExperimentConfig().estimators) * len(ExperimentConfig().p_values)
                * len(ExperimentConfig().n_values) * len(ExperimentConfig().lies)) == 36

    def test_cell_order_matches_cartesian_product(self):
        cfg = small_config(lies=(2.0, 0.2))
        cells, _ = run_experiment(cfg)
        keys = [(c.estimator, c.p, c.n, c.lie) for c in cells]
        expected = [(e, p, n, lie) for e in cfg.estimators for p in cfg.p_values
                    for n in cfg.n_values for lie in cfg.lies]
        assert keys == expected

    def test_deterministic_across_worker_counts(self):
        cfg = small_config(lies=(2.0, 0.2))
        serial, _ = run_experiment(cfg, workers=1)
        parallel, _ = run_experiment(cfg, workers=2)
        assert emit_table(serial) == emit_table(parallel)

    def test_single_iteration_equals_one_draw(self):
        cfg = small_config(iterations=1, lies=(0.5,), p_values=(12,), n_values=(20,),
                           estimators=("lasso",))
        cell = run_experiment(cfg)[0][0]
        gap = cell.report_mse - cell.truth_mse
        assert abs(gap - (cell.quad_mean + cell.cross1_mean + cell.cross2_mean)) <= 1e-10

    def test_estimators_share_datasets_and_user(self, monkeypatch):
        seen = {"lasso": [], "conservative": []}
        original = experiment.sample_dataset
        current = {"estimator": None}

        def spy(config, rng=None):
            seen[current["estimator"]].append(config.seed)
            return original(config, rng)

        monkeypatch.setattr(experiment, "sample_dataset", spy)
        cfg = small_config(p_values=(12,), n_values=(20,), lies=(2.0,))
        for estimator in ("lasso", "conservative"):
            current["estimator"] = estimator
            experiment._run_lie_group(estimator, 12, 20, (2.0,), cfg)
        assert seen["lasso"] == seen["conservative"]
        user_a = sample_new_user(12, cfg.new_user_df, 2.0, cfg.master_seed)
        user_b = sample_new_user(12, cfg.new_user_df, 2.0, cfg.master_seed)
        assert np.array_equal(user_a.x_new, user_b.x_new)

    def test_freeze_lambda_profile(self):
        cfg = small_config(freeze_lambda=True, lies=(2.0,), estimators=("lasso",),
                           p_values=(12,), n_values=(20,))
        cells, failures = run_experiment(cfg)
        assert not failures
        assert len(cells) == 1

    def test_cell_failure_collected(self):
        # s0 exceeds one of the p values: that group fails, the other succeeds
        cfg = small_config(p_values=(4, 12), s0=5, lies=(2.0,), estimators=("lasso",))
        cells, failures = run_experiment(cfg)
        assert len(failures) == 2  # both n values at p=4
        assert all(f.p == 4 for f in failures)
        assert all(c.p == 12 for c in cells)

    def test_invalid_configs(self):
        with pytest.raises(ConfigurationError):
            small_config(estimators=())
        with pytest.raises(ConfigurationError):
            small_config(estimators=("lasso", "ridge"))
        with pytest.raises(ConfigurationError):
            small_config(iterations=0)
        with pytest.raises(ConfigurationError):
            small_config(lies=())


@pytest.fixture(scope="module")
def cells():
    cells, _ = run_experiment(small_config(lies=(2.0, 0.2)))
    return cells


class TestEmitTable:
    def test_csv_line_count_and_header(self, cells):
        text = emit_table(cells, format="csv")
        lines = text.strip().splitlines()
        assert len(lines) == len(cells) + 1
        assert lines[0] == ("estimator,p,n,lie,truth_mse,report_mse,lambda_used,"
                            "quad,cross1,cross2,iterations,seed")

    def test_csv_round_trips_floats(self, cells):
        line = emit_table(cells, format="csv").splitlines()[1].split(",")
        assert float(line[4]) == cells[0].truth_mse

    def test_json_records(self, cells):
        records = json.loads(emit_table(cells, format="json"))
        assert len(records) == len(cells)
        assert records[0]["estimator"] == cells[0].estimator
        assert set(records[0]) == set(experiment.CSV_COLUMNS)

    def test_text_grid_shape(self, cells):
        text = emit_table(cells, format="text")
        assert "lasso, lie=2" in text
        assert "n=20" in text and "n=25" in text
        assert "Truth" in text and "Report" in text

    def test_empty_cells_error(self):
        with pytest.raises(ConfigurationError):
            emit_table([], format="csv")

    def test_unknown_format_error(self, cells):
        with pytest.raises(ConfigurationError):
            emit_table(cells, format="yaml")
