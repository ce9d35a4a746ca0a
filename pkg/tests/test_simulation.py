import math
import warnings

import numpy as np
import pytest

from oddsrecal.core import DomainError
from oddsrecal.simulation import (
    CSV_COLUMNS,
    DEFAULT_DELTAS,
    DEFAULT_P0,
    ScenarioConfig,
    SimulationWarning,
    columns,
    evaluate_point,
    figure1_configs,
    figure1_grid,
    row_values,
    run_scenario,
    variance_grid,
)


@pytest.fixture(scope="module")
def grid():
    return figure1_grid()


def panels(rows):
    out = {}
    for r in rows:
        out.setdefault((r.p0, r.delta), []).append(r)
    return out


class TestVarianceGrid:
    def test_span(self):
        g = variance_grid(0.25)
        assert len(g) == 20
        np.testing.assert_allclose([g[0], g[-1]], [0.001 * 0.1875, 0.95 * 0.1875], rtol=1e-14)
        assert np.all(np.diff(g) > 0)


class TestScenarioConfig:
    def test_p1(self):
        assert ScenarioConfig(0.25, -0.25, [0.01]).p1 == pytest.approx(0.1875)

    def test_rejects_target_outside_unit_interval(self):
        with pytest.raises(DomainError):
            ScenarioConfig(0.5, 1.0, [0.01])


class TestEvaluatePoint:
    def test_small_variance_collapse(self):
        row = evaluate_point(0.25, 0.1875, 1e-9)
        assert abs(row.relbias_simple) < 1e-7
        assert abs(row.relbias_taylor) < 1e-7
        assert row.auc == pytest.approx(0.5, abs=1e-3)

    def test_case_study(self):
        row = evaluate_point(0.56, 0.34, 0.025)
        assert row.or_simple / row.or_exact - 1 == pytest.approx(0.127, abs=0.03)
        np.testing.assert_allclose(row.or_exact, 0.3654785202537416, rtol=1e-10)

    def test_taylor_failure_regime(self):
        row = evaluate_point(0.1, 0.15, 0.03)
        assert abs(row.relbias_taylor) > abs(row.relbias_simple)

    def test_relative_bias_definition(self):
        row = evaluate_point(0.5, 0.25, 0.05)
        assert row.relbias_simple == pytest.approx((row.or_simple - row.or_exact) / row.or_exact, rel=1e-14)
        assert row.logbias_simple == pytest.approx(math.log(row.or_simple / row.or_exact), rel=1e-12)

    def test_monte_carlo_column(self):
        row = evaluate_point(0.25, 0.1875, 0.0375, mc_n=200_000, seed=3)
        assert row.or_exact_mc == pytest.approx(row.or_exact, rel=0.02)

    def test_invalid_variance(self):
        with pytest.raises(DomainError):
            evaluate_point(0.5, 0.4, 0.25)


class TestRunScenario:
    def test_skips_unfittable_points(self):
        config = ScenarioConfig(0.5, -0.5, [0.3, 0.02, 0.25, 0.01])
        with pytest.warns(SimulationWarning, match="skipping"):
            rows = run_scenario(config)
        assert [r.variance for r in rows] == [0.01, 0.02]

    def test_workers_do_not_change_output(self):
        config = ScenarioConfig(0.25, 0.5, variance_grid(0.25, 8), mc_n=1000, seed=4)
        assert run_scenario(config) == run_scenario(config, workers=4)
        assert [r.or_exact_mc for r in run_scenario(config)] == [r.or_exact_mc for r in run_scenario(config, workers=3)]


class TestFigure1Grid:
    def test_row_count(self, grid):
        valid = [(p0, d) for p0 in DEFAULT_P0 for d in DEFAULT_DELTAS if 0 < p0 * (1 + d) < 1]
        assert len(figure1_configs()) == len(valid)
        assert len(grid) == len(valid) * 20

    def test_panel_order(self, grid):
        keys = [(r.panel, r.variance) for r in grid]
        assert keys == sorted(keys)

    def test_simple_bias_monotone(self, grid):
        for rows in panels(grid).values():
            assert np.all(np.diff([abs(r.relbias_simple) for r in rows]) >= 0)

    def test_exact_further_from_one(self, grid):
        for r in grid:
            assert abs(math.log(r.or_exact)) > abs(math.log(r.or_simple))

    def test_simple_bias_sign(self, grid):
        for r in grid:
            assert (r.relbias_simple > 0) == (r.delta < 0)

    def test_auc_monotone(self, grid):
        for rows in panels(grid).values():
            aucs = [r.auc for r in rows]
            assert np.all(np.diff(aucs) >= 0)
            assert 0.5 <= aucs[0] and aucs[-1] <= 1

    def test_taylor_worse_in_failure_panel(self, grid):
        rows = panels(grid)[(0.1, 0.5)]
        worse = [r.variance for r in rows if abs(r.relbias_taylor) > abs(r.relbias_simple)]
        assert worse and min(worse) > 0.026
        # one contiguous block: at the largest variances the simple bias saturates near -1
        idx = [i for i, r in enumerate(rows) if r.variance in worse]
        assert idx == list(range(idx[0], idx[-1] + 1))

    def test_deterministic(self, grid):
        assert figure1_grid() == grid

    def test_parallel_matches_serial(self, grid):
        assert figure1_grid(workers=4) == grid

    def test_no_warnings_in_failure_panel(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            figure1_grid(p0_values=(0.1,), deltas=(0.5,), grid_size=5)


class TestRowSerialisation:
    def test_columns(self):
        assert columns() == list(CSV_COLUMNS)
        assert columns(log_bias=True, mc=True)[-3:] == ["logbias_simple", "logbias_taylor", "or_exact_mc"]

    def test_row_values_align(self):
        row = evaluate_point(0.25, 0.2, 0.01)
        values = row_values(row, log_bias=True)
        assert len(values) == len(columns(log_bias=True))
        assert values[: len(CSV_COLUMNS)] == [getattr(row, c) for c in CSV_COLUMNS]
