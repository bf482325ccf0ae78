import numpy as np
import pytest

from spdcsim import sweep as sweep_mod
from spdcsim.dispersion import CrystalConfig
from spdcsim.errors import ConfigError, DomainError
from spdcsim.metrics import SourceMetrics
from spdcsim.phasematch import PumpConfig
from spdcsim.sweep import (
    CSV_HEADER,
    Axis,
    SweepAborted,
    SweepPlan,
    SweepResult,
    extract_contour,
    recipe_lookup,
    run_sweep,
    worker_count,
)


def small_plan(**kw):
    base = dict(crystal=CrystalConfig(2.5e-3), pump=PumpConfig.from_fwhm(50e-15, 1e-4),
                wp_diameters=Axis(200, 500, 2), wf_diameters=Axis(200, 500, 2),
                order=6, grid_points=32, rate_points=32)
    base.update(kw)
    return SweepPlan(**base)


def synthetic(r, eta, wp=(100, 300, 500), wf=(100, 300, 500)):
    r, eta = np.asarray(r, float), np.asarray(eta, float)
    plan = SweepPlan(CrystalConfig(2.5e-3), PumpConfig.from_fwhm(50e-15, 1e-4),
                     Axis(wp[0], wp[-1], len(wp)), Axis(wf[0], wf[-1], len(wf)))
    cells = [[SourceMetrics(r[i, j], 1.0, 1.0, 1.0 + i + j, 2.0, 2.0, eta[i, j], "numeric", True, {})
              for j in range(len(wf))] for i in range(len(wp))]
    return SweepResult(plan, cells)


class TestAxisAndPlan:
    def test_axis_values(self):
        np.testing.assert_allclose(Axis(100, 700, 4).values, [100, 300, 500, 700])

    @pytest.mark.parametrize("args", [(100, 700, 1), (0, 700, 5), (700, 100, 5), (1, 2, 2.5)])
    def test_axis_rejects(self, args):
        with pytest.raises(ConfigError):
            Axis(*args)

    def test_cell_uses_half_diameters(self):
        pump, coll = small_plan().cell(1, 0)
        assert pump.waist == pytest.approx(250e-6)
        assert coll.waist == pytest.approx(100e-6)
        assert pump.tau == small_plan().pump.tau

    def test_rejects_unknown_backend_and_metrics(self):
        with pytest.raises(ConfigError):
            small_plan(backend="both")
        with pytest.raises(ConfigError):
            small_plan(metrics="eta")


class TestRunSweep:
    def test_small_numeric_map(self, tmp_path):
        csv = tmp_path / "s.csv"
        result = run_sweep(small_plan(csv_path=str(csv)), workers=2)
        assert result.failed == []
        assert result.converged.all()
        lines = csv.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 5
        assert [tuple(l.split(",")[:2]) for l in lines[1:]] == [
            ("100", "100"), ("100", "250"), ("250", "100"), ("250", "250")]
        eta = result.field("eta")
        assert np.all((eta > 0) & (eta <= 1))
        assert np.all(np.abs(result.field("r")) <= 1)

    def test_output_independent_of_worker_count(self):
        a = run_sweep(small_plan(metrics="r"), workers=1).to_csv()
        b = run_sweep(small_plan(metrics="r"), workers=4).to_csv()
        assert a == b

    def test_r_only_skips_rates(self):
        result = run_sweep(small_plan(metrics="r"), workers=1)
        assert np.all(np.isnan(result.field("eta")))
        assert np.all(np.isfinite(result.field("r")))

    def test_analytic_backend(self):
        result = run_sweep(small_plan(backend="analytic"), workers=1)
        assert np.all(np.isfinite(result.field("r")))

    def test_single_failure_leaves_nan(self, monkeypatch):
        real = sweep_mod.evaluate_source

        def flaky(crystal, pump, collection, *a, **kw):
            if collection.waist > 200e-6 and pump.waist > 200e-6:
                raise DomainError("synthetic failure")
            return real(crystal, pump, collection, *a, **kw)

        monkeypatch.setattr(sweep_mod, "evaluate_source", flaky)
        plan = small_plan(wp_diameters=Axis(200, 500, 3), wf_diameters=Axis(200, 500, 3), metrics="r")
        result = run_sweep(plan, workers=1)
        assert [(i, j) for i, j, _ in result.failed] == [(2, 2)]
        assert "DomainError" in result.failed[0][2]
        r = result.field("r")
        assert np.isnan(r[2, 2]) and np.isfinite(r[:2]).all()
        assert result.to_csv().splitlines()[-1].endswith(",nan,nan,nan,nan,nan,0")

    def test_abort_above_threshold(self, monkeypatch):
        def broken(*a, **kw):
            raise DomainError("always")

        monkeypatch.setattr(sweep_mod, "evaluate_source", broken)
        with pytest.raises(SweepAborted):
            run_sweep(small_plan(), workers=1)

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("SPDC_THREADS", "1")
        assert worker_count() == 1
        monkeypatch.setenv("SPDC_THREADS", "zero")
        with pytest.raises(ConfigError):
            worker_count()
        monkeypatch.setenv("SPDC_THREADS", "0")
        with pytest.raises(ConfigError):
            worker_count()


class TestRecipe:
    def test_picks_highest_eta_within_tolerance(self):
        r = [[0.0, 0.1, 0.5], [0.02, 0.3, 0.6], [0.04, 0.5, 0.7]]
        eta = [[0.9, 0.95, 0.99], [0.5, 0.8, 0.9], [0.6, 0.7, 0.8]]
        rec = recipe_lookup(synthetic(r, eta), 0.0, 0.05)
        assert rec.found
        assert (rec.wp_um, rec.wf_um, rec.eta) == (50, 50, 0.9)

    def test_tie_prefers_larger_collection_then_pump(self):
        r = np.zeros((3, 3))
        eta = np.full((3, 3), 0.5)
        rec = recipe_lookup(synthetic(r, eta), 0.0, 0.05)
        assert (rec.wp_um, rec.wf_um) == (250, 250)

    def test_single_qualifying_cell(self):
        r = np.full((3, 3), 0.9)
        r[1, 0] = 0.21
        rec = recipe_lookup(synthetic(r, np.full((3, 3), 0.5)), 0.2, 0.05)
        assert rec.found and (rec.wp_um, rec.wf_um) == (150, 50)

    def test_no_solution_reports_nearest(self):
        r = np.linspace(0.4, 0.9, 9).reshape(3, 3)
        rec = recipe_lookup(synthetic(r, np.full((3, 3), 0.5)), 0.0, 0.05)
        assert not rec.found
        assert rec.nearest_r == pytest.approx(0.4)
        assert np.isnan(rec.wp_um)
        assert "found = 0" in rec.to_record()

    def test_requires_rates(self):
        r = np.zeros((3, 3))
        with pytest.raises(ConfigError):
            recipe_lookup(synthetic(r, np.full((3, 3), np.nan)), 0.0, 0.05)


class TestContours:
    def test_linear_field_gives_straight_line(self):
        wp = wf = (100, 300, 500)
        x = np.array(wp, float)
        r = np.add.outer(x, np.array(wf, float)) / 1000.0
        lines = extract_contour(synthetic(r, np.ones((3, 3))), "r", 0.6)
        assert len(lines) == 1
        np.testing.assert_allclose(lines[0].sum(axis=1), 600.0)

    def test_field_name_checked(self):
        with pytest.raises(ValueError):
            extract_contour(synthetic(np.zeros((3, 3)), np.ones((3, 3))), "rate_c", 1.0)



@pytest.fixture(scope="module")
def short_crystal_map():
    plan = SweepPlan(CrystalConfig(2.5e-3), PumpConfig.from_fwhm(50e-15, 1e-4),
                     Axis(100, 700, 5), Axis(100, 700, 5), order=6, grid_points=32, rate_points=32)
    return run_sweep(plan)


def rescan(result, target, tol):
    r, eta = result.field("r"), result.field("eta")
    n_wp, n_wf = r.shape
    return max(((eta[i, j], j, i) for i in range(n_wp) for j in range(n_wf) if abs(r[i, j] - target) <= tol),
               default=None)


class TestRecipeOnMaps:
    @pytest.mark.parametrize("target, tol", [(0.2, 0.02), (0.3, 0.05), (0.0, 0.1)])
    def test_matches_independent_rescan(self, short_crystal_map, target, tol):
        rec = recipe_lookup(short_crystal_map, target, tol)
        best = rescan(short_crystal_map, target, tol)
        assert rec.found == (best is not None)
        if best is not None:
            _, j, i = best
            assert (rec.wp_um, rec.wf_um) == (short_crystal_map.wp_diameters[i] / 2,
                                              short_crystal_map.wf_diameters[j] / 2)
            assert rec.eta == best[0]

    def test_uncorrelated_target_out_of_reach_on_short_crystal(self, short_crystal_map):
        # this map stays above r = 0.1 everywhere
        rec = recipe_lookup(short_crystal_map, 0.0, 0.05)
        assert not rec.found
        assert rec.nearest_r == pytest.approx(np.nanmin(short_crystal_map.field("r")))

    def test_unreachable_target_on_long_pulse_map(self):
        plan = SweepPlan(CrystalConfig(7.5e-3), PumpConfig.from_fwhm(150e-15, 1e-4),
                         Axis(100, 700, 4), Axis(100, 700, 4), order=6, grid_points=32, rate_points=32)
        rec = recipe_lookup(run_sweep(plan), 0.99, 0.05)
        assert not rec.found
        assert rec.nearest_r < 0.5
