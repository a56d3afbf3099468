import json
import math
from pathlib import Path

import pytest

from conftest import scenario
from ns1d import ConfigurationError, FluidParams
from ns1d.experiments import (
    decay_experiment,
    evaluate_pass,
    inequality_scan,
    parameter_sweep,
    run_experiment,
    uniform_bound_experiment,
    vacuum_vanish_experiment,
)
from ns1d.io import read_summary_json

BASELINES = Path(__file__).parent / "baselines" / "scan_constants.json"


def files_under(root, sub):
    return sorted(p.relative_to(root).as_posix() for p in (Path(root) / sub).rglob("*") if p.is_file())


def vacuum_scenario(**kw):
    base = dict(kind="vacuum_well", M=20.0, n=256, t_end=4.0, every=0.5,
                **{"profile.width": 2.0})
    base.update(kw)
    return scenario(**base)


class TestDecay:
    def test_constant_passes_vacuously(self, tmp_path):
        out = decay_experiment(scenario(t_end=2.0), output_dir=tmp_path)
        assert out.passed and out.measured["sup_dev_ratio"] == 0.0
        doc = read_summary_json(tmp_path / "decay" / "summary.json")
        assert doc["pass"] is True
        assert files_under(tmp_path, "decay") == sorted(doc["artifact_paths"])

    def test_bump_short_run(self, tmp_path):
        sc = scenario(kind="gaussian_bump", M=20.0, n=256, t_end=20.0,
                      **{"scheme.snapshot_times": (10.0,)})
        out = decay_experiment(sc, output_dir=tmp_path)
        assert 0 < out.measured["sup_dev_ratio"] < 1
        doc = read_summary_json(tmp_path / "decay" / "summary.json")
        assert evaluate_pass("decay", doc["measured"]) == doc["pass"] == out.passed
        assert files_under(tmp_path, "decay") == sorted(doc["artifact_paths"])
        assert "decay/snapshot_10.txt" in doc["artifact_paths"]

    def test_threshold_is_recorded(self):
        out = decay_experiment(scenario(kind="gaussian_bump", n=64, t_end=1.0), threshold=1e-9)
        assert out.measured["threshold"] == 1e-9 and not out.passed


class TestVacuum:
    def test_no_vacuum_gives_zero(self):
        out = vacuum_vanish_experiment(scenario(kind="gaussian_bump", n=64), rho1=0.5)
        assert out.passed and out.measured["T0"] == 0.0

    def test_preconditions(self):
        with pytest.raises(ConfigurationError):
            vacuum_vanish_experiment(scenario(), rho1=1.0)
        with pytest.raises(ConfigurationError):
            vacuum_vanish_experiment(scenario(), rho1=0.0)
        with pytest.raises(ConfigurationError):
            vacuum_vanish_experiment(scenario(alpha=0.25), rho1=0.1)
        with pytest.raises(ConfigurationError):
            vacuum_vanish_experiment(scenario(rho_bar=0.0), rho1=0.1)

    def test_well_closes(self):
        out = vacuum_vanish_experiment(vacuum_scenario(), rho1=0.1)
        m = out.measured
        assert out.passed and m["initial_min_rho"] == 0.0
        assert 0 < m["T0"] < m["t_end"] and m["T0_lower"] == m["T0"] - 0.5
        assert m["min_after_T0"] >= 0.1

    def test_not_closed_fails(self):
        out = vacuum_vanish_experiment(vacuum_scenario(t_end=0.5, every=0.25), rho1=0.1)
        assert not out.passed and math.isnan(out.measured["T0"])


class TestBounds:
    def test_constant(self):
        out = uniform_bound_experiment(scenario(t_end=2.0))
        assert out.passed
        assert out.measured["G_growth"] == 0 and out.measured["max_rho_growth"] == 1.0

    def test_bump_case1_positive(self):
        out = uniform_bound_experiment(scenario(kind="gaussian_bump", alpha=0.25, M=20.0, n=256, t_end=20.0))
        assert out.passed and out.measured["min_rho_all"] > 0.5

    def test_eps_probe(self):
        sc = scenario(kind="gaussian_bump", eps=1e-2, M=20.0, n=256, t_end=10.0)
        out = uniform_bound_experiment(sc, eps_probe=True)
        assert "eps_G_change" in out.measured and out.measured["eps_tol"] == 0.05
        assert evaluate_pass("uniform_bound", out.measured) == out.passed


class TestScan:
    def test_examples(self):
        out = inequality_scan(FluidParams(alpha=1, gamma=2, rho_bar=1), s_list=(1.0, 2.0))
        assert out.measured["C_s1"] == pytest.approx(1.0, rel=1e-14)
        assert out.measured["c_quadratic"] == pytest.approx(1.0, abs=1e-9)
        # sup of (rho+1)/(rho-1) on rho >= 1.5 is 5, attained at rho = 1.5
        assert 5 - 1e-3 < out.measured["C_s2"] <= 5.0
        assert out.passed

    @pytest.mark.parametrize("gamma", [1.5, 2.0, 3.0])
    def test_regression_baseline(self, gamma):
        base = json.loads(BASELINES.read_text())["cases"][f"gamma={gamma:g}"]
        out = inequality_scan(FluidParams(alpha=1, gamma=gamma, rho_bar=1), s_list=(0.5, 1.5, 2.0))
        for key, value in base.items():
            assert out.measured[key] == pytest.approx(value, rel=1e-12), key

    def test_requires_positive_far_field(self):
        with pytest.raises(ConfigurationError):
            inequality_scan(FluidParams(alpha=1, gamma=2, rho_bar=0))


class TestSweep:
    def test_single_point_matches_experiment(self):
        sc = scenario(kind="gaussian_bump", n=64, t_end=2.0)
        res = parameter_sweep(sc, [1.0], [2.0], [1.0], workers=1)
        single = decay_experiment(sc)
        assert list(res) == [(1.0, 2.0, 1.0)]
        assert res[(1.0, 2.0, 1.0)]["decay"].measured == single.measured

    def test_error_isolation_and_order(self, tmp_path):
        sc = vacuum_scenario(t_end=1.0)
        res = parameter_sweep(sc, [1.0, 0.25], [2.0], [1.0], workers=2, output_dir=tmp_path)
        bad = res[(0.25, 2.0, 1.0)]["decay"]
        assert not bad.passed and "vacuum requires alpha>1/2" in bad.error
        assert res[(1.0, 2.0, 1.0)]["decay"].error is None
        serial = parameter_sweep(sc, [0.25, 1.0], [2.0], [1.0], workers=1)
        for key in res:
            assert res[key]["decay"].measured == serial[key]["decay"].measured
        table = (tmp_path / "sweep" / "summary.csv").read_text().splitlines()
        assert table[0].startswith("alpha,gamma,rho_bar") and len(table) == 3


def test_run_experiment_outputs(tmp_path):
    out = run_experiment(scenario(kind="gaussian_bump", n=64, t_end=1.0,
                                  **{"output.name": "demo"}), output_dir=tmp_path)
    assert out.passed and out.measured["max_mass_drift"] <= 1e-13
    doc = read_summary_json(tmp_path / "demo" / "summary.json")
    assert files_under(tmp_path, "demo") == sorted(doc["artifact_paths"])
