"""Tests for artifact persistence and command orchestration."""

import json
import math

import pytest

from pq_eigen.loaders.config_loader import parse_config
from pq_eigen.models.results import IterationRecord
from pq_eigen.services import orchestration, repository


def config_for(tmp_path, **overrides):
    overrides.setdefault("out", tmp_path)
    return parse_config(overrides=overrides)


class TestRepository:
    """Test summary, history and table files."""

    def test_history_csv(self, tmp_path):
        """Test the history header, the empty first delta and 17-digit floats."""
        history = [IterationRecord(0, 10.000000000000002, None, 0, 0),
                   IterationRecord(1, 5.5, 4.5, 3, 4)]
        path = repository.save_history(tmp_path, history)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,lambda,delta,newton_u,newton_v"
        assert lines[1] == "0,10.000000000000002,,0,0"
        assert lines[2] == "1,5.5,4.5,3,4"

    def test_history_json(self, tmp_path):
        """Test the JSON history keys."""
        path = repository.save_history(tmp_path, [IterationRecord(0, 1.5, None, 0, 0)], "json")
        assert json.loads(path.read_text()) == [
            {"k": 0, "lambda": 1.5, "delta": None, "newton_u": 0, "newton_v": 0}
        ]

    def test_summary_round_trip(self, tmp_path):
        """Test a reloaded summary reproduces lambda exactly."""
        lam = 5.783185962946784
        path = repository.save_summary(tmp_path, {"lambda": lam, "converged": True})
        assert repository.load_summary(path)["lambda"] == lam

    def test_summary_csv_flattens_bounds(self, tmp_path):
        """Test CSV summaries flatten nested bound reports."""
        summary = {"lambda": 2.0, "bounds": {"lower": 1.0, "upper": 3.0, "inputs": {"C": 0.5}}}
        path = repository.save_summary(tmp_path, summary, "csv")
        rows = {row["key"]: row["value"] for row in repository.read_table(path)}
        assert rows["lambda"] == "2"
        assert rows["bounds.lower"] == "1"
        assert "bounds.inputs" not in rows

    def test_missing_summary(self, tmp_path):
        """Test loading a summary that does not exist."""
        with pytest.raises(FileNotFoundError):
            repository.load_summary(tmp_path / "summary.json")


class TestOrchestration:
    """Test the command runners on small problems."""

    def test_solve_interval(self, tmp_path):
        """Test a 1D solve writes summary, history and field."""
        config = config_for(tmp_path, command="solve", domain="interval", n=40, p=3, q=2, alpha=1)
        outcome = orchestration.run(config)
        assert outcome.status == orchestration.EXIT_OK
        names = sorted(path.name for path in outcome.artifacts)
        assert names == ["field.csv", "history.csv", "summary.csv"]
        header = (tmp_path / "field.csv").read_text().splitlines()[0]
        assert header == "x,u,v"

    def test_field_header_2d(self, tmp_path):
        """Test 2D fields carry both coordinates."""
        config = config_for(tmp_path, command="solve", domain="square", h=0.5, p=2, alpha=1)
        orchestration.run(config)
        assert (tmp_path / "field.csv").read_text().splitlines()[0] == "x,y,u,v"

    def test_deterministic_output(self, tmp_path):
        """Test identical runs produce byte-identical tables."""
        first = config_for(tmp_path / "a", command="solve", domain="interval", n=40, p=3, q=2, alpha=1)
        second = config_for(tmp_path / "b", command="solve", domain="interval", n=40, p=3, q=2, alpha=1)
        orchestration.run(first)
        orchestration.run(second)
        for name in ("history.csv", "field.csv", "summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_max_outer_exit_code(self, tmp_path):
        """Test an exhausted outer budget exits with the non-convergence status."""
        config = config_for(tmp_path, command="solve", domain="interval", n=20, p=3, q=2, alpha=1,
                            max_outer=1)
        outcome = orchestration.run(config)
        assert outcome.status == orchestration.EXIT_NOT_CONVERGED
        assert len((tmp_path / "history.csv").read_text().splitlines()) == 3

    def test_newton_failure_writes_history(self, tmp_path):
        """Test a Newton failure still leaves the partial history on disk."""
        config = config_for(tmp_path, command="solve", domain="interval", n=20, p=4, q=4, alpha=2,
                            max_iters=1)
        outcome = orchestration.run(config)
        assert outcome.status == orchestration.EXIT_NOT_CONVERGED
        assert "Newton" in outcome.summary["error"]
        assert (tmp_path / "history.csv").exists()

    def test_scalar_reports_distance_gap(self, tmp_path):
        """Test scalar runs add lambda^(1/p) and the distance gap."""
        config = config_for(tmp_path, command="scalar", domain="interval", n=100, p=2, format="json")
        outcome = orchestration.run(config)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["lambda"] == pytest.approx(math.pi ** 2, rel=1e-3)
        assert summary["lambda_root"] == pytest.approx(math.pi, rel=1e-3)
        assert "distance_gap" in outcome.summary

    def test_bounds_interval(self, tmp_path):
        """Test the bounds command brackets the eigenvalue on the interval."""
        config = config_for(tmp_path, command="bounds", domain="interval", n=100, p=3, q=2, alpha=1)
        outcome = orchestration.run(config)
        bounds = outcome.summary["bounds"]
        assert bounds["upper_kind"] == "one_d"
        assert bounds["lower"] <= outcome.summary["lambda"] <= bounds["upper"]
        assert (tmp_path / "bounds.csv").exists()

    def test_radial_bessel_gap(self, tmp_path):
        """Test radial p = q = 2 runs compare against the Bessel mode."""
        config = config_for(tmp_path, command="radial", n=200, p=2, alpha=1)
        outcome = orchestration.run(config)
        assert outcome.summary["bessel_gap"] < 1e-3

    def test_eoc_study_table(self, tmp_path):
        """Test the EOC study writes one row per mesh size."""
        config = config_for(tmp_path, command="eoc-study", domain="square", p=2, alpha=1,
                            h_values="1,0.5,0.25")
        outcome = orchestration.run(config)
        header, rows = outcome.table
        assert header == ["h", "elements", "lambda", "outer_iters", "eoc"]
        assert [row[1] for row in rows] == [8, 32, 128]
        assert rows[0][4] is not None
        assert rows[1][4] is None
        assert (tmp_path / "eoc.csv").exists()

    def test_fp_curve(self, tmp_path):
        """Test the f(p) command writes the curve."""
        config = config_for(tmp_path, command="fp-curve", n=100, p_values="1,2,inf")
        outcome = orchestration.run(config)
        assert outcome.summary["max_f"] == pytest.approx(1.0, abs=1e-4)
        assert outcome.summary["argmax_p"] == 2.0
        assert len(repository.read_table(tmp_path / "fp_curve.csv")) == 3

    def test_resonant_step_weight(self, tmp_path):
        """Test the resonant command reports the weight minimum and its bound."""
        config = config_for(tmp_path, command="resonant", domain="square", h=0.5, p=4, q=2, alpha=2)
        outcome = orchestration.run(config)
        assert outcome.summary["m"] == 1.0
        assert outcome.summary["bounds"]["upper_kind"] == "resonant"
        inputs = outcome.summary["bounds"]["inputs"]
        assert inputs["Lambda_p"] == inputs["lambda_p"]
        assert inputs["lambda_q"] < inputs["lambda_p"]
