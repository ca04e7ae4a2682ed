"""Basic tests for the CLI commands."""

import json
import logging
from pathlib import Path
from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from pq_eigen.cli.main import app
from pq_eigen.core.errors import InadmissiblePairError
from pq_eigen.services.orchestration import RunOutcome

runner = CliRunner()

TEST_LAMBDA = 5.7831859629


def outcome(status=0, **summary):
    data = {"label": "p=2 q=2 alpha=1 beta=1", "lambda": TEST_LAMBDA, "converged": status == 0,
            "outer_iters": 5}
    data.update(summary)
    return RunOutcome(status, data, [Path("results/summary.csv")])


class TestSolveCommands:
    """Test solver commands with the orchestration layer mocked."""

    @patch('pq_eigen.services.orchestration.run')
    def test_solve(self, mock_run):
        """Test a converged solve prints the summary and exits 0."""
        mock_run.return_value = outcome()

        result = runner.invoke(app, ["solve", "--domain", "square", "--p", "2", "--alpha", "1"])
        assert result.exit_code == 0
        assert "5.783185963" in result.stdout
        assert "✓ Done" in result.stdout
        config = mock_run.call_args[0][0]
        assert config.command == "solve"
        assert config.domain.kind == "rectangle"

    @patch('pq_eigen.services.orchestration.run')
    def test_solve_interval_node_count(self, mock_run):
        """Test --n reaches the configuration for interval solves."""
        mock_run.return_value = outcome()

        result = runner.invoke(app, ["solve", "--domain", "interval", "--n", "200", "--p", "3"])
        assert result.exit_code == 0
        config = mock_run.call_args[0][0]
        assert config.n == 200
        assert config.domain.kind == "interval"

    @patch('pq_eigen.services.orchestration.run')
    def test_solve_not_converged(self, mock_run):
        """Test an exhausted outer budget exits 2."""
        mock_run.return_value = outcome(status=2)

        result = runner.invoke(app, ["solve", "--p", "3", "--q", "2", "--max-outer", "1"])
        assert result.exit_code == 2
        assert "did not converge" in result.stdout

    @patch('pq_eigen.services.orchestration.run')
    def test_inadmissible_pair(self, mock_run):
        """Test an inadmissible pair exits 2."""
        mock_run.side_effect = InadmissiblePairError(-1.0)

        result = runner.invoke(app, ["solve", "--p", "2"])
        assert result.exit_code == 2
        assert "inadmissible" in result.stdout

    @patch('pq_eigen.services.orchestration.run')
    def test_io_error(self, mock_run):
        """Test output failures exit 3."""
        mock_run.side_effect = PermissionError("results/summary.csv")

        result = runner.invoke(app, ["solve", "--p", "2"])
        assert result.exit_code == 3

    @patch('pq_eigen.services.orchestration.run')
    def test_bounds_are_printed(self, mock_run):
        """Test bound reports are shown with their hypothesis flag."""
        bounds = {"lower": 4.9348, "upper_kind": "convex_2d", "upper": 11.78,
                  "assumes_hypothesis_1": True, "inputs": {}}
        mock_run.return_value = outcome(bounds=bounds)

        result = runner.invoke(app, ["bounds", "--domain", "square", "--p", "2"])
        assert result.exit_code == 0
        assert "Lower bound" in result.stdout
        assert "convex_2d" in result.stdout
        assert "hypothesis" in result.stdout

    @patch('pq_eigen.services.orchestration.run')
    def test_global_options(self, mock_run, tmp_path):
        """Test shared options reach the run configuration."""
        mock_run.return_value = outcome()

        result = runner.invoke(app, ["--out", str(tmp_path), "--format", "json", "--threads", "2",
                                     "radial", "--n", "100", "--p", "2"])
        assert result.exit_code == 0
        config = mock_run.call_args[0][0]
        assert config.out == tmp_path
        assert config.format == "json"
        assert config.threads == 2
        assert config.domain.kind == "disc_radial"
        assert config.n == 100

    @patch('pq_eigen.services.orchestration.run')
    def test_config_file(self, mock_run, tmp_path):
        """Test values from a configuration file with a flag override."""
        mock_run.return_value = outcome()
        path = tmp_path / "run.conf"
        path.write_text("p = 10\nq = 5\nalpha = 1\neps = 1e-6\n")

        result = runner.invoke(app, ["--config", str(path), "solve", "--q", "2"])
        assert result.exit_code == 0
        config = mock_run.call_args[0][0]
        assert config.p == 10.0
        assert config.system_params().beta == pytest.approx(1.8)
        assert config.outer.eps == 1e-6


def test_verbose_enables_debug_logging(mocker):
    """Test --verbose switches the root logger to DEBUG."""
    mocker.patch('pq_eigen.services.orchestration.run', return_value=outcome())

    result = runner.invoke(app, ["--verbose", "solve", "--p", "2"])
    assert result.exit_code == 0
    assert logging.getLogger().level == logging.DEBUG


class TestConfigErrors:
    """Test configuration failures exit 1 before any solve."""

    @patch('pq_eigen.services.orchestration.run')
    def test_constraint_violation(self, mock_run):
        """Test alpha/p + beta/q != 1 is rejected."""
        result = runner.invoke(app, ["solve", "--p", "2", "--q", "2", "--alpha", "3", "--beta", "1"])
        assert result.exit_code == 1
        assert "Configuration error" in result.stdout
        mock_run.assert_not_called()

    @patch('pq_eigen.services.orchestration.run')
    def test_unknown_domain(self, mock_run):
        """Test an unknown domain name is rejected."""
        result = runner.invoke(app, ["solve", "--domain", "torus"])
        assert result.exit_code == 1
        mock_run.assert_not_called()

    def test_missing_config_file(self, tmp_path):
        """Test a missing configuration file exits 3."""
        result = runner.invoke(app, ["--config", str(tmp_path / "none.conf"), "solve"])
        assert result.exit_code == 3


class TestEndToEnd:
    """Test small real runs through the CLI."""

    def test_scalar_interval(self, tmp_path):
        """Test a scalar interval run writes its artifacts."""
        result = runner.invoke(app, ["--out", str(tmp_path), "scalar", "--domain", "interval",
                                     "--n", "50", "--p", "2"])
        assert result.exit_code == 0
        assert (tmp_path / "summary.csv").exists()
        assert (tmp_path / "history.csv").exists()
        assert (tmp_path / "field.csv").exists()

    def test_eoc_study_json(self, tmp_path):
        """Test the EOC study table in JSON."""
        result = runner.invoke(app, ["--out", str(tmp_path), "--format", "json", "eoc-study",
                                     "--domain", "square", "--p", "2", "--alpha", "1",
                                     "--h-values", "1,0.5,0.25"])
        assert result.exit_code == 0
        rows = json.loads((tmp_path / "eoc.json").read_text())
        assert [row["elements"] for row in rows] == [8, 32, 128]

    def test_no_field(self, tmp_path):
        """Test --no-field skips the nodal export."""
        result = runner.invoke(app, ["--out", str(tmp_path), "solve", "--domain", "interval",
                                     "--p", "2", "--no-field"])
        assert result.exit_code == 0
        assert not (tmp_path / "field.csv").exists()
