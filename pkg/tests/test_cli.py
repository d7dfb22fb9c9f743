"""
Unit tests for the command-line entry point
"""

import argparse
import os
import sys
from unittest.mock import patch

import pandas as pd
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.main import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    cli_overrides,
    main,
    parse_shape,
    parse_vary,
)
from backend.exceptions import ConfigurationError, NumericalError


@pytest.fixture(autouse=True)
def keep_environment():
    """Thread variables set by main stay local to each test"""
    with patch("utils.runtime_env.setup_environment"):
        yield


class TestArgumentParsing:
    """Test suite for flag parsing helpers"""

    def test_parse_shape(self):
        assert parse_shape("35x35") == (35, 35)
        assert parse_shape("120X40") == (120, 40)

    @pytest.mark.parametrize("text", ["35xA", "1x5", "x"])
    def test_parse_shape_rejects(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_shape(text)

    def test_parse_vary(self):
        assert parse_vary("alpha=1e4,1e6") == ("alpha", [1e4, 1e6])
        assert parse_vary("grid=60x80,96x50") == ("grid", [(60, 80), (96, 50)])
        assert parse_vary("lengthscale=0.1:0.2,0.3") == (
            "lengthscale",
            [(0.1, 0.2), 0.3],
        )

    @pytest.mark.parametrize("text", ["alpha", "alpha=", "alpha=big"])
    def test_parse_vary_rejects(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_vary(text)

    def test_flags_become_manifest_overrides(self):
        args = build_parser().parse_args(
            [
                "solve",
                "--benchmark",
                "burgers",
                "--nu",
                "0.001",
                "--grid",
                "42x14",
                "--lengthscale",
                "0.02",
                "--lengthscale",
                "0.1",
                "--alpha",
                "1e6",
                "--operator-mode",
                "dense",
                "--out",
                "runs/sharp",
            ]
        )
        assert cli_overrides(args) == {
            "benchmark": {"name": "burgers", "nu": 0.001},
            "grid": {"shape": [42, 14]},
            "kernel": {"lengthscales": [0.02, 0.1]},
            "loss": {"alpha": 1e6},
            "output": {"operator_mode": "dense", "out_dir": "runs/sharp"},
        }

    def test_reproduce_keeps_iteration_cap_out_of_manifest(self):
        args = build_parser().parse_args(
            ["reproduce", "easy-small", "--max-iters", "10", "--threads", "2"]
        )
        assert cli_overrides(args) == {"output": {"threads": 2}}
        assert args.max_iters == 10

    def test_sweep_requires_vary(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sweep", "--benchmark", "elliptic"])


class TestExitCodes:
    """Test suite for main's exit codes"""

    def test_solve_prints_summary(self, capsys):
        with patch("app.commands.solve_command") as solve, patch(
            "app.reports.solve_summary", return_value={"benchmark": "poisson"}
        ):
            assert main(["solve", "--benchmark", "poisson"]) == EXIT_OK
        solve.assert_called_once()
        assert solve.call_args[0][0].benchmark.name == "poisson"
        assert "benchmark: poisson" in capsys.readouterr().out

    def test_configuration_error_is_usage(self):
        with patch(
            "app.commands.solve_command", side_effect=ConfigurationError("bad domain")
        ):
            assert main(["solve"]) == EXIT_USAGE

    def test_numerical_error_is_failure(self):
        with patch("app.commands.solve_command", side_effect=NumericalError("nan")):
            assert main(["solve"]) == EXIT_FAILURE

    def test_invalid_manifest_file_is_usage(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[optimizer]\nlr = -1\n", encoding="utf-8")
        assert main(["solve", "--config", str(path)]) == EXIT_USAGE

    def test_unknown_choice_exits_from_argparse(self):
        with pytest.raises(SystemExit) as info:
            main(["solve", "--benchmark", "heat"])
        assert info.value.code == EXIT_USAGE

    def test_failed_sweep_point_is_failure(self):
        table = pd.DataFrame({"status": ["patience", "diverged"]})
        with patch("app.commands.sweep_command", return_value=table):
            assert main(["sweep", "--vary", "alpha=1,2"]) == EXIT_FAILURE

    def test_reproduce_passes(self):
        table = pd.DataFrame({"row": ["elliptic-18x18"], "passed": [True]})
        with patch("app.commands.reproduce_command", return_value=table) as command:
            assert main(["reproduce", "easy-small", "--rows", "elliptic-18x18"]) == 0
        assert command.call_args[0][2] == ["elliptic-18x18"]

    def test_reproduce_failure(self):
        table = pd.DataFrame({"row": ["elliptic-18x18"], "passed": [False]})
        with patch("app.commands.reproduce_command", return_value=table):
            assert main(["reproduce", "easy-small"]) == EXIT_FAILURE

    def test_truth_prints_path(self, tmp_path, capsys):
        target = tmp_path / "truth.csv"
        with patch("app.commands.truth_command", return_value=target):
            assert main(["truth", "--benchmark", "poisson"]) == EXIT_OK
        assert str(target) in capsys.readouterr().out

    def test_small_solve_end_to_end(self, tmp_path):
        out = tmp_path / "run"
        code = main(
            [
                "solve",
                "--benchmark",
                "poisson",
                "--grid",
                "9x9",
                "--max-iters",
                "20",
                "--out",
                str(out),
                "--cache-dir",
                str(tmp_path / "cache"),
            ]
        )
        assert code == EXIT_OK
        assert {p.name for p in out.iterdir()} == {
            "summary.txt",
            "trace.csv",
            "eta.bin",
            "manifest.ini",
        }
