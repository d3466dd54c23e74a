"""Tests for the syzlab command line: documents, exit codes and output targets."""

from __future__ import annotations

import json
from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest

from schemas.verdict import TrialRecord, Verdict
from syzlab import run

BETTI_ARGS = ["betti", "--kind", "rational_normal", "--r", "3", "--d", "3", "--gamma", "7"]


class TestDocuments:
    """Successful runs write one document to stdout."""

    def test_plan_json(self, capsys: pytest.CaptureFixture) -> None:
        argv = ["plan", "--g", "10", "--r", "3", "--d", "12"]
        assert run(argv) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["degeneration"]["base"]["kind"] == "rational_normal"
        assert document["provenance"]["argv"] == argv
        assert document["provenance"]["subcommand"] == "plan"

    def test_betti_csv(self, capsys: pytest.CaptureFixture) -> None:
        assert run(BETTI_ARGS + ["--prime", "1009", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        header = [line for line in lines if line.startswith("#")]
        assert [line.split("=")[0] for line in header] == [
            "# argv",
            "# prime",
            "# seed",
            "# subcommand",
            "# version",
        ]
        assert "# prime=1009" in header
        body = [line for line in lines if not line.startswith("#")]
        assert body[0] == "j,0,1,2,3,4"
        assert "2,0,3,6,3,0" in body

    def test_out_file(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        target = tmp_path / "slope.json"
        assert run(["slope", "--g", "3", "--r", "3", "--d", "6", "--out", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())["stability"] == "stable"

    def test_slope_characteristic(self, capsys: pytest.CaptureFixture) -> None:
        assert run(["slope", "--g", "2", "--r", "3", "--d", "7", "--char", "3"]) == 0
        assert json.loads(capsys.readouterr().out)["strong_stability"] == "strongly_semistable"

    def test_deterministic(self, capsys: pytest.CaptureFixture) -> None:
        run(BETTI_ARGS + ["--seed", "4"])
        first = capsys.readouterr().out
        run(BETTI_ARGS + ["--seed", "4"])
        assert capsys.readouterr().out == first

    def test_help(self, capsys: pytest.CaptureFixture) -> None:
        assert run(["--help"]) == 0
        assert "betti" in capsys.readouterr().out


class TestExitCodes:
    """Usage errors, library errors and verdicts map to distinct codes."""

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["search"],
            ["plan", "--g", "1", "--r", "3"],
            ["mrc", "--kind", "rational_normal", "--r", "3", "--d", "3"],
            ["betti", "--kind", "conic", "--r", "2", "--d", "2"],
        ],
    )
    def test_argparse_usage(self, argv: list, capsys: pytest.CaptureFixture) -> None:
        assert run(argv) == 64
        assert "usage" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "argv",
        [
            ["betti", "--kind", "rational_normal", "--r", "3"],
            ["plan", "--g", "1", "--r", "3", "--d", "6", "--format", "csv"],
            BETTI_ARGS + ["--prime", "1000"],
        ],
    )
    def test_validation_usage(self, argv: list, capsys: pytest.CaptureFixture) -> None:
        assert run(argv) == 64
        assert json.loads(capsys.readouterr().err.splitlines()[-1])["type"] == "ValidationError"

    def test_library_error(self, capsys: pytest.CaptureFixture) -> None:
        # F_5 has only six points on a line
        assert run(BETTI_ARGS + ["--prime", "5"]) == 1
        error = json.loads(capsys.readouterr().err.splitlines()[-1])
        assert error["type"] == "NotEnoughPointsError"

    def test_infeasible_plan(self, capsys: pytest.CaptureFixture) -> None:
        assert run(["plan", "--g", "20", "--r", "3", "--d", "6"]) == 1
        assert "InfeasibleError" in capsys.readouterr().err

    def test_mrc_confirmed(self, capsys: pytest.CaptureFixture) -> None:
        argv = ["mrc", "--kind", "rational_normal", "--r", "3", "--d", "3"]
        assert run(argv + ["--gamma", "7", "--trials", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "confirmed"

    @patch("services.command_router.mrc.verify_mrc")
    def test_mrc_violated(self, mock_verify: MagicMock, capsys: pytest.CaptureFixture) -> None:
        mock_verify.return_value = Verdict(
            check="mrc",
            status="violated",
            trials=[TrialRecord(seed=1, prime=1009, match=False)],
        )
        argv = ["mrc", "--kind", "rational_normal", "--r", "3", "--d", "3", "--gamma", "7"]
        assert run(argv) == 2
        assert json.loads(capsys.readouterr().out)["status"] == "violated"

    def test_audit(self, capsys: pytest.CaptureFixture) -> None:
        assert run(["audit", "--r-max", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["clean"] is True
