"""
This file contains tests for the sbpglue command line interface
"""

import json
import os

import pytest

from sbpglue.cli import build_parser, resolve_config, run_cli
from sbpglue.sbpglue_config import Scenario
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_utils import CsvUtils
from tests.test_utils import create_test_context


def test_ops_verify(capsys) -> None:
    with create_test_context({}) as context:
        code = run_cli(["ops", "verify", "--q", "2", "--q", "3", "--N", "32", "--output", context.output_directory])
        assert code == 0
        rows = CsvUtils.read_csv(context.logger, os.path.join(context.output_directory, "sbp_accuracy.csv"))
        assert {row["q"] for row in rows} == {"2", "3"}
        assert all(row["flagged"] == "false" for row in rows)
        assert capsys.readouterr().out.startswith("q,N,degree,region,max_error,flagged")


def test_glue_build(monkeypatch, capsys) -> None:
    with create_test_context({}) as context:
        monkeypatch.setenv("SBPGLUE_HOME", context.output_directory)
        out = os.path.join(context.output_directory, "out")
        assert run_cli(["glue", "build", "--q", "2", "--N", "32", "--output", out]) == 0
        assert os.path.exists(os.path.join(out, "projection_q2.txt"))
        certificate = CsvUtils.read_csv(context.logger, os.path.join(out, "projection_q2_certificate.csv"))
        assert certificate and all(row["status"] == "pass" for row in certificate)


def test_glue_build_unsupported_order(capsys) -> None:
    assert run_cli(["glue", "build", "--q", "6"]) == 10
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "UnsupportedOrder"
    assert error["exit_code"] == 10


def test_run_writes_result(capsys) -> None:
    with create_test_context({}) as context:
        argv = ["run", "--scenario", "two-block-conforming", "--q", "2", "--N", "16", "--t-final", "0.05"]
        assert run_cli(argv + ["--output", context.output_directory]) == 0
        with open(os.path.join(context.output_directory, "run_result.json")) as f:
            result = json.load(f)
        assert result["scenario"] == "two-block-conforming"
        assert result["N"] == 16 and result["epsilon"] < 1e-2
        assert "epsilon = " in capsys.readouterr().out


def test_eig_writes_spectrum() -> None:
    with create_test_context({}) as context:
        argv = ["eig", "--scenario", "two-block-nested", "--q", "1", "--N", "8", "--output", context.output_directory]
        assert run_cli(argv) == 0
        rows = CsvUtils.read_csv(context.logger, os.path.join(context.output_directory, "spectrum.csv"))
        assert len(rows) == 3 * (5 * 9 + 9 * 17)
        assert float(rows[0]["real"]) <= 1e-10


def test_energy_writes_trace() -> None:
    with create_test_context({}) as context:
        argv = ["energy", "--scenario", "sbp-dg", "--q", "2", "--N", "16", "--t-final", "0.05", "--samples", "3"]
        assert run_cli(argv + ["--output", context.output_directory]) == 0
        rows = CsvUtils.read_csv(context.logger, os.path.join(context.output_directory, "energy.csv"))
        assert rows[0]["t"] == "0" or float(rows[0]["t"]) == 0.0
        energies = [float(row["energy"]) for row in rows]
        assert energies[-1] <= energies[0] * (1 + 1e-12)


@pytest.mark.slow
def test_converge_writes_errors() -> None:
    with create_test_context({}) as context:
        argv = ["converge", "--scenario", "two-block-conforming", "--q", "2", "--N", "16", "--levels", "2", "--t-final", "0.25"]
        assert run_cli(argv + ["--output", context.output_directory]) == 0
        rows = CsvUtils.read_csv(context.logger, os.path.join(context.output_directory, "errors.csv"))
        assert [row["N"] for row in rows] == ["16", "32"]
        assert rows[0]["rate"] == "" and float(rows[1]["rate"]) > 2.0


def test_grid_too_small(capsys) -> None:
    with create_test_context({}) as context:
        argv = ["run", "--scenario", "two-block-conforming", "--q", "5", "--N", "16", "--output", context.output_directory]
        assert run_cli(argv) == 11
        assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "GridTooSmall"


def test_bad_config_file(capsys) -> None:
    with create_test_context({}) as context:
        path = os.path.join(context.output_directory, "bad.json")
        with open(path, "w") as f:
            json.dump({"defaults": {"q": 2}, "four-block": {}}, f)
        assert run_cli(["run", "--config", path, "--output", context.output_directory]) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error == {"error": "ConfigParse", "message": error["message"], "exit_code": 2}
        assert "four-block" in error["message"]


def test_argparse_errors() -> None:
    assert run_cli([]) == 2
    assert run_cli(["run", "--scenario", "four-block"]) == 2
    assert run_cli(["--help"]) == 0


def test_config_precedence() -> None:
    """
    Flags win over the user's scenario section, which wins over the user's defaults section
    and the shipped scenario defaults
    """
    with create_test_context({}) as context:
        path = os.path.join(context.output_directory, "config.json")
        with open(path, "w") as f:
            json.dump(
                {
                    "_description": "test",
                    "defaults": {"scenario": "three-block-nested", "q": 3, "alpha": 0.5, "N": 32},
                    "three-block-nested": {"q": 4, "t_final": 0.5},
                },
                f,
            )
        args = build_parser().parse_args(["run", "--config", path, "--N", "48"])
        config = resolve_config(args, SbpGlueLogger())
        assert config.scenario == Scenario.THREE_BLOCK_NESTED
        assert (config.q, config.N, config.alpha, config.t_final) == (4, 48, 0.5, 0.5)

        args = build_parser().parse_args(["run", "--config", path, "--scenario", "sbp-dg"])
        config = resolve_config(args, SbpGlueLogger())
        assert config.scenario == Scenario.SBP_DG
        assert (config.q, config.N) == (3, 32)


def test_scenarios_refine_by_default() -> None:
    for flags, expected in [([], True), (["--no-refine"], False), (["--refine"], True)]:
        args = build_parser().parse_args(["run", "--scenario", "two-block-unnested", *flags])
        assert resolve_config(args, SbpGlueLogger()).refine is expected
