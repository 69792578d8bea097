"""
Command line entry point: ``python -m sbpglue <subcommand>``.

Subcommands write their CSV outputs to the output directory (``--output``, the
``output_directory`` config key, or SBPGLUE_OUTPUT_DIR) and return 0 on success. Any
SbpGlueException is reported on stderr as a JSON object and mapped to its exit code.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from sbpglue.coupled_system import CoupledSystem
from sbpglue.glue import certify_projection, load_projection_coefficients, write_projection_coefficients
from sbpglue.harness import (
    ExactSolution,
    compute_spectrum,
    energy_trace,
    run_convergence,
    run_simulation,
    stable_time_step,
)
from sbpglue.sbp_operators import build_sbp, verify_sbp_accuracy
from sbpglue.sbpglue_config import RunConfig, Scenario, parse_config_text
from sbpglue.sbpglue_exceptions import SbpGlueException
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_settings import SbpGlueSettings
from sbpglue.sbpglue_utils import CsvUtils, FileUtils

ACCURACY_HEADER = ("q", "N", "degree", "region", "max_error", "flagged")
CERTIFICATE_HEADER = ("check", "residual", "status")
ERRORS_HEADER = ("q", "N", "scenario", "epsilon", "rate")
ENERGY_HEADER = ("t", "energy")
SPECTRUM_HEADER = ("real", "imag")

# argparse destination -> RunConfig field
CONFIG_FLAGS = {
    "scenario": "scenario",
    "q": "q",
    "N": "N",
    "alpha": "alpha",
    "t_final": "t_final",
    "dt": "dt",
    "cfl": "cfl",
    "levels": "levels",
    "refine": "refine",
    "seed": "seed",
    "samples": "samples",
    "output": "output_directory",
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file with a 'defaults' section and one section per scenario")
    common.add_argument("--output", help="directory for CSV and JSON outputs")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    common.add_argument(
        "--refine",
        action="store_true",
        default=None,
        help="use the refined projection coefficients (the scenario default for run, converge, eig and energy)",
    )
    common.add_argument(
        "--no-refine", dest="refine", action="store_false", default=None, help="use the minimum-norm projection coefficients"
    )
    return common


def _run_parser() -> argparse.ArgumentParser:
    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--scenario", choices=[str(s) for s in Scenario])
    run.add_argument("--q", type=int)
    run.add_argument("--N", type=int)
    run.add_argument("--alpha", type=float)
    run.add_argument("--t-final", dest="t_final", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--cfl", type=float)
    run.add_argument("--levels", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    return run


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    run = _run_parser()
    parser = argparse.ArgumentParser(prog="sbpglue", description="SBP operators, glue projections and coupled wave solvers")
    commands = parser.add_subparsers(dest="command", required=True)

    ops = commands.add_parser("ops", help="SBP operator utilities").add_subparsers(dest="action", required=True)
    verify = ops.add_parser("verify", parents=[common], help="report the accuracy of D on monomials")
    verify.add_argument("--q", type=int, action="append", help="order (repeatable, default 1..5)")
    verify.add_argument("--N", type=int, action="append", help="cells (repeatable, default 64)")

    glue = commands.add_parser("glue", help="glue projection utilities").add_subparsers(dest="action", required=True)
    build = glue.add_parser("build", parents=[common], help="solve, write and certify projection coefficients")
    build.add_argument("--q", type=int, required=True)
    build.add_argument("--N", type=int, default=64, help="grid on which the certificate is evaluated")

    commands.add_parser("run", parents=[common, run], help="simulate one scenario and report the error")
    commands.add_parser("converge", parents=[common, run], help="errors and rates over --levels resolutions")
    commands.add_parser("eig", parents=[common, run], help="eigenvalues of the coupled operator")
    commands.add_parser("energy", parents=[common, run], help="energy history of one simulation (use --cfl 0.05 with --alpha 0 to resolve conservation)")
    return parser


def resolve_config(args: argparse.Namespace, logger: SbpGlueLogger) -> RunConfig:
    """
    Merges built-in defaults < the scenario package defaults < the user file's 'defaults'
    section < the user file's scenario section < command line flags.
    """
    user_text = FileUtils.read_file(logger, args.config) if getattr(args, "config", None) else None
    flags: Dict[str, Any] = {field: getattr(args, dest, None) for dest, field in CONFIG_FLAGS.items()}
    scenario = flags["scenario"]
    if scenario is None and user_text is not None:
        scenario = parse_config_text(user_text).get("scenario")
    scenario = RunConfig(scenario=scenario).scenario if scenario is not None else RunConfig().scenario

    shipped = CoupledSystem.defaults(scenario, logger)
    user = parse_config_text(user_text, str(scenario)) if user_text is not None else {}
    config = RunConfig.merged(shipped, user, flags, {"scenario": str(scenario)})
    logger.log(f"Resolved configuration: {config.to_dict()}", logging.DEBUG)
    return config


def _output_directory(args: argparse.Namespace, configured: Optional[str] = None) -> str:
    return SbpGlueSettings.get_output_directory(getattr(args, "output", None) or configured)


def ops_verify(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    rows = []
    for q in args.q or [1, 2, 3, 4, 5]:
        for N in args.N or [64]:
            rows += verify_sbp_accuracy(build_sbp(q, N))
    body = CsvUtils.write_csv(logger, os.path.join(_output_directory(args), "sbp_accuracy.csv"), ACCURACY_HEADER, rows)
    sys.stdout.write(body)
    flagged = [row for row in rows if row["flagged"]]
    if flagged:
        logger.log(f"{len(flagged)} accuracy row(s) flagged", logging.WARNING)
        return 1
    return 0


def glue_build(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    refine = bool(args.refine)
    coefficients = load_projection_coefficients(args.q, logger, refine)
    directory = _output_directory(args)
    suffix = "_refined" if refine else ""
    write_projection_coefficients(logger, os.path.join(directory, f"projection_q{args.q}{suffix}.txt"), coefficients)
    certificate = certify_projection(coefficients, args.N)
    body = CsvUtils.write_csv(
        logger, os.path.join(directory, f"projection_q{args.q}{suffix}_certificate.csv"), CERTIFICATE_HEADER, certificate
    )
    sys.stdout.write(body)
    failed = [row["check"] for row in certificate if row["status"] != "pass"]
    if failed:
        logger.log(f"Projection q={args.q} failed checks: {', '.join(failed)}", logging.ERROR)
        return 1
    return 0


def run(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    config = resolve_config(args, logger)
    result = run_simulation(config, logger)
    FileUtils.write_file(logger, os.path.join(_output_directory(args, config.output_directory), "run_result.json"), result.json(indent=2))
    sys.stdout.write(f"epsilon = {result.epsilon:.17g}\n")
    return 0


def converge(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    config = resolve_config(args, logger)
    rows = run_convergence(config, logger)
    path = os.path.join(_output_directory(args, config.output_directory), "errors.csv")
    sys.stdout.write(CsvUtils.write_csv(logger, path, ERRORS_HEADER, rows))
    return 0


def eig(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    config = resolve_config(args, logger)
    eigenvalues = compute_spectrum(config, logger)
    rows = [{"real": float(value.real), "imag": float(value.imag)} for value in eigenvalues]
    path = os.path.join(_output_directory(args, config.output_directory), "spectrum.csv")
    CsvUtils.write_csv(logger, path, SPECTRUM_HEADER, rows)
    sys.stdout.write(f"max Re(lambda) = {eigenvalues[0].real:.17g}\n")
    return 0


def energy(args: argparse.Namespace, logger: SbpGlueLogger) -> int:
    config = resolve_config(args, logger)
    system = CoupledSystem.create(config, logger)
    dt = config.dt or stable_time_step(system, config.cfl)
    trace, _, _ = energy_trace(system, system.sample(ExactSolution(system.material), 0.0), dt, config.t_final, config.samples)
    path = os.path.join(_output_directory(args, config.output_directory), "energy.csv")
    sys.stdout.write(CsvUtils.write_csv(logger, path, ENERGY_HEADER, trace))
    return 0


COMMANDS = {
    ("ops", "verify"): ops_verify,
    ("glue", "build"): glue_build,
    ("run", None): run,
    ("converge", None): converge,
    ("eig", None): eig,
    ("energy", None): energy,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses ``argv``, runs the subcommand and returns the process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format="%(message)s")
    logger = SbpGlueLogger(level)

    command = COMMANDS[(args.command, getattr(args, "action", None))]
    try:
        return command(args, logger)
    except SbpGlueException as exc:
        error = {"error": type(exc).__name__, "message": exc.message, "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(error) + "\n")
        return exc.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_cli(argv))
