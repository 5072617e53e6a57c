"""Command-line entry point: ``python -m report.cli <command> ...``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on bad input.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema

from frames.killing import solve_ys
from frames.tables import DEFAULT_FRAME_VECTOR, FrameTables, render_table
from geodesics.integrator import DEFAULT_R_MAX
from report.config import OUTPUT_FORMATS, ConfigError, VerifyConfig
from report.verify import DRIFT_TOLERANCE, run_geodesic, run_projective, run_verify, run_ys_criteria
from sphere.metric_spec import MetricSpec, parse_hemisphere, parse_sign

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def _metric_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--K", type=float, default=None, help="flag curvature K >= 1")
    parent.add_argument("--sign", choices=["+", "-"], default=None, help="drift sign (default +)")
    parent.add_argument("--hemisphere", choices=["right", "left"], default=None, help="chart hemisphere (default right)")
    parent.add_argument("--drift-scale", type=float, default=None, help="multiplier on the drift 1-form (default 1)")
    return parent


def _output_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", choices=OUTPUT_FORMATS, default="text")
    parent.add_argument("--out", type=Path, default=None, help="write the output here instead of stdout")
    parent.add_argument("--timing", action="store_true", help="include wall-clock timings in the report")
    parent.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG on stderr")
    return parent


def build_parser() -> argparse.ArgumentParser:
    metric, output = _metric_parser(), _output_parser()
    parser = argparse.ArgumentParser(prog="finsler-verify", description="Checks for the Randers metrics of constant flag curvature on S^3.")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[metric, output], help="constant flag curvature check at sample points")
    verify.add_argument("--samples", type=int, default=None, help="number of random samples (default 20)")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--order", type=int, default=None, help="jet order (default $FINSLER_JET_ORDER or 6)")
    verify.add_argument("--tol", type=float, default=None, help="normalized residual tolerance (default 1e-8)")
    verify.add_argument("--quot-tol", type=float, default=None, help="quot tolerance (default 1e-9)")
    verify.add_argument("--reference-samples", "--paper-samples", dest="reference_samples", action="store_true", help="also evaluate the seven reference sample tuples")
    verify.add_argument("--sample", type=float, nargs=6, action="append", metavar=("X", "Y", "Z", "U", "V", "W"), help="explicit sample, repeatable")
    verify.add_argument("--workers", type=int, default=None)
    verify.add_argument("--config", type=Path, default=None, help="key=value config file; flags override it")

    ys = commands.add_parser("ys-criteria", parents=[metric, output], help="Yasuda-Shimada criteria residuals")
    ys.add_argument("--lambda-override", type=float, default=None)
    ys.add_argument("--epsilon-override", type=float, default=None)

    tables = commands.add_parser("frame-tables", parents=[metric, output], help="print a named frame table")
    tables.add_argument("table", nargs="?", default=None, help="table name; omit with --list")
    tables.add_argument("--frame-y", type=float, nargs=3, default=list(DEFAULT_FRAME_VECTOR), metavar=("Y1", "Y2", "Y3"))
    tables.add_argument("--list", action="store_true", help="list the table names")

    projective = commands.add_parser("projective", parents=[metric, output], help="Weyl and Douglas tensors")
    projective.add_argument("--samples", type=int, default=20)
    projective.add_argument("--seed", type=int, default=0)

    geodesic = commands.add_parser("geodesic", parents=[metric, output], help="integrate one geodesic, --format csv prints the trajectory")
    geodesic.add_argument("--p", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar=("X", "Y", "Z"))
    geodesic.add_argument("--y", type=float, nargs=3, default=[1.0, 0.0, 0.0], metavar=("U", "V", "W"))
    geodesic.add_argument("--t-end", type=float, default=5.0)
    geodesic.add_argument("--dt", type=float, default=1e-3)
    geodesic.add_argument("--r-max", type=float, default=DEFAULT_R_MAX)
    geodesic.add_argument(
        "--recenter-radius", type=float, default=None, help="recenter at the origin past this radius instead of stopping at --r-max"
    )
    geodesic.add_argument("--drift-tol", type=float, default=DRIFT_TOLERANCE)
    geodesic.add_argument("--trajectory", type=Path, default=None, help="also write the trajectory CSV here")
    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def resolve_spec(args: argparse.Namespace, base: Optional[MetricSpec] = None) -> MetricSpec:
    """CLI flags over ``base`` over defaults. K is checked with solve_ys before anything else."""
    K = args.K if args.K is not None else (base.K if base else None)
    if K is None:
        raise ConfigError("--K is required")
    sign = parse_sign(args.sign) if args.sign else (base.sign if base else 1)
    hemisphere = parse_hemisphere(args.hemisphere) if args.hemisphere else (base.hemisphere if base else 1)
    drift_scale = args.drift_scale if args.drift_scale is not None else (base.drift_scale if base else 1.0)
    solve_ys(K, sign)
    return MetricSpec(K=K, sign=sign, hemisphere=hemisphere, drift_scale=drift_scale)


def resolve_verify_config(args: argparse.Namespace) -> VerifyConfig:
    base = VerifyConfig.from_file(args.config) if args.config else None
    spec = resolve_spec(args, base.spec if base else None)
    cfg = base if base else VerifyConfig(spec=spec)
    explicit = tuple((tuple(s[:3]), tuple(s[3:])) for s in args.sample) if args.sample else None
    return cfg.with_overrides(
        spec=spec,
        samples=args.samples,
        seed=args.seed,
        order=args.order,
        tol=args.tol,
        quot_tol=args.quot_tol,
        workers=args.workers,
        reference_samples=True if args.reference_samples else None,
        explicit_samples=explicit,
        output_format=args.format,
        out=args.out,
        timing=True if args.timing else None,
    )


def _emit(text: str, out: Optional[Path]):
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info("wrote %s", out)


def _frame_tables(args: argparse.Namespace) -> int:
    if args.list:
        _emit("\n".join(FrameTables.names()) + "\n", args.out)
        return EXIT_OK
    if args.table is None:
        raise ConfigError(f"a table name is required; valid tables: {', '.join(FrameTables.names())}")
    if args.format == "csv":
        raise ConfigError("frame tables render as text or json")
    if args.K is None:
        raise ConfigError("--K is required")
    sign = parse_sign(args.sign) if args.sign else 1
    _emit(render_table(args.table, args.K, sign, args.frame_y, args.format) + "\n", args.out)
    return EXIT_OK


def run(args: argparse.Namespace) -> int:
    if args.command == "frame-tables":
        return _frame_tables(args)

    if args.command == "verify":
        report = run_verify(resolve_verify_config(args))
    elif args.command == "ys-criteria":
        spec = resolve_spec(args)
        report = run_ys_criteria(spec.K, spec.sign, args.lambda_override, args.epsilon_override)
    elif args.command == "projective":
        report = run_projective(resolve_spec(args), args.samples, args.seed, timing=args.timing)
    else:
        report = run_geodesic(
            resolve_spec(args),
            args.p,
            args.y,
            args.t_end,
            args.dt,
            r_max=args.r_max,
            drift_tolerance=args.drift_tol,
            trajectory_path=args.trajectory,
            timing=args.timing,
            recenter_radius=args.recenter_radius,
        )

    _emit(report.render(args.format), args.out)
    if not report.passed:
        print(f"failed checks: {', '.join(report.failing_checks())}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return run(args)
    except (ValueError, ArithmeticError, RuntimeError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
