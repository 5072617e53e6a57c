"""Runners behind the CLI commands and the report they all produce."""

import csv
import io
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from frames.killing import solve_ys, ys_criteria_check
from geodesics.integrator import (
    DEFAULT_R_MAX,
    GeodesicState,
    integrate_geodesic,
    integrate_recentered,
    trajectory_csv_text,
    write_trajectory_csv,
)
from randers.curvature import DegenerateFlagError, constant_curvature_residual, flag_curvature
from randers.projective import MIN_DOUGLAS_ORDER, MIN_WEYL_ORDER, douglas_magnitude, weyl_magnitude
from report.config import ConfigError, VerifyConfig
from report.schema import SCHEMA_VERSION, validate_report
from sphere.metric_spec import MetricSpec, format_sign, parse_hemisphere, parse_sign

logger = logging.getLogger(__name__)

REFERENCE_SAMPLES_PATH = Path(__file__).parent / "fixtures" / "reference_samples.json"
SAMPLE_BOX = 2.0  # random chart points are drawn from [-SAMPLE_BOX, SAMPLE_BOX]^3
PROJECTIVE_BOX = 0.5
MIN_TANGENT_NORM = 1e-6
FLAG_TOLERANCE = 1e-7
WEYL_TOLERANCE = 1e-6
DOUGLAS_CEILING = 1e-7  # zero drift
DOUGLAS_FLOOR = 1e-3  # K > 1, scaled down by the drift coefficient when it is below 1
DRIFT_TOLERANCE = 1e-6

FLAT_VERDICT = "projectively flat (Riemannian round sphere)"
NOT_FLAT_VERDICT = "not projectively flat"
RIEMANNIAN_FLAG = "Riemannian (λ = 0)"


@dataclass(frozen=True)
class Sample:
    label: str
    spec: MetricSpec
    p: tuple
    y: tuple
    V: Optional[tuple] = None  # transverse edge for the flag curvature
    printed: tuple = ()  # entries printed next to this sample in the reference run


def _parse_number(value) -> float:
    """Numbers stay numbers; strings like "1/137" go through Fraction."""
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def load_reference_samples(path: Path = REFERENCE_SAMPLES_PATH) -> list[Sample]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("Unsupported schema version")
    sign = parse_sign(data.get("sign", "+"))
    hemisphere = parse_hemisphere(data.get("hemisphere", "right"))

    samples = []
    for entry in data["samples"]:
        spec = MetricSpec(K=_parse_number(entry["K"]), sign=sign, hemisphere=hemisphere)
        samples.append(
            Sample(
                label=entry["label"],
                spec=spec,
                p=tuple(_parse_number(v) for v in entry["position"]),
                y=tuple(_parse_number(v) for v in entry["velocity"]),
                printed=tuple(entry.get("printed", ())),
            )
        )
    return samples


def random_tangent(rng: np.random.Generator) -> np.ndarray:
    """Standard normal vector, redrawn until it is safely away from zero."""
    while True:
        y = rng.standard_normal(3)
        if np.linalg.norm(y) > MIN_TANGENT_NORM:
            return y


def generate_samples(spec: MetricSpec, count: int, seed: int, box: float = SAMPLE_BOX) -> list[Sample]:
    rng = np.random.default_rng(seed)
    samples = []
    for index in range(count):
        p = rng.uniform(-box, box, 3)
        y = random_tangent(rng)
        V = random_tangent(rng)
        samples.append(Sample(label=f"random-{index}", spec=spec, p=tuple(p), y=tuple(y), V=tuple(V)))
    return samples


def _clean_matrix(values: np.ndarray) -> list:
    return [[None if math.isnan(v) else float(v) for v in row] for row in values]


def evaluate_sample(sample: Sample, order: int) -> dict:
    """Curvature residual and flag curvature at one sample. Top-level so worker processes can pickle it."""
    residual = constant_curvature_residual(sample.spec, sample.p, sample.y, order)
    flag = None
    if sample.V is not None:
        try:
            flag = flag_curvature(sample.spec, sample.p, sample.y, sample.V)
        except DegenerateFlagError:
            logger.warning("degenerate flag at sample %s, flag curvature skipped", sample.label)

    result = {
        "label": sample.label,
        "K": sample.spec.K,
        "p": [float(t) for t in sample.p],
        "y": [float(t) for t in sample.y],
        "F": residual.F,
        "dif": _clean_matrix(residual.dif),
        "normalized": _clean_matrix(residual.normalized),
        "quot": _clean_matrix(residual.quot),
        "max_normalized": residual.max_normalized(),
        "max_quot_deviation": residual.max_quot_deviation(),
        "max_scaled_quot_deviation": residual.max_scaled_quot_deviation(),
        "flag_curvature": flag,
    }
    if sample.printed:
        result["printed"] = [
            {**entry, "computed_quot": result["quot"][entry["entry"][0] - 1][entry["entry"][1] - 1]}
            for entry in sample.printed
        ]
    logger.debug("sample %s: max normalized %.3e", sample.label, result["max_normalized"])
    return result


def _evaluate_indexed(args: tuple) -> dict:
    sample, order = args
    return evaluate_sample(sample, order)


def evaluate_samples(samples: Sequence[Sample], order: int, workers: int = 1) -> list[dict]:
    """Results come back in sample order regardless of the worker count."""
    jobs = [(sample, order) for sample in samples]
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate_indexed(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_indexed, jobs))


def environment_stamp() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


@dataclass
class VerifyReport:
    """Result of one CLI command: resolved config, named checks and the command's own payload."""

    SCHEMA_VERSION = SCHEMA_VERSION

    command: str
    config: dict
    checks: dict
    body: dict = field(default_factory=dict)
    environment: dict = field(default_factory=environment_stamp)
    timing: Optional[dict] = None
    csv_rows: list = field(default_factory=list)
    text_lines: list = field(default_factory=list)

    def __post_init__(self):
        self.checks = {name: bool(ok) for name, ok in self.checks.items()}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failing_checks(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self) -> dict:
        data = {
            "schema_version": self.SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "environment": self.environment,
            "checks": self.checks,
            "passed": self.passed,
            **self.body,
        }
        if self.timing is not None:
            data["timing"] = self.timing
        return data

    def to_json(self) -> str:
        data = self.to_dict()
        validate_report(data)
        return json.dumps(data, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        if not self.csv_rows:
            raise ConfigError(f"csv output is not available for {self.command}")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerows(self.csv_rows)
        return buffer.getvalue()

    def to_text(self) -> str:
        lines = list(self.text_lines)
        for name, ok in self.checks.items():
            lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
        lines.append("verdict: " + ("pass" if self.passed else "fail (" + ", ".join(self.failing_checks()) + ")"))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ConfigError(f"unknown output format {fmt!r}")

    def to_file(self, path: Path, fmt: str = "json"):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(fmt), encoding="utf-8")

    @staticmethod
    def from_json(json_input: Union[str, dict, Path]) -> "VerifyReport":
        """Load a report written with ``to_json``. Text and CSV renderings are not restored."""
        if isinstance(json_input, Path):
            data = json.loads(json_input.read_text(encoding="utf-8"))
        elif isinstance(json_input, str):
            data = json.loads(json_input)
        elif isinstance(json_input, dict):
            data = json_input
        else:
            raise TypeError("Unsupported input type for from_json")

        if data.get("schema_version") != VerifyReport.SCHEMA_VERSION:
            raise ValueError("Unsupported schema version")
        validate_report(data)

        reserved = {"schema_version", "command", "config", "environment", "checks", "passed", "timing"}
        return VerifyReport(
            command=data["command"],
            config=data["config"],
            checks=data["checks"],
            body={key: value for key, value in data.items() if key not in reserved},
            environment=data["environment"],
            timing=data.get("timing"),
        )


class _Stopwatch:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.times = {}

    def measure(self, name: str, fn, *args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        if self.enabled:
            self.times[name] = time.perf_counter() - start
        return result

    def result(self) -> Optional[dict]:
        return self.times if self.enabled else None


def run_verify(cfg: VerifyConfig) -> VerifyReport:
    """Constant flag curvature check over explicit, reference and random samples."""
    spec = cfg.spec
    solve_ys(spec.K, spec.sign)
    logger.info("verify: K=%s sign=%s samples=%d seed=%d order=%d", spec.K, format_sign(spec.sign), cfg.samples, cfg.seed, cfg.order)

    samples = [
        Sample(label=f"explicit-{i}", spec=spec, p=tuple(p), y=tuple(y)) for i, (p, y) in enumerate(cfg.explicit_samples)
    ]
    for sample in samples:
        if not np.any(sample.y):
            raise ConfigError(f"sample {sample.label} has zero tangent vector")
    if cfg.reference_samples:
        samples.extend(load_reference_samples())
    samples.extend(generate_samples(spec, cfg.samples, cfg.seed))

    stopwatch = _Stopwatch(cfg.timing)
    results = stopwatch.measure("evaluate", evaluate_samples, samples, cfg.order, cfg.workers)

    max_normalized = max(r["max_normalized"] for r in results)
    max_quot = max(r["max_quot_deviation"] for r in results)
    max_scaled_quot = max(r["max_scaled_quot_deviation"] for r in results)
    flags = [r["flag_curvature"] for r in results if r["flag_curvature"] is not None]
    flag_ok = all(abs(k - spec.K) <= FLAG_TOLERANCE * spec.K for k in flags)

    checks = {
        "normalized_residual": max_normalized < cfg.tol,
        "quot": max_scaled_quot < cfg.quot_tol,
        "flag_curvature": flag_ok,
    }

    text = [f"verify K={spec.K} sign={format_sign(spec.sign)} seed={cfg.seed} order={cfg.order}"]
    for r in results:
        flag = "-" if r["flag_curvature"] is None else f"{r['flag_curvature']:.12g}"
        text.append(
            f"  {r['label']:<12} K={r['K']:<8g} max normalized={r['max_normalized']:.3e} "
            f"max |quot-1|={r['max_quot_deviation']:.3e} flag={flag}"
        )
    text.append(f"max normalized residual: {max_normalized:.3e} (tol {cfg.tol:g})")
    text.append(f"max scaled quot deviation: {max_scaled_quot:.3e} (tol {cfg.quot_tol:g})")

    csv_rows = [("sample", "i", "k", "dif", "normalized", "quot")]
    for r in results:
        for i in range(3):
            for k in range(3):
                quot = r["quot"][i][k]
                csv_rows.append(
                    (r["label"], i + 1, k + 1, repr(r["dif"][i][k]), repr(r["normalized"][i][k]), "" if quot is None else repr(quot))
                )

    report = VerifyReport(
        command="verify",
        config=cfg.to_dict(),
        checks=checks,
        body={
            "samples": results,
            "max_normalized": max_normalized,
            "max_quot_deviation": max_quot,
            "max_scaled_quot_deviation": max_scaled_quot,
        },
        timing=stopwatch.result(),
        csv_rows=csv_rows,
        text_lines=text,
    )
    logger.info("verify finished: %s", "pass" if report.passed else f"fail {report.failing_checks()}")
    return report


def run_ys_criteria(
    K: float,
    sign: int = 1,
    lambda_override: Optional[float] = None,
    epsilon_override: Optional[float] = None,
) -> VerifyReport:
    epsilon, lam = solve_ys(K, sign)
    if lambda_override is not None:
        lam = lambda_override
    if epsilon_override is not None:
        epsilon = epsilon_override
    ys = ys_criteria_check(K, lam, epsilon)

    text = [f"Yasuda-Shimada criteria at K={K:g} lambda={lam:.15g} epsilon={epsilon:.15g}"]
    residuals = {
        "killing": ys.killing_residual,
        "constant_norm": ys.norm_value,
        "second_derivative": ys.second_derivative_residual,
        "curvature": ys.curvature_residual,
    }
    for number, name in enumerate(ys.CRITERIA, start=1):
        label = "norm" if name == "constant_norm" else "residual"
        text.append(f"  {number}. {name:<18} {label}={residuals[name]:.6e} {'ok' if ys.passes[name] else 'FAILED'}")
    if ys.is_riemannian:
        logger.warning("K=%s gives lambda = 0: the metric is Riemannian", K)
        text.append(RIEMANNIAN_FLAG)

    return VerifyReport(
        command="ys-criteria",
        config={
            "K": K,
            "sign": format_sign(sign),
            "lambda_override": lambda_override,
            "epsilon_override": epsilon_override,
        },
        checks=dict(ys.passes),
        body={"criteria": ys.to_dict(), "riemannian": ys.is_riemannian},
        csv_rows=[("criterion", "residual", "passed")]
        + [(name, repr(residuals[name]), ys.passes[name]) for name in ys.CRITERIA],
        text_lines=text,
    )


def douglas_floor(spec: MetricSpec) -> float:
    """Lower bound for |D| |y| when the drift is nonzero; |D| grows linearly with small drifts."""
    if spec.is_riemannian:
        raise ValueError(f"Riemannian spec K={spec.K} drift_scale={spec.drift_scale} has no Douglas floor; D vanishes")
    return DOUGLAS_FLOOR * min(1.0, abs(spec.drift_coefficient))


def run_projective(spec: MetricSpec, samples: int = 20, seed: int = 0, timing: bool = False) -> VerifyReport:
    """Weyl and Douglas magnitudes at random samples with |p| <= sqrt(3)/2."""
    if samples < 1:
        raise ConfigError(f"sample count must be >= 1, got {samples}")
    stopwatch = _Stopwatch(timing)
    points = generate_samples(spec, samples, seed, box=PROJECTIVE_BOX)
    weyl = stopwatch.measure("weyl", lambda: [weyl_magnitude(spec, s.p, s.y, MIN_WEYL_ORDER) for s in points])
    dougl = stopwatch.measure("douglas", lambda: [douglas_magnitude(spec, s.p, s.y, MIN_DOUGLAS_ORDER) for s in points])

    max_weyl, max_douglas, min_douglas = max(weyl), max(dougl), min(dougl)
    checks = {"weyl_vanishes": max_weyl < WEYL_TOLERANCE}
    if spec.is_riemannian:
        checks["douglas_vanishes"] = max_douglas < DOUGLAS_CEILING
    else:
        checks["douglas_nonzero"] = min_douglas > douglas_floor(spec)

    flat = max_weyl < WEYL_TOLERANCE and max_douglas < DOUGLAS_CEILING
    verdict = FLAT_VERDICT if flat else NOT_FLAT_VERDICT
    logger.info("projective K=%s: max W %.3e, D in [%.3e, %.3e] -> %s", spec.K, max_weyl, min_douglas, max_douglas, verdict)

    text = [
        f"projective K={spec.K:g} sign={format_sign(spec.sign)} samples={samples} seed={seed}",
        f"  max |W| / F^2        = {max_weyl:.3e}",
        f"  |D| * |y| range      = [{min_douglas:.3e}, {max_douglas:.3e}]",
        verdict,
    ]
    return VerifyReport(
        command="projective",
        config={"spec": spec.to_dict(), "samples": samples, "seed": seed},
        checks=checks,
        body={"weyl": weyl, "douglas": dougl, "max_weyl": max_weyl, "max_douglas": max_douglas, "verdict": verdict},
        timing=stopwatch.result(),
        csv_rows=[("sample", "weyl", "douglas")] + [(i, repr(w), repr(d)) for i, (w, d) in enumerate(zip(weyl, dougl))],
        text_lines=text,
    )


def run_geodesic(
    spec: MetricSpec,
    p: Sequence[float],
    y: Sequence[float],
    t_end: float,
    dt: float,
    r_max: float = DEFAULT_R_MAX,
    drift_tolerance: float = DRIFT_TOLERANCE,
    trajectory_path: Optional[Path] = None,
    timing: bool = False,
    recenter_radius: Optional[float] = None,
) -> VerifyReport:
    """One geodesic run; with ``recenter_radius`` set the run is recentered instead of stopping at ``r_max``."""
    stopwatch = _Stopwatch(timing)
    initial = GeodesicState.initial(spec, p, y)
    if recenter_radius is None:
        run = stopwatch.measure("integrate", integrate_geodesic, spec, initial, t_end, dt, r_max)
    else:
        run = stopwatch.measure("integrate", integrate_recentered, spec, initial, t_end, dt, recenter_radius)
    if trajectory_path is not None:
        write_trajectory_csv(run, trajectory_path)

    summary = run.report
    text = [
        f"geodesic K={spec.K:g} sign={format_sign(spec.sign)} p={tuple(initial.p)} y={tuple(initial.y)}",
        f"  status={summary.status} steps={summary.steps} final t={summary.final_time:g} recenterings={summary.recenterings}",
        f"  max relative drift of F = {summary.max_drift:.3e}",
    ]
    csv_text = trajectory_csv_text(run)
    return VerifyReport(
        command="geodesic",
        config={
            "spec": spec.to_dict(),
            "t_end": t_end,
            "dt": dt,
            "r_max": r_max,
            "recenter_radius": recenter_radius,
            "drift_tolerance": drift_tolerance,
        },
        checks={"speed_conserved": summary.max_drift < drift_tolerance},
        body={
            "initial": {"p": initial.p.tolist(), "y": initial.y.tolist(), "F0": float(initial.F0)},
            "max_drift": float(summary.max_drift),
            "steps": summary.steps,
            "status": summary.status,
            "final_time": float(summary.final_time),
            "recenterings": summary.recenterings,
            "trajectory_csv": None if trajectory_path is None else str(trajectory_path),
        },
        timing=stopwatch.result(),
        csv_rows=list(csv.reader(io.StringIO(csv_text))),
        text_lines=text,
    )
