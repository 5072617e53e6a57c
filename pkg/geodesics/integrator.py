"""Fixed-step RK4 integration of the geodesic equation x'' + 2 G(x, x') = 0, in one chart or recentered."""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from randers.spray import spray_vector
from sphere.metric_spec import MetricSpec
from sphere.model import ZeroTangentError, finsler_F, theta_coframe

logger = logging.getLogger(__name__)

DEFAULT_R_MAX = 10.0
DEFAULT_RECENTER_RADIUS = 1.0
COMPLETED = "completed"
CHART_EXIT = "chart_exit"
CSV_COLUMNS = ("t", "x", "y", "z", "u", "v", "w", "F")


class IntegrationBlowUpError(RuntimeError):
    """An RK4 step produced non-finite values."""

    def __init__(self, message: str, last_state: "GeodesicState"):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class GeodesicState:
    p: np.ndarray
    y: np.ndarray
    t: float
    F0: float

    @staticmethod
    def initial(spec: MetricSpec, p: Sequence[float], y: Sequence[float], t: float = 0.0) -> "GeodesicState":
        p = np.asarray(p, dtype=float)
        y = np.asarray(y, dtype=float)
        if not np.any(y):
            raise ZeroTangentError("geodesic initial velocity must be nonzero")
        return GeodesicState(p=p, y=y, t=t, F0=finsler_F(p, y, spec))

    def speed(self, spec: MetricSpec) -> float:
        return finsler_F(self.p, self.y, spec)

    def drift(self, spec: MetricSpec) -> float:
        return abs(self.speed(spec) - self.F0) / self.F0


@dataclass
class ConservationReport:
    max_drift: float
    steps: int
    status: str
    final_time: float
    recenterings: int = 0


@dataclass
class GeodesicRun:
    spec: MetricSpec
    trajectory: list = field(default_factory=list)
    report: ConservationReport = None

    def positions(self) -> np.ndarray:
        return np.array([state.p for state in self.trajectory])

    def times(self) -> np.ndarray:
        return np.array([state.t for state in self.trajectory])

    def rows(self):
        for state in self.trajectory:
            yield (state.t, *state.p, *state.y, state.speed(self.spec))


def geodesic_rhs(spec: MetricSpec, state: np.ndarray) -> np.ndarray:
    x, y = state[:3], state[3:]
    return np.concatenate([y, -2.0 * spray_vector(spec, x, y)])


def rk4_step(spec: MetricSpec, state: np.ndarray, dt: float) -> np.ndarray:
    k1 = geodesic_rhs(spec, state)
    k2 = geodesic_rhs(spec, state + 0.5 * dt * k1)
    k3 = geodesic_rhs(spec, state + 0.5 * dt * k2)
    k4 = geodesic_rhs(spec, state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_geodesic(
    spec: MetricSpec,
    initial: GeodesicState,
    t_end: float,
    dt: float,
    r_max: float = DEFAULT_R_MAX,
) -> GeodesicRun:
    """
    Integrate from ``initial`` up to ``t_end`` with classical RK4.

    The run stops early with status ``chart_exit`` once x^2 + y^2 + z^2 exceeds r_max^2;
    the state outside the radius is not recorded.

    Returns:
        GeodesicRun: every accepted state plus the conservation report (max relative drift of F).
    """
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    if not r_max > 0:
        raise ValueError(f"chart-exit radius must be positive, got {r_max}")
    if not np.any(initial.y):
        raise ZeroTangentError("geodesic initial velocity must be nonzero")

    n_steps = max(0, int(round((t_end - initial.t) / dt)))
    run = GeodesicRun(spec=spec, trajectory=[initial])
    state = np.concatenate([initial.p, initial.y])
    last = initial
    max_drift = 0.0
    status = COMPLETED
    logger.info("integrating geodesic from p=%s y=%s, %d steps of %g", tuple(initial.p), tuple(initial.y), n_steps, dt)

    for step in range(1, n_steps + 1):
        try:
            new_state = rk4_step(spec, state, dt)
        except (ValueError, ZeroDivisionError) as exc:
            raise IntegrationBlowUpError(f"step {step} failed at t={last.t}: {exc}", last) from exc
        if not np.all(np.isfinite(new_state)):
            raise IntegrationBlowUpError(f"non-finite state after step {step} at t={last.t}", last)
        if new_state[:3] @ new_state[:3] > r_max * r_max:
            status = CHART_EXIT
            logger.info("geodesic left the chart radius %g after t=%g", r_max, last.t)
            break
        state = new_state
        last = GeodesicState(p=state[:3].copy(), y=state[3:].copy(), t=initial.t + step * dt, F0=initial.F0)
        run.trajectory.append(last)
        max_drift = max(max_drift, last.drift(spec))

    run.report = ConservationReport(max_drift=max_drift, steps=len(run.trajectory) - 1, status=status, final_time=last.t)
    logger.info("geodesic run %s: %d steps, max drift %.3e", status, run.report.steps, max_drift)
    return run


def recenter(spec: MetricSpec, state: GeodesicState) -> GeodesicState:
    """Right-translate ``state`` to the chart origin.

    F depends on (p, y) only through Theta(p) y, which right translations preserve, so the
    translated curve is again a geodesic with the same speed. At the origin Theta = c I.
    """
    c = spec.hemisphere
    y = c * theta_coframe(state.p, c) @ state.y
    return GeodesicState(p=np.zeros(3), y=y, t=state.t, F0=state.F0)


def integrate_recentered(
    spec: MetricSpec,
    initial: GeodesicState,
    t_end: float,
    dt: float,
    recenter_radius: float = DEFAULT_RECENTER_RADIUS,
) -> GeodesicRun:
    """
    RK4 up to ``t_end`` without leaving the chart: whenever the next step would pass
    ``recenter_radius`` the current state is moved back to the origin with ``recenter``.

    Positions in the trajectory are relative to the latest recentering; times and speeds are global.
    """
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    if not recenter_radius > 0:
        raise ValueError(f"recenter radius must be positive, got {recenter_radius}")

    total_steps = max(0, int(round((t_end - initial.t) / dt)))
    run = GeodesicRun(spec=spec, trajectory=[initial])
    state = initial
    done = 0
    recenterings = 0
    max_drift = 0.0
    while done < total_steps:
        segment_end = initial.t + total_steps * dt
        segment = integrate_geodesic(spec, state, segment_end, dt, r_max=max(recenter_radius, chart_radius(state.p)))
        run.trajectory.extend(segment.trajectory[1:])
        done += segment.report.steps
        max_drift = max(max_drift, segment.report.max_drift)
        if segment.report.status == COMPLETED:
            break
        if segment.report.steps == 0 and not np.any(state.p):
            raise ValueError(f"step {dt} leaves the recenter radius {recenter_radius} in one step from the origin")
        state = recenter(spec, segment.trajectory[-1])
        recenterings += 1

    final = run.trajectory[-1]
    run.report = ConservationReport(
        max_drift=max_drift, steps=done, status=COMPLETED, final_time=final.t, recenterings=recenterings
    )
    logger.info("recentered geodesic run: %d steps, %d recenterings, max drift %.3e", done, recenterings, max_drift)
    return run


def reversal_gap(spec: MetricSpec, p: Sequence[float], y: Sequence[float], t_end: float, dt: float) -> float:
    """Distance from p after running forward to (q, y_T) and then from (q, -y_T) for the same time.

    Zero for reversible (Riemannian) metrics.
    """
    forward = integrate_geodesic(spec, GeodesicState.initial(spec, p, y), t_end, dt)
    end = forward.trajectory[-1]
    backward = integrate_geodesic(spec, GeodesicState.initial(spec, end.p, -end.y), end.t, dt)
    return float(np.linalg.norm(backward.trajectory[-1].p - np.asarray(p, dtype=float)))


def trajectory_csv_text(run: GeodesicRun) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in run.rows():
        writer.writerow([repr(float(value)) for value in row])
    return buffer.getvalue()


def write_trajectory_csv(run: GeodesicRun, path: Path):
    """Write columns t, x, y, z, u, v, w, F, one row per accepted state."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trajectory_csv_text(run), encoding="utf-8")


def unit_speed(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Rescale y so that F(p, y) = 1."""
    y = np.asarray(y, dtype=float)
    return y / finsler_F(p, y, spec)


def chart_radius(p: Sequence[float]) -> float:
    return math.sqrt(float(np.dot(p, p)))
