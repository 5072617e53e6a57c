"""Geometric data of the Randers family on S^3 in gnomonic coordinates.

A chart point (x, y, z) of hemisphere c stands for the ambient unit vector
(c, x, y, z) / sqrt(den), den = 1 + x^2 + y^2 + z^2. Tangent vectors carry
coordinate components (u, v, w) on d/dx, d/dy, d/dz.

The coframe Theta^p, the Berger metric a = K Theta^1 (x) Theta^1 + Theta^2 (x) Theta^2
+ Theta^3 (x) Theta^3 and the drift b = sign sqrt(K-1) Theta^1 are all written so
that the scalar helpers accept either floats or jets.
"""

import math
from typing import NamedTuple, Sequence

import numpy as np

from jets.jet import sqrt
from sphere.metric_spec import MetricSpec


class ChartPoint(NamedTuple):
    x: float
    y: float
    z: float


class TangentCoords(NamedTuple):
    u: float
    v: float
    w: float


class FrameVector(NamedTuple):
    u: float
    v: float
    w: float

    @property
    def alpha(self) -> float:
        return math.sqrt(self.u * self.u + self.v * self.v + self.w * self.w)


class ZeroTangentError(ValueError):
    """Finsler quantities are only defined on nonzero tangent vectors."""


def chart_den(x, y, z):
    return 1 + x * x + y * y + z * z


def coframe_components(x, y, z, u, v, w, c):
    """Theta^p(y) numerators (P, Q, R); divide by den for the actual values."""
    P = c * u - z * v + y * w
    Q = z * u + c * v - x * w
    R = -y * u + x * v + c * w
    return P, Q, R


def randers_parts(x, y, z, u, v, w, spec: MetricSpec):
    """(alpha, beta) of the Randers metric; works on floats or jets alike."""
    den = chart_den(x, y, z)
    P, Q, R = coframe_components(x, y, z, u, v, w, spec.hemisphere)
    alpha = sqrt(spec.K * P * P + Q * Q + R * R) / den
    beta = spec.drift_coefficient * P / den
    return alpha, beta


def metric_inverse_entries(x, y, z, c, K):
    """Closed-form Berger inverse metric a^{ij} as a nested 3x3 list (floats or jets)."""
    x2, y2, z2 = x * x, y * y, z * z
    a11 = (x2 + 1) * (x2 + K * z2 + K * y2 + 1)
    a12 = (
        x2 * x * y + K * x * y2 * y + x * y
        - c * z * x2 - c * z + K * c * z * x2 + K * c * z + K * y * z2 * x
    )
    a13 = (
        K * y2 * z * x + x2 * x * z + K * x * z2 * z + x * z
        - K * c * y * x2 - K * c * y + c * y * x2 + c * y
    )
    a22 = (
        y2 * x2 + K * x2 + 2 * (K - 1) * x * y * c * z
        + K * y2 * y2 + z2 + K + K * y2 * z2 + 2 * K * y2
    )
    a23 = (
        x2 * z * y + (K - 1) * c * z2 * x - (K - 1) * x * y2 * c
        + K * y2 * y * z + K * y * z2 * z - z * y + 2 * K * y * z
    )
    a33 = (
        z2 * x2 + K * x2 - 2 * (K - 1) * x * y * c * z
        + K * y2 * z2 + K * z2 * z2 + 2 * K * z2 + K + y2
    )
    inv_K = 1.0 / K
    a11, a12, a13, a22, a23, a33 = (e * inv_K for e in (a11, a12, a13, a22, a23, a33))
    return [[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]]


def theta_coframe(p: Sequence[float], c: int) -> np.ndarray:
    """Rows Theta^1, Theta^2, Theta^3 as components on dx, dy, dz."""
    x, y, z = (float(t) for t in p)
    den = chart_den(x, y, z)
    return np.array(
        [
            [c, -z, y],
            [z, c, -x],
            [-y, x, c],
        ],
        dtype=float,
    ) / den


def theta_frame(p: Sequence[float], c: int) -> np.ndarray:
    """Inverse of ``theta_coframe``: columns are the dual vector fields E_1, E_2, E_3."""
    r = np.asarray(p, dtype=float)
    cross = np.array([[0.0, -r[2], r[1]], [r[2], 0.0, -r[0]], [-r[1], r[0], 0.0]])
    return c * np.eye(3) - cross + c * np.outer(r, r)


def vielbein(p: Sequence[float], spec: MetricSpec) -> tuple[np.ndarray, np.ndarray]:
    """(v, u): v^p_i has rows sqrt(K) Theta^1, Theta^2, Theta^3 and u = v^-1 holds e_p as columns."""
    scale = np.array([math.sqrt(spec.K), 1.0, 1.0])
    v = scale[:, None] * theta_coframe(p, spec.hemisphere)
    u = theta_frame(p, spec.hemisphere) / scale[None, :]
    return v, u


def riemannian_metric(p: Sequence[float], spec: MetricSpec) -> np.ndarray:
    theta = theta_coframe(p, spec.hemisphere)
    weights = np.array([spec.K, 1.0, 1.0])
    return np.einsum("p,pi,pj->ij", weights, theta, theta)


def riemannian_metric_inv(p: Sequence[float], spec: MetricSpec) -> np.ndarray:
    x, y, z = (float(t) for t in p)
    return np.array(metric_inverse_entries(x, y, z, spec.hemisphere, spec.K), dtype=float)


def drift_form(p: Sequence[float], spec: MetricSpec) -> np.ndarray:
    return spec.drift_coefficient * theta_coframe(p, spec.hemisphere)[0]


def _check_tangent(y: Sequence[float]) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        raise ZeroTangentError("Finsler function is undefined at the zero tangent vector")
    return y


def finsler_F(p: Sequence[float], y: Sequence[float], spec: MetricSpec) -> float:
    y = _check_tangent(y)
    alpha, beta = randers_parts(*(float(t) for t in p), *y, spec)
    return alpha + beta


def finsler_F_frame(frame_y: Sequence[float], spec: MetricSpec) -> float:
    """F in the orthonormal frame: |y| + sign sqrt((K-1)/K) y^1 (scaled by drift_scale)."""
    frame_y = _check_tangent(frame_y)
    return float(np.linalg.norm(frame_y)) + spec.drift_coefficient / math.sqrt(spec.K) * frame_y[0]


def to_frame(p: Sequence[float], y: Sequence[float], spec: MetricSpec) -> FrameVector:
    v, _ = vielbein(p, spec)
    return FrameVector(*(v @ np.asarray(y, dtype=float)))


def from_frame(p: Sequence[float], frame_y: Sequence[float], spec: MetricSpec) -> TangentCoords:
    _, u = vielbein(p, spec)
    return TangentCoords(*(u @ np.asarray(frame_y, dtype=float)))


def to_ambient(p: Sequence[float], c: int) -> np.ndarray:
    """Unit vector in R^4 represented by chart point p of hemisphere c."""
    x, y, z = (float(t) for t in p)
    return np.array([c, x, y, z]) / math.sqrt(chart_den(x, y, z))


def from_ambient(X: Sequence[float]) -> tuple[ChartPoint, int]:
    """Chart point and hemisphere of a unit vector off the equator."""
    X = np.asarray(X, dtype=float)
    if X[0] == 0.0:
        raise ValueError("points on the equator lie outside both charts")
    c = 1 if X[0] > 0 else -1
    return ChartPoint(*(X[1:] / abs(X[0]))), c


def antipodal_chart(p: Sequence[float], y: Sequence[float], c: int) -> tuple[ChartPoint, TangentCoords, int]:
    """Coordinates of the antipodal point and pushed-forward vector in the opposite chart.

    The antipodal map of S^3 is multiplication by -1, which preserves the Hopf
    frames, so every metric of the family takes equal values on both sides.
    """
    return (
        ChartPoint(*(-np.asarray(p, dtype=float))),
        TangentCoords(*(-np.asarray(y, dtype=float))),
        -c,
    )
