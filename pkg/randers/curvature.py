"""Fundamental tensor, Berwald spray curvature and the constant flag curvature test."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from jets.jet import Jet, JetOrderError, multi_index
from randers.field import JET_DIMS, FinslerField
from randers.spray import SprayData, spray_coeffs
from randers.tensor_grid import LOWER, UPPER, TensorGrid
from sphere.metric_spec import MetricSpec
from sphere.model import ZeroTangentError, drift_form, riemannian_metric, vielbein

logger = logging.getLogger(__name__)

MIN_CURVATURE_ORDER = 4
QUOT_THRESHOLD = 1e-9
FLAG_THRESHOLD = 1e-12


class DegenerateFlagError(ValueError):
    """The transverse edge V is (numerically) parallel to the flagpole y."""


def _velocity_slot(i: int) -> int:
    return 3 + i


def fundamental_tensor(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> TensorGrid:
    """g_ij = L_{y^i y^j} from an order-2 expansion."""
    L = FinslerField(spec).L(p, y, 2)
    g = np.array(
        [[L.partial(multi_index(JET_DIMS, (_velocity_slot(i), _velocity_slot(j)))) for j in range(3)] for i in range(3)]
    )
    return TensorGrid(g, (LOWER, LOWER), symmetries=((0, 1),))


def fundamental_tensor_closed_form(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> TensorGrid:
    """g_ij = (F/alpha)(a_ij - lt_i lt_j) + l_i l_j with lt_i = a_ij y^j / alpha and l = lt + b."""
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        raise ZeroTangentError("g_ij is undefined at the zero tangent vector")
    a = riemannian_metric(p, spec)
    b = drift_form(p, spec)
    alpha = float(np.sqrt(y @ a @ y))
    F = alpha + float(b @ y)
    lt = a @ y / alpha
    ell = lt + b
    g = (F / alpha) * (a - np.outer(lt, lt)) + np.outer(ell, ell)
    return TensorGrid(g, (LOWER, LOWER), symmetries=((0, 1),))


def fundamental_inverse(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> TensorGrid:
    return TensorGrid(FinslerField(spec).inverse_metric(p, y), (UPPER, UPPER), symmetries=((0, 1),))


def spray_curvature_jets(spray: SprayData) -> list[list[Jet]]:
    """Berwald's formula on spray jets; the result is two orders below the spray.

    K^i_k = 2 (G^i)_{x^k} - y^j (G^i)_{x^j y^k} - (G^i)_{y^j} (G^j)_{y^k} + 2 G^j (G^i)_{y^j y^k}
    """
    if spray.order < 2:
        raise JetOrderError(f"Berwald's formula needs spray jets of order >= 2, got {spray.order}")
    target = spray.order - 2
    G = spray.G
    velocity = spray.velocity_jets(target) if target > 0 else tuple(spray.base[3:])

    G_low = [g.truncate(target) for g in G]
    G_x = [[g.derivative(k) for k in range(3)] for g in G]
    G_y = [[g.derivative(_velocity_slot(k)) for k in range(3)] for g in G]
    G_y_low = [[d.truncate(target) for d in row] for row in G_y]
    G_xy = [[[G_x[i][j].derivative(_velocity_slot(k)) for k in range(3)] for j in range(3)] for i in range(3)]
    G_yy = [[[G_y[i][j].derivative(_velocity_slot(k)) for k in range(3)] for j in range(3)] for i in range(3)]

    K = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for k in range(3):
            entry = 2.0 * G_x[i][k].truncate(target)
            for j in range(3):
                entry = entry - G_xy[i][j][k] * velocity[j]
                entry = entry - G_y_low[i][j] * G_y_low[j][k]
                entry = entry + 2.0 * G_low[j] * G_yy[i][j][k]
            K[i][k] = entry
    return K


def berwald_spray_curvature(
    spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_CURVATURE_ORDER
) -> TensorGrid:
    if order < MIN_CURVATURE_ORDER:
        raise JetOrderError(f"spray curvature needs jet order >= {MIN_CURVATURE_ORDER}, got {order}")
    K = spray_curvature_jets(spray_coeffs(spec, p, y, order))
    return TensorGrid(np.array([[entry.value for entry in row] for row in K]), (UPPER, LOWER))


def tau_tensor(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> tuple[TensorGrid, float]:
    """(tau^i_k, F) with tau^i_k = F^2 delta^i_k - y^i F F_{y^k}."""
    F = FinslerField(spec).F(p, y, 1)
    F0 = F.value
    grad = np.array([F.partial(multi_index(JET_DIMS, (_velocity_slot(k),))) for k in range(3)])
    y = np.asarray(y, dtype=float)
    tau = F0 * F0 * np.eye(3) - F0 * np.outer(y, grad)
    return TensorGrid(tau, (UPPER, LOWER)), F0


@dataclass(frozen=True)
class CurvatureResidual:
    """Entrywise comparison of K^i_k with K tau^i_k at one sample."""

    spray_curvature: np.ndarray
    k_tau: np.ndarray
    dif: np.ndarray
    normalized: np.ndarray
    quot: np.ndarray  # nan where undefined
    quot_defined: np.ndarray
    F: float
    kf2: float

    def max_normalized(self) -> float:
        return float(np.max(np.abs(self.normalized)))

    def max_quot_deviation(self) -> float:
        if not self.quot_defined.any():
            return 0.0
        return float(np.max(np.abs(self.quot[self.quot_defined] - 1.0)))

    def scaled_quot_deviation(self) -> np.ndarray:
        """|quot - 1| min(1, |K tau^i_k| / K F^2) on defined entries, 0 elsewhere.

        Equal to |dif| / max(|K tau^i_k|, K F^2): entries with K tau small next to K F^2 are
        held to the absolute precision of the whole matrix instead of their own size.
        """
        scaled = np.zeros((3, 3))
        defined = self.quot_defined
        scaled[defined] = np.abs(self.dif[defined]) / np.maximum(np.abs(self.k_tau[defined]), self.kf2)
        return scaled

    def max_scaled_quot_deviation(self) -> float:
        return float(np.max(self.scaled_quot_deviation()))


def constant_curvature_residual(
    spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_CURVATURE_ORDER
) -> CurvatureResidual:
    spray_curvature = berwald_spray_curvature(spec, p, y, order).values
    tau, F = tau_tensor(spec, p, y)
    k_tau = spec.K * tau.values
    dif = spray_curvature - k_tau
    kf2 = spec.K * F * F
    normalized = dif / (kf2 + np.abs(spray_curvature))

    quot_defined = np.abs(k_tau) > QUOT_THRESHOLD * kf2
    quot = np.full((3, 3), np.nan)
    quot[quot_defined] = spray_curvature[quot_defined] / k_tau[quot_defined]
    if not quot_defined.all():
        logger.warning("quot undefined at %d entries for p=%s y=%s", int((~quot_defined).sum()), tuple(p), tuple(y))

    return CurvatureResidual(
        spray_curvature=spray_curvature,
        k_tau=k_tau,
        dif=dif,
        normalized=normalized,
        quot=quot,
        quot_defined=quot_defined,
        F=F,
        kf2=kf2,
    )


def flag_curvature(spec: MetricSpec, p: Sequence[float], y: Sequence[float], V: Sequence[float]) -> float:
    """K(y, V) = V^i K_ik V^k / (g(y,y) g(V,V) - g(y,V)^2) with K_ik = g_ij K^j_k."""
    y = np.asarray(y, dtype=float)
    V = np.asarray(V, dtype=float)
    g = fundamental_tensor(spec, p, y).values
    K_cov = g @ berwald_spray_curvature(spec, p, y).values
    gyy, gVV, gyV = y @ g @ y, V @ g @ V, y @ g @ V
    denominator = gyy * gVV - gyV * gyV
    if denominator < FLAG_THRESHOLD * gyy * gVV:
        raise DegenerateFlagError(f"flag spanned by y={tuple(y)} and V={tuple(V)} is degenerate")
    return float(V @ K_cov @ V / denominator)


def frame_transform(T: TensorGrid, p: Sequence[float], spec: MetricSpec) -> TensorGrid:
    """T^p_r = v^p_i T^i_k u_r^k for a mixed rank-2 tensor."""
    if T.rank != 2 or T.variance != (UPPER, LOWER):
        raise ValueError(f"frame_transform needs a (upper, lower) rank-2 tensor, got {T.variance}")
    v, u = vielbein(p, spec)
    return TensorGrid(v @ T.values @ u, (UPPER, LOWER))


def coordinate_transform(T: TensorGrid, p: Sequence[float], spec: MetricSpec) -> TensorGrid:
    """Inverse of ``frame_transform``."""
    if T.rank != 2 or T.variance != (UPPER, LOWER):
        raise ValueError(f"coordinate_transform needs a (upper, lower) rank-2 tensor, got {T.variance}")
    v, u = vielbein(p, spec)
    return TensorGrid(u @ T.values @ v, (UPPER, LOWER))
