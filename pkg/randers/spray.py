"""Geodesic spray coefficients G^i from L = F^2/2.

G_i = 1/2 (L_{y^i x^j} y^j - L_{x^i}) and G^i = g^{ij} G_j, with the closed-form
inverse g^{ij}. Spray jets come out two orders below the field expansion.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from jets.jet import Jet, JetOrderError, jet_variable, multi_index
from randers.field import JET_DIMS, VELOCITY_SLOTS, FinslerField
from sphere.metric_spec import MetricSpec
from sphere.model import chart_den, metric_inverse_entries

logger = logging.getLogger(__name__)

MIN_SPRAY_ORDER = 2


@dataclass(frozen=True)
class SprayData:
    G: tuple  # G^i as jets
    G_lower: tuple  # G_i as jets
    order: int  # jet order of G
    source_order: int  # jet order of the L expansion
    base: tuple  # (x, y, z, u, v, w)

    def values(self) -> np.ndarray:
        return np.array([g.value for g in self.G])

    def velocity_jets(self, order: int) -> tuple:
        return tuple(jet_variable(slot, self.base[slot], JET_DIMS, order) for slot in VELOCITY_SLOTS)

    def partial(self, i: int, slots: Sequence[int]) -> float:
        """Mixed partial of G^i in the listed variable slots (0-2 position, 3-5 velocity)."""
        return self.G[i].partial(multi_index(JET_DIMS, slots))


def spray_coeffs(spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_SPRAY_ORDER) -> SprayData:
    """Spray coefficients as jets of order ``order - 2`` from an order-``order`` expansion of L."""
    if order < MIN_SPRAY_ORDER:
        raise JetOrderError(f"spray coefficients need jet order >= {MIN_SPRAY_ORDER}, got {order}")
    field = FinslerField(spec)
    jets = field.expand(p, y, order)
    L = jets.L
    target = order - 2

    L_x = [L.derivative(j) for j in range(3)]
    L_yx = [[L_x[j].derivative(3 + i) for j in range(3)] for i in range(3)]

    if target == 0:
        velocity = [float(t) for t in y]
        inverse = field.inverse_metric(p, y)
    else:
        low = jets.truncate(target)
        velocity = list(low.velocity)
        inverse = field.inverse_metric_jets(low)

    G_lower = []
    for i in range(3):
        transport = L_yx[i][0] * velocity[0] + L_yx[i][1] * velocity[1] + L_yx[i][2] * velocity[2]
        G_lower.append(0.5 * (transport - L_x[i].truncate(target)))
    G = tuple(
        G_lower[0] * inverse[i][0] + G_lower[1] * inverse[i][1] + G_lower[2] * inverse[i][2] for i in range(3)
    )
    base = tuple(float(t) for t in p) + tuple(float(t) for t in y)
    return SprayData(G=G, G_lower=tuple(G_lower), order=target, source_order=order, base=base)


def spray_vector(spec: MetricSpec, p: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """G^i(p, y) as plain floats, the right-hand side of the geodesic equation."""
    return spray_coeffs(spec, p, y, MIN_SPRAY_ORDER).values()


def christoffel_symbols(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    """Christoffel symbols gamma~^i_jk of the Berger metric, read off as (G~^i)_{y^j y^k}."""
    spray = spray_coeffs(spec.riemannian_companion(), p, (1.0, 0.0, 0.0), order=4)
    gamma = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                gamma[i, j, k] = spray.partial(i, (3 + j, 3 + k))
    return gamma


@dataclass(frozen=True)
class KillingCheck:
    killing_residual: float  # max |b_{i|j} + b_{j|i}|
    norm_squared: float  # |b|^2
    norm_gradient: float  # max |d_j |b|^2|


def coordinate_killing_residual(spec: MetricSpec, p: Sequence[float]) -> KillingCheck:
    """Killing and constant-length conditions for the drift, checked in chart coordinates."""
    dims, order = 3, 1
    x, y, z = (jet_variable(k, float(t), dims, order) for k, t in enumerate(p))
    den = chart_den(x, y, z)
    c = spec.hemisphere
    drift = spec.drift_coefficient
    b = [drift * c / den, -drift * z / den, drift * y / den]
    A = metric_inverse_entries(x, y, z, c, spec.K)
    norm2 = sum(b[i] * A[i][j] * b[j] for i in range(3) for j in range(3))

    gamma = christoffel_symbols(spec, p)
    b_values = np.array([bi.value for bi in b])
    db = np.array([[b[i].partial(multi_index(dims, (j,))) for j in range(3)] for i in range(3)])
    cov = db - np.einsum("s,sij->ij", b_values, gamma)

    check = KillingCheck(
        killing_residual=float(np.max(np.abs(cov + cov.T))),
        norm_squared=norm2.value,
        norm_gradient=max(abs(norm2.partial(multi_index(dims, (j,)))) for j in range(3)),
    )
    logger.debug("coordinate Killing check at %s: %s", tuple(p), check)
    return check
