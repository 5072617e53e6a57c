"""Jet expansion of the Randers metric in the six variables (x, y, z, u, v, w)."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from jets.jet import Jet, JetOrderError, jet_variable
from sphere.metric_spec import MetricSpec
from sphere.model import ZeroTangentError, chart_den, metric_inverse_entries, randers_parts

JET_DIMS = 6
POSITION_SLOTS = (0, 1, 2)
VELOCITY_SLOTS = (3, 4, 5)


@dataclass(frozen=True)
class FieldJets:
    """alpha and beta of one metric expanded about (p, y), together with the coordinate jets."""

    order: int
    position: tuple
    velocity: tuple
    alpha: Jet
    beta: Jet

    @property
    def F(self) -> Jet:
        return self.alpha + self.beta

    @property
    def L(self) -> Jet:
        F = self.F
        return 0.5 * F * F

    def truncate(self, order: int) -> "FieldJets":
        return FieldJets(
            order=order,
            position=tuple(j.truncate(order) for j in self.position),
            velocity=tuple(j.truncate(order) for j in self.velocity),
            alpha=self.alpha.truncate(order),
            beta=self.beta.truncate(order),
        )


def randers_inverse_entries(position, velocity, alpha, beta, spec: MetricSpec):
    """Closed-form g^{ij} of a Randers metric, built from a^{ij}, b_i, alpha and beta.

    g^{ij} = rho a^{ij} + rho^2 phi lt^i lt^j - rho^2 (lt^i b^j + lt^j b^i) with
    rho = alpha/F, phi = (beta + alpha |b|^2)/F, lt^i = y^i/alpha. Accepts floats or jets.
    """
    x, y, z = position
    c = spec.hemisphere
    A = metric_inverse_entries(x, y, z, c, spec.K)
    den = chart_den(x, y, z)
    drift = spec.drift_coefficient
    b = [drift * c / den, -drift * z / den, drift * y / den]
    B = [A[i][0] * b[0] + A[i][1] * b[1] + A[i][2] * b[2] for i in range(3)]
    norm2 = b[0] * B[0] + b[1] * B[1] + b[2] * B[2]

    F = alpha + beta
    rho = alpha / F
    rho2 = rho * rho
    phi = (beta + alpha * norm2) / F
    lt = [t / alpha for t in velocity]

    inverse = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            entry = rho * A[i][j] + rho2 * phi * lt[i] * lt[j] - rho2 * (lt[i] * B[j] + lt[j] * B[i])
            inverse[i][j] = entry
            inverse[j][i] = entry
    return inverse


class FinslerField:
    """Evaluator of F = alpha + beta and L = F^2/2 as jets about any (p, y)."""

    def __init__(self, spec: MetricSpec):
        self.spec = spec

    def expand(self, p: Sequence[float], y: Sequence[float], order: int) -> FieldJets:
        y = np.asarray(y, dtype=float)
        if not np.any(y):
            raise ZeroTangentError("cannot expand the Finsler function at the zero tangent vector")
        if order < 1:
            raise JetOrderError(f"field expansion needs order >= 1, got {order}")
        base = [float(t) for t in p] + [float(t) for t in y]
        variables = [jet_variable(k, value, JET_DIMS, order) for k, value in enumerate(base)]
        position, velocity = tuple(variables[:3]), tuple(variables[3:])
        alpha, beta = randers_parts(*position, *velocity, self.spec)
        return FieldJets(order=order, position=position, velocity=velocity, alpha=alpha, beta=beta)

    def F(self, p: Sequence[float], y: Sequence[float], order: int) -> Jet:
        return self.expand(p, y, order).F

    def L(self, p: Sequence[float], y: Sequence[float], order: int) -> Jet:
        return self.expand(p, y, order).L

    def inverse_metric(self, p: Sequence[float], y: Sequence[float]) -> np.ndarray:
        """g^{ij} at (p, y) as plain floats."""
        y = np.asarray(y, dtype=float)
        if not np.any(y):
            raise ZeroTangentError("g^{ij} is undefined at the zero tangent vector")
        position = [float(t) for t in p]
        velocity = [float(t) for t in y]
        alpha, beta = randers_parts(*position, *velocity, self.spec)
        return np.array(randers_inverse_entries(position, velocity, alpha, beta, self.spec), dtype=float)

    def inverse_metric_jets(self, jets: FieldJets):
        """g^{ij} as jets of the same order as ``jets``."""
        return randers_inverse_entries(jets.position, jets.velocity, jets.alpha, jets.beta, self.spec)
