"""Killing drift b = lam Theta^1 on the Berger sphere and the four Yasuda-Shimada criteria.

All tables are generated for arbitrary (K, lam, eps) so a failing combination
reports which criterion breaks. Frame indices are 0-based in arrays.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from frames.connection import connection_forms, riemann_frame

logger = logging.getLogger(__name__)

YS_TOLERANCE = 1e-12


class NoRealSolutionError(ValueError):
    """The criteria have no real solution for the requested K."""


@dataclass(frozen=True)
class KillingDerivatives:
    b: np.ndarray  # b_p
    b1: np.ndarray  # b_{p|q}
    b2: np.ndarray  # b_{p|q|r}

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.b))


def killing_cov_deriv(lam: float, epsilon: float) -> KillingDerivatives:
    """Covariant derivatives of b = lam Theta^1 = (lam/eps) omega^1 from the connection forms."""
    c = connection_forms(epsilon).coefficients
    b = np.array([lam / epsilon, 0.0, 0.0])
    # components are constant in the frame, so only the connection terms survive
    b1 = -np.einsum("s,psq->pq", b, c)
    b2 = -np.einsum("sq,psr->pqr", b1, c) - np.einsum("ps,qsr->pqr", b1, c)
    return KillingDerivatives(b=b, b1=b1, b2=b2)


def second_derivative_target(K: float, b: np.ndarray) -> np.ndarray:
    """T_pqr = K (a_pr b_q - a_qr b_p) with a = identity in the frame."""
    delta = np.eye(3)
    return K * (np.einsum("pr,q->pqr", delta, b) - np.einsum("qr,p->pqr", delta, b))


def curvature_target(K: float, killing: KillingDerivatives) -> np.ndarray:
    """The Riemann tensor forced on a by a Killing b of constant length, indexed [q, p, r, s]."""
    d = np.eye(3)
    b, b1 = killing.b, killing.b1
    n2 = float(b @ b)
    return (
        -K * (1.0 - n2) * np.einsum("qr,ps->qprs", d, d)
        - K * (np.einsum("qr,p,s->qprs", d, b, b) + np.einsum("ps,q,r->qprs", d, b, b))
        + np.einsum("qr,ps->qprs", b1, b1)
        + K * (1.0 - n2) * np.einsum("qs,pr->qprs", d, d)
        + K * (np.einsum("qs,p,r->qprs", d, b, b) + np.einsum("pr,q,s->qprs", d, b, b))
        - np.einsum("qs,pr->qprs", b1, b1)
        + 2.0 * np.einsum("qp,rs->qprs", b1, b1)
    )


def _argmax_slot(residual: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) + 1 for i in np.unravel_index(np.argmax(residual), residual.shape))


@dataclass
class YSReport:
    K: float
    lam: float
    epsilon: float
    killing_residual: float
    norm_value: float
    second_derivative_residual: float
    second_derivative_slot: tuple[int, ...]
    curvature_residual: float
    curvature_slot: tuple[int, ...]
    tolerance: float = YS_TOLERANCE
    passes: dict = field(default_factory=dict)

    CRITERIA = ("killing", "constant_norm", "second_derivative", "curvature")

    def __post_init__(self):
        scale = self.tolerance * max(1.0, abs(self.K))
        self.passes = {
            "killing": self.killing_residual < scale,
            "constant_norm": self.norm_value < 1.0,
            "second_derivative": self.second_derivative_residual < scale,
            "curvature": self.curvature_residual < scale,
        }

    @property
    def passed(self) -> bool:
        return all(self.passes.values())

    @property
    def is_riemannian(self) -> bool:
        return self.lam == 0.0

    def failing(self) -> list[str]:
        return [name for name in self.CRITERIA if not self.passes[name]]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "killing_residual": self.killing_residual,
            "norm_value": self.norm_value,
            "second_derivative_residual": self.second_derivative_residual,
            "second_derivative_slot": list(self.second_derivative_slot),
            "curvature_residual": self.curvature_residual,
            "curvature_slot": list(self.curvature_slot),
            "tolerance": self.tolerance,
            "passes": dict(self.passes),
            "riemannian": self.is_riemannian,
        }


def ys_criteria_check(K: float, lam: float, epsilon: float, tolerance: float = YS_TOLERANCE) -> YSReport:
    if not K > 0:
        raise ValueError(f"K must be positive, got {K}")
    killing = killing_cov_deriv(lam, epsilon)

    killing_residual = float(np.max(np.abs(killing.b1 + killing.b1.T)))
    second = np.abs(killing.b2 - second_derivative_target(K, killing.b))
    curvature = np.abs(riemann_frame(epsilon).components - curvature_target(K, killing))

    report = YSReport(
        K=K,
        lam=lam,
        epsilon=epsilon,
        killing_residual=killing_residual,
        norm_value=killing.norm,
        second_derivative_residual=float(second.max()),
        second_derivative_slot=_argmax_slot(second),
        curvature_residual=float(curvature.max()),
        curvature_slot=_argmax_slot(curvature),
        tolerance=tolerance,
    )
    logger.debug("YS criteria at K=%s lam=%s eps=%s: %s", K, lam, epsilon, report.passes)
    return report


def solve_ys(K: float, sign: int = 1) -> tuple[float, float]:
    """(eps, lam) = (sqrt(K), sign sqrt(K - 1)) solving all four criteria."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if not K >= 1.0:
        raise NoRealSolutionError(f"no real solution for K = {K}: lam^2 = K - 1 must be >= 0")
    return math.sqrt(K), sign * math.sqrt(K - 1.0)
