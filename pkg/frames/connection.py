"""Levi-Civita connection and curvature of the Berger metric in its orthonormal frame.

Indices are 0-based in code and 1-based in table names, so ``coefficients[q, p, r]``
is the coefficient of omega^{r+1} in omega_{q+1}^{p+1}.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameConnection:
    epsilon: float
    coefficients: np.ndarray  # c[q, p, r]: omega_q^p = c[q, p, r] omega^r

    def form(self, q: int, p: int) -> np.ndarray:
        """Coefficients of omega_q^p on (omega^1, omega^2, omega^3), 1-based q and p."""
        return self.coefficients[q - 1, p - 1].copy()

    def skew_residual(self) -> float:
        return float(np.max(np.abs(self.coefficients + self.coefficients.transpose(1, 0, 2))))


@dataclass(frozen=True)
class FrameCurvature:
    epsilon: float
    components: np.ndarray  # R[q, p, r, s]

    def __getitem__(self, index) -> float:
        q, p, r, s = index
        return float(self.components[q - 1, p - 1, r - 1, s - 1])

    def independent_components(self) -> dict[tuple[int, int, int, int], float]:
        """Components with q < p, r < s and (q, p) <= (r, s), 1-based."""
        table = {}
        pairs = [(q, p) for q in range(1, 4) for p in range(q + 1, 4)]
        for i, (q, p) in enumerate(pairs):
            for r, s in pairs[i:]:
                table[(q, p, r, s)] = self[q, p, r, s]
        return table

    def symmetry_residual(self) -> float:
        R = self.components
        return float(
            max(
                np.max(np.abs(R + R.transpose(0, 1, 3, 2))),
                np.max(np.abs(R + R.transpose(1, 0, 2, 3))),
                np.max(np.abs(R - R.transpose(2, 3, 0, 1))),
            )
        )


def _check_epsilon(epsilon: float):
    if not epsilon > 0:
        raise ValueError(f"dilation epsilon must be positive, got {epsilon}")


def connection_forms(epsilon: float) -> FrameConnection:
    _check_epsilon(epsilon)
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = -epsilon  # omega_1^2 = -eps omega^3
    c[0, 2, 1] = epsilon  # omega_1^3 = eps omega^2
    c[1, 2, 0] = epsilon - 2.0 / epsilon  # omega_2^3 = (eps - 2/eps) omega^1
    c -= c.transpose(1, 0, 2)
    return FrameConnection(epsilon=epsilon, coefficients=c)


def _fill_curvature(values: dict[tuple[int, int, int, int], float]) -> np.ndarray:
    R = np.zeros((3, 3, 3, 3))
    for (q, p, r, s), value in values.items():
        q, p, r, s = q - 1, p - 1, r - 1, s - 1
        for (a, b, cc, d) in ((q, p, r, s), (r, s, q, p)):
            R[a, b, cc, d] = value
            R[b, a, cc, d] = -value
            R[a, b, d, cc] = -value
            R[b, a, d, cc] = value
    return R


def riemann_frame(epsilon: float) -> FrameCurvature:
    """Riemann table of the Berger metric; R_1212 = R_1313 = -eps^2, R_2323 = 3 eps^2 - 4."""
    _check_epsilon(epsilon)
    eps2 = epsilon * epsilon
    R = _fill_curvature(
        {
            (1, 2, 1, 2): -eps2,
            (1, 3, 1, 3): -eps2,
            (2, 3, 2, 3): 3.0 * eps2 - 4.0,
        }
    )
    return FrameCurvature(epsilon=epsilon, components=R)


def structure_constants(epsilon: float) -> np.ndarray:
    """C[p, r, s] with d omega^p = 1/2 C[p, r, s] omega^r ^ omega^s."""
    _check_epsilon(epsilon)
    C = np.zeros((3, 3, 3))
    C[0, 1, 2] = 2.0 * epsilon  # d omega^1 = 2 eps omega^2 ^ omega^3
    C[1, 2, 0] = 2.0 / epsilon  # d omega^2 = (2/eps) omega^3 ^ omega^1
    C[2, 0, 1] = 2.0 / epsilon  # d omega^3 = (2/eps) omega^1 ^ omega^2
    return C - C.transpose(0, 2, 1)


def first_structure_residual(epsilon: float) -> float:
    """max |d omega^p - omega^q ^ omega_q^p| over all components."""
    c = connection_forms(epsilon).coefficients
    C = structure_constants(epsilon)
    wedge = np.einsum("rps->prs", c) - np.einsum("spr->prs", c)
    return float(np.max(np.abs(C - wedge)))


def curvature_from_structure(epsilon: float) -> FrameCurvature:
    """Riemann tensor recomputed from the connection coefficients and the structure constants."""
    c = connection_forms(epsilon).coefficients
    C = structure_constants(epsilon)
    d_omega = np.einsum("qpt,trs->qprs", c, C)
    quadratic = np.einsum("qmr,mps->qprs", c, c) - np.einsum("qms,mpr->qprs", c, c)
    return FrameCurvature(epsilon=epsilon, components=d_omega - quadratic)
