"""Projective invariants in dimension 3: the reduced Weyl tensor and the Douglas tensor.

With n = 3 the prefactors are 1/(n-1) = 1/2 and 1/(n+1) = 1/4.
"""

from typing import Sequence

import numpy as np

from jets.jet import JetOrderError, multi_index
from randers.curvature import spray_curvature_jets
from randers.field import JET_DIMS
from randers.spray import spray_coeffs
from randers.tensor_grid import LOWER, UPPER, TensorGrid
from sphere.metric_spec import MetricSpec
from sphere.model import finsler_F, riemannian_metric


MIN_WEYL_ORDER = 5
MIN_DOUGLAS_ORDER = 6


def weyl_reduced(spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_WEYL_ORDER) -> TensorGrid:
    """W^i_k = K^i_k - Kf delta^i_k - 1/4 y^i ((K^j_k)_{y^j} - (Kf)_{y^k}), Kf = K^i_i / 2."""
    if order < MIN_WEYL_ORDER:
        raise JetOrderError(f"Weyl tensor needs jet order >= {MIN_WEYL_ORDER}, got {order}")
    K = spray_curvature_jets(spray_coeffs(spec, p, y, order))
    trace = 0.5 * (K[0][0] + K[1][1] + K[2][2])

    divergence = np.array([sum(K[j][k].derivative(3 + j).value for j in range(3)) for k in range(3)])
    trace_grad = np.array([trace.derivative(3 + k).value for k in range(3)])
    values = np.array([[entry.value for entry in row] for row in K])

    y = np.asarray(y, dtype=float)
    W = values - trace.value * np.eye(3) - 0.25 * np.outer(y, divergence - trace_grad)
    return TensorGrid(W, (UPPER, LOWER))


def douglas(spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_DOUGLAS_ORDER) -> TensorGrid:
    """D^i_jkl = G^i_{jkl} - 1/4 (delta^i_j G^h_{hkl} + delta^i_k G^h_{hlj} + delta^i_l G^h_{hjk}) - 1/4 y^i G^h_{hjkl}.

    Lower indices on G denote y-derivatives.
    """
    if order < MIN_DOUGLAS_ORDER:
        raise JetOrderError(f"Douglas tensor needs jet order >= {MIN_DOUGLAS_ORDER}, got {order}")
    spray = spray_coeffs(spec, p, y, order)

    def y_partial(i, *slots):
        return spray.G[i].partial(multi_index(JET_DIMS, [3 + s for s in slots]))

    third = np.zeros((3, 3, 3, 3))
    fourth_trace = np.zeros((3, 3, 3))
    for j in range(3):
        for k in range(3):
            for l in range(3):
                for i in range(3):
                    third[i, j, k, l] = y_partial(i, j, k, l)
                fourth_trace[j, k, l] = sum(y_partial(h, h, j, k, l) for h in range(3))
    third_trace = np.einsum("hhkl->kl", third)

    delta = np.eye(3)
    y = np.asarray(y, dtype=float)
    D = (
        third
        - 0.25
        * (
            np.einsum("ij,kl->ijkl", delta, third_trace)
            + np.einsum("ik,lj->ijkl", delta, third_trace)
            + np.einsum("il,jk->ijkl", delta, third_trace)
        )
        - 0.25 * np.einsum("i,jkl->ijkl", y, fourth_trace)
    )
    return TensorGrid(D, (UPPER, LOWER, LOWER, LOWER), symmetries=((1, 2), (2, 3)))


def weyl_magnitude(spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_WEYL_ORDER) -> float:
    """max |W^i_k| / F^2, homogeneous of degree 0."""
    F = finsler_F(p, y, spec)
    return weyl_reduced(spec, p, y, order).max_abs() / (F * F)


def douglas_magnitude(spec: MetricSpec, p: Sequence[float], y: Sequence[float], order: int = MIN_DOUGLAS_ORDER) -> float:
    """max |D^i_jkl| times the Riemannian length of y, homogeneous of degree 0."""
    y_arr = np.asarray(y, dtype=float)
    length = float(np.sqrt(y_arr @ riemannian_metric(p, spec) @ y_arr))
    return douglas(spec, p, y, order).max_abs() * length
