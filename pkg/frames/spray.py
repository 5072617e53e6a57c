"""Closed-form frame-side spray quantities for F = |y| + sign sqrt((K-1)/K) y^1.

Everything here is an explicit real function of (frame vector, K, sign), with
no automatic differentiation, so it can serve as an oracle for the jet engine.
Arrays use 0-based frame indices; ``first[p, q]`` is d(zeta^p)/d(y^q) and so on.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from frames.connection import connection_forms

CONSISTENCY_TOLERANCE = 1e-10


class ConsistencyError(RuntimeError):
    """Two independent closed-form computations of the same table disagree."""


def _unpack(frame_y: Sequence[float]) -> tuple[float, float, float, float]:
    u, v, w = (float(t) for t in frame_y)
    alpha = math.sqrt(u * u + v * v + w * w)
    if alpha == 0.0:
        raise ValueError("frame vector must be nonzero")
    return u, v, w, alpha


def _drift_root(K: float, sign: int) -> float:
    return sign * math.sqrt(K - 1.0)


def frame_finsler(frame_y: Sequence[float], K: float, sign: int) -> float:
    u, _, _, alpha = _unpack(frame_y)
    return alpha + sign * math.sqrt((K - 1.0) / K) * u


def riemann_spray_frame(frame_y: Sequence[float], K: float) -> np.ndarray:
    """Riemannian spray curvature K~^p_r = y^q R~_q^p_rs y^s of the Berger metric at eps = sqrt(K)."""
    u, v, w, _ = _unpack(frame_y)
    m = 4.0 - 3.0 * K
    return np.array(
        [
            [K * (v * v + w * w), -K * u * v, -K * u * w],
            [-K * u * v, K * u * u + m * w * w, -m * v * w],
            [-K * u * w, -m * v * w, K * u * u + m * v * v],
        ]
    )


def zeta_frame(frame_y: Sequence[float], K: float, sign: int) -> np.ndarray:
    """zeta^p = G^p - G~^p in the frame: (0, -s sqrt(K-1) w alpha, +s sqrt(K-1) v alpha)."""
    _, v, w, alpha = _unpack(frame_y)
    root = _drift_root(K, sign)
    return np.array([0.0, -root * w * alpha, root * v * alpha])


@dataclass(frozen=True)
class ZetaPartials:
    first: np.ndarray  # [p, q]
    second: np.ndarray  # [p, q, t], symmetric in (q, t)


def zeta_partials(frame_y: Sequence[float], K: float, sign: int) -> ZetaPartials:
    u, v, w, alpha = _unpack(frame_y)
    root = _drift_root(K, sign)
    diamond = root / alpha
    star = root / alpha**3
    uu, vv, ww = u * u, v * v, w * w

    first = np.zeros((3, 3))
    first[1] = [-diamond * u * w, -diamond * v * w, -diamond * (uu + vv + 2 * ww)]
    first[2] = [diamond * u * v, diamond * (uu + 2 * vv + ww), diamond * v * w]

    second = np.zeros((3, 3, 3))
    entries = {
        (1, 0, 0): -star * w * (vv + ww),
        (1, 0, 1): star * u * v * w,
        (1, 0, 2): -star * u * (uu + vv),
        (1, 1, 1): -star * w * (uu + ww),
        (1, 1, 2): -star * v * (uu + vv),
        (1, 2, 2): -star * w * (3 * uu + 3 * vv + 2 * ww),
        (2, 0, 0): star * v * (vv + ww),
        (2, 0, 1): star * u * (uu + ww),
        (2, 0, 2): -star * u * v * w,
        (2, 1, 1): star * v * (3 * uu + 2 * vv + 3 * ww),
        (2, 1, 2): star * w * (uu + ww),
        (2, 2, 2): star * v * (uu + vv),
    }
    for (p, q, t), value in entries.items():
        second[p, q, t] = value
        second[p, t, q] = value
    return ZetaPartials(first=first, second=second)


@dataclass(frozen=True)
class HorizontalDerivative:
    values: np.ndarray  # zeta^p_{|r} as [p, r]
    partials: np.ndarray  # d(zeta^p_{|r})/d(y^t) as [p, r, t]


def zeta_hcov(frame_y: Sequence[float], K: float, sign: int) -> HorizontalDerivative:
    u, v, w, alpha = _unpack(frame_y)
    root = _drift_root(K, sign)
    heart = alpha * root * math.sqrt(K)
    club = root * math.sqrt(K) / alpha
    uu, vv, ww = u * u, v * v, w * w

    values = np.zeros((3, 3))
    values[0, 1] = -heart * v
    values[0, 2] = -heart * w
    values[1, 1] = heart * u
    values[2, 2] = heart * u

    partials = np.zeros((3, 3, 3))
    partials[0, 1] = [-club * u * v, -club * (uu + 2 * vv + ww), -club * v * w]
    partials[0, 2] = [-club * u * w, -club * v * w, -club * (uu + vv + 2 * ww)]
    partials[1, 1] = [club * (2 * uu + vv + ww), club * u * v, club * u * w]
    partials[2, 2] = partials[1, 1]
    return HorizontalDerivative(values=values, partials=partials)


def zeta_hcov_from_connection(frame_y: Sequence[float], K: float, sign: int) -> np.ndarray:
    """zeta^p_{|r} = zeta^s c[s, p, r] - (zeta^p)_{y^t} y^s c[s, t, r] at eps = sqrt(K)."""
    y = np.asarray(frame_y, dtype=float)
    c = connection_forms(math.sqrt(K)).coefficients
    zeta = zeta_frame(y, K, sign)
    first = zeta_partials(y, K, sign).first
    return np.einsum("s,spr->pr", zeta, c) - np.einsum("pt,s,str->pr", first, y, c)


def e_correction_assembled(frame_y: Sequence[float], K: float, sign: int) -> np.ndarray:
    """E^p_r = 2 zeta^p_{|r} - y^q (zeta^p_{|q})_{y^r} - (zeta^p)_{y^q} (zeta^q)_{y^r} + 2 zeta^q (zeta^p)_{y^q y^r}."""
    y = np.asarray(frame_y, dtype=float)
    zeta = zeta_frame(y, K, sign)
    partials = zeta_partials(y, K, sign)
    hcov = zeta_hcov(y, K, sign)
    return (
        2.0 * hcov.values
        - np.einsum("q,pqr->pr", y, hcov.partials)
        - partials.first @ partials.first
        + 2.0 * np.einsum("q,pqr->pr", zeta, partials.second)
    )


def e_correction(frame_y: Sequence[float], K: float, sign: int, check: bool = True) -> np.ndarray:
    """Closed-form E^p_r, the non-Riemannian part of the frame spray curvature."""
    u, v, w, alpha = _unpack(frame_y)
    club = _drift_root(K, sign) * math.sqrt(K) / alpha
    k1 = K - 1.0
    uu, vv, ww = u * u, v * v, w * w
    E = np.array(
        [
            [club * u * (vv + ww), -club * v * uu, -club * w * uu],
            [
                -club * v * (2 * uu + vv + ww) - k1 * u * v,
                club * u * (2 * uu + vv + 2 * ww) + k1 * (uu + 4 * ww),
                -club * u * v * w - 4 * k1 * v * w,
            ],
            [
                -club * w * (2 * uu + vv + ww) - k1 * u * w,
                -club * u * v * w - 4 * k1 * v * w,
                club * u * (2 * uu + 2 * vv + ww) + k1 * (uu + 4 * vv),
            ],
        ]
    )
    if check:
        assembled = e_correction_assembled(frame_y, K, sign)
        mismatch = float(np.max(np.abs(E - assembled)))
        if mismatch > CONSISTENCY_TOLERANCE * max(1.0, float(np.max(np.abs(E)))):
            raise ConsistencyError(f"closed-form and assembled E disagree by {mismatch:.3e} at y={tuple(frame_y)}, K={K}")
    return E


def tau_frame(frame_y: Sequence[float], K: float, sign: int) -> np.ndarray:
    """K tau^p_r = K F^2 (delta^p_r - (y^p/F) F_{y^r}) written out entrywise."""
    u, v, w, alpha = _unpack(frame_y)
    drift = sign * math.sqrt((K - 1.0) / K)
    F = alpha + drift * u
    ratio = F / alpha
    return np.array(
        [
            [ratio * K * (v * v + w * w), -ratio * K * u * v, -ratio * K * u * w],
            [-ratio * K * u * v - F * K * v * drift, F * K * (F - v * v / alpha), -ratio * K * v * w],
            [-ratio * K * u * w - F * K * w * drift, -ratio * K * v * w, F * K * (F - w * w / alpha)],
        ]
    )
