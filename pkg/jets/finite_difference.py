"""Central finite-difference oracle for mixed partial derivatives.

Used only to cross-check jet derivatives, never in the main pipeline.
"""

import itertools
from typing import Callable, Optional, Sequence, Union

import numpy as np

from jets.jet import JetOrderError

MAX_FD_ORDER = 4
DEFAULT_RELATIVE_STEP = 1e-3

# (offset, weight) pairs; every stencil has O(h^2) truncation error
CENTRAL_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def default_step(coordinate: float) -> float:
    return DEFAULT_RELATIVE_STEP * max(1.0, abs(coordinate))


def fd_partial(
    f: Callable[[np.ndarray], float],
    at: Sequence[float],
    m: Sequence[int],
    h: Optional[Union[float, Sequence[float]]] = None,
) -> float:
    """
    Estimate the mixed partial derivative d^m f at ``at`` with tensor-product central stencils.

    Args:
        f (Callable): scalar field taking a 1-D numpy array.
        at (Sequence[float]): base point.
        m (Sequence[int]): multi-index, one exponent per coordinate; total degree <= 4.
        h (float | Sequence[float] | None): absolute step (one per coordinate or shared).
            Defaults to 1e-3 * max(1, |coordinate|) per differentiated variable.

    Returns:
        float: the finite-difference estimate.
    """
    base = np.asarray(at, dtype=float)
    m = tuple(int(e) for e in m)
    if len(m) != base.size:
        raise ValueError(f"multi-index {m} does not match a point of dimension {base.size}")
    if any(e < 0 for e in m):
        raise ValueError(f"multi-index {m} has negative exponents")
    if sum(m) > MAX_FD_ORDER:
        raise JetOrderError(f"finite-difference stencils only go to total order {MAX_FD_ORDER}, got {sum(m)}")

    if h is None:
        steps = np.array([default_step(x) for x in base])
    elif np.ndim(h) == 0:
        steps = np.full(base.size, float(h))
    else:
        steps = np.asarray(h, dtype=float)
    if np.any(steps <= 0):
        raise ValueError("finite-difference steps must be positive")

    active = [k for k, e in enumerate(m) if e > 0]
    stencils = [CENTRAL_STENCILS[m[k]] for k in active]

    total = 0.0
    for combo in itertools.product(*stencils):
        point = base.copy()
        weight = 1.0
        for k, (offset, w) in zip(active, combo):
            point[k] += offset * steps[k]
            weight *= w
        total += weight * f(point)

    scale = np.prod([steps[k] ** m[k] for k in active]) if active else 1.0
    return float(total / scale)
