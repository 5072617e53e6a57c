"""Truncated multivariate Taylor jets.

A ``Jet`` stores the Taylor coefficients of a scalar function of up to six
variables about a base point, for every multi-index of total degree up to
``order``. Coefficients live in a dense numpy array laid out in graded
lexicographic order: degree 0 first, then degree 1 as ``(1,0,..), (0,1,..)``,
and so on. That layout is stable and tests address coefficients through it.

The coefficient of a multi-index ``m`` is ``d^m f / m!``; ``Jet.partial``
multiplies the factorials back in.
"""

import functools
import math
import numbers
from typing import Sequence, Union

import numpy as np


MAX_DIMS = 6

Scalar = Union[float, int, np.floating]


class JetOrderError(ValueError):
    """A multi-index, variable slot or requested order is out of range."""


class JetDomainError(ValueError):
    """Function evaluated outside its real domain (e.g. sqrt of a non-positive value)."""


class SingularJetError(ZeroDivisionError):
    """Division by a jet whose constant term is zero."""


def _compositions(degree: int, dims: int) -> list[tuple[int, ...]]:
    if dims == 1:
        return [(degree,)]
    result = []
    for first in range(degree, -1, -1):
        for rest in _compositions(degree - first, dims - 1):
            result.append((first,) + rest)
    return result


@functools.lru_cache(maxsize=None)
def multi_indices(dims: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, in graded lexicographic order."""
    if not 1 <= dims <= MAX_DIMS:
        raise JetOrderError(f"dims must be in 1..{MAX_DIMS}, got {dims}")
    if order < 0:
        raise JetOrderError(f"order must be non-negative, got {order}")
    indices: list[tuple[int, ...]] = []
    for degree in range(order + 1):
        indices.extend(_compositions(degree, dims))
    return tuple(indices)


def coefficient_count(dims: int, order: int) -> int:
    return math.comb(dims + order, order)


@functools.lru_cache(maxsize=None)
def _index_lookup(dims: int, order: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(multi_indices(dims, order))}


@functools.lru_cache(maxsize=None)
def _product_table(dims: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # (left, right, target) positions for every pair whose degrees sum to <= order
    indices = multi_indices(dims, order)
    lookup = _index_lookup(dims, order)
    prefix = [coefficient_count(dims, d) for d in range(order + 1)]
    left, right, target = [], [], []
    for i, a in enumerate(indices):
        remaining = order - sum(a)
        for j in range(prefix[remaining]):
            b = indices[j]
            left.append(i)
            right.append(j)
            target.append(lookup[tuple(p + q for p, q in zip(a, b))])
    return (
        np.asarray(left, dtype=np.intp),
        np.asarray(right, dtype=np.intp),
        np.asarray(target, dtype=np.intp),
    )


@functools.lru_cache(maxsize=None)
def _derivative_table(dims: int, order: int, slot: int) -> tuple[np.ndarray, np.ndarray]:
    # source position in the order-`order` layout and the factor m_slot + 1,
    # for every multi-index of the order-1 result
    lookup = _index_lookup(dims, order)
    sources, factors = [], []
    for m in multi_indices(dims, order - 1):
        shifted = list(m)
        shifted[slot] += 1
        sources.append(lookup[tuple(shifted)])
        factors.append(float(shifted[slot]))
    return np.asarray(sources, dtype=np.intp), np.asarray(factors)


def multi_index(dims: int, slots: Sequence[int]) -> tuple[int, ...]:
    """Multi-index that differentiates once per listed slot, e.g. (3, 3, 4) -> (0,0,0,2,1,0)."""
    exponents = [0] * dims
    for slot in slots:
        if not 0 <= slot < dims:
            raise JetOrderError(f"variable slot {slot} out of range for {dims} variables")
        exponents[slot] += 1
    return tuple(exponents)


class Jet:
    """Immutable truncated Taylor expansion in ``dims`` variables up to total degree ``order``."""

    __slots__ = ("coeffs", "dims", "order")
    __array_ufunc__ = None  # numpy scalars defer to Jet's reflected operators

    def __init__(self, coeffs: np.ndarray, dims: int, order: int):
        coeffs = np.array(coeffs, dtype=float)
        expected = coefficient_count(dims, order)
        if coeffs.shape != (expected,):
            raise JetOrderError(
                f"expected {expected} coefficients for dims={dims}, order={order}, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.dims = dims
        self.order = order

    @staticmethod
    def constant(value: Scalar, dims: int, order: int) -> "Jet":
        coeffs = np.zeros(coefficient_count(dims, order))
        coeffs[0] = value
        return Jet(coeffs, dims, order)

    @staticmethod
    def variable(index: int, value: Scalar, dims: int, order: int) -> "Jet":
        if not 0 <= index < dims:
            raise JetOrderError(f"variable index {index} out of range for {dims} variables")
        if order < 1:
            raise JetOrderError(f"a coordinate jet needs order >= 1, got {order}")
        coeffs = np.zeros(coefficient_count(dims, order))
        coeffs[0] = value
        coeffs[1 + index] = 1.0
        return Jet(coeffs, dims, order)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def _check_compatible(self, other: "Jet"):
        if other.dims != self.dims or other.order != self.order:
            raise ValueError(
                f"jet shape mismatch: (dims={self.dims}, order={self.order}) vs (dims={other.dims}, order={other.order})"
            )

    def _with(self, coeffs: np.ndarray) -> "Jet":
        return Jet(coeffs, self.dims, self.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            return self._with(self.coeffs + other.coeffs)
        if isinstance(other, numbers.Real):
            coeffs = self.coeffs.copy()
            coeffs[0] += other
            return self._with(coeffs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._with(-self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (Jet, numbers.Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, numbers.Real):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            left, right, target = _product_table(self.dims, self.order)
            weights = self.coeffs[left] * other.coeffs[right]
            return self._with(np.bincount(target, weights=weights, minlength=self.coeffs.size))
        if isinstance(other, numbers.Real):
            return self._with(self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            return self * other.reciprocal()
        if isinstance(other, numbers.Real):
            if other == 0:
                raise SingularJetError("division of a jet by zero")
            return self._with(self.coeffs / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, exponent: int):
        if not isinstance(exponent, numbers.Integral):
            return NotImplemented
        if exponent < 0:
            return (self ** (-exponent)).reciprocal()
        result = Jet.constant(1.0, self.dims, self.order)
        for _ in range(exponent):
            result = result * self
        return result

    def _compose(self, series: Sequence[float]) -> "Jet":
        """Evaluate sum_n series[n] * h**n where h is this jet minus its constant term (Horner)."""
        h_coeffs = self.coeffs.copy()
        h_coeffs[0] = 0.0
        h = self._with(h_coeffs)
        result = Jet.constant(series[-1], self.dims, self.order)
        for c in reversed(series[:-1]):
            result = result * h + c
        return result

    def reciprocal(self) -> "Jet":
        a0 = self.value
        if a0 == 0.0:
            raise SingularJetError("reciprocal of a jet with zero constant term")
        series = [(-1.0) ** n / a0 ** (n + 1) for n in range(self.order + 1)]
        return self._compose(series)

    def sqrt(self) -> "Jet":
        a0 = self.value
        if not a0 > 0.0:
            raise JetDomainError(f"sqrt of a jet with non-positive constant term {a0}")
        series = []
        binom = 1.0
        for n in range(self.order + 1):
            series.append(binom * a0 ** (0.5 - n))
            binom *= (0.5 - n) / (n + 1)
        return self._compose(series)

    def coefficient(self, m: Sequence[int]) -> float:
        m = tuple(m)
        if len(m) != self.dims or any(e < 0 for e in m):
            raise JetOrderError(f"multi-index {m} does not address a {self.dims}-variable jet")
        if sum(m) > self.order:
            raise JetOrderError(f"multi-index {m} has degree {sum(m)} > order {self.order}")
        return float(self.coeffs[_index_lookup(self.dims, self.order)[m]])

    def partial(self, m: Sequence[int]) -> float:
        """Mixed partial derivative d^m f at the base point."""
        factorials = math.prod(math.factorial(e) for e in m)
        return self.coefficient(m) * factorials

    def derivative(self, slot: int) -> "Jet":
        """Jet of the partial derivative in one variable; one order lower."""
        if not 0 <= slot < self.dims:
            raise JetOrderError(f"variable slot {slot} out of range for {self.dims} variables")
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        sources, factors = _derivative_table(self.dims, self.order, slot)
        return Jet(self.coeffs[sources] * factors, self.dims, self.order - 1)

    def truncate(self, order: int) -> "Jet":
        if order > self.order or order < 0:
            raise JetOrderError(f"cannot truncate an order-{self.order} jet to order {order}")
        return Jet(self.coeffs[: coefficient_count(self.dims, order)], self.dims, order)

    def __repr__(self):
        return f"Jet(dims={self.dims}, order={self.order}, value={self.value!r})"


def jet_constant(value: Scalar, dims: int, order: int) -> Jet:
    return Jet.constant(value, dims, order)


def jet_variable(index: int, value: Scalar, dims: int, order: int) -> Jet:
    """Coordinate jet: constant ``value`` plus a unit first-order term in slot ``index``."""
    return Jet.variable(index, value, dims, order)


_ARITHMETIC = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise TypeError("jet_arith expects two Jet operands")
    try:
        operation = _ARITHMETIC[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}; expected one of {sorted(_ARITHMETIC)}") from None
    return operation(a, b)


def jet_sqrt(a: Jet) -> Jet:
    return a.sqrt()


def sqrt(x):
    """Square root of a float or a Jet."""
    if isinstance(x, Jet):
        return x.sqrt()
    if x < 0:
        raise JetDomainError(f"sqrt of negative value {x}")
    return math.sqrt(x)


def extract_partial(a: Jet, m: Sequence[int]) -> float:
    return a.partial(m)
