"""Multiple Wiener-Ito integrals over a finite-dimensional Gaussian space.

An order-q element F = I_q(f) is identified by its symmetric kernel f.  On
R^N with independent standard normals x_1..x_N attached to the coordinate
basis, the integral evaluates pathwise as

    I_q(f)(x) = sum over stored indices m of q! f[m] prod_i H_{a_i}(x_i),

with a_i the occupation counts of m and H the 1/q!-normalized Hermite
polynomials.  In particular I_q(h^(x q)) = q! H_q(<h, x>) for unit h, and
E[I_p(f) I_q(g)] = delta_pq q! <f, g>.

The product of two integrals expands as

    I_p(f) I_q(g) = sum_{r=0}^{p^q} r! C(p,r) C(q,r) I_{p+q-2r}(f (x~)_r g),

which is the single identity behind exact squared covariances here; it is
validated in the test suite against the independent Isserlis-style moment
oracle below rather than taken on faith.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from . import _accel
from .exceptions import DegenerateInputError, ResourceLimitError, ValidationError
from .tensor import HilbertSpace, SymmetricTensor, contract, contract_sym, inner, occupation

# Guards for the brute-force moment oracle.
ORACLE_MAX_TOTAL_ORDER = 12
ORACLE_MAX_DIMENSION = 6

# Standardization check width used by vector constructors.
STANDARDIZED_TOL = 1e-10


class ChaosElement:
    """A single integral I_q(f), q >= 1; the kernel fixes the order."""

    __slots__ = ("order", "kernel", "_prep")

    def __init__(self, kernel: SymmetricTensor):
        if not isinstance(kernel, SymmetricTensor):
            raise ValidationError(f"kernel must be a SymmetricTensor, got {type(kernel).__name__}")
        if kernel.order < 1:
            raise ValidationError("chaos elements need order >= 1; constants belong in ChaosExpansion")
        self.order = kernel.order
        self.kernel = kernel
        self._prep = None

    @property
    def space(self) -> HilbertSpace:
        return self.kernel.space

    def __repr__(self) -> str:
        return f"ChaosElement(order={self.order}, N={self.space.dimension}, nnz={len(self.kernel.entries)})"

    def prepared(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flat (coords, counts, offsets, coeffs) arrays for batch evaluation."""
        if self._prep is None:
            coords: list[int] = []
            counts: list[int] = []
            offsets = [0]
            coeffs: list[float] = []
            scale = float(math.factorial(self.order))
            for index, value in self.kernel.items():
                for coord, count in occupation(index):
                    coords.append(coord - 1)
                    counts.append(count)
                offsets.append(len(coords))
                coeffs.append(scale * value)
            self._prep = (
                np.asarray(coords, dtype=np.int64),
                np.asarray(counts, dtype=np.int64),
                np.asarray(offsets, dtype=np.int64),
                np.asarray(coeffs, dtype=np.float64),
            )
        return self._prep


class ChaosExpansion:
    """Finite sum of integrals of distinct orders plus a constant term.

    components maps order k to the order-k kernel; k = 0 holds the constant
    as an order-0 tensor.  Orders absent from the map are zero.
    """

    __slots__ = ("space", "components")

    def __init__(self, space: HilbertSpace, components: dict[int, SymmetricTensor]):
        clean: dict[int, SymmetricTensor] = {}
        for order in sorted(components):
            tensor = components[order]
            if not isinstance(order, int) or order < 0:
                raise ValidationError(f"component order must be a non-negative integer, got {order!r}")
            if tensor.order != order:
                raise ValidationError(f"component at order {order} has tensor order {tensor.order}")
            if tensor.space != space:
                raise ValidationError("all components must share the expansion space")
            if tensor.entries:
                clean[order] = tensor
        self.space = space
        self.components = clean

    def __repr__(self) -> str:
        return f"ChaosExpansion(N={self.space.dimension}, orders={sorted(self.components)})"

    def expectation(self) -> float:
        zero = self.components.get(0)
        return zero.entries.get((), 0.0) if zero is not None else 0.0

    def covariance(self, other: "ChaosExpansion") -> float:
        """Sum over shared orders k >= 1 of k! <h_k, g_k>."""
        if self.space != other.space:
            raise ValidationError("covariance requires expansions over the same space")
        total = 0.0
        for order in sorted(self.components.keys() & other.components.keys()):
            if order == 0:
                continue
            total += math.factorial(order) * inner(self.components[order], other.components[order])
        return total

    def variance(self) -> float:
        return self.covariance(self)

    def second_moment(self) -> float:
        return self.variance() + self.expectation() ** 2


def evaluate(obj: Union[ChaosElement, ChaosExpansion], x: np.ndarray) -> Union[float, np.ndarray]:
    """Pathwise value(s) of an element or expansion.

    Parameters
    ----------
    x : ndarray
        One sample of shape (N,) for a scalar result, or a batch of shape
        (count, N) for per-sample values.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != _space_of(obj).dimension:
        raise ValidationError(f"sample array shape {np.shape(x)} does not match dimension {_space_of(obj).dimension}")
    if isinstance(obj, ChaosElement):
        values = _accel.evaluate_batch(*obj.prepared(), arr)
    elif isinstance(obj, ChaosExpansion):
        values = np.full(arr.shape[0], obj.expectation())
        for order in sorted(obj.components):
            if order == 0:
                continue
            values = values + _accel.evaluate_batch(*ChaosElement(obj.components[order]).prepared(), arr)
    else:
        raise ValidationError(f"cannot evaluate object of type {type(obj).__name__}")
    return float(values[0]) if single else values


def _space_of(obj) -> HilbertSpace:
    if isinstance(obj, (ChaosElement, ChaosExpansion)):
        return obj.space
    raise ValidationError(f"expected a chaos element or expansion, got {type(obj).__name__}")


def variance(element: ChaosElement) -> float:
    """Var I_q(f) = q! ||f||^2."""
    return math.factorial(element.order) * inner(element.kernel, element.kernel)


def normalize(element: ChaosElement) -> ChaosElement:
    """Rescale the kernel so the element has unit variance."""
    var = variance(element)
    if var <= 0.0:
        raise DegenerateInputError("cannot standardize an element with zero kernel")
    return ChaosElement(element.kernel.scaled(1.0 / math.sqrt(var)))


def multiply(left: ChaosElement, right: ChaosElement) -> ChaosExpansion:
    """Expand I_p(f) I_q(g) with the product formula.

    Returns the expansion sum_r r! C(p,r) C(q,r) I_{p+q-2r}(f (x~)_r g); the
    order-0 component equals delta_pq q! <f, g>.
    """
    if left.space != right.space:
        raise ValidationError("product requires elements over the same space")
    p, q = left.order, right.order
    components: dict[int, SymmetricTensor] = {}
    for r in range(min(p, q) + 1):
        coeff = math.factorial(r) * math.comb(p, r) * math.comb(q, r)
        components[p + q - 2 * r] = contract_sym(left.kernel, right.kernel, r).scaled(float(coeff))
    return ChaosExpansion(left.space, components)


def cov_squares(left: ChaosElement, right: ChaosElement) -> float:
    """Exact Cov(F^2, G^2) through the product formula.

    Both squares are expanded into chaos components and the covariance is
    the inner product over shared orders k >= 1 weighted by k!.
    """
    return multiply(left, left).covariance(multiply(right, right))


def contraction_norms(left: ChaosElement, right: ChaosElement) -> list[float]:
    """Norms ||f (x)_r g|| of the unsymmetrized contractions, r = 1..min(p, q)."""
    if left.space != right.space:
        raise ValidationError("contraction norms require elements over the same space")
    return [
        contract(left.kernel, right.kernel, r).norm()
        for r in range(1, min(left.order, right.order) + 1)
    ]


# Monomial coefficients of H_a: H_a(x) = sum_m (-1)^m x^(a-2m) / (m! 2^m (a-2m)!).
def _hermite_monomials(order: int) -> dict[int, float]:
    out: dict[int, float] = {}
    for m in range(order // 2 + 1):
        power = order - 2 * m
        out[power] = (-1.0) ** m / (math.factorial(m) * 2.0**m * math.factorial(power))
    return out


def _poly_multiply_univariate(
    poly: dict[tuple[int, ...], float], axis: int, uni: dict[int, float]
) -> dict[tuple[int, ...], float]:
    out: dict[tuple[int, ...], float] = {}
    for exps, coeff in poly.items():
        for power, c in uni.items():
            key = exps[:axis] + (exps[axis] + power,) + exps[axis + 1 :]
            out[key] = out.get(key, 0.0) + coeff * c
    return out


def _element_polynomial(element: ChaosElement) -> dict[tuple[int, ...], float]:
    n = element.space.dimension
    scale = float(math.factorial(element.order))
    total: dict[tuple[int, ...], float] = {}
    for index, value in element.kernel.items():
        poly = {(0,) * n: scale * value}
        for coord, count in occupation(index):
            poly = _poly_multiply_univariate(poly, coord - 1, _hermite_monomials(count))
        for key, coeff in poly.items():
            total[key] = total.get(key, 0.0) + coeff
    return total


def isserlis_moment(elements: Sequence[ChaosElement]) -> float:
    """Brute-force E[prod_j F_j] through raw Gaussian moments.

    Each element is expanded into a polynomial in the coordinates, the
    polynomials are multiplied, and each monomial takes the product of
    univariate moments E[Z^k] (zero for odd k, (k-1)!! for even k, which is
    the pairing count of the Isserlis theorem).  Independent of the product
    formula, so the two can check each other.

    Guards: sum of orders <= ORACLE_MAX_TOTAL_ORDER and dimension
    <= ORACLE_MAX_DIMENSION; larger inputs raise ResourceLimitError.
    """
    if not elements:
        raise ValidationError("isserlis_moment requires at least one element")
    space = elements[0].space
    if any(e.space != space for e in elements):
        raise ValidationError("all elements must share one space")
    total_order = sum(e.order for e in elements)
    if total_order > ORACLE_MAX_TOTAL_ORDER:
        raise ResourceLimitError(
            f"total order {total_order} exceeds the oracle guard {ORACLE_MAX_TOTAL_ORDER}"
        )
    if space.dimension > ORACLE_MAX_DIMENSION:
        raise ResourceLimitError(
            f"dimension {space.dimension} exceeds the oracle guard {ORACLE_MAX_DIMENSION}"
        )
    product: dict[tuple[int, ...], float] = {(0,) * space.dimension: 1.0}
    for element in elements:
        poly = _element_polynomial(element)
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in product.items():
            for e2, c2 in poly.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        product = out
    total = 0.0
    for exps in sorted(product):
        coeff = product[exps]
        moment = 1.0
        for e in exps:
            if e % 2 == 1:
                moment = 0.0
                break
            moment *= float(math.factorial(e) // (2 ** (e // 2) * math.factorial(e // 2)))
        total += coeff * moment
    return total
