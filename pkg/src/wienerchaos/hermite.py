"""Hermite polynomials normalized to leading coefficient 1/q!.

H_q(x) = ((-1)^q / q!) e^{x^2/2} (d/dx)^q e^{-x^2/2}, so H_0 = 1, H_1 = x,
H_2 = (x^2 - 1)/2, H_3 = (x^3 - 3x)/6, and the three-term recurrence reads
H_{q+1}(x) = (x H_q(x) - H_{q-1}(x)) / (q + 1).  Under a standard Gaussian,
E[H_p(Z) H_q(Z)] = delta_{pq} / q!.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .exceptions import ValidationError

ArrayLike = Union[float, np.ndarray]


def hermite(q: int, x: ArrayLike) -> ArrayLike:
    """Evaluate H_q at x (scalar or array) by the three-term recurrence."""
    if not isinstance(q, int) or q < 0:
        raise ValidationError(f"hermite order must be a non-negative integer, got {q!r}")
    scalar = np.isscalar(x)
    xa = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(xa)
    if q == 0:
        return float(prev) if scalar else prev
    cur = xa.copy()
    for k in range(1, q):
        prev, cur = cur, (xa * cur - prev) / (k + 1)
    return float(cur) if scalar else cur


def hermite_all(max_order: int, x: ArrayLike) -> np.ndarray:
    """Stack H_0(x) .. H_max_order(x) along a leading axis."""
    if not isinstance(max_order, int) or max_order < 0:
        raise ValidationError(f"max_order must be a non-negative integer, got {max_order!r}")
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty((max_order + 1,) + xa.shape)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = xa
    for k in range(1, max_order):
        out[k + 1] = (xa * out[k] - out[k - 1]) / (k + 1)
    return out


class HermiteEvaluator:
    """Evaluator bound to a fixed maximum order.

    Calls with q above max_order raise ValidationError, which keeps chaos
    evaluation honest about the polynomial degrees it claims to support.
    """

    def __init__(self, max_order: int):
        if not isinstance(max_order, int) or max_order < 0:
            raise ValidationError(f"max_order must be a non-negative integer, got {max_order!r}")
        self.max_order = max_order

    def __call__(self, q: int, x: ArrayLike) -> ArrayLike:
        if not isinstance(q, int) or not 0 <= q <= self.max_order:
            raise ValidationError(f"order {q!r} outside 0..{self.max_order}")
        return hermite(q, x)

    def table(self, x: ArrayLike) -> np.ndarray:
        """All orders 0..max_order at once, shape (max_order + 1, len(x))."""
        return hermite_all(self.max_order, x)
