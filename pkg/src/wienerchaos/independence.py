"""Dependence diagnostics for vectors of chaotic components.

The exact side computes every pairwise Cov(F_i^2, F_j^2) and every cross
contraction norm; the vanishing of either family across groups is the
asymptotic-independence criterion, and the two witness scales are tied by

    max_r ||f (x)_r g||^2  <=  Cov(F^2, G^2),

which follows termwise from the product-formula expansion of the
covariance (every term there is a nonnegative multiple of a contraction
norm squared).  The empirical side estimates the factorization gap
|E prod psi_j(block_j) - prod E psi_j(block_j)| over a dictionary of test
functions with certified derivative bounds, and the ratio probe divides
the gap by the dictionary norms times the summed square roots of the cross
squared covariances to watch for an unbounded constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import montecarlo
from .chaos import (
    STANDARDIZED_TOL,
    ChaosElement,
    contraction_norms,
    cov_squares,
    evaluate,
    multiply,
    variance,
)
from .exceptions import DegenerateInputError, ValidationError
from .tensor import HilbertSpace

# Statistical floor: below this many samples the block machinery is noise.
MIN_SAMPLES = 10_000


class ChaosVector:
    """Groups of standardized chaos elements, ordered by decreasing order.

    Parameters
    ----------
    groups : sequence of sequences of ChaosElement
        Each inner group shares a single chaos order and every element must
        be standardized to unit variance within STANDARDIZED_TOL.  Groups
        are sorted by decreasing order at construction (stable for ties).
    """

    __slots__ = ("space", "groups", "orders", "sizes")

    def __init__(self, groups: Sequence[Sequence[ChaosElement]]):
        packed = [tuple(group) for group in groups]
        if not packed or any(not group for group in packed):
            raise ValidationError("a chaos vector needs at least one non-empty group")
        space = packed[0][0].space
        for g, group in enumerate(packed):
            orders = {element.order for element in group}
            if len(orders) != 1:
                raise ValidationError(f"group {g + 1} mixes chaos orders {sorted(orders)}")
            for e, element in enumerate(group):
                if element.space != space:
                    raise ValidationError(f"group {g + 1} element {e + 1} lives on a different space")
                var = variance(element)
                if abs(var - 1.0) > STANDARDIZED_TOL:
                    raise ValidationError(
                        f"group {g + 1} element {e + 1} is not standardized: variance {var!r}"
                    )
        packed.sort(key=lambda group: -group[0].order)
        self.space = space
        self.groups = tuple(packed)
        self.orders = tuple(group[0].order for group in packed)
        self.sizes = tuple(len(group) for group in packed)

    @property
    def d(self) -> int:
        return len(self.groups)

    @property
    def elements(self) -> tuple[ChaosElement, ...]:
        return tuple(element for group in self.groups for element in group)

    @property
    def group_index(self) -> tuple[int, ...]:
        """For each flat element position, the 0-based group it belongs to."""
        return tuple(g for g, group in enumerate(self.groups) for _ in group)

    def __repr__(self) -> str:
        return f"ChaosVector(orders={self.orders}, sizes={self.sizes}, N={self.space.dimension})"


class TestFunction:
    """Smooth bounded test function with certified sup bounds.

    Parameters
    ----------
    name : str
    fn : callable
        Vectorized map from ndarray to ndarray.
    sup : float
        Certified bound on |fn|.
    deriv_bound : callable
        deriv_bound(k) returns a certified bound on the k-th derivative's
        sup norm, k >= 1.  Bounds need not be tight, only valid.
    """

    __slots__ = ("name", "fn", "sup", "_deriv_bound")

    def __init__(self, name: str, fn: Callable[[np.ndarray], np.ndarray], sup: float, deriv_bound):
        self.name = name
        self.fn = fn
        self.sup = float(sup)
        self._deriv_bound = deriv_bound

    def deriv_bound(self, k: int) -> float:
        if not isinstance(k, int) or k < 1:
            raise ValidationError(f"derivative order must be a positive integer, got {k!r}")
        return float(self._deriv_bound(k))

    def norm(self, q: int) -> float:
        """sup |f| plus the derivative sup bounds up to total order q."""
        if not isinstance(q, int) or q < 0:
            raise ValidationError(f"norm order must be a non-negative integer, got {q!r}")
        return self.sup + sum(self.deriv_bound(k) for k in range(1, q + 1))

    def __repr__(self) -> str:
        return f"TestFunction({self.name!r})"


def _tanh_deriv_bound(k: int) -> float:
    # d^k/dx^k tanh = p_k(tanh) with p_1 = 1 - t^2, p_{j+1} = p_j'(t) (1 - t^2);
    # |tanh| <= 1 bounds |p_k| by the sum of absolute coefficients.
    poly = {0: 1.0, 2: -1.0}
    for _ in range(k - 1):
        deriv = {power - 1: power * coeff for power, coeff in poly.items() if power > 0}
        poly = {}
        for power, coeff in deriv.items():
            poly[power] = poly.get(power, 0.0) + coeff
            poly[power + 2] = poly.get(power + 2, 0.0) - coeff
    return sum(abs(c) for c in poly.values())


def default_dictionary() -> list[TestFunction]:
    """cos and sin at frequencies 1/2, 1, 2, plus tanh.

    |d^k/dx^k cos(w x)| <= w^k and likewise for sin, so the dictionary has
    closed-form derivative bounds at every order.
    """
    out: list[TestFunction] = []
    for omega in (0.5, 1.0, 2.0):
        out.append(
            TestFunction(
                f"cos{omega:g}",
                lambda x, w=omega: np.cos(w * x),
                1.0,
                lambda k, w=omega: w**k,
            )
        )
        out.append(
            TestFunction(
                f"sin{omega:g}",
                lambda x, w=omega: np.sin(w * x),
                1.0,
                lambda k, w=omega: w**k,
            )
        )
    out.append(TestFunction("tanh", np.tanh, 1.0, _tanh_deriv_bound))
    return out


@dataclass(frozen=True)
class PairRow:
    """Exact diagnostics for one unordered element pair (1-based flat ids)."""

    i: int
    j: int
    cross: bool
    cov2: float
    norms: tuple[float, ...]
    max_norm: float
    argmax_r: int


@dataclass(frozen=True)
class EmpiricalDependence:
    """Largest factorization gap over dictionary tuples, with its stderr."""

    gap: float
    stderr: float
    labels: tuple[str, ...]
    samples: int
    seed: int
    n_blocks: int
    rows: tuple[tuple[tuple[str, ...], float, float], ...]


@dataclass(frozen=True)
class IndependenceReport:
    """Exact criterion verdicts plus optional empirical diagnostics."""

    tol: float
    orders: tuple[int, ...]
    sizes: tuple[int, ...]
    cov_matrix: np.ndarray
    pairs: tuple[PairRow, ...]
    cov_pass: bool
    contraction_pass: bool
    witness_cov: float
    witness_cov_pair: tuple[int, int]
    witness_norm: float
    witness_norm_pair: tuple[int, int]
    witness_norm_r: int
    empirical: EmpiricalDependence | None = None

    CSV_COLUMNS = ("pair_i", "pair_j", "cov2", "max_contraction_norm", "r_argmax", "cross")

    def csv_rows(self) -> list[tuple]:
        return [
            (row.i, row.j, row.cov2, row.max_norm, row.argmax_r, int(row.cross))
            for row in self.pairs
        ]

    def summary(self) -> dict:
        out = {
            "orders": list(self.orders),
            "sizes": list(self.sizes),
            "tol": self.tol,
            "cov_pass": self.cov_pass,
            "contraction_pass": self.contraction_pass,
            "witness_cov": self.witness_cov,
            "witness_cov_pair": list(self.witness_cov_pair),
            "witness_contraction": self.witness_norm,
            "witness_contraction_pair": list(self.witness_norm_pair),
            "witness_contraction_r": self.witness_norm_r,
            "pairs": [
                {
                    "i": row.i,
                    "j": row.j,
                    "cross": row.cross,
                    "cov2": row.cov2,
                    "norms": list(row.norms),
                }
                for row in self.pairs
            ],
        }
        if self.empirical is not None:
            out["empirical"] = {
                "gap": self.empirical.gap,
                "stderr": self.empirical.stderr,
                "tuple": list(self.empirical.labels),
                "samples": self.empirical.samples,
                "seed": self.empirical.seed,
                "generator": montecarlo.GENERATOR_TAG,
            }
        return out


def squared_cov_matrix(vector: ChaosVector) -> np.ndarray:
    """Matrix of Cov(F_i^2, F_j^2) over flat element positions.

    The diagonal holds Var(F_i^2).  Cross-group entries feed the criterion;
    within-group entries are informational.
    """
    elements = vector.elements
    squares = [multiply(element, element) for element in elements]
    m = len(elements)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            value = squares[i].covariance(squares[j])
            out[i, j] = value
            out[j, i] = value
    return out


def _pair_rows(vector: ChaosVector, cov_matrix: np.ndarray) -> list[PairRow]:
    # Upper triangle including the diagonal, so the table carries the whole
    # matrix; only rows with cross=True feed the criterion verdict.
    elements = vector.elements
    group_of = vector.group_index
    rows = []
    for i in range(len(elements)):
        for j in range(i, len(elements)):
            norms = tuple(contraction_norms(elements[i], elements[j]))
            argmax = int(np.argmax(norms)) + 1
            rows.append(
                PairRow(
                    i=i + 1,
                    j=j + 1,
                    cross=group_of[i] != group_of[j],
                    cov2=float(cov_matrix[i, j]),
                    norms=norms,
                    max_norm=max(norms),
                    argmax_r=argmax,
                )
            )
    return rows


def criterion_check(vector: ChaosVector, tol: float = 1e-6) -> IndependenceReport:
    """Exact check of the two equivalent vanishing conditions at width tol.

    Condition one: every cross-group Cov(F_i^2, F_j^2) < tol.  Condition
    two: every cross-group ||f_i (x)_r f_j|| < tol for all r.  Witnesses
    are the largest cross-group values with the pair (and r) attaining
    them.
    """
    if vector.d < 2:
        raise ValidationError("criterion checks need at least two groups")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValidationError(f"tolerance must be positive, got {tol!r}")
    cov_matrix = squared_cov_matrix(vector)
    rows = _pair_rows(vector, cov_matrix)
    cross = [row for row in rows if row.cross]
    witness_cov = max(cross, key=lambda row: row.cov2)
    witness_norm = max(cross, key=lambda row: row.max_norm)
    return IndependenceReport(
        tol=float(tol),
        orders=vector.orders,
        sizes=vector.sizes,
        cov_matrix=cov_matrix,
        pairs=tuple(rows),
        cov_pass=all(row.cov2 < tol for row in cross),
        contraction_pass=all(row.max_norm < tol for row in cross),
        witness_cov=witness_cov.cov2,
        witness_cov_pair=(witness_cov.i, witness_cov.j),
        witness_norm=witness_norm.max_norm,
        witness_norm_pair=(witness_norm.i, witness_norm.j),
        witness_norm_r=witness_norm.argmax_r,
    )


def _group_dictionaries(
    vector: ChaosVector, functions: Sequence[TestFunction] | Sequence[Sequence[TestFunction]] | None
) -> list[list[TestFunction]]:
    if functions is None:
        shared = default_dictionary()
        return [list(shared) for _ in vector.groups]
    seq = list(functions)
    if not seq:
        raise ValidationError("the test-function dictionary is empty")
    if isinstance(seq[0], TestFunction):
        if not all(isinstance(f, TestFunction) for f in seq):
            raise ValidationError("mixed dictionary input; pass TestFunction lists")
        return [list(seq) for _ in vector.groups]
    per_group = [list(group) for group in seq]
    if len(per_group) != vector.d:
        raise ValidationError(f"need one dictionary per group ({vector.d}), got {len(per_group)}")
    if any(not group for group in per_group):
        raise ValidationError("the test-function dictionary is empty")
    return per_group


def _dependence_table(
    vector: ChaosVector,
    dictionaries: list[list[TestFunction]],
    samples: int,
    seed: int,
    block_size: int | None,
) -> tuple[list[tuple[tuple[int, ...], float, float]], int]:
    """Per-tuple (index tuple, signed gap, stderr) via full-size block means."""
    if not isinstance(samples, int) or samples < MIN_SAMPLES:
        raise ValidationError(f"samples must be an integer >= {MIN_SAMPLES}, got {samples!r}")
    batch = montecarlo.sample(seed, vector.space.dimension, samples, block_size)
    if batch.n_full_blocks < montecarlo.MIN_BLOCKS:
        raise ValidationError(
            f"need at least {montecarlo.MIN_BLOCKS} full blocks, got {batch.n_full_blocks}"
        )
    if batch.block_size < 2:
        # the within-block mean of a product over a single sample equals the
        # product itself, making the gap statistic identically zero
        raise ValidationError("the gap statistic needs a block size of at least 2")
    combos = list(itertools.product(*[range(len(d)) for d in dictionaries]))
    stats: list[list[float]] = [[] for _ in combos]
    for block in batch.iter_blocks():
        if block.shape[0] != batch.block_size:
            continue
        group_values = []
        for g, group in enumerate(vector.groups):
            element_values = [evaluate(element, block) for element in group]
            per_function = []
            for function in dictionaries[g]:
                prod = function.fn(element_values[0])
                for values in element_values[1:]:
                    prod = prod * function.fn(values)
                per_function.append(prod)
            group_values.append(per_function)
        group_means = [[float(values.mean()) for values in per_function] for per_function in group_values]
        for t, combo in enumerate(combos):
            prod = group_values[0][combo[0]]
            for g in range(1, len(combo)):
                prod = prod * group_values[g][combo[g]]
            mean_prod = float(prod.mean())
            mean_factored = 1.0
            for g, k in enumerate(combo):
                mean_factored *= group_means[g][k]
            stats[t].append(mean_prod - mean_factored)
    table = []
    n_blocks = len(stats[0])
    for combo, block_stats in zip(combos, stats):
        arr = np.asarray(block_stats)
        gap = float(arr.mean())
        stderr = float(arr.std(ddof=1) / math.sqrt(n_blocks))
        table.append((combo, gap, stderr))
    return table, n_blocks


def empirical_dependence(
    vector: ChaosVector,
    functions: Sequence[TestFunction] | Sequence[Sequence[TestFunction]] | None = None,
    samples: int = 100_000,
    seed: int = 0,
    block_size: int | None = None,
) -> EmpiricalDependence:
    """Largest empirical factorization gap over dictionary tuples.

    For each tuple of test functions (one per group, applied coordinatewise
    and multiplied within a group) the gap |E prod - prod E| is estimated
    by block means over full-size blocks, and the tuple with the largest
    absolute gap is reported together with its standard error.

    Requires samples >= MIN_SAMPLES; estimates below that floor are noise
    and are rejected rather than returned.
    """
    if vector.d < 2:
        raise ValidationError("dependence gaps need at least two groups")
    if not isinstance(samples, int) or samples < MIN_SAMPLES:
        raise ValidationError(f"samples must be an integer >= {MIN_SAMPLES}, got {samples!r}")
    dictionaries = _group_dictionaries(vector, functions)
    table, n_blocks = _dependence_table(vector, dictionaries, samples, seed, block_size)
    rows = []
    best = None
    for combo, gap, stderr in table:
        labels = tuple(dictionaries[g][k].name for g, k in enumerate(combo))
        rows.append((labels, abs(gap), stderr))
        if best is None or abs(gap) > best[1]:
            best = (labels, abs(gap), stderr)
    return EmpiricalDependence(
        gap=best[1],
        stderr=best[2],
        labels=best[0],
        samples=samples,
        seed=seed,
        n_blocks=n_blocks,
        rows=tuple(rows),
    )


def bound_ratio(
    vector: ChaosVector,
    functions: Sequence[TestFunction] | Sequence[Sequence[TestFunction]] | None = None,
    samples: int = 100_000,
    seed: int = 0,
    block_size: int | None = None,
) -> float:
    """Empirical gap over its theoretical budget, maximized over tuples.

    The budget for a tuple is ||psi_d'||_inf times the product over the
    other groups of the dictionary norms at order q_1, times the sum over
    cross-group element pairs of sqrt(Cov(F_i^2, F_j^2)).  The square root
    is the scale on which the covariance controls contraction norms (see
    the module docstring), so boundedness of this ratio along a family is
    the content of the existential constant in the factorization bound.
    Used only to check boundedness; the value itself estimates no sharp
    constant.
    """
    if vector.d < 2:
        raise ValidationError("the ratio probe needs at least two groups")
    if not isinstance(samples, int) or samples < MIN_SAMPLES:
        raise ValidationError(f"samples must be an integer >= {MIN_SAMPLES}, got {samples!r}")
    dictionaries = _group_dictionaries(vector, functions)
    cov_root_sum = _cross_cov_root_sum(vector, squared_cov_matrix(vector))
    table, _ = _dependence_table(vector, dictionaries, samples, seed, block_size)
    return _max_ratio(vector, dictionaries, table, cov_root_sum)


def _cross_cov_root_sum(vector: ChaosVector, cov_matrix: np.ndarray) -> float:
    group_of = vector.group_index
    total = 0.0
    m = len(group_of)
    for i in range(m):
        for j in range(i + 1, m):
            if group_of[i] == group_of[j]:
                continue
            value = cov_matrix[i, j]
            if value <= 0.0:
                raise DegenerateInputError(
                    f"cross pair ({i + 1}, {j + 1}) has squared covariance {value!r}; "
                    "the ratio is undefined on exactly independent input"
                )
            total += math.sqrt(value)
    return total


def _max_ratio(
    vector: ChaosVector,
    dictionaries: list[list[TestFunction]],
    table: list[tuple[tuple[int, ...], float, float]],
    cov_root_sum: float,
) -> float:
    q1 = vector.orders[0]
    best = 0.0
    for combo, gap, _ in table:
        last = dictionaries[-1][combo[-1]]
        deriv_last = last.deriv_bound(1) * last.sup ** (vector.sizes[-1] - 1)
        budget = deriv_last * cov_root_sum
        for g in range(vector.d - 1):
            budget *= dictionaries[g][combo[g]].norm(q1) ** vector.sizes[g]
        best = max(best, abs(gap) / budget)
    return best
