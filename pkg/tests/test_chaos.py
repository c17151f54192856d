"""Integrals, products and squared covariances against independent oracles.

Three oracles with no code shared with the implementation:

1. Gauss-Hermite tensor-grid quadrature, exact for polynomials, validates
   the evaluation map and the isometry E[I_p(f) I_q(g)] = delta_pq p!<f,g>.
2. The pathwise identity evaluate(multiply(F,G), x) = evaluate(F,x) *
   evaluate(G,x) validates the multiplication formula at every point, a
   much stronger statement than matching a handful of moments.
3. Closed-form Gaussian moments ((2k-1)!!, 1 + 2 rho^2, 3 rho) validate the
   brute-force Isserlis-style oracle, which then cross-checks cov_squares.
"""

import math

import numpy as np
import pytest

from wienerchaos.chaos import (
    ChaosElement,
    ChaosExpansion,
    contraction_norms,
    cov_squares,
    evaluate,
    isserlis_moment,
    multiply,
    normalize,
    variance,
)
from wienerchaos.exceptions import DegenerateInputError, ResourceLimitError, ValidationError
from wienerchaos.tensor import HilbertSpace, SymmetricTensor


def gauss_grid(dim, nodes=10):
    """Tensor product Gauss-Hermite rule as (points, weights) for E[.]."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2 * math.pi)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.ones(points.shape[0])
    for axis, grid in enumerate(np.meshgrid(*([w] * dim), indexing="ij")):
        weights *= grid.ravel()
    return points, weights


def rand_element(rng, space, order, nnz=3):
    entries = {}
    for _ in range(nnz):
        idx = tuple(sorted(int(i) for i in rng.integers(1, space.dimension + 1, size=order)))
        entries[idx] = float(rng.normal())
    return ChaosElement(SymmetricTensor(space, order, entries))


def test_evaluate_explicit_formulas():
    sp = HilbertSpace(3)
    x = np.random.default_rng(12).normal(size=(100, 3))
    f1 = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
    assert np.allclose(evaluate(f1, x), x[:, 0], atol=1e-14)
    f2 = ChaosElement(SymmetricTensor(sp, 2, {(1, 1): 1 / math.sqrt(2)}))
    assert np.allclose(evaluate(f2, x), (x[:, 0] ** 2 - 1) / math.sqrt(2), atol=1e-12)
    f12 = ChaosElement(SymmetricTensor(sp, 2, {(1, 2): 0.7}))
    assert np.allclose(evaluate(f12, x), 2 * 0.7 * x[:, 0] * x[:, 1], atol=1e-12)
    f3 = ChaosElement(SymmetricTensor(sp, 3, {(2, 2, 2): 0.5}))
    expected = 6 * 0.5 * (x[:, 1] ** 3 - 3 * x[:, 1]) / 6
    assert np.allclose(evaluate(f3, x), expected, atol=1e-12)


def test_evaluate_single_point_returns_float():
    sp = HilbertSpace(2)
    el = ChaosElement(SymmetricTensor(sp, 1, {(2,): 2.0}))
    value = evaluate(el, np.array([0.5, -1.0]))
    assert isinstance(value, float)
    assert abs(value - (-2.0)) < 1e-14


def test_evaluate_rejects_wrong_width():
    sp = HilbertSpace(2)
    el = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
    with pytest.raises(ValidationError):
        evaluate(el, np.zeros((5, 3)))


def test_isometry_by_quadrature():
    rng = np.random.default_rng(13)
    for trial in range(25):
        dim = int(rng.integers(1, 4))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        sp = HilbertSpace(dim)
        F = rand_element(rng, sp, p)
        G = rand_element(rng, sp, q)
        points, weights = gauss_grid(dim)
        value = float(np.sum(weights * evaluate(F, points) * evaluate(G, points)))
        from wienerchaos.tensor import inner

        expected = math.factorial(p) * inner(F.kernel, G.kernel) if p == q else 0.0
        assert abs(value - expected) < 1e-9, (dim, p, q)


def test_centering_by_quadrature():
    rng = np.random.default_rng(14)
    for trial in range(10):
        dim = int(rng.integers(1, 4))
        F = rand_element(rng, HilbertSpace(dim), int(rng.integers(1, 4)))
        points, weights = gauss_grid(dim)
        assert abs(float(np.sum(weights * evaluate(F, points)))) < 1e-10


def test_product_formula_pathwise():
    # multiply() must reproduce the pointwise product exactly, not just in
    # distribution: evaluate both sides on random inputs.
    rng = np.random.default_rng(15)
    for trial in range(30):
        dim = int(rng.integers(1, 4))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        sp = HilbertSpace(dim)
        F = rand_element(rng, sp, p)
        G = rand_element(rng, sp, q)
        product = multiply(F, G)
        x = rng.normal(size=(64, dim))
        left = evaluate(F, x) * evaluate(G, x)
        right = evaluate(product, x)
        assert np.allclose(left, right, rtol=1e-9, atol=1e-9), (dim, p, q)


def test_multiply_orders_and_expectation():
    sp = HilbertSpace(2)
    F = ChaosElement(SymmetricTensor(sp, 2, {(1, 2): 1.0}))
    product = multiply(F, F)
    assert set(product.components) <= {0, 2, 4}
    assert abs(product.expectation() - variance(F)) < 1e-14


def test_expansion_validation():
    sp = HilbertSpace(2)
    t1 = SymmetricTensor(sp, 1, {(1,): 1.0})
    with pytest.raises(ValidationError):
        ChaosExpansion(sp, {2: t1})
    with pytest.raises(ValidationError):
        ChaosExpansion(HilbertSpace(3), {1: t1})


def test_expansion_covariance_orthogonality():
    # Orders never mix: covariance sums k!<h_k, g_k> over shared orders.
    sp = HilbertSpace(2)
    e1 = ChaosExpansion(sp, {1: SymmetricTensor(sp, 1, {(1,): 2.0})})
    e2 = ChaosExpansion(sp, {2: SymmetricTensor(sp, 2, {(1, 1): 3.0})})
    assert e1.covariance(e2) == 0.0
    assert abs(e1.variance() - 4.0) < 1e-14
    both = ChaosExpansion(sp, {1: SymmetricTensor(sp, 1, {(1,): 2.0}),
                               2: SymmetricTensor(sp, 2, {(1, 1): 3.0})})
    assert abs(both.covariance(e2) - 2 * 9.0) < 1e-14


def test_isserlis_univariate_moments():
    sp = HilbertSpace(1)
    Z = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
    double_factorial = {2: 1, 4: 3, 6: 15, 8: 105}
    for power, expected in double_factorial.items():
        assert abs(isserlis_moment([Z] * power) - expected) < 1e-10
        assert isserlis_moment([Z] * (power - 1)) == 0.0


def test_isserlis_bivariate_closed_forms():
    sp = HilbertSpace(2)
    for rho in (0.0, 0.25, 0.8):
        X = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
        entries = {(1,): rho}
        if rho < 1.0:
            entries[(2,)] = math.sqrt(1 - rho**2)
        Y = ChaosElement(SymmetricTensor(sp, 1, entries))
        assert abs(isserlis_moment([X, X, Y, Y]) - (1 + 2 * rho**2)) < 1e-12
        assert abs(isserlis_moment([X, X, X, Y]) - 3 * rho) < 1e-12


def test_isserlis_matches_quadrature():
    rng = np.random.default_rng(16)
    for trial in range(15):
        dim = int(rng.integers(1, 4))
        sp = HilbertSpace(dim)
        elements = [rand_element(rng, sp, int(rng.integers(1, 3))) for _ in range(3)]
        points, weights = gauss_grid(dim)
        product = np.ones(points.shape[0])
        for element in elements:
            product = product * evaluate(element, points)
        expected = float(np.sum(weights * product))
        assert abs(isserlis_moment(elements) - expected) < 1e-9


def test_isserlis_guards():
    sp = HilbertSpace(7)
    big_dim = ChaosElement(SymmetricTensor(sp, 1, {(7,): 1.0}))
    with pytest.raises(ResourceLimitError):
        isserlis_moment([big_dim, big_dim])
    sp2 = HilbertSpace(2)
    el = ChaosElement(SymmetricTensor(sp2, 3, {(1, 1, 1): 1.0}))
    with pytest.raises(ResourceLimitError):
        isserlis_moment([el] * 5)  # total order 15 > 12


def test_cov_squares_known_values():
    # Var(Z^2) = 2 for the first chaos; the standardized one-coordinate
    # second chaos F = (x^2 - 1)/sqrt(2) has Var(F^2) = 14 and E[F^4] = 15.
    sp = HilbertSpace(2)
    Z = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
    assert abs(cov_squares(Z, Z) - 2.0) < 1e-12
    F = ChaosElement(SymmetricTensor(sp, 2, {(1, 1): 1 / math.sqrt(2)}))
    assert abs(variance(F) - 1.0) < 1e-14
    assert abs(cov_squares(F, F) - 14.0) < 1e-12
    assert abs(isserlis_moment([F, F, F, F]) - 15.0) < 1e-10


def test_cov_squares_correlated_gaussians():
    sp = HilbertSpace(2)
    for rho in (0.1, 0.5, 0.9):
        X = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
        Y = ChaosElement(SymmetricTensor(sp, 1, {(1,): rho, (2,): math.sqrt(1 - rho**2)}))
        assert abs(cov_squares(X, Y) - 2 * rho**2) < 1e-12


def test_cov_squares_matches_isserlis():
    rng = np.random.default_rng(17)
    for trial in range(60):
        dim = int(rng.integers(2, 5))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        sp = HilbertSpace(dim)
        try:
            F = normalize(rand_element(rng, sp, p))
            G = normalize(rand_element(rng, sp, q))
        except DegenerateInputError:
            continue
        expected = isserlis_moment([F, F, G, G]) - isserlis_moment([F, F]) * isserlis_moment([G, G])
        assert abs(cov_squares(F, G) - expected) < 1e-9


def test_squared_contraction_inequality():
    # max_r ||f (x)_r g||^2 <= Cov(F^2, G^2) on standardized pairs.  The
    # unsquared comparison fails (see the counterexample below), so the
    # squared form is the invariant the code relies on.
    rng = np.random.default_rng(18)
    for trial in range(150):
        dim = int(rng.integers(2, 5))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        sp = HilbertSpace(dim)
        try:
            F = normalize(rand_element(rng, sp, p))
            G = normalize(rand_element(rng, sp, q))
        except DegenerateInputError:
            continue
        top = max(contraction_norms(F, G))
        assert top**2 <= cov_squares(F, G) + 1e-9


def test_unsquared_comparison_has_counterexample():
    # Correlated Gaussians at rho = 0.1: max contraction norm 0.1, squared
    # covariance 0.02.  The norm itself is NOT dominated; its square is.
    sp = HilbertSpace(2)
    rho = 0.1
    X = ChaosElement(SymmetricTensor(sp, 1, {(1,): 1.0}))
    Y = ChaosElement(SymmetricTensor(sp, 1, {(1,): rho, (2,): math.sqrt(1 - rho**2)}))
    top = max(contraction_norms(X, Y))
    cq = cov_squares(X, Y)
    assert top > cq
    assert top**2 <= cq + 1e-15


def test_cov_squares_nonnegative():
    rng = np.random.default_rng(19)
    for trial in range(80):
        dim = int(rng.integers(2, 5))
        sp = HilbertSpace(dim)
        F = rand_element(rng, sp, int(rng.integers(1, 4)))
        G = rand_element(rng, sp, int(rng.integers(1, 4)))
        assert cov_squares(F, G) >= -1e-12


def test_contraction_norms_length_and_zero_case():
    sp = HilbertSpace(4)
    F = ChaosElement(SymmetricTensor(sp, 3, {(1, 1, 2): 1.0}))
    G = ChaosElement(SymmetricTensor(sp, 2, {(3, 4): 1.0}))
    norms = contraction_norms(F, G)
    assert len(norms) == 2
    assert norms == [0.0, 0.0]


def test_variance_and_normalize():
    sp = HilbertSpace(2)
    F = ChaosElement(SymmetricTensor(sp, 2, {(1, 2): 3.0}))
    # Var = q! ||f||^2 = 2 * (2 * 9)
    assert abs(variance(F) - 36.0) < 1e-12
    unit = normalize(F)
    assert abs(variance(unit) - 1.0) < 1e-12
    zero = ChaosElement(SymmetricTensor(sp, 1, {(1,): 0.5})).kernel.scaled(0.0)
    with pytest.raises(DegenerateInputError):
        normalize(ChaosElement(zero))


def test_element_rejects_order_zero():
    sp = HilbertSpace(2)
    with pytest.raises(ValidationError):
        ChaosElement(SymmetricTensor(sp, 0, {(): 1.0}))
