"""Kernel families: exact witness formulas, and the file formats.

For the overlap families the shared coordinate carries weight delta in
every element, the element bodies are disjoint across groups, and every
cross contraction reduces to the single shared term:

    ||f (x)_r g|| = delta_f delta_g / sqrt(q_f! q_g!)   for every r,

with Cov(F^2, G^2) = K delta^4 where K depends only on the order pair
(K = 14 for (2,2): verified here against the Isserlis oracle at small n).
With delta_n = theta n^(-1/4) these give exact -1/2 and -1 log-log slopes.
"""

import json
import math
import os
import warnings

import numpy as np
import pytest

import wienerchaos as wc
from wienerchaos.chaos import isserlis_moment
from wienerchaos.exceptions import (
    DegenerateInputError,
    InvalidKernelError,
    ValidationError,
)
from wienerchaos.sequences import (
    FAMILIES,
    kernel_document,
    load_raw,
    raw_document,
    save_raw,
    vector_document,
)
from wienerchaos.tensor import HilbertSpace, RawTensor, SymmetricTensor


def cross_witnesses(vector):
    report = wc.criterion_check(vector)
    return report.witness_norm, report.witness_cov


def test_family_spec_validation():
    with pytest.raises(ValidationError):
        wc.FamilySpec("unknown", (2, 2), (1, 1))
    with pytest.raises(ValidationError):
        wc.FamilySpec("disjoint", (2,), (1,))
    with pytest.raises(ValidationError):
        wc.FamilySpec("disjoint", (2, 2), (1,))
    with pytest.raises(ValidationError):
        wc.FamilySpec("disjoint", (1, 2), (1, 1))  # orders must not increase
    with pytest.raises(ValidationError):
        wc.FamilySpec("disjoint", (2, 2), (1, 0))
    with pytest.raises(ValidationError):
        wc.FamilySpec("disjoint", (2, 2), (1, 1), theta=1.5)
    with pytest.raises(ValidationError):
        wc.FamilySpec("mixed_orders", (2, 2), (1, 1))  # needs q1 > q2
    with pytest.raises(ValidationError):
        wc.generate(wc.FamilySpec("disjoint", (2, 2), (1, 1)), 0)
    with pytest.raises(ValidationError):
        wc.generate(wc.FamilySpec("disjoint", (2, 2), (3, 1)), 2)  # n < group size
    assert FAMILIES == ("disjoint", "vanishing_overlap", "persistent_overlap", "mixed_orders")


def test_dimension_growth():
    spec = wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1))
    assert wc.generate(spec, 4).space.dimension == 9  # d*n + 1
    assert wc.generate(spec, 16).space.dimension == 33
    persistent = wc.FamilySpec("persistent_overlap", (2, 2), (2, 3))
    assert wc.generate(persistent, 4).space.dimension == 6  # sum sizes + 1
    assert wc.generate(persistent, 64).space.dimension == 6


def test_all_families_standardized():
    for family in FAMILIES:
        orders = (3, 2) if family == "mixed_orders" else (2, 2)
        spec = wc.FamilySpec(family, orders, (2, 1), theta=0.7)
        v = wc.generate(spec, 8)
        for element in v.elements:
            assert abs(wc.variance(element) - 1.0) < 1e-12, family


def test_disjoint_crosses_are_bitwise_zero():
    v = wc.generate(wc.FamilySpec("disjoint", (2, 2), (2, 2)), 8)
    norm, cov = cross_witnesses(v)
    assert norm == 0.0 and cov == 0.0


def test_vanishing_overlap_exact_witnesses():
    theta = 0.5
    spec = wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1), theta=theta)
    for n in (4, 16, 64):
        delta2 = theta**2 / math.sqrt(n)
        norm, cov = cross_witnesses(wc.generate(spec, n))
        assert abs(norm - delta2 / 2) < 1e-14, n
        assert abs(cov - 14 * delta2**2) < 1e-12, n


def test_exact_log_log_slopes():
    spec = wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1), theta=0.5)
    ns = (4, 16, 64, 256)
    norms, covs = zip(*(cross_witnesses(wc.generate(spec, n)) for n in ns))
    slope_norm = np.polyfit(np.log(ns), np.log(norms), 1)[0]
    slope_cov = np.polyfit(np.log(ns), np.log(covs), 1)[0]
    assert abs(slope_norm + 0.5) < 1e-10
    assert abs(slope_cov + 1.0) < 1e-10


def test_persistent_overlap_constant_witnesses():
    spec = wc.FamilySpec("persistent_overlap", (2, 2), (1, 1), theta=0.5)
    base_norm, base_cov = cross_witnesses(wc.generate(spec, 1))
    assert abs(base_norm - 0.5**2 / 2) < 1e-14
    assert abs(base_cov - 14 * 0.5**4) < 1e-12
    for n in (4, 32, 256):
        norm, cov = cross_witnesses(wc.generate(spec, n))
        assert norm == base_norm and cov == base_cov


def test_mixed_orders_witnesses():
    theta = 0.5
    spec = wc.FamilySpec("mixed_orders", (3, 2), (1, 1), theta=theta)
    for n in (4, 16):
        delta2 = theta**2 / math.sqrt(n)
        norm, cov = cross_witnesses(wc.generate(spec, n))
        assert abs(norm - delta2 / math.sqrt(12)) < 1e-14
        assert abs(cov - 30 * delta2**2) < 1e-12


def test_contraction_norms_equal_for_all_r():
    # single shared coordinate: every pairing depth sees the same mass
    v = wc.generate(wc.FamilySpec("vanishing_overlap", (3, 3), (1, 1), theta=0.4), 4)
    report = wc.criterion_check(v)
    cross = [row for row in report.pairs if row.cross][0]
    assert max(cross.norms) - min(cross.norms) < 1e-15


def test_family_covariance_against_isserlis_oracle():
    # oracle guard caps dimension at 6, so compare at n = 2 (N = 5)
    for family, orders, expected_K in (
        ("vanishing_overlap", (2, 2), 14.0),
        ("mixed_orders", (3, 2), 30.0),
    ):
        spec = wc.FamilySpec(family, orders, (1, 1), theta=0.6)
        v = wc.generate(spec, 2)
        F, G = v.elements
        exact = wc.cov_squares(F, G)
        brute = isserlis_moment([F, F, G, G]) - isserlis_moment([F, F]) * isserlis_moment([G, G])
        assert abs(exact - brute) < 1e-10
        delta2 = 0.6**2 / math.sqrt(2)
        assert abs(exact - expected_K * delta2**2) < 1e-12


def test_theta_zero_reduces_to_disjoint():
    v = wc.generate(wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1), theta=0.0), 4)
    norm, cov = cross_witnesses(v)
    assert norm == 0.0 and cov == 0.0


def test_theta_one_at_n_one_is_pure_shared():
    v = wc.generate(wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1), theta=1.0), 1)
    for element in v.elements:
        assert set(element.kernel.entries) == {(3, 3)}
        assert abs(wc.variance(element) - 1.0) < 1e-14


def test_generate_slices_block_coordinates():
    v = wc.generate(wc.FamilySpec("disjoint", (2, 2), (2, 2)), 6)
    # group 1 occupies coordinates 1..6, group 2 occupies 7..12, three per element
    supports = [sorted({i for idx in el.kernel.entries for i in idx}) for el in v.elements]
    assert supports[0] == [1, 2, 3]
    assert supports[1] == [4, 5, 6]
    assert supports[2] == [7, 8, 9]
    assert supports[3] == [10, 11, 12]


# -- file formats --


def test_kernel_round_trip_bit_exact(tmp_path):
    sp = HilbertSpace(5)
    k = SymmetricTensor(sp, 3, {(1, 2, 5): -0.12345678901234567, (2, 2, 2): 1 / 3})
    path = os.path.join(tmp_path, "k.json")
    wc.save_kernel(k, path)
    back = wc.load_kernel(path)
    assert back == k
    assert list(back.entries.values()) == list(k.entries.values())
    # canonical text is reproducible
    wc.save_kernel(back, os.path.join(tmp_path, "k2.json"))
    assert open(path).read() == open(os.path.join(tmp_path, "k2.json")).read()


def test_kernel_document_is_plain_json():
    sp = HilbertSpace(2)
    k = SymmetricTensor(sp, 2, {(1, 2): 0.25})
    doc = json.loads(kernel_document(k))
    assert doc["dimension"] == 2
    assert doc["order"] == 2
    assert doc["entries"] == [{"index": [1, 2], "value": 0.25}]


def test_empty_kernel_document():
    sp = HilbertSpace(2)
    k = SymmetricTensor(sp, 2, {})
    assert wc.load_kernel(json.loads(kernel_document(k))) == k


def test_load_kernel_error_cases(tmp_path):
    def rejects(document, fragment):
        with pytest.raises(InvalidKernelError) as err:
            wc.load_kernel(document)
        assert fragment in str(err.value), str(err.value)

    rejects({"order": 1, "entries": []}, "dimension")
    rejects({"dimension": 2, "entries": []}, "order")
    rejects({"dimension": 2, "order": 1}, "entries")
    rejects({"dimension": 0, "order": 1, "entries": []}, "dimension")
    rejects({"dimension": 2, "order": -1, "entries": []}, "order")
    rejects({"dimension": 2, "order": 1, "entries": {}}, "list")
    rejects({"dimension": 2, "order": 1, "entries": [{"index": [1]}]}, "entry 1")
    rejects(
        {"dimension": 2, "order": 2, "entries": [{"index": [2, 1], "value": 1.0}]},
        "not sorted ascending",
    )
    rejects(
        {"dimension": 2, "order": 2, "entries": [{"index": [1, 3], "value": 1.0}]},
        "range 1..2",
    )
    rejects(
        {"dimension": 2, "order": 2, "entries": [{"index": [1], "value": 1.0}]},
        "length 1",
    )
    rejects(
        {"dimension": 2, "order": 1, "entries": [{"index": [1], "value": "x"}]},
        "finite",
    )
    rejects(
        {
            "dimension": 2,
            "order": 1,
            "entries": [{"index": [1], "value": 1.0}, {"index": [1], "value": 2.0}],
        },
        "duplicate",
    )
    # file-level errors carry the path
    missing = os.path.join(tmp_path, "missing.json")
    with pytest.raises(InvalidKernelError) as err:
        wc.load_kernel(missing)
    assert "missing.json" in str(err.value)
    bad = os.path.join(tmp_path, "bad.json")
    with open(bad, "w") as handle:
        handle.write("{not json")
    with pytest.raises(InvalidKernelError) as err:
        wc.load_kernel(bad)
    assert "bad.json" in str(err.value)


def test_raw_round_trip(tmp_path):
    sp = HilbertSpace(3)
    raw = RawTensor(sp, 2, 1, {((1, 2), (3,)): 0.5, ((1, 1), (1,)): -2.0})
    path = os.path.join(tmp_path, "raw.json")
    save_raw(raw, path)
    back = load_raw(path)
    assert back == raw
    assert raw_document(back) == raw_document(raw)


def test_load_raw_error_cases():
    base = {"dimension": 2, "left_order": 1, "right_order": 1}
    with pytest.raises(InvalidKernelError):
        load_raw({**base, "entries": [{"left": [1], "right": [2, 1], "value": 1.0}]})
    with pytest.raises(InvalidKernelError):
        load_raw({**base, "entries": [{"left": [3], "right": [1], "value": 1.0}]})
    with pytest.raises(InvalidKernelError):
        load_raw(
            {
                **base,
                "entries": [
                    {"left": [1], "right": [2], "value": 1.0},
                    {"left": [1], "right": [2], "value": 2.0},
                ],
            }
        )
    with pytest.raises(InvalidKernelError):
        load_raw({"dimension": 2, "left_order": 1, "entries": []})


def test_vector_round_trip(tmp_path):
    v = wc.generate(wc.FamilySpec("vanishing_overlap", (3, 2), (2, 1), theta=0.3), 4)
    path = os.path.join(tmp_path, "v.json")
    wc.save_vector(v, path)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # round trip must not need rescaling
        back = wc.load_vector(path)
    assert back.orders == v.orders and back.sizes == v.sizes
    for a, b in zip(v.elements, back.elements):
        assert a.kernel.entries == b.kernel.entries
    # canonical text reproducible
    assert vector_document(back) == vector_document(v)


def test_vector_manifest_with_element_paths(tmp_path):
    sp = HilbertSpace(2)
    wc.save_kernel(SymmetricTensor(sp, 1, {(1,): 1.0}), os.path.join(tmp_path, "a.json"))
    wc.save_kernel(SymmetricTensor(sp, 1, {(2,): 1.0}), os.path.join(tmp_path, "b.json"))
    manifest = {
        "dimension": 2,
        "groups": [
            {"order": 1, "elements": ["a.json"]},
            {"order": 1, "elements": ["b.json"]},
        ],
    }
    path = os.path.join(tmp_path, "v.json")
    with open(path, "w") as handle:
        json.dump(manifest, handle)
    v = wc.load_vector(path)
    assert v.d == 2
    assert v.elements[0].kernel.entries == {(1,): 1.0}


def test_load_vector_rescales_with_warning():
    doc = {
        "groups": [
            {"order": 1, "elements": [{"dimension": 2, "order": 1, "entries": [{"index": [1], "value": 2.0}]}]},
            {"order": 1, "elements": [{"dimension": 2, "order": 1, "entries": [{"index": [2], "value": 1.0}]}]},
        ]
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        v = wc.load_vector(doc)
    messages = [str(w.message) for w in caught]
    assert any("rescaled" in m and "group 1, element 1" in m for m in messages)
    assert abs(wc.variance(v.elements[0]) - 1.0) < 1e-14


def test_load_vector_error_cases(tmp_path):
    def rejects(document, fragment):
        with pytest.raises(InvalidKernelError) as err:
            wc.load_vector(document)
        assert fragment in str(err.value), str(err.value)

    rejects({}, "groups")
    rejects({"groups": []}, "non-empty")
    rejects({"groups": [{"elements": []}]}, "order")
    rejects({"groups": [{"order": 1, "elements": []}]}, "non-empty")
    rejects({"groups": [{"order": 1, "elements": [7]}]}, "path or an inline kernel")
    rejects(
        {
            "dimension": 3,
            "groups": [
                {"order": 1, "elements": [{"dimension": 2, "order": 1, "entries": [{"index": [1], "value": 1.0}]}]}
            ],
        },
        "does not match manifest",
    )
    rejects(
        {
            "groups": [
                {"order": 2, "elements": [{"dimension": 2, "order": 1, "entries": [{"index": [1], "value": 1.0}]}]}
            ]
        },
        "does not match group order",
    )
    zero = {
        "groups": [
            {"order": 1, "elements": [{"dimension": 2, "order": 1, "entries": []}]},
            {"order": 1, "elements": [{"dimension": 2, "order": 1, "entries": [{"index": [2], "value": 1.0}]}]},
        ]
    }
    with pytest.raises(DegenerateInputError):
        wc.load_vector(zero)


def test_atomic_write_leaves_no_temp_file(tmp_path):
    sp = HilbertSpace(2)
    path = os.path.join(tmp_path, "k.json")
    wc.save_kernel(SymmetricTensor(sp, 1, {(1,): 1.0}), path)
    assert os.listdir(tmp_path) == ["k.json"]


def test_seventeen_digit_floats_survive():
    values = [1 / 3, math.pi, 1e-300, -math.sqrt(2), 5.0e-324]
    sp = HilbertSpace(1)
    for value in values:
        k = SymmetricTensor(sp, 1, {(1,): value})
        back = wc.load_kernel(json.loads(kernel_document(k)))
        assert back.entries[(1,)] == value, value
