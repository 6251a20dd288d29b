import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qg3.errors import InvalidIndexError, InvalidLabelError, ValidationError
from qg3.tensor_basis import (
    BasisLabel,
    CoefficientVector,
    basis_size,
    bracket,
    build_operator,
    commutator_expand,
    decode,
    decode_array,
    encode,
    encode_array,
    enumerate_basis,
    gell_mann,
    label_norms2,
    verify_bracket_closure,
)


def test_gell_mann_hermitian_traceless_orthogonal():
    mats = [gell_mann(k) for k in range(1, 9)]
    for a, A in enumerate(mats):
        assert np.allclose(A, A.conj().T)
        assert abs(np.trace(A)) < 1e-15
        for b, B in enumerate(mats):
            assert np.trace(A @ B) == pytest.approx(2.0 if a == b else 0.0, abs=1e-14)


def test_lambda8_operator_norm():
    assert np.linalg.norm(gell_mann(8), 2) == pytest.approx(2 / np.sqrt(3), abs=1e-12)


@pytest.mark.parametrize("k", [0, 9, -1])
def test_gell_mann_rejects_bad_index(k):
    with pytest.raises(InvalidIndexError):
        gell_mann(k)


@pytest.mark.parametrize(
    "n,sites,gm",
    [(2, (2, 1), (1, 1)), (2, (1, 1), (1, 2)), (2, (3,), (1,)), (2, (1,), (1, 2)), (2, (), ())],
)
def test_label_validation(n, sites, gm):
    with pytest.raises((InvalidLabelError, InvalidIndexError)):
        BasisLabel(n, sites, gm)


def test_label_gm_out_of_range():
    with pytest.raises(InvalidIndexError):
        BasisLabel(1, (1,), (9,))


@pytest.mark.parametrize("n,total,low", [(1, 8, 8), (2, 80, 80), (3, 728, 216), (4, 6560, 416)])
def test_counts(n, total, low):
    assert len(enumerate_basis(n)) == total == 9**n - 1 == basis_size(n)
    assert len(enumerate_basis(n, 2)) == low == basis_size(n, 2)
    assert basis_size(n, 2) == 32 * n * n - 24 * n


def test_enumeration_sorted_unique_and_json_roundtrip():
    labels = enumerate_basis(3)
    assert labels == sorted(labels)
    assert len(set(labels)) == len(labels)
    for lab in labels[::37]:
        assert BasisLabel.from_json(lab.to_json()) == lab
        assert BasisLabel.from_digits(lab.digits) == lab


def test_build_operator_matches_explicit_kron():
    lab = BasisLabel(3, (1, 3), (4, 8))
    expected = np.kron(np.kron(gell_mann(4), np.eye(3)), gell_mann(8))
    assert np.allclose(build_operator(lab), expected)


def test_trace_norm_depends_on_body_weight():
    # tr(Lambda^2) = 2^s 3^(n-s) for an s-body product
    n = 3
    for lab in enumerate_basis(n)[::11]:
        M = build_operator(lab)
        assert np.trace(M @ M).real == pytest.approx(2**lab.weight * 3 ** (n - lab.weight))
    assert set(label_norms2(n)) == {18.0, 12.0, 8.0}


def test_basis_is_trace_orthogonal_n2():
    ops = np.array([build_operator(lab) for lab in enumerate_basis(2)])
    gram = np.einsum("aij,bji->ab", ops, ops).real
    assert np.allclose(gram, np.diag(np.diag(gram)), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_encode_decode_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    c = CoefficientVector.from_array(n, rng.standard_normal(9**n - 1))
    H = decode(c)
    assert np.allclose(H, H.conj().T)
    assert abs(np.trace(H)) < 1e-12
    back = encode(H)
    assert np.allclose(back.to_array(), c.to_array(), atol=1e-12)


def test_encode_rejects_non_hermitian_and_trace():
    H = decode(CoefficientVector.single(BasisLabel(1, (1,), (1,))))
    bad = H.copy()
    bad[0, 1] += 1e-3
    with pytest.raises(ValidationError) as exc:
        encode(bad)
    assert exc.value.violation == pytest.approx(1e-3, rel=1e-6)
    with pytest.raises(ValidationError):
        encode(H + np.eye(3))


def test_batched_decode_encode():
    rng = np.random.default_rng(3)
    arr = rng.standard_normal((4, 80))
    ops = decode_array(arr, 2)
    assert ops.shape == (4, 9, 9)
    assert np.allclose(np.array([encode_array(o, 2) for o in ops]), arr)


def _random_pairs(n, count, seed):
    labels = enumerate_basis(n)
    rng = np.random.default_rng(seed)
    return [(labels[i], labels[j]) for i, j in rng.integers(len(labels), size=(count, 2))]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_commutator_expand_matches_dense(n):
    for a, b in _random_pairs(n, 25, n):
        A, B = build_operator(a), build_operator(b)
        c = commutator_expand(a, b)
        assert np.allclose(1j * decode(c), A @ B - B @ A, atol=1e-12)


def test_commutator_expand_known_values():
    l1, l2, l3 = (BasisLabel(1, (1,), (k,)) for k in (1, 2, 3))
    # [lambda_1, lambda_2] = 2i lambda_3
    assert commutator_expand(l1, l2) == CoefficientVector(1, {l3: 2.0})
    assert len(commutator_expand(l1, l1)) == 0


def test_bracket_bilinear_antisymmetric():
    rng = np.random.default_rng(9)
    a = CoefficientVector.from_array(2, rng.standard_normal(80))
    b = CoefficientVector.from_array(2, rng.standard_normal(80))
    ab, ba = bracket(a, b), bracket(b, a)
    assert np.allclose(ab.to_array(), -ba.to_array(), atol=1e-12)
    A, B = decode(a), decode(b)
    assert np.allclose(1j * decode(ab), A @ B - B @ A, atol=1e-10)
    assert np.allclose(bracket(a * 2.0, b).to_array(), 2 * ab.to_array(), atol=1e-10)


def test_coefficient_vector_algebra_and_json():
    lab1, lab2 = BasisLabel(2, (1,), (3,)), BasisLabel(2, (1, 2), (1, 5))
    c = CoefficientVector(2, {lab1: 1.5, lab2: -2.0})
    assert c.max_body == 2
    assert c.restrict(max_body=1) == CoefficientVector(2, {lab1: 1.5})
    assert (c - c).norm() == 0 and len(c - c) == 0
    assert CoefficientVector.from_json(c.to_json()) == c
    assert (c / 2)[lab2] == -1.0
    assert c.norm() == pytest.approx(2.5)


@pytest.mark.parametrize("n,rank", [(1, 8), (2, 80)])
def test_closure_small(n, rank):
    rep = verify_bracket_closure(n)
    assert rep.achieved_rank == rep.target_rank == rank
    assert rep.spans


def test_closure_one_body_generators_do_not_span():
    rep = verify_bracket_closure(2, generator_max_body=1)
    # local algebras only: su(3) + su(3)
    assert rep.achieved_rank == 16
    assert not rep.spans


def test_local_product_table_against_kron():
    for a, b in itertools.product(range(1, 9), repeat=2):
        la, lb = BasisLabel(2, (1, 2), (a, b)), BasisLabel(2, (2,), (b,))
        A, B = build_operator(la), build_operator(lb)
        assert np.allclose(1j * decode(commutator_expand(la, lb)), A @ B - B @ A, atol=1e-12)
