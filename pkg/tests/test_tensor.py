from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pttk.tensor import (
    chebyshev_norm,
    face_split,
    flat_index,
    fold,
    frobenius_norm,
    khatri_rao,
    kron,
    mode_product,
    twist,
    unfold,
)

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)
finite = st.floats(-1e3, 1e3, allow_nan=False)


def loop_flat(index, shape):
    # little-endian: first index fastest
    out, stride = 0, 1
    for i, n in zip(index, shape):
        out += i * stride
        stride *= n
    return out


def test_flat_index_matches_loop():
    shape = (3, 4, 2)
    for idx in itertools.product(*(range(n) for n in shape)):
        assert flat_index(idx, shape) == loop_flat(idx, shape)


def test_unfold_matrix_is_itself():
    a = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(unfold(a, 1), a)


def test_unfold_is_flat_identity():
    shape = (2, 2, 2)
    t = np.empty(shape)
    for idx in itertools.product(range(2), repeat=3):
        t[idx] = loop_flat(idx, shape)
    m = unfold(t, 2)
    assert m.shape == (4, 2)
    for i, j, c in itertools.product(range(2), repeat=3):
        assert m[loop_flat((i, j), (2, 2)), c] == loop_flat((i, j, c), shape)


def test_unfold_roundtrip_against_loop():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((3, 4, 5))
    m = unfold(t, 2)
    back = np.empty_like(t)
    for i, j, k in itertools.product(range(3), range(4), range(5)):
        back[i, j, k] = m[i + 3 * j, k]
    np.testing.assert_array_equal(back, t)


def test_unfold_rejects_bad_mode():
    t = np.zeros((2, 3))
    with pytest.raises(ValueError):
        unfold(t, 0)
    with pytest.raises(ValueError):
        unfold(t, 3)


@given(arrays(np.float64, shapes, elements=finite), st.data())
def test_unfold_fold_bit_exact(t, data):
    j = data.draw(st.integers(1, t.ndim))
    back = fold(unfold(t, j), t.shape)
    assert back.tobytes() == t.tobytes() and back.shape == t.shape


def test_mode_product_identity_and_matrix_case():
    rng = np.random.default_rng(1)
    t = rng.standard_normal((3, 4, 2))
    np.testing.assert_array_equal(mode_product(t, np.eye(4), 2), t)
    T = rng.standard_normal((3, 5))
    A = rng.standard_normal((2, 3))
    np.testing.assert_allclose(mode_product(T, A, 1), A @ T, rtol=1e-14)


def test_mode_product_matches_triple_loop():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((3, 3, 3))
    A = rng.standard_normal((2, 3))
    y = mode_product(t, A, 2)
    ref = np.zeros((3, 2, 3))
    for a, j, c in itertools.product(range(3), range(2), range(3)):
        ref[a, j, c] = sum(t[a, i, c] * A[j, i] for i in range(3))
    np.testing.assert_allclose(y, ref, rtol=1e-13, atol=1e-15)


def test_mode_product_dimension_mismatch():
    with pytest.raises(ValueError):
        mode_product(np.zeros((2, 3)), np.zeros((4, 2)), 2)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_mode_products_commute_across_modes(seed):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal((3, 4, 2))
    A = rng.standard_normal((5, 3))
    B = rng.standard_normal((2, 4))
    lhs = mode_product(mode_product(t, A, 1), B, 2)
    rhs = mode_product(mode_product(t, B, 2), A, 1)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_kron_scalar_identity():
    H = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(kron(np.array([[1.0]]), H), H)


def test_khatri_rao_single_column_is_kron():
    a = np.array([[1.0], [2.0]])
    b = np.array([[3.0], [4.0], [5.0]])
    np.testing.assert_array_equal(khatri_rao(a, b), np.kron(a, b))


def test_khatri_rao_columns_against_loop():
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((2, 4))
    kr = khatri_rao(a, b)
    for c in range(4):
        np.testing.assert_array_equal(kr[:, c], np.kron(a[:, c], b[:, c]))


def test_face_split_is_transposed_khatri_rao():
    rng = np.random.default_rng(4)
    a, b = rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
    np.testing.assert_array_equal(face_split(a, b), khatri_rao(a.T, b.T).T)


def test_products_reject_mismatch():
    with pytest.raises(ValueError):
        khatri_rao(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(ValueError):
        face_split(np.zeros((2, 3)), np.zeros((3, 3)))


def rel_fro(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@settings(max_examples=40)
@given(
    st.integers(1, 8), st.integers(1, 8), st.integers(1, 8), st.integers(1, 8),
    st.integers(1, 8), st.integers(0, 2**32 - 1),
)
def test_mixed_product_identities(m1, m2, q, p1, p2, seed):
    rng = np.random.default_rng(seed)
    # columnwise: (G^T kron H^T)(A khatri-rao B) = (G^T A) khatri-rao (H^T B)
    A, B = rng.standard_normal((m1, q)), rng.standard_normal((m2, q))
    G, H = rng.standard_normal((m1, p1)), rng.standard_normal((m2, p2))
    lhs = kron(G.T, H.T) @ khatri_rao(A, B)
    assert rel_fro(lhs, khatri_rao(G.T @ A, H.T @ B)) <= 1e-13
    # rowwise: (A^T face-split B^T)(G kron H) = (A^T G) face-split (B^T H)
    lhs = face_split(A.T, B.T) @ kron(G, H)
    assert rel_fro(lhs, face_split(A.T @ G, B.T @ H)) <= 1e-13


def test_mixed_product_spec_sizes():
    rng = np.random.default_rng(5)
    A, B = rng.standard_normal((3, 4)), rng.standard_normal((2, 4))
    G, H = rng.standard_normal((3, 5)), rng.standard_normal((2, 6))
    lhs = kron(G.T, H.T) @ khatri_rao(A, B)
    assert rel_fro(lhs, khatri_rao(G.T @ A, H.T @ B)) <= 1e-13


def test_twist_shapes_and_entries():
    A = np.arange(6.0).reshape(2, 3)
    assert twist(A, 1).shape == (1, 2, 3)
    np.testing.assert_array_equal(unfold(twist(A, 2), 1), A)
    t3 = twist(A, 3)
    assert t3.shape == (2, 3, 1)
    for i, j in itertools.product(range(2), range(3)):
        assert t3[i, j, 0] == A[i, j]
    with pytest.raises(ValueError):
        twist(A, 4)


def test_norms_trivial():
    z = np.zeros((2, 3))
    assert chebyshev_norm(z) == 0 and frobenius_norm(z) == 0
    five = np.array([[-5.0]])
    assert chebyshev_norm(five) == 5 and frobenius_norm(five) == 5


def test_norms_against_loop():
    rng = np.random.default_rng(6)
    t = rng.standard_normal((3, 2, 4))
    vals = [t[idx] for idx in itertools.product(range(3), range(2), range(4))]
    assert chebyshev_norm(t) == max(abs(v) for v in vals)
    assert frobenius_norm(t) == pytest.approx(sum(v * v for v in vals) ** 0.5, rel=1e-14)


@given(arrays(np.float64, shapes, elements=finite))
def test_chebyshev_norm_below_frobenius(t):
    assert chebyshev_norm(t) <= frobenius_norm(t) * (1 + 1e-15)
