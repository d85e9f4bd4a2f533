from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as npcheb

from pttk.chebyshev import (
    ChebyshevGrid,
    Interval,
    affine_map,
    affine_map_inv,
    basis_eval,
    cheb_nodes,
    chebyshev_t,
    factor_matrices,
    lebesgue_bound,
    lebesgue_function,
    q_rows,
)


def test_nodes_are_roots_of_t_n():
    for n in (1, 2, 5, 27):
        z = cheb_nodes(n)
        coef = np.zeros(n + 1)
        coef[-1] = 1.0
        np.testing.assert_allclose(npcheb.chebval(z, coef), 0.0, atol=1e-13)
        assert np.all(np.diff(z) < 0)


def test_affine_map_endpoints_and_inverse():
    iv = Interval(2.0, 5.0)
    assert affine_map(iv, 1.0) == pytest.approx(2.0)
    assert affine_map(iv, -1.0) == pytest.approx(5.0)
    x = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(affine_map_inv(iv, affine_map(iv, x)), x, atol=1e-15)


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_chebyshev_t_matches_numpy():
    x = np.linspace(-1, 1, 11)
    T = chebyshev_t(6, x)
    for k in range(6):
        coef = np.zeros(k + 1)
        coef[-1] = 1
        np.testing.assert_allclose(T[:, k], npcheb.chebval(x, coef), atol=1e-14)


@pytest.mark.parametrize("n", [4, 8, 16, 27, 32])
def test_delta_property(n):
    iv = Interval(-0.3, 1.7)
    nodes = affine_map(iv, cheb_nodes(n))
    Q = q_rows(iv, nodes, nodes)
    np.testing.assert_allclose(Q, np.eye(n), atol=1e-12)


def test_basis_eval_agrees_with_rows():
    iv = Interval(0.0, 2.0)
    nodes = affine_map(iv, cheb_nodes(7))
    x = 0.37
    row = q_rows(iv, nodes, x)
    assert row.shape == (7,)
    for i in range(7):
        assert basis_eval(iv, nodes, i, x) == pytest.approx(row[i], abs=1e-14)


def test_basis_is_lagrange_polynomial():
    # the basis polynomial of node i equals the Lagrange polynomial of the nodes
    iv = Interval(0.0, 1.0)
    n = 6
    nodes = affine_map(iv, cheb_nodes(n))
    x = np.linspace(0, 1, 13)
    Q = q_rows(iv, nodes, x)
    for i in range(n):
        others = np.delete(nodes, i)
        lag = np.prod((x[:, None] - others) / (nodes[i] - others), axis=1)
        np.testing.assert_allclose(Q[:, i], lag, atol=1e-12)


@pytest.mark.parametrize("n", [4, 8, 16, 27, 32])
def test_lebesgue_bound(n):
    x = np.linspace(-1, 1, 4001)
    assert lebesgue_function(n, x).max() <= lebesgue_bound(n) + 1e-12


@settings(max_examples=25)
@given(st.integers(2, 12), st.floats(-2, 2), st.floats(0.1, 3))
def test_interpolation_reproduces_polynomials(n, lo, width):
    iv = Interval(lo, lo + width)
    nodes = affine_map(iv, cheb_nodes(n))
    coef = np.random.default_rng(n).standard_normal(n)
    x = np.linspace(iv.lo, iv.hi, 9)
    p = lambda t: np.polyval(coef, (t - lo) / width)
    np.testing.assert_allclose(q_rows(iv, nodes, x) @ p(nodes), p(x), atol=1e-9 * np.abs(coef).sum())


def test_grid_nodes_inside_intervals():
    ivs = [Interval(0, 1), Interval(0.5, 3), Interval(2, 3)]
    g = ChebyshevGrid.build(9, ivs)
    assert g.nodes.shape == (3, 9)
    for iv, row in zip(ivs, g.nodes):
        assert np.all(iv.contains(row, tol=0.0))
    idx = np.array([[0, 8, 4], [1, 2, 3]])
    pts = g.node_tuple(idx)
    assert pts[1, 2] == g.nodes[2, 3]


def test_factor_matrices_rows_and_dims():
    ivs = [Interval(0, 1)] * 2 + [Interval(5, 6)] + [Interval(2, 3)] * 2
    g = ChebyshevGrid.build(5, ivs)
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (4, 2))
    Y = rng.uniform(2, 3, (3, 2))
    fm = factor_matrices(g, X, Y, 2)
    assert [u.shape for u in fm.U] == [(4, 5)] * 2
    assert [v.shape for v in fm.V] == [(3, 5)] * 2
    np.testing.assert_allclose(fm.V[1][2], q_rows(ivs[4], g.nodes[4], Y[2, 1]), atol=1e-15)


def test_factor_matrices_rejects_outside_point():
    g = ChebyshevGrid.build(4, [Interval(0, 1), Interval(2, 3)])
    with pytest.raises(ValueError, match="source point 1"):
        factor_matrices(g, np.array([[0.5], [1.5]]), np.array([[2.5]]), 1)
    # a rounding error past the face is tolerated
    factor_matrices(g, np.array([[1.0 + 1e-15]]), np.array([[2.5]]), 1)
