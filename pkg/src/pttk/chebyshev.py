"""Chebyshev nodes of the first kind, interval maps and interpolation bases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# relative slack for points lying on (or a rounding error outside) a box face
BOX_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = BOX_TOL):
        slack = tol * self.width
        x = np.asarray(x)
        return (x >= self.lo - slack) & (x <= self.hi + slack)


def cheb_nodes(n: int) -> np.ndarray:
    """Roots of ``T_n``: ``cos((2k - 1) pi / (2n))`` for ``k = 1..n`` (decreasing)."""
    if n < 1:
        raise ValueError("need at least one Chebyshev node")
    k = np.arange(1, n + 1)
    return np.cos((2 * k - 1) * np.pi / (2 * n))


def affine_map(iv: Interval, x):
    """Map ``[-1, 1]`` onto ``iv`` with ``+1 -> lo`` and ``-1 -> hi``."""
    return 0.5 * (iv.lo - iv.hi) * np.asarray(x, dtype=float) + 0.5 * (iv.lo + iv.hi)


def affine_map_inv(iv: Interval, y):
    return (2.0 * np.asarray(y, dtype=float) - (iv.lo + iv.hi)) / (iv.lo - iv.hi)


def chebyshev_t(n: int, x) -> np.ndarray:
    """Values ``T_0(x) .. T_{n-1}(x)`` stacked along a trailing axis.

    Uses the three-term recurrence ``T_{k+1} = 2x T_k - T_{k-1}``; each step
    adds at most a couple of ulps of rounding error for ``|x| <= 1``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (n,))
    out[..., 0] = 1.0
    if n > 1:
        out[..., 1] = x
    for k in range(2, n):
        out[..., k] = 2.0 * x * out[..., k - 1] - out[..., k - 2]
    return out


def _basis_weights(n: int) -> np.ndarray:
    w = np.full(n, 2.0 / n)
    w[0] = 1.0 / n
    return w


def basis_eval(iv: Interval, nodes: np.ndarray, i: int, x: float) -> float:
    """Basis polynomial attached to node ``nodes[i]`` (0-based) evaluated at ``x``.

    Equal to the Lagrange polynomial of that node, hence ``delta_ij`` on the
    nodes. Evaluation outside ``iv`` extrapolates.
    """
    n = len(nodes)
    ti = chebyshev_t(n, affine_map_inv(iv, nodes[i]))
    tx = chebyshev_t(n, affine_map_inv(iv, x))
    return float(np.sum(_basis_weights(n) * ti * tx))


def q_rows(iv: Interval, nodes: np.ndarray, x) -> np.ndarray:
    """Rows ``[phi(eta_1, x), ..., phi(eta_n, x)]`` for every entry of ``x``.

    Returns an array of shape ``(len(x), n)``; a scalar ``x`` gives ``(n,)``.
    """
    n = len(nodes)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tz = chebyshev_t(n, affine_map_inv(iv, nodes))
    tx = chebyshev_t(n, affine_map_inv(iv, x))
    q = (tx * _basis_weights(n)) @ tz.T
    return q[0] if scalar else q


def q_row(iv: Interval, nodes: np.ndarray, x: float) -> np.ndarray:
    return q_rows(iv, nodes, float(x))


def lebesgue_function(n: int, x) -> np.ndarray:
    """``sum_k |phi(zeta_k, x)|`` on the reference interval."""
    ref = Interval(-1.0, 1.0)
    nodes = affine_map(ref, cheb_nodes(n))
    return np.abs(q_rows(ref, nodes, np.atleast_1d(x))).sum(axis=1)


def lebesgue_bound(n: int) -> float:
    """Upper bound ``(2/pi) log(n) + 1`` on the Lebesgue constant of ``n`` nodes."""
    return 2.0 / np.pi * np.log(n) + 1.0


@dataclass(frozen=True)
class ChebyshevGrid:
    """Mapped nodes for each of the ``D`` dimensions, shared node count ``n``.

    Dimensions are ordered source coordinates, then parameters, then target
    coordinates.
    """

    n: int
    intervals: tuple
    nodes: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def build(cls, n: int, intervals: Sequence[Interval]) -> "ChebyshevGrid":
        zeta = cheb_nodes(n)
        ivs = tuple(intervals)
        nodes = np.array([affine_map(iv, zeta) for iv in ivs]).reshape(len(ivs), n)
        nodes.setflags(write=False)
        return cls(n, ivs, nodes)

    @property
    def ndim(self) -> int:
        return len(self.intervals)

    def node_tuple(self, index) -> np.ndarray:
        """Coordinates of grid points for 0-based multi-indices (last axis = dim)."""
        index = np.asarray(index)
        return self.nodes[np.arange(self.ndim), index]

    def q_rows(self, dim: int, x) -> np.ndarray:
        return q_rows(self.intervals[dim], self.nodes[dim], x)


def check_in_interval(iv: Interval, x, what: str = "point") -> None:
    x = np.asarray(x, dtype=float)
    bad = np.flatnonzero(~iv.contains(x))
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"{what} {i} has coordinate {x.ravel()[i]!r} outside [{iv.lo}, {iv.hi}]"
        )


@dataclass(frozen=True)
class FactorMatrices:
    U: list
    V: list


def factor_matrices(grid: ChebyshevGrid, sources, targets, d: int) -> FactorMatrices:
    """Source and target interpolation matrices ``U_i`` and ``V_i`` (each ``N x n``).

    ``U_i`` uses grid dimension ``i`` and ``V_i`` grid dimension
    ``D - d + i``, so parameter dimensions sitting in between are skipped.
    """
    sources = np.asarray(sources, dtype=float).reshape(-1, d)
    targets = np.asarray(targets, dtype=float).reshape(-1, d)
    off = grid.ndim - d
    U, V = [], []
    for i in range(d):
        check_in_interval(grid.intervals[i], sources[:, i], "source point")
        check_in_interval(grid.intervals[off + i], targets[:, i], "target point")
        U.append(grid.q_rows(i, sources[:, i]))
        V.append(grid.q_rows(off + i, targets[:, i]))
    return FactorMatrices(U, V)
