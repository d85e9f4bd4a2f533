"""Tensor-train storage, evaluation, rounding and the factor-matrix contractions."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt
from typing import Sequence

import numpy as np

from .tensor import unfold

FULL_SIZE_CAP = 10**7


@dataclass(frozen=True)
class TtTensor:
    """Chain of order-3 cores; core ``k`` has shape ``(r_{k-1}, n_k, r_k)``."""

    cores: tuple

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=float) for c in self.cores)
        if not cores:
            raise ValueError("a TT tensor needs at least one core")
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {k} has order {c.ndim}, expected 3")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary ranks must be 1")
        for k in range(len(cores) - 1):
            if cores[k].shape[2] != cores[k + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {k} and {k + 1}: "
                    f"{cores[k].shape[2]} vs {cores[k + 1].shape[0]}"
                )
        object.__setattr__(self, "cores", cores)

    @property
    def ndim(self) -> int:
        return len(self.cores)

    @property
    def shape(self) -> tuple:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple:
        return (1,) + tuple(c.shape[2] for c in self.cores)

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    @property
    def storage(self) -> int:
        return sum(c.size for c in self.cores)


def tt_entries(t: TtTensor, index) -> np.ndarray:
    """Entries at 0-based multi-indices given as an ``(M, N)`` integer array."""
    index = np.atleast_2d(np.asarray(index, dtype=np.intp))
    if index.shape[1] != t.ndim:
        raise ValueError(f"expected {t.ndim} indices per entry, got {index.shape[1]}")
    if np.any(index < 0) or np.any(index >= np.array(t.shape)):
        raise IndexError("multi-index out of range")
    v = t.cores[0][0, index[:, 0], :]
    for k in range(1, t.ndim):
        g = t.cores[k]
        out = np.empty((len(index), g.shape[2]))
        # group rows by their index in mode k: one small matmul per slice
        order = np.argsort(index[:, k], kind="stable")
        bounds = np.searchsorted(index[order, k], np.arange(g.shape[1] + 1))
        for i in range(g.shape[1]):
            rows = order[bounds[i]:bounds[i + 1]]
            if rows.size:
                out[rows] = v[rows] @ g[:, i, :]
        v = out
    return v[:, 0]


def tt_entry(t: TtTensor, index) -> float:
    """A single entry as a chain of vector-matrix products."""
    return float(tt_entries(t, np.asarray(index)[None, :])[0])


def tt_full(t: TtTensor, cap: int = FULL_SIZE_CAP) -> np.ndarray:
    """Dense reconstruction; refuses tensors with more than ``cap`` entries."""
    size = prod(t.shape)
    if size > cap:
        raise MemoryError(f"dense reconstruction of {size} entries exceeds cap {cap}")
    a = t.cores[0].reshape(t.shape[0], -1, order="F")
    for c in t.cores[1:]:
        a = a @ c.reshape(c.shape[0], -1, order="F")
        a = a.reshape(-1, c.shape[2], order="F")
    return a.reshape(t.shape, order="F")


def tt_norm(t: TtTensor) -> float:
    """Frobenius norm computed through the cores."""
    w = np.ones((1, 1))
    for c in t.cores:
        w = np.einsum("ab,aic,bid->cd", w, c, c)
    return float(np.sqrt(max(w[0, 0], 0.0)))


def truncation_rank(s: np.ndarray, delta: float) -> int:
    """Smallest rank whose discarded tail satisfies ``sqrt(sum tail^2) <= delta``."""
    tail = np.sqrt(np.cumsum((s**2)[::-1]))[::-1]  # tail[k] = energy of s[k:]
    ok = np.flatnonzero(tail <= delta)
    r = int(ok[0]) if ok.size else len(s)
    return max(r, 1)


def tt_round(t: TtTensor, eps: float) -> TtTensor:
    """Rank reduction with ``||t - t_hat||_F <= eps ||t||_F``.

    Right-to-left QR orthogonalization followed by a left-to-right sweep of
    truncated SVDs with per-bond threshold ``eps / sqrt(N - 1) * ||t||_F``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    cores = [c.copy() for c in t.cores]
    N = len(cores)
    if N == 1:
        return TtTensor(cores)
    for i in range(N - 1, 0, -1):
        r0, n, r1 = cores[i].shape
        q, r = np.linalg.qr(cores[i].reshape(r0, n * r1, order="F").T)
        cores[i] = q.T.reshape(-1, n, r1, order="F")
        prev = cores[i - 1]
        cores[i - 1] = np.tensordot(prev, r.T, axes=([2], [0]))
    delta = eps / sqrt(N - 1) * float(np.linalg.norm(cores[0]))
    for i in range(N - 1):
        r0, n, r1 = cores[i].shape
        u, s, vt = np.linalg.svd(cores[i].reshape(r0 * n, r1, order="F"), full_matrices=False)
        rk = truncation_rank(s, delta)
        cores[i] = u[:, :rk].reshape(r0, n, rk, order="F")
        sv = s[:rk, None] * vt[:rk]
        nxt = cores[i + 1]
        cores[i + 1] = np.tensordot(sv, nxt, axes=([1], [0]))
    return TtTensor(cores)


def unfolding_from_cores(cores: Sequence[np.ndarray], j: int) -> np.ndarray:
    """Unfolding ``X^{j}`` assembled from Kronecker products of unfolded cores.

    Dense and quadratic in size; intended only as a check at tiny sizes.
    """
    N = len(cores)
    if not 1 <= j <= N - 1:
        raise ValueError(f"split point {j} must lie in 1..{N - 1}")
    n = [c.shape[1] for c in cores]
    out = np.eye(prod(n[:j]))
    for i in range(j - 1):
        out = out @ np.kron(np.eye(prod(n[i + 1:j])), unfold(cores[i], 2))
    out = out @ unfold(cores[j - 1], 2) @ unfold(cores[j], 1)
    for i in range(j + 1, N):
        out = out @ np.kron(unfold(cores[i], 1), np.eye(prod(n[j:i])))
    return out


def left_contraction(cores: Sequence[np.ndarray], U: Sequence[np.ndarray]) -> np.ndarray:
    """``S = F_s L`` from source factors without forming either product.

    Implements ``S <- U_1 G_1^{2}``, then ``S <- (U_i face-split S) G_i^{2}``
    as a batched contraction costing ``O(N_s n r^2)`` per step.
    """
    if len(cores) != len(U):
        raise ValueError("need one factor matrix per core")
    g = cores[0]
    if g.shape[1] != U[0].shape[1]:
        raise ValueError(f"factor has {U[0].shape[1]} columns, core mode is {g.shape[1]}")
    S = U[0] @ g.reshape(g.shape[0] * g.shape[1], -1, order="F")
    for g, u in zip(cores[1:], U[1:]):
        r0, n, r1 = g.shape
        if u.shape[1] != n or S.shape[1] != r0:
            raise ValueError("shape mismatch in left contraction")
        tmp = (S @ g.reshape(r0, n * r1)).reshape(-1, n, r1)
        S = np.einsum("pj,pjb->pb", u, tmp)
    return S


def right_contraction(cores: Sequence[np.ndarray], V: Sequence[np.ndarray]) -> np.ndarray:
    """``T = F_t R`` for the trailing cores ``G_{D-d+1} .. G_D``, returned ``N_t x r``."""
    if len(cores) != len(V):
        raise ValueError("need one factor matrix per core")
    g = cores[-1]
    if g.shape[1] != V[-1].shape[1]:
        raise ValueError(f"factor has {V[-1].shape[1]} columns, core mode is {g.shape[1]}")
    T = g.reshape(g.shape[0], -1, order="F") @ V[-1].T  # r x N_t
    for g, v in zip(cores[-2::-1], V[-2::-1]):
        r0, n, r1 = g.shape
        if v.shape[1] != n or T.shape[0] != r1:
            raise ValueError("shape mismatch in right contraction")
        W = v.T[:, None, :] * T[None, :, :]  # (n, r1, N_t): khatri-rao of T and V^T
        T = g.reshape(r0, n * r1, order="C") @ W.reshape(n * r1, -1)
    return T.T


__all__ = [
    "TtTensor",
    "tt_entries",
    "tt_entry",
    "tt_full",
    "tt_norm",
    "tt_round",
    "truncation_rank",
    "unfolding_from_cores",
    "left_contraction",
    "right_contraction",
]
