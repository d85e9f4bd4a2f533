"""Comparison methods: partially pivoted ACA and the truncated SVD."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import KernelOracle

# residual rows below this fraction of the running norm estimate count as zero
ZERO_PIVOT_RTOL = 1e-14


@dataclass
class LowRankPair:
    """``K ~ A B^T`` with ``A`` (``N_s x k``) and ``B`` (``N_t x k``)."""

    A: np.ndarray
    B: np.ndarray
    converged: bool = True
    restarts: int = 0

    def __post_init__(self):
        if self.A.shape[1] != self.B.shape[1]:
            raise ValueError(f"column counts differ: {self.A.shape[1]} vs {self.B.shape[1]}")

    @property
    def rank(self) -> int:
        return self.A.shape[1]

    def evaluate(self, rows=None, cols=None) -> np.ndarray:
        A = self.A if rows is None else self.A[np.asarray(rows, dtype=np.intp)]
        B = self.B if cols is None else self.B[np.asarray(cols, dtype=np.intp)]
        return A @ B.T


@dataclass
class MatrixOracle:
    """Row and column access to an ``m x n`` matrix that is never formed."""

    shape: tuple
    row: Callable[[int], np.ndarray]
    col: Callable[[int], np.ndarray]

    @classmethod
    def from_array(cls, K) -> "MatrixOracle":
        K = np.asarray(K, dtype=float)
        return cls(K.shape, lambda i: K[i, :].copy(), lambda j: K[:, j].copy())

    @classmethod
    def from_kernel(cls, oracle: KernelOracle, sources, targets, theta=()) -> "MatrixOracle":
        X = np.asarray(sources, dtype=float)
        Y = np.asarray(targets, dtype=float)
        return cls(
            (len(X), len(Y)),
            lambda i: oracle.matrix(X[i:i + 1], Y, theta)[0],
            lambda j: oracle.matrix(X, Y[j:j + 1], theta)[:, 0],
        )


def aca(m: MatrixOracle, eps: float, max_rank: int | None = None) -> LowRankPair:
    """Adaptive cross approximation with partial pivoting.

    Starts at row 0. Each step takes the largest entry of the current residual
    row as column pivot, and the next row pivot is the largest entry of the
    residual column among unused rows. Stops once ``||a_k|| ||b_k||`` drops
    below ``eps`` times the running estimate of ``||K||_F``, computed with the
    usual incremental update.

    A residual row at roundoff level restarts the search from the lowest
    unused row. If every row is found at roundoff level the residual is zero
    and the result counts as converged; reaching ``max_rank`` first leaves it
    flagged unconverged.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    nr, nc = m.shape
    if max_rank is None:
        max_rank = min(nr, nc)
    A = np.zeros((nr, 0))
    B = np.zeros((nc, 0))
    us, vs = [], []
    used = np.zeros(nr, bool)
    norm2 = 0.0
    restarts = 0
    i = 0
    converged = False
    while len(us) < max_rank:
        used[i] = True
        raw = m.row(i)
        row = raw - (A[i] @ B.T if us else 0.0)
        j = int(np.argmax(np.abs(row)))
        piv = row[j]
        scale = max(np.sqrt(max(norm2, 0.0)), float(np.max(np.abs(raw), initial=0.0)))
        if abs(piv) <= ZERO_PIVOT_RTOL * scale:
            free = np.flatnonzero(~used)
            if not free.size:
                converged = True  # every row residual is zero
                break
            restarts += 1
            i = int(free[0])
            continue
        v = row / piv
        u = m.col(j) - (A @ B[j] if us else 0.0)
        # ||S_k||^2 = ||S_{k-1}||^2 + 2 sum_l (u . u_l)(v . v_l) + ||u||^2 ||v||^2
        un, vn = float(u @ u), float(v @ v)
        if us:
            norm2 += 2.0 * float((A.T @ u) @ (B.T @ v))
        norm2 += un * vn
        us.append(u)
        vs.append(v)
        A = np.column_stack(us)
        B = np.column_stack(vs)
        if np.sqrt(un * vn) <= eps * np.sqrt(max(norm2, 0.0)):
            converged = True
            break
        cand = np.abs(u)
        cand[used] = -1.0
        if cand.max() < 0:
            converged = True  # all rows are pivots, so the skeleton is exact
            break
        i = int(np.argmax(cand))
    return LowRankPair(A, B, converged, restarts)


def truncated_svd(K, k: int):
    """Best rank-``k`` approximation; returns ``(LowRankPair, singular values)``."""
    K = np.asarray(K, dtype=float)
    if not 0 <= k <= min(K.shape):
        raise ValueError(f"rank {k} exceeds the smaller dimension {min(K.shape)}")
    U, s, Vt = np.linalg.svd(K, full_matrices=False)
    return LowRankPair(U[:, :k] * s[:k], Vt[:k].T), s
