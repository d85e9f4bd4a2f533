"""Dense tensor conventions and the matrix products built on them.

Tensors are plain :class:`numpy.ndarray` objects. Multi-indices are flattened
little-endian (first index varies fastest), so every reshape in this package
uses ``order="F"``. Under that convention the unfolding ``X^{j}`` is a
reinterpretation of the same flat data and never reorders entries.

Mode numbers in the public functions are 1-based, matching the mathematical
notation (``unfold(t, 1)`` groups the first mode into rows). Array indices
are 0-based as usual.
"""

from __future__ import annotations

from math import prod

import numpy as np


def flat_index(multi_index, shape) -> int:
    """Little-endian flattening of a 0-based multi-index."""
    return int(np.ravel_multi_index(tuple(multi_index), tuple(shape), order="F"))


def unfold(t: np.ndarray, j: int) -> np.ndarray:
    """Unfolding ``X^{j}`` of shape ``prod(n_1..n_j) x prod(n_{j+1}..n_N)``.

    ``j`` ranges over ``1..N``; ``j = N`` yields a single column.
    """
    t = np.asarray(t)
    if not 1 <= j <= t.ndim:
        raise ValueError(f"mode {j} out of range for an order-{t.ndim} tensor")
    rows = prod(t.shape[:j])
    return t.reshape(rows, -1, order="F")


def fold(mat: np.ndarray, shape) -> np.ndarray:
    """Inverse of :func:`unfold` for any split point."""
    mat = np.asarray(mat)
    if mat.size != prod(shape):
        raise ValueError(f"cannot fold {mat.shape} into {tuple(shape)}")
    return mat.reshape(tuple(shape), order="F")


def mode_product(t: np.ndarray, a: np.ndarray, k: int) -> np.ndarray:
    """Mode-``k`` product ``t x_k A`` with ``A`` of shape ``m x n_k``.

    ``y[.., j, ..] = sum_i t[.., i, ..] * A[j, i]``; ``k`` is 1-based.
    """
    t = np.asarray(t)
    a = np.atleast_2d(np.asarray(a))
    if not 1 <= k <= t.ndim:
        raise ValueError(f"mode {k} out of range for an order-{t.ndim} tensor")
    if a.shape[1] != t.shape[k - 1]:
        raise ValueError(
            f"matrix has {a.shape[1]} columns but mode {k} has size {t.shape[k - 1]}"
        )
    out = np.tensordot(a, t, axes=([1], [k - 1]))
    return np.moveaxis(out, 0, k - 1)


def kron(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Kronecker product with blocks ``g[i, j] * H``."""
    return np.kron(np.atleast_2d(g), np.atleast_2d(h))


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product ``[a_1 (x) b_1 | ... | a_q (x) b_q]``."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    return (a[:, None, :] * b[None, :, :]).reshape(-1, a.shape[1])


def face_split(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Kronecker product; ``face_split(A, B) = khatri_rao(A.T, B.T).T``."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    return (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)


def twist(a: np.ndarray, which: int) -> np.ndarray:
    """Embed a matrix as an order-3 tensor with a singleton in mode ``which``.

    ``which=1`` gives shape ``(1, m, k)``, ``2`` gives ``(m, 1, k)`` and
    ``3`` gives ``(m, k, 1)``.
    """
    a = np.atleast_2d(np.asarray(a))
    if which == 1:
        return a[None, :, :]
    if which == 2:
        return a[:, None, :]
    if which == 3:
        return a[:, :, None]
    raise ValueError(f"twist mode must be 1, 2 or 3, got {which}")


def chebyshev_norm(t) -> float:
    t = np.asarray(t)
    return float(np.max(np.abs(t))) if t.size else 0.0


def frobenius_norm(t) -> float:
    a = np.asarray(t, dtype=float).ravel()
    m = float(np.max(np.abs(a), initial=0.0))
    if m == 0.0 or not np.isfinite(m):
        return m
    # scaling avoids underflow and overflow of the squares
    return m * float(np.linalg.norm(a / m))
