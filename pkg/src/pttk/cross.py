"""Black-box tensor-train approximation by greedy cross interpolation.

The tensor is only touched through an :class:`EntryOracle`. Index sets are
kept nested by storing every left tuple as ``(parent, i_k)`` and every right
tuple as ``(i_{k+1}, parent)``. Alongside them we keep the fibers
``X(I<=k-1, :, I>k)`` for every core. Those are exactly the blocks the
interpolation formula needs, so the final cores cost no extra evaluations.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .tt import TtTensor, tt_entries

log = logging.getLogger(__name__)

COND_LIMIT = 1e14
# pivots whose residual is below this fraction of the entry scale count as zero
RESIDUAL_RTOL = 1e-13

UPDATED = "updated"
CONVERGED = "converged"
SINGULAR = "singular"
# allowed deviation from the identity on pivot rows for an updated interpolation matrix
BORDER_TOL = 1e-10


def equilibrate(P: np.ndarray):
    """Row and column scalings ``dr, dc`` making ``P / dr[:, None] / dc`` max-norm balanced."""
    a = np.abs(P)
    dr = a.max(axis=1)
    dr[dr == 0] = 1.0
    dc = (a / dr[:, None]).max(axis=0)
    dc[dc == 0] = 1.0
    return dr, dc


def scaled_cond(P: np.ndarray) -> float:
    """2-norm condition number of the equilibrated cross matrix.

    Skeleton and interpolation formulas are unchanged by diagonal scaling of
    the cross matrix, so this is the number that governs their accuracy.
    """
    if P.size == 0:
        return 1.0
    dr, dc = equilibrate(P)
    return float(np.linalg.cond(P / dr[:, None] / dc[None, :]))


class CrossSolver:
    """LU factorization of an equilibrated cross matrix ``P = diag(dr) Pe diag(dc)``."""

    def __init__(self, P: np.ndarray):
        self.dr, self.dc = equilibrate(P)
        self.lu = sla.lu_factor(P / self.dr[:, None] / self.dc[None, :])

    def right(self, C: np.ndarray) -> np.ndarray:
        """``C P^{-1}`` for a matrix with ``r`` columns."""
        return sla.lu_solve(self.lu, (C / self.dc[None, :]).T, trans=1).T / self.dr[None, :]

    def left(self, b: np.ndarray) -> np.ndarray:
        """``P^{-1} b``."""
        return sla.lu_solve(self.lu, b / self.dr.reshape((-1,) + (1,) * (b.ndim - 1))) / (
            self.dc.reshape((-1,) + (1,) * (b.ndim - 1))
        )


def right_divide(C: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``C P^{-1}`` through an LU solve of the equilibrated ``P``."""
    return CrossSolver(P).right(C)


class SingularCrossError(RuntimeError):
    """A cross matrix of the supplied index sets is singular or ill-conditioned."""


class EntryOracle:
    """Entry access ``f(index) -> values`` for a tensor of the given shape.

    ``fn`` receives an ``(M, N)`` array of 0-based indices and returns ``M``
    values. Every requested entry is counted.
    """

    def __init__(self, shape: Sequence[int], fn: Callable[[np.ndarray], np.ndarray]):
        self.shape = tuple(int(s) for s in shape)
        self._fn = fn
        self._count = 0
        self._lock = threading.Lock()

    @classmethod
    def from_array(cls, a: np.ndarray) -> "EntryOracle":
        a = np.asarray(a, dtype=float)
        return cls(a.shape, lambda idx: a[tuple(idx.T)])

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def evaluations(self) -> int:
        return self._count

    def __call__(self, index) -> np.ndarray:
        index = np.asarray(index, dtype=np.intp).reshape(-1, self.ndim)
        with self._lock:
            self._count += len(index)
        if not len(index):
            return np.zeros(0)
        return np.asarray(self._fn(index), dtype=float).reshape(len(index))


def _as_tuples(a, width: int) -> np.ndarray:
    return np.asarray(a, dtype=np.intp).reshape(-1, width)


@dataclass
class NestedIndexSets:
    """Left sets ``I<=k`` and right sets ``I>k`` for bonds ``k = 1..N-1``.

    ``left[k-1]`` has shape ``(r_k, k)`` and ``right[k-1]`` shape
    ``(r_k, N-k)``; all indices 0-based.
    """

    left: list
    right: list
    max_cond: float = float("nan")

    def __post_init__(self):
        N = len(self.left) + 1
        self.left = [_as_tuples(a, k + 1) for k, a in enumerate(self.left)]
        self.right = [_as_tuples(a, N - k - 1) for k, a in enumerate(self.right)]

    @property
    def ndim(self) -> int:
        return len(self.left) + 1

    @property
    def ranks(self) -> tuple:
        return (1,) + tuple(len(a) for a in self.left) + (1,)

    def check(self) -> None:
        """Raise ``ValueError`` unless sizes match, sets are nested and duplicate free."""
        N = self.ndim
        if len(self.right) != N - 1:
            raise ValueError("need as many right sets as left sets")
        for k in range(N - 1):
            lk, rk = self.left[k], self.right[k]
            if len(lk) != len(rk):
                raise ValueError(f"bond {k + 1}: |I<=k| = {len(lk)} but |I>k| = {len(rk)}")
            if len({tuple(t) for t in lk}) != len(lk) or len({tuple(t) for t in rk}) != len(rk):
                raise ValueError(f"bond {k + 1}: duplicate tuples")
            if k > 0:
                parents = {tuple(t) for t in self.left[k - 1]}
                if any(tuple(t[:-1]) not in parents for t in lk):
                    raise ValueError(f"left set {k + 1} is not nested in left set {k}")
            if k < N - 2:
                parents = {tuple(t) for t in self.right[k + 1]}
                if any(tuple(t[1:]) not in parents for t in rk):
                    raise ValueError(f"right set {k + 1} is not nested in right set {k + 2}")

    def cross_matrix(self, oracle: EntryOracle, k: int) -> np.ndarray:
        """``X(I<=k, I>k)`` for a 1-based bond ``k``."""
        lk, rk = self.left[k - 1], self.right[k - 1]
        idx = np.concatenate(
            [np.repeat(lk, len(rk), axis=0), np.tile(rk, (len(lk), 1))], axis=1
        )
        return oracle(idx).reshape(len(lk), len(rk))


def cond2x2(a, b, c, d) -> np.ndarray:
    """2-norm condition numbers of ``[[a, b], [c, d]]`` (elementwise, inf if singular)."""
    fro = a * a + b * b + c * c + d * d
    det = np.abs(a * d - b * c)
    disc = np.sqrt(np.maximum(fro * fro - 4.0 * det * det, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (fro + disc) / (2.0 * det)
    return np.where(det > 0, out, np.inf)


def _argmin_pair(c: np.ndarray, distinct: bool):
    """Position of the smallest entry, off the diagonal when ``distinct``."""
    if distinct:
        rows, cols = np.nonzero(~np.eye(*c.shape, dtype=bool))
        k = int(np.argmin(c[rows, cols]))
        return int(rows[k]), int(cols[k])
    j1, j2 = np.unravel_index(np.argmin(c), c.shape)
    return int(j1), int(j2)


def init_index_sets(
    oracle: EntryOracle, max_it: int = 10, rng=None, allow_singular: bool = False
) -> NestedIndexSets:
    """Rank-2 nested index sets chosen to keep cross matrices well conditioned.

    Alternates left-to-right and right-to-left sweeps. Each bond takes the
    pair of new indices that minimizes the condition number of its 2x2
    cross matrix. The family with the smallest worst-case condition number
    over all sweeps is returned, its worst condition number in ``max_cond``.

    Raises :class:`SingularCrossError` naming the bond if even the best family
    has a cross matrix with condition number above ``COND_LIMIT``, unless
    ``allow_singular`` is set.
    """
    rng = np.random.default_rng(rng)
    shape = oracle.shape
    N = len(shape)
    if N < 2:
        raise ValueError("index sets need an order >= 2 tensor")
    if min(shape) < 2:
        raise ValueError("every mode needs at least two indices")
    # two random index vectors differing in every coordinate, so all tails are distinct
    first = np.array([rng.integers(0, n) for n in shape])
    second = (first + np.array([rng.integers(1, n) for n in shape])) % np.array(shape)
    q = np.stack([first, second])  # (2, N)
    right = [q[:, k + 1:].copy() for k in range(N - 1)]
    left = [None] * (N - 1)
    empty = np.zeros((1, 0), dtype=np.intp)
    best = None
    worst_bonds = []

    def consider(c):
        nonlocal best
        worst = float(np.max(c))
        if best is None or worst < best.max_cond:
            best = NestedIndexSets([a.copy() for a in left], [a.copy() for a in right], worst)

    for _ in range(max_it):
        conds = np.empty(N - 1)
        for k in range(N - 1):
            n = shape[k]
            parents = left[k - 1] if k > 0 else np.repeat(empty, 2, axis=0)
            rows = np.concatenate(
                [np.repeat(parents, n, axis=0), np.tile(np.arange(n), 2)[:, None]], axis=1
            )  # (2n, k+1): parent a, index j at row a*n + j
            idx = np.concatenate(
                [np.repeat(rows, 2, axis=0), np.tile(right[k], (2 * n, 1))], axis=1
            )
            E = oracle(idx).reshape(2, n, 2)
            c = cond2x2(
                E[0, :, None, 0], E[0, :, None, 1], E[1, None, :, 0], E[1, None, :, 1]
            )
            j1, j2 = _argmin_pair(c, distinct=k == 0)
            conds[k] = c[j1, j2]
            left[k] = np.concatenate([parents, [[j1], [j2]]], axis=1)
        consider(conds)

        conds = np.empty(N - 1)
        for k in range(N - 1, 0, -1):
            n = shape[k]
            children = right[k] if k < N - 1 else np.repeat(empty, 2, axis=0)
            cols = np.concatenate(
                [np.tile(np.arange(n), 2)[:, None], np.repeat(children, n, axis=0)], axis=1
            )  # (2n, N-k): index j, child b at row b*n + j
            rows = left[k - 1]
            idx = np.concatenate(
                [np.repeat(rows, 2 * n, axis=0), np.tile(cols, (2, 1))], axis=1
            )
            E = oracle(idx).reshape(2, 2, n)  # [row a, child b, j]
            c = cond2x2(
                E[0, 0, :, None], E[0, 1, None, :], E[1, 0, :, None], E[1, 1, None, :]
            )
            j1, j2 = _argmin_pair(c, distinct=k == N - 1)
            conds[k - 1] = c[j1, j2]
            right[k - 1] = np.concatenate([[[j1], [j2]], children], axis=1)
        consider(conds)
        worst_bonds.append(conds)
    if best.max_cond > COND_LIMIT and not allow_singular:
        bond = int(np.argmax(worst_bonds[-1])) + 1
        raise SingularCrossError(f"every candidate cross matrix at bond {bond} is singular")
    return best


def rank_one_sets(shape: Sequence[int], index) -> NestedIndexSets:
    """Nested sets of cardinality one built from a single multi-index."""
    index = np.asarray(index, dtype=np.intp)
    N = len(shape)
    return NestedIndexSets(
        [index[None, : k + 1] for k in range(N - 1)],
        [index[None, k + 1:] for k in range(N - 1)],
    )


@dataclass
class CrossUpdate:
    I: list
    J: list
    status: str
    pivot: tuple | None = None
    residual: float = 0.0


def _cross_step(C, Rw, I, J, nrows, ncols, sample_fn, row_fn, col_fn, rng, n_samples=None, Z=None):
    """One greedy pivot search on a matrix known through ``A(:, J)`` and ``A(I, :)``.

    ``Z``, if given, is the interpolation matrix ``C P^{-1}`` already
    computed by the caller. Returns ``(status, l, t, col_t, row_l,
    residual)``; ``col_t`` and ``row_l`` are the freshly evaluated column and
    row of the new pivot.
    """
    P = C[I, :]
    r = len(I)
    if r:
        if scaled_cond(P) > COND_LIMIT:
            return SINGULAR, None, None, None, None, 0.0
        if Z is None:
            solver = CrossSolver(P)
            row_of_z = lambda rows: solver.right(C[rows])
            z_col = lambda t: C @ solver.left(Rw[:, t])
        else:
            row_of_z = lambda rows: Z[rows]
            z_col = lambda t: Z @ Rw[:, t]
    else:
        row_of_z = lambda rows: np.zeros((len(rows), 0))
        z_col = lambda t: np.zeros(nrows)
    total = nrows * ncols
    count = min(total, n_samples if n_samples is not None else max(nrows, ncols))
    pos = rng.choice(total, size=count, replace=False)
    rows, cols = pos % nrows, pos // nrows
    vals = sample_fn(rows, cols)
    # only the sampled rows of Z are needed
    urows, inv = np.unique(rows, return_inverse=True)
    Zs = row_of_z(urows)
    resid = np.einsum("sa,as->s", Zs[inv], Rw[:, cols]) - vals
    score = np.abs(resid)
    used_r = np.zeros(nrows, bool)
    used_r[I] = True
    used_c = np.zeros(ncols, bool)
    used_c[J] = True
    score[used_r[rows] | used_c[cols]] = -1.0
    scale = max(float(np.max(np.abs(vals), initial=0.0)), float(np.max(np.abs(P), initial=0.0)))
    s = int(np.argmax(score))
    if score[s] <= RESIDUAL_RTOL * scale:
        return CONVERGED, None, None, None, None, float(max(score[s], 0.0))
    l, t = int(rows[s]), int(cols[s])
    if rng.integers(2) == 1:
        row_l = row_fn(l)
        rr = np.abs(row_of_z([l])[0] @ Rw - row_l)
        rr[used_c] = -1.0
        t = int(np.argmax(rr))
        col_t = col_fn(t)
        piv = rr[t]
    else:
        col_t = col_fn(t)
        rc = np.abs(z_col(t) - col_t)
        rc[used_r] = -1.0
        l = int(np.argmax(rc))
        row_l = row_fn(l)
        piv = rc[l]
    if piv <= RESIDUAL_RTOL * scale:
        return CONVERGED, None, None, None, None, float(piv)
    return UPDATED, l, t, col_t, row_l, float(piv)


def update_cross(entries, shape, I, J, rng=None, n_samples=None) -> CrossUpdate:
    """Grow a skeleton ``A(:, J) A(I, J)^{-1} A(I, :)`` by one row and column.

    ``entries(rows, cols)`` returns matrix entries at paired 0-based
    positions. The new pivot is the largest sampled residual, refined along
    its row or column (a fair coin decides) to the maximum of that slice.
    """
    rng = np.random.default_rng(rng)
    nrows, ncols = shape
    I, J = list(I), list(J)
    ar_r, ar_c = np.arange(nrows), np.arange(ncols)
    Ia, Ja = np.asarray(I, dtype=np.intp), np.asarray(J, dtype=np.intp)
    C = entries(np.repeat(ar_r, len(J)), np.tile(Ja, nrows)).reshape(nrows, len(J))
    Rw = entries(np.repeat(Ia, ncols), np.tile(ar_c, len(I))).reshape(len(I), ncols)
    status, l, t, _, _, res = _cross_step(
        C, Rw, I, J, nrows, ncols,
        entries,
        lambda l: entries(np.full(ncols, l), ar_c),
        lambda t: entries(ar_r, np.full(nrows, t)),
        rng, n_samples,
    )
    if status != UPDATED:
        return CrossUpdate(I, J, status, residual=res)
    return CrossUpdate(I + [l], J + [t], status, (l, t), res)


@dataclass
class CrossResult:
    tt: TtTensor
    index_sets: NestedIndexSets
    converged: bool
    sweeps: int
    error: float
    evaluations: int
    history: list = field(default_factory=list)


class _CrossState:
    """Pointer-form nested index sets plus the fibers ``X(I<=c-1, :, I>c)``."""

    def __init__(self, oracle: EntryOracle, sets: NestedIndexSets):
        self.oracle = oracle
        shape = oracle.shape
        self.N = N = len(shape)
        self.n = shape
        empty = np.zeros((1, 0), dtype=np.intp)
        # left_t[c] = I<=c (tuples of length c), c = 0..N-1; right_t[c] = I>c+1, c = 0..N-1
        self.left_t = [empty] + [a.copy() for a in sets.left]
        self.right_t = [a.copy() for a in sets.right] + [empty]
        # pointer form: left_ptr[b] rows (parent in left_t[b], i_{b+1}) for left_t[b+1]
        self.left_ptr = []
        self.right_ptr = []
        for b in range(N - 1):
            self.left_ptr.append(self._pointers(self.left_t[b + 1], self.left_t[b], last=True))
            self.right_ptr.append(self._pointers(self.right_t[b], self.right_t[b + 1], last=False))
        self.fibers = [self._fiber(c) for c in range(N)]
        # interp[b] = fibers[b] P_b^{-1} as (rl, n, r); None once P_b changes
        self.interp = [None] * (N - 1)

    @staticmethod
    def _pointers(child, parent, last):
        lookup = {tuple(t): i for i, t in enumerate(parent)}
        out = np.empty((len(child), 2), dtype=np.intp)
        for i, t in enumerate(child):
            key = tuple(t[:-1]) if last else tuple(t[1:])
            if key not in lookup:
                raise ValueError("index sets are not nested")
            out[i] = (lookup[key], t[-1]) if last else (t[0], lookup[key])
        return out

    def _fiber(self, c):
        L, R = self.left_t[c], self.right_t[c]
        n = self.n[c]
        # order (s, i, u) little-endian: s fastest
        s, i, u = np.meshgrid(np.arange(len(L)), np.arange(n), np.arange(len(R)), indexing="ij")
        s, i, u = s.ravel(order="F"), i.ravel(order="F"), u.ravel(order="F")
        idx = np.concatenate([L[s], i[:, None], R[u]], axis=1)
        return self.oracle(idx).reshape(len(L), n, len(R), order="F")

    def ranks(self):
        return (1,) + tuple(len(a) for a in self.left_t[1:]) + (1,)

    def supercore_index(self, b, rows, cols):
        L, R = self.left_t[b], self.right_t[b + 1]
        rl, n2 = len(L), self.n[b + 1]
        s, i = rows % rl, rows // rl
        j, u = cols % n2, cols // n2
        return np.concatenate([L[s], i[:, None], j[:, None], R[u]], axis=1)

    def exhaustive(self, b, boost):
        """Whether ``boost`` times the default sample count covers supercore ``b``."""
        nrows, ncols = len(self.left_t[b]) * self.n[b], self.n[b + 1] * len(self.right_t[b + 1])
        return boost * max(nrows, ncols) >= nrows * ncols

    def update(self, b, rng, boost=1):
        rl, n1 = len(self.left_t[b]), self.n[b]
        n2, rr = self.n[b + 1], len(self.right_t[b + 1])
        nrows, ncols = rl * n1, n2 * rr
        C = self.fibers[b].reshape(nrows, -1, order="F")
        Rw = self.fibers[b + 1].reshape(C.shape[1], -1, order="F")
        lp, rp = self.left_ptr[b], self.right_ptr[b]
        I = lp[:, 0] + rl * lp[:, 1]
        J = rp[:, 0] + n2 * rp[:, 1]
        ar_r, ar_c = np.arange(nrows), np.arange(ncols)
        ev = lambda rows, cols: self.oracle(self.supercore_index(b, rows, cols))
        Z = None
        if len(I) and scaled_cond(C[I]) <= COND_LIMIT:
            Z = self.interpolation(b).reshape(nrows, -1, order="F")
        status, l, t, col_t, row_l, res = _cross_step(
            C, Rw, I, J, nrows, ncols, ev,
            lambda l: ev(np.full(ncols, l), ar_c),
            lambda t: ev(ar_r, np.full(nrows, t)),
            rng, boost * max(nrows, ncols), Z=Z,
        )
        if status != UPDATED:
            return status, res
        self.interp[b] = self._bordered(Z, col_t, I, l, (rl, n1))
        s, i = l % rl, l // rl
        j, u = t % n2, t // n2
        self.left_ptr[b] = np.vstack([lp, [s, i]])
        self.right_ptr[b] = np.vstack([rp, [j, u]])
        self.left_t[b + 1] = np.vstack([self.left_t[b + 1], np.append(self.left_t[b][s], i)])
        self.right_t[b] = np.vstack([self.right_t[b], np.append(j, self.right_t[b + 1][u])])
        self.fibers[b] = np.concatenate(
            [self.fibers[b], col_t.reshape(rl, n1, 1, order="F")], axis=2
        )
        self.fibers[b + 1] = np.concatenate(
            [self.fibers[b + 1], row_l.reshape(1, n2, rr, order="F")], axis=0
        )
        return status, res

    def cross_matrix(self, b):
        lp = self.left_ptr[b]
        return self.fibers[b][lp[:, 0], lp[:, 1], :]

    @staticmethod
    def _bordered(Z, c, I, l, shape):
        """Interpolation matrix after adding row ``l`` and column ``c`` to the cross.

        With ``e = c - Z c[I]`` the new matrix is ``[Z - e Z[l] / e[l], e / e[l]]``.
        Returns ``None`` (forcing a fresh solve) if the result does not
        reproduce the identity on the pivot rows.
        """
        if Z is None:
            return None
        e = c - Z @ c[I]
        e = e / e[l]
        out = np.empty((Z.shape[0], Z.shape[1] + 1))
        out[:, :-1] = Z - np.outer(e, Z[l])
        out[:, -1] = e
        rows = np.append(I, l)
        if np.max(np.abs(out[rows] - np.eye(len(rows)))) > BORDER_TOL:
            return None
        return out.reshape(shape + (len(rows),), order="F")

    def interpolation(self, b):
        """``fibers[b] P_b^{-1}``, extending the cached rows when only the left set grew."""
        F = self.fibers[b]
        Z = self.interp[b]
        if Z is None or Z.shape[2] != F.shape[2]:
            Z = right_divide(F.reshape(-1, F.shape[2], order="F"), self.cross_matrix(b))
            Z = Z.reshape(F.shape, order="F")
        elif Z.shape[0] < F.shape[0]:
            new = F[Z.shape[0]:]
            Znew = right_divide(new.reshape(-1, F.shape[2], order="F"), self.cross_matrix(b))
            Z = np.concatenate([Z, Znew.reshape(new.shape, order="F")], axis=0)
        self.interp[b] = Z
        return Z

    def cores(self):
        out = [self.interpolation(c) for c in range(self.N - 1)]
        out.append(self.fibers[self.N - 1])
        return TtTensor(out)

    def index_sets(self) -> NestedIndexSets:
        return NestedIndexSets(self.left_t[1:], self.right_t[:-1])


def sample_error(oracle_or_values, t: TtTensor, samples) -> float:
    """``max |x - x_hat| / max |x|`` over the sample multi-indices.

    The first argument is either an :class:`EntryOracle` or the exact values
    at ``samples`` (to avoid re-evaluating a fixed pool).
    """
    samples = np.asarray(samples, dtype=np.intp)
    if isinstance(oracle_or_values, EntryOracle):
        exact = oracle_or_values(samples)
    else:
        exact = np.asarray(oracle_or_values, dtype=float)
    denom = float(np.max(np.abs(exact), initial=0.0))
    if denom == 0.0:
        raise ValueError("all sampled entries are zero; relative error undefined")
    return float(np.max(np.abs(exact - tt_entries(t, samples)))) / denom


def sample_pool(shape: Sequence[int], rng, size: int | None = None) -> np.ndarray:
    """Uniform multi-indices for the stopping test: ``max(1000, 10 N n)`` by default."""
    if size is None:
        size = max(1000, 10 * len(shape) * max(shape))
    return np.stack([rng.integers(0, n, size=size) for n in shape], axis=1)


def greedy_cross(
    oracle: EntryOracle,
    eps: float,
    init: NestedIndexSets | None = None,
    max_sweeps: int = 64,
    seed: int | None = 0,
    pool_size: int | None = None,
) -> CrossResult:
    """TT approximation of ``oracle`` to sampled relative Chebyshev error ``eps``.

    Each sweep visits bonds ``1..N-1`` and adds at most one cross per bond.
    A sweep that adds none while the error is above ``eps`` quadruples the
    residual sample count for the next one; the run ends once such a sweep
    had sampled every supercore entry. Without ``init`` the rank-2
    initialization is run, and a rank-one start at the largest pooled entry
    replaces it if that family is singular.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(seed)
    N = oracle.ndim
    pool = sample_pool(oracle.shape, rng, pool_size)
    exact = oracle(pool)
    if not np.any(exact):
        raise ValueError("all sampled entries are zero; relative error undefined")
    if N == 1:
        tt = TtTensor([oracle(np.arange(oracle.shape[0])[:, None]).reshape(1, -1, 1)])
        return CrossResult(tt, NestedIndexSets([], []), True, 0, 0.0, oracle.evaluations)
    auto = init is None
    if auto:
        init = init_index_sets(oracle, rng=rng, allow_singular=True)
    init.check()
    state = _CrossState(oracle, init)
    bad = [b for b in range(N - 1) if scaled_cond(state.cross_matrix(b)) > COND_LIMIT]
    if bad:
        if not auto:
            raise SingularCrossError(
                f"cross matrix at bond {bad[0] + 1} is singular; rerun the index initialization"
            )
        log.info("rank-2 initialization singular at bond %d, starting from rank one", bad[0] + 1)
        start = pool[int(np.argmax(np.abs(exact)))]
        state = _CrossState(oracle, rank_one_sets(oracle.shape, start))

    history = []
    tt = state.cores()
    err = sample_error(exact, tt, pool)
    sweeps = 0
    boost = 1  # residual sample multiplier, raised while sweeps find no pivot
    while err > eps and sweeps < max_sweeps:
        statuses = [state.update(b, rng, boost)[0] for b in range(N - 1)]
        sweeps += 1
        tt = state.cores()
        err = sample_error(exact, tt, pool)
        history.append((sweeps, state.ranks(), err, oracle.evaluations))
        log.debug("sweep %d ranks %s error %.3e", sweeps, state.ranks(), err)
        if UPDATED in statuses:
            boost = 1
            continue
        if all(state.exhaustive(b, boost) for b in range(N - 1)):
            break  # every supercore was sampled exhaustively
        boost *= 4
    converged = err <= eps
    if not converged:
        log.warning("greedy cross stopped after %d sweeps at sampled error %.3e", sweeps, err)
    return CrossResult(tt, state.index_sets(), converged, sweeps, err, oracle.evaluations, history)
