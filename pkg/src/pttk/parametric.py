"""Offline/online parametric kernel factorization ``K(X, Y; theta) ~ S H(theta) T^T``.

The offline stage interpolates the kernel on a Chebyshev tensor grid over
``(x, theta, y)``, compresses the coefficient tensor by greedy cross, folds
the spatial cores into ``S`` and ``T`` with the point factor matrices and
rounds the resulting chain. The online stage contracts the parameter cores
with Chebyshev rows at ``theta``; its cost depends on ``n`` and the ranks only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import e, sqrt
from typing import NamedTuple

import numpy as np

from .chebyshev import ChebyshevGrid, check_in_interval, factor_matrices, lebesgue_bound, q_rows
from .cross import EntryOracle, greedy_cross
from .kernels import POSITIVE_DEFINITE, KernelOracle, coefficient_entries
from .tensor import twist
from .tt import TtTensor, left_contraction, right_contraction, tt_round

log = logging.getLogger(__name__)

# ranks grow by at most one per bond and sweep, so the sweep budget caps the rank
DEFAULT_MAX_SWEEPS = 512


@dataclass(frozen=True)
class OfflineConfig:
    n: int = 27
    eps: float = 1e-6
    seed: int = 0
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    pool_size: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 Chebyshev nodes per dimension")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


def _param_nodes(box, n):
    return ChebyshevGrid.build(n, box).nodes if box else np.zeros((0, n))


@dataclass(frozen=True)
class ParametricFactorization:
    """``S`` (``N_s x r_d``), ``T`` (``N_t x r_{D-d}``) and the parameter cores."""

    S: np.ndarray
    T: np.ndarray
    param_cores: tuple
    param_box: tuple
    n: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        # C order keeps products bit-identical after a save/load round trip
        object.__setattr__(self, "S", np.ascontiguousarray(self.S, dtype=float))
        object.__setattr__(self, "T", np.ascontiguousarray(self.T, dtype=float))
        object.__setattr__(self, "param_cores", tuple(np.ascontiguousarray(c, float) for c in self.param_cores))
        object.__setattr__(self, "param_box", tuple(self.param_box))
        if len(self.param_cores) != len(self.param_box):
            raise ValueError("one parameter core per parameter interval")
        left = self.param_cores[0].shape[0] if self.param_cores else self.T.shape[1]
        right = self.param_cores[-1].shape[2] if self.param_cores else self.S.shape[1]
        if self.S.shape[1] != left or self.T.shape[1] != right:
            raise ValueError(
                f"S has {self.S.shape[1]} and T {self.T.shape[1]} columns; "
                f"parameter chain expects {left} and {right}"
            )
        object.__setattr__(self, "_nodes", _param_nodes(self.param_box, self.n))

    @property
    def d_theta(self) -> int:
        return len(self.param_cores)

    @property
    def ranks(self) -> tuple:
        return (self.S.shape[1],) + tuple(c.shape[2] for c in self.param_cores)

    @property
    def converged(self) -> bool:
        return bool(self.meta.get("converged", True))

    def storage(self) -> int:
        """Stored reals ``N_s r_d + N_t r_{d+d_theta} + sum n r r``."""
        return self.S.size + self.T.size + sum(c.size for c in self.param_cores)


def check_theta(box, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (len(box),):
        raise ValueError(f"expected {len(box)} parameter value(s), got shape {theta.shape}")
    for j, iv in enumerate(box):
        check_in_interval(iv, theta[j], f"parameter {j + 1} (value index)")
    return theta


def contract_param_cores(cores, box, nodes, theta) -> np.ndarray:
    """``prod_j G_j x_2 q_j(theta_j)``; the identity when there are no parameters."""
    H = None
    for j, g in enumerate(cores):
        q = q_rows(box[j], nodes[j], float(theta[j]))
        slab = np.einsum("aib,i->ab", g, q)
        H = slab if H is None else H @ slab
    return H


def _coefficient_oracle(oracle: KernelOracle, grid: ChebyshevGrid) -> EntryOracle:
    return EntryOracle((grid.n,) * grid.ndim, lambda idx: coefficient_entries(oracle, grid, idx))


def _meta(oracle, cfg, cross, kernel_evals):
    spec, geom = oracle.spec, oracle.geom
    return {
        "family": spec.family,
        "ell": spec.ell,
        "nu": spec.nu,
        "source_box": [[iv.lo, iv.hi] for iv in geom.source_box],
        "target_box": [[iv.lo, iv.hi] for iv in geom.target_box],
        "param_box": [[iv.lo, iv.hi] for iv in geom.param_box],
        "n": cfg.n,
        "eps": cfg.eps,
        "seed": cfg.seed,
        "converged": bool(cross.converged),
        "sweeps": cross.sweeps,
        "sample_error": cross.error,
        "cross_ranks": list(cross.tt.ranks),
        "evaluations": int(kernel_evals),
    }


def offline(
    oracle: KernelOracle,
    sources,
    targets,
    n: int | None = None,
    eps: float | None = None,
    seed: int | None = None,
    config: OfflineConfig | None = None,
) -> ParametricFactorization:
    """Build ``S``, ``T`` and the parameter cores for all ``theta`` in the box.

    Unconverged cross approximation does not raise; the result carries
    ``meta["converged"] = False``.
    """
    cfg = config or OfflineConfig()
    overrides = {k: v for k, v in (("n", n), ("eps", eps), ("seed", seed)) if v is not None}
    if overrides:
        cfg = OfflineConfig(**{**cfg.__dict__, **overrides})
    geom = oracle.geom
    d, dt = geom.d, geom.d_theta
    sources = np.asarray(sources, dtype=float).reshape(-1, d)
    targets = np.asarray(targets, dtype=float).reshape(-1, d)
    if len(sources) == 0 or len(targets) == 0:
        raise ValueError("need at least one source and one target point")

    grid = oracle.grid(cfg.n)
    fm = factor_matrices(grid, sources, targets, d)
    before = oracle.evaluations
    entries = _coefficient_oracle(oracle, grid)
    cross = greedy_cross(
        entries, cfg.eps, max_sweeps=cfg.max_sweeps, seed=cfg.seed, pool_size=cfg.pool_size
    )
    cores = cross.tt.cores
    S = left_contraction(cores[:d], fm.U)
    T = right_contraction(cores[d + dt:], fm.V)
    chain = TtTensor([twist(S, 1), *cores[d:d + dt], twist(T.T, 3)])
    rounded = tt_round(chain, cfg.eps).cores
    meta = _meta(oracle, cfg, cross, oracle.evaluations - before)
    log.info(
        "offline: cross ranks %s, rounded ranks %s, %d kernel evaluations",
        cross.tt.ranks, tuple(c.shape[2] for c in rounded), meta["evaluations"],
    )
    return ParametricFactorization(
        S=rounded[0][0],
        T=rounded[-1][:, :, 0].T,
        param_cores=rounded[1:-1],
        param_box=geom.param_box,
        n=cfg.n,
        meta=meta,
    )


def online(f: ParametricFactorization, theta=()) -> np.ndarray:
    """Core matrix ``H(theta)`` of size ``r_d x r_{d+d_theta}``."""
    if not f.param_cores:
        return np.eye(f.S.shape[1])
    theta = check_theta(f.param_box, theta)
    return contract_param_cores(f.param_cores, f.param_box, f._nodes, theta)


def evaluate(f: ParametricFactorization, theta=(), rows=None, cols=None, H=None) -> np.ndarray:
    """``S[rows] H(theta) T[cols]^T``; ``None`` selects all rows or columns."""
    if H is None:
        H = online(f, theta)
    S = f.S if rows is None else f.S[np.asarray(rows, dtype=np.intp)]
    T = f.T if cols is None else f.T[np.asarray(cols, dtype=np.intp)]
    return (S @ H) @ T.T


def ttk(oracle: KernelOracle, sources, targets, n=27, eps=1e-9, seed=0, config=None):
    """Non-parametric case: ``K ~ S T^T``. Returns ``(S, T, factorization)``."""
    if oracle.geom.d_theta:
        raise ValueError("ttk needs a kernel without free parameters")
    f = offline(oracle, sources, targets, n, eps, seed, config)
    return f.S, f.T, f


@dataclass(frozen=True)
class GlobalFactorization:
    """``[S T] = Q R`` plus the parameter cores, for ``X = Y``."""

    Q: np.ndarray
    R: np.ndarray
    split: int  # number of S columns
    param_cores: tuple
    param_box: tuple
    n: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "Q", np.ascontiguousarray(self.Q, dtype=float))
        object.__setattr__(self, "R", np.ascontiguousarray(self.R, dtype=float))
        object.__setattr__(self, "param_cores", tuple(np.ascontiguousarray(c, float) for c in self.param_cores))
        object.__setattr__(self, "param_box", tuple(self.param_box))
        object.__setattr__(self, "_nodes", _param_nodes(self.param_box, self.n))

    @property
    def rank(self) -> int:
        return self.Q.shape[1]

    @property
    def converged(self) -> bool:
        return bool(self.meta.get("converged", True))

    def storage(self) -> int:
        return self.Q.size + self.R.size + sum(c.size for c in self.param_cores)


def global_offline(oracle: KernelOracle, points, n=27, eps=1e-5, seed=0, config=None):
    """Offline stage with sources = targets followed by a thin QR of ``[S T]``."""
    geom = oracle.geom
    if geom.source_box != geom.target_box:
        raise ValueError("the symmetric variant needs identical source and target boxes")
    f = offline(oracle, points, points, n, eps, seed, config)
    Q, R = np.linalg.qr(np.hstack([f.S, f.T]))
    meta = dict(f.meta, clip_default=oracle.spec.family in POSITIVE_DEFINITE)
    return GlobalFactorization(Q, R, f.S.shape[1], f.param_cores, f.param_box, f.n, meta)


class SymmetricLowRank(NamedTuple):
    """``K ~ Q W Q^T`` with ``W`` exactly symmetric."""

    Q: np.ndarray
    W: np.ndarray

    @property
    def rank(self) -> int:
        return self.Q.shape[1]

    def evaluate(self, rows=None, cols=None) -> np.ndarray:
        Qr = self.Q if rows is None else self.Q[np.asarray(rows, dtype=np.intp)]
        Qc = self.Q if cols is None else self.Q[np.asarray(cols, dtype=np.intp)]
        out = (Qr @ self.W) @ Qc.T
        same = (rows is None and cols is None) or (
            rows is not None and cols is not None and np.array_equal(rows, cols)
        )
        return 0.5 * (out + out.T) if same else out


def _symmetric_eig(A):
    lam, U = np.linalg.eigh(A)
    order = np.argsort(-np.abs(lam), kind="stable")
    return lam[order], U[:, order]


def global_online(
    g: GlobalFactorization, theta=(), eps: float = 1e-5, compress: bool = False, clip=None
) -> SymmetricLowRank:
    """Symmetric (and optionally positive semidefinite) instantiation at ``theta``.

    ``clip`` drops negative eigenvalues; ``None`` picks the kernel's default.
    With ``compress`` the eigenpairs are truncated while
    ``||Q U L U^T Q^T - S H T^T||_F <= eps ||S H T^T||_F`` holds; both norms
    are computed exactly from the ``r x r`` factors since ``Q`` is orthonormal.
    """
    if clip is None:
        clip = bool(g.meta.get("clip_default", False))
    if g.param_cores:
        theta = check_theta(g.param_box, theta)
        H = contract_param_cores(g.param_cores, g.param_box, g._nodes, theta)
    else:
        H = np.eye(g.split)
    c = g.R.shape[1]  # columns of [S T]; R is wide when there are fewer points
    H0 = np.zeros((c, c))
    H0[: g.split, g.split:] = H
    B = g.R @ H0 @ g.R.T  # Q B Q^T = S H T^T
    sym = 0.5 * (B + B.T)
    lam, U = _symmetric_eig(sym)
    keep = lam >= 0 if clip else np.ones(len(lam), bool)
    if compress:
        skew2 = float(np.sum((0.5 * (B - B.T)) ** 2))
        target2 = (eps * float(np.linalg.norm(B))) ** 2
        idx = np.flatnonzero(keep)
        dropped = float(np.sum(lam[~keep] ** 2))
        # error^2 after keeping the first k of idx: dropped + tail + skew
        tail = np.concatenate([np.cumsum((lam[idx] ** 2)[::-1])[::-1], [0.0]])
        ok = np.flatnonzero(dropped + tail + skew2 <= target2)
        k = int(ok[0]) if ok.size else len(idx)
        idx = idx[:k]
        return SymmetricLowRank(g.Q @ U[:, idx], np.diag(lam[idx]))
    Uk = U[:, keep]
    W = (Uk * lam[keep]) @ Uk.T
    W = 0.5 * (W + W.T)
    return SymmetricLowRank(g.Q, W)


def varsigma(x: float) -> float:
    return x + sqrt(1.0 + x * x)


def interpolation_error_bound(k: int, D: int, c_f: float, gamma_f: float, sigma: int, diam: float) -> float:
    """Chebyshev interpolation error term ``E(k)`` for analytic-type derivative bounds.

    Assumes ``|d^v f| <= c_f (v + sigma - 1)! / (gamma_f^v (sigma - 1)!)`` in
    every coordinate direction; ``diam`` is the longest side of the domain.
    The Lebesgue constant is replaced by its logarithmic upper bound.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    lam = lebesgue_bound(k)
    return (
        2.0 * e * D * c_f * (lam + 1.0) ** D * (k + 1.0) ** sigma
        * (1.0 + diam / gamma_f) * varsigma(2.0 * gamma_f / diam) ** (-k)
    )


def tt_error_amplification(n: int, D: int) -> float:
    """Factor ``lambda_{n-1}^D`` bounding how interpolation amplifies tensor errors."""
    return lebesgue_bound(n) ** D
