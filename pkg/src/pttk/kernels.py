"""Radial kernels, problem boxes and the D-variate function behind the coefficient tensor."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .chebyshev import Interval, ChebyshevGrid

FAMILIES = (
    "biharmonic",
    "laplace3d",
    "laplace2d",
    "thinplate",
    "thinplate-spline",
    "squared-exponential",
    "multiquadric",
    "exponential",
    "matern",
)

ALIASES = {
    "laplace-3d": "laplace3d",
    "laplace-2d": "laplace2d",
    "thin-plate": "thinplate",
    "thin-plate-spline": "thinplate-spline",
    "se": "squared-exponential",
    "bi-harmonic": "biharmonic",
}

# families with no length scale at all
SCALE_FREE = {"biharmonic", "laplace3d", "laplace2d", "thinplate"}
# families that blow up at r = 0
SINGULAR = {"biharmonic", "laplace3d", "laplace2d"}
# symmetric positive definite families; eigenvalue clipping defaults on for these
POSITIVE_DEFINITE = {"squared-exponential", "matern", "exponential"}


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in FAMILIES:
        raise ValueError(f"unknown kernel family {name!r}; choose from {', '.join(FAMILIES)}")
    return key


@dataclass(frozen=True)
class KernelSpec:
    """A Table-style radial kernel.

    ``ell`` and ``nu`` hold fixed values; ``None`` makes them parameters,
    taken from ``theta`` in the order ``(ell, nu)``.
    """

    family: str
    ell: float | None = None
    nu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        if self.family in SCALE_FREE:
            object.__setattr__(self, "ell", None)
        if self.family != "matern":
            object.__setattr__(self, "nu", None)

    @property
    def param_names(self) -> tuple:
        names = []
        if self.family not in SCALE_FREE and self.ell is None:
            names.append("ell")
        if self.family == "matern" and self.nu is None:
            names.append("nu")
        return tuple(names)

    @property
    def d_theta(self) -> int:
        return len(self.param_names)

    def _unpack(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1:] != (self.d_theta,):
            raise ValueError(
                f"{self.family} expects {self.d_theta} parameter(s) {self.param_names}, "
                f"got trailing shape {theta.shape[-1:]}"
            )
        vals = dict(zip(self.param_names, np.moveaxis(theta, -1, 0)))
        ell = vals.get("ell", self.ell)
        nu = vals.get("nu", self.nu)
        return ell, nu

    def radial(self, r, theta=()):
        """Kernel value as a function of the distance ``r`` (broadcasting)."""
        r = np.asarray(r, dtype=float)
        ell, nu = self._unpack(theta)
        fam = self.family
        if fam in SINGULAR and np.any(r == 0.0):
            raise ValueError(f"{fam} kernel is singular at r = 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "biharmonic":
                return r**-2
            if fam == "laplace3d":
                return 1.0 / r
            if fam == "laplace2d":
                return -np.log(r)
            if fam == "thinplate":
                return np.where(r > 0, r * r * np.log(np.where(r > 0, r, 1.0)), 0.0)
            s = r / ell
            if fam == "thinplate-spline":
                s2 = s * s
                return np.where(s2 > 0, s2 * np.log(np.where(s2 > 0, s2, 1.0)), 0.0)
            if fam == "squared-exponential":
                return np.exp(-s * s)
            if fam == "multiquadric":
                return np.sqrt(1.0 + s * s)
            if fam == "exponential":
                return np.exp(-s)
            return matern(r, ell, nu)


def matern(r, ell, nu):
    """Matern correlation ``2^(1-nu)/Gamma(nu) z^nu K_nu(z)``, ``z = sqrt(2 nu) r / ell``.

    ``K_nu`` is scipy's modified Bessel function of the second kind; the
    ``r = 0`` limit is 1.
    """
    r, ell, nu = np.broadcast_arrays(
        np.asarray(r, float), np.asarray(ell, float), np.asarray(nu, float)
    )
    z = np.sqrt(2.0 * nu) * r / ell
    out = np.ones(z.shape)
    # below this the value differs from the limit 1 by less than z^min(2 nu, 1)
    pos = z > 1e-30
    zp, nup = z[pos], nu[pos]
    # kve(nu, z) = K_nu(z) e^z; combining logs avoids overflow times underflow
    logpre = (1.0 - nup) * np.log(2.0) - special.gammaln(nup) + nup * np.log(zp) - zp
    out[pos] = np.exp(logpre + np.log(special.kve(nup, zp)))
    return out


def kernel_eval(spec: KernelSpec, x, y, theta=()):
    """``kappa(x, y; theta)`` for points with a trailing coordinate axis."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    r = np.sqrt(np.sum((x - y) ** 2, axis=-1))
    return spec.radial(r, theta)


def box_distance(bs: Sequence[Interval], bt: Sequence[Interval]) -> float:
    """Euclidean distance between two axis-aligned boxes (0 when they touch)."""
    gaps = [max(0.0, t.lo - s.hi, s.lo - t.hi) for s, t in zip(bs, bt)]
    return float(np.sqrt(np.sum(np.square(gaps))))


def cube(lo: float, hi: float, d: int) -> tuple:
    return tuple(Interval(lo, hi) for _ in range(d))


@dataclass(frozen=True)
class ProblemGeometry:
    source_box: tuple
    target_box: tuple
    param_box: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "source_box", tuple(self.source_box))
        object.__setattr__(self, "target_box", tuple(self.target_box))
        object.__setattr__(self, "param_box", tuple(self.param_box))
        if len(self.source_box) != len(self.target_box):
            raise ValueError("source and target boxes differ in dimension")

    @property
    def d(self) -> int:
        return len(self.source_box)

    @property
    def d_theta(self) -> int:
        return len(self.param_box)

    @property
    def D(self) -> int:
        return 2 * self.d + self.d_theta

    @property
    def intervals(self) -> tuple:
        """Per-dimension intervals in the order source, parameter, target."""
        return self.source_box + self.param_box + self.target_box

    @property
    def separation(self) -> float:
        return box_distance(self.source_box, self.target_box)


@dataclass
class KernelOracle:
    """Kernel plus geometry; counts every kernel evaluation it performs."""

    spec: KernelSpec
    geom: ProblemGeometry
    _count: int = field(default=0, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.spec.d_theta != self.geom.d_theta:
            raise ValueError(
                f"{self.spec.family} with fixed ell={self.spec.ell}, nu={self.spec.nu} "
                f"takes {self.spec.d_theta} parameter(s) but the parameter box has "
                f"{self.geom.d_theta}"
            )

    @property
    def evaluations(self) -> int:
        return self._count

    def _tick(self, k: int) -> None:
        with self._lock:
            self._count += int(k)

    def kernel(self, x, y, theta=()):
        vals = kernel_eval(self.spec, x, y, theta)
        self._tick(np.size(vals))
        return vals

    def matrix(self, sources, targets, theta=()):
        """Dense kernel matrix ``K(X, Y; theta)``."""
        d = self.geom.d
        xs = np.asarray(sources, float).reshape(-1, d)
        ys = np.asarray(targets, float).reshape(-1, d)
        r = np.sqrt(np.maximum(
            np.sum(xs**2, 1)[:, None] + np.sum(ys**2, 1)[None, :] - 2.0 * xs @ ys.T, 0.0
        ))
        # the expanded form loses digits for nearby points; redo those exactly
        close = r < 1e-3 * max(1.0, float(np.abs(xs).max(initial=0)), float(np.abs(ys).max(initial=0)))
        if np.any(close):
            i, j = np.nonzero(close)
            r[i, j] = np.sqrt(np.sum((xs[i] - ys[j]) ** 2, axis=1))
        vals = self.spec.radial(r, theta)
        self._tick(vals.size)
        return vals

    def f_kappa(self, xi):
        """Evaluate at ``xi = (x, theta, y)`` packed along the last axis."""
        xi = np.asarray(xi, float)
        d, dt = self.geom.d, self.geom.d_theta
        if xi.shape[-1] != 2 * d + dt:
            raise ValueError(f"expected {2 * d + dt} coordinates, got {xi.shape[-1]}")
        return self.kernel(xi[..., :d], xi[..., d + dt:], xi[..., d:d + dt])

    def grid(self, n: int) -> ChebyshevGrid:
        return ChebyshevGrid.build(n, self.geom.intervals)


def coefficient_entries(oracle: KernelOracle, grid: ChebyshevGrid, index) -> np.ndarray:
    """Coefficient tensor entries ``f_kappa`` at grid nodes, 0-based indices ``(M, D)``."""
    return oracle.f_kappa(grid.node_tuple(index))


def coefficient_entry(oracle: KernelOracle, grid: ChebyshevGrid, index) -> float:
    return float(coefficient_entries(oracle, grid, np.asarray(index)[None, :])[0])
