"""Config-driven experiments: points, error metrics, timings and CSV/JSON reports.

Config files are plain text, one ``key = value`` per line. ``#`` starts a
comment. Lists are comma separated and interval lists use ``;`` between
intervals, e.g. ``param_box = 0.866, 1.732; 0.5, 3``.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from statistics import median

import numpy as np

from .baselines import MatrixOracle, aca
from .chebyshev import Interval
from .kernels import KernelOracle, KernelSpec, ProblemGeometry, canonical_family, cube
from .parametric import OfflineConfig, evaluate, global_offline, global_online, offline, online

log = logging.getLogger(__name__)

MODES = ("ttk", "pttk", "global-1", "global-2", "aca-baseline")
FAST_TIMING = 1e-2  # below this many seconds a timing is repeated and the median kept


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: str = "laplace3d"
    ell: float | None = None
    nu: float | None = None
    d: int = 3
    source_box: tuple = (0.0, 1.0)
    target_box: tuple = (2.0, 3.0)
    param_box: tuple = ()
    n_sources: int = 2000
    n_targets: int = 2000
    n: int = 27
    eps: tuple = (1e-9,)
    theta_samples: int = 100
    subsample: int = 500
    norm: str = "fro"
    seed: int = 0
    mode: str = "ttk"
    max_sweeps: int = OfflineConfig.max_sweeps
    output: str | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kernel", canonical_family(self.kernel))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "source_box", tuple(float(v) for v in self.source_box))
        object.__setattr__(self, "target_box", tuple(float(v) for v in self.target_box))
        object.__setattr__(
            self, "param_box", tuple(tuple(float(v) for v in iv) for iv in self.param_box)
        )
        object.__setattr__(self, "eps", tuple(float(e) for e in np.atleast_1d(self.eps)))
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.norm not in ("fro", "2"):
            raise ConfigError("norm must be 'fro' or '2'")
        for box in (self.source_box, self.target_box, *self.param_box):
            if len(box) != 2 or not box[0] < box[1]:
                raise ConfigError(f"bad interval {box}")
        if min(self.n_sources, self.n_targets) < 1 or self.n < 2 or self.d < 1:
            raise ConfigError("need positive point counts, d >= 1 and n >= 2")
        if not self.eps or min(self.eps) <= 0:
            raise ConfigError("eps list must be nonempty and positive")
        if self.theta_samples < 0 or self.subsample < 0:
            raise ConfigError("theta_samples and subsample must be non-negative")
        if self.mode.startswith("global"):
            if self.source_box != self.target_box or self.n_sources != self.n_targets:
                raise ConfigError("global modes need identical source and target boxes and points")
        if self.mode == "ttk" and self.param_box:
            raise ConfigError("ttk mode takes no parameter box")
        try:
            spec = self.spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if spec.d_theta != len(self.param_box):
            raise ConfigError(
                f"{self.kernel} has free parameters {spec.param_names} but "
                f"{len(self.param_box)} parameter interval(s) were given"
            )

    def spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.ell, self.nu)

    def geometry(self) -> ProblemGeometry:
        return ProblemGeometry(
            cube(*self.source_box, self.d),
            cube(*self.target_box, self.d),
            tuple(Interval(*iv) for iv in self.param_box),
        )

    def replace(self, **kw) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self), **kw})


@dataclass
class ResultRow:
    kernel: str
    tol: float
    offline_time_s: float | None
    storage_bytes: int | None
    online_time_s: float | None
    error_mean: float | None
    error_max: float | None
    ranks: str
    evaluations: int
    seed: int
    status: str = "ok"


def _parse_value(key, raw):
    raw = raw.strip()
    try:
        if key in ("kernel", "mode", "norm", "output"):
            return raw
        if key in ("ell", "nu"):
            return None if raw.lower() in ("", "none") else float(raw)
        if key in ("d", "n_sources", "n_targets", "n", "theta_samples", "subsample", "seed", "max_sweeps"):
            return int(raw)
        if key in ("source_box", "target_box"):
            return tuple(float(v) for v in raw.split(","))
        if key == "param_box":
            return tuple(
                tuple(float(v) for v in part.split(",")) for part in raw.split(";") if part.strip()
            )
        if key == "eps":
            return tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r}") from None
    raise ConfigError(f"unknown config key {key!r}")


def parse_config(text: str, seed_fallback: int | None = None) -> ExperimentConfig:
    """Parse ``key = value`` text; a missing ``seed`` falls back to ``seed_fallback``."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    if "seed" not in values and seed_fallback is not None:
        values["seed"] = seed_fallback
    return ExperimentConfig(**values)


def load_config(path, seed_fallback: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, seed_fallback)


def env_seed(default: int = 0) -> int:
    raw = os.environ.get("PTTK_SEED")
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"PTTK_SEED must be an integer, got {raw!r}") from None


def generate_points(box, count: int, seed) -> np.ndarray:
    """``count`` i.i.d. uniform points in an axis-aligned box of ``Interval`` objects."""
    rng = np.random.default_rng(seed)
    lo = np.array([iv.lo for iv in box], dtype=float)
    hi = np.array([iv.hi for iv in box], dtype=float)
    return lo + (hi - lo) * rng.random((count, len(box)))


def _norm(a, norm):
    return float(np.linalg.norm(a, 2 if norm == "2" else "fro"))


def relative_error(K, K_hat, norm: str = "fro") -> float:
    """``||K - K_hat|| / ||K||`` in the spectral (``"2"``) or Frobenius norm."""
    K = np.asarray(K, dtype=float)
    denom = _norm(K, norm)
    if denom == 0.0:
        raise ZeroDivisionError("reference matrix has zero norm")
    return _norm(K - np.asarray(K_hat, dtype=float), norm) / denom


def subsampled_relative_error(oracle: KernelOracle, approx, sources, targets, rows, cols, theta=(), norm="fro"):
    """Relative error restricted to ``K(X[rows], Y[cols]; theta)``.

    ``approx(rows, cols)`` returns the matching block of the approximation.
    """
    K = oracle.matrix(np.asarray(sources)[rows], np.asarray(targets)[cols], theta)
    return relative_error(K, approx(rows, cols), norm)


def timed(fn, *args, **kw):
    """``(result, seconds)``; sub-10 ms calls are repeated and the median of 3 reported."""
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    dt = time.perf_counter() - t0
    if dt < FAST_TIMING:
        times = [dt]
        for _ in range(2):
            t0 = time.perf_counter()
            fn(*args, **kw)
            times.append(time.perf_counter() - t0)
        dt = median(times)
    return out, dt


def _subset(rng, total, size):
    if size == 0 or size >= total:
        return np.arange(total)
    return np.sort(rng.choice(total, size=size, replace=False))


def hardware_info() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


@dataclass
class ExperimentResult:
    rows: list
    theta: np.ndarray
    extras: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every tolerance of ``cfg`` and write reports if ``cfg.output`` is set."""
    ss = np.random.SeedSequence(cfg.seed)
    r_src, r_tgt, r_theta, r_sub = (np.random.default_rng(s) for s in ss.spawn(4))
    geom = cfg.geometry()
    X = generate_points(geom.source_box, cfg.n_sources, r_src)
    Y = X if cfg.mode.startswith("global") else generate_points(geom.target_box, cfg.n_targets, r_tgt)
    thetas = np.array(
        [[r_theta.uniform(iv.lo, iv.hi) for iv in geom.param_box] for _ in range(cfg.theta_samples)]
    ).reshape(cfg.theta_samples, geom.d_theta)
    rows = _subset(r_sub, len(X), cfg.subsample)
    cols = rows if cfg.mode.startswith("global") else _subset(r_sub, len(Y), cfg.subsample)

    results = []
    for eps in cfg.eps:
        oracle = KernelOracle(cfg.spec(), geom)
        try:
            results.append(_run_one(cfg, oracle, X, Y, thetas, rows, cols, eps))
        except (ValueError, ArithmeticError, MemoryError) as exc:
            log.exception("tolerance %g failed", eps)
            results.append(
                ResultRow(cfg.kernel, eps, None, None, None, None, None, "", oracle.evaluations, cfg.seed,
                          f"error: {exc}")
            )
    if cfg.output:
        write_reports(cfg, results)
    return ExperimentResult(results, thetas)


def _run_one(cfg, oracle, X, Y, thetas, rows, cols, eps) -> ResultRow:
    ocfg = OfflineConfig(n=cfg.n, eps=eps, seed=cfg.seed, max_sweeps=cfg.max_sweeps)
    theta_list = list(thetas)
    errors, times, ranks = [], [], []
    offline_time = storage = None
    status = "ok"

    def err(theta, block):
        K = oracle.matrix(X[rows], Y[cols], theta)
        return relative_error(K, block, cfg.norm)

    if cfg.mode in ("ttk", "pttk"):
        t0 = time.perf_counter()
        f = offline(oracle, X, Y, config=ocfg)
        offline_time = time.perf_counter() - t0
        storage = 8 * f.storage()
        status = "ok" if f.converged else "unconverged"
        evals = f.meta["evaluations"]
        ranks = [f.ranks]
        if cfg.mode == "ttk":
            # no online stage: a single error measurement
            errors.append(err((), evaluate(f, (), rows, cols)))
        for theta in theta_list if cfg.mode == "pttk" else ():
            H, dt = timed(online, f, theta)
            times.append(dt)
            errors.append(err(theta, evaluate(f, theta, rows, cols, H=H)))
    elif cfg.mode.startswith("global"):
        t0 = time.perf_counter()
        g = global_offline(oracle, X, config=ocfg)
        offline_time = time.perf_counter() - t0
        storage = 8 * g.storage()
        evals = g.meta["evaluations"]
        status = "ok" if g.converged else "unconverged"
        compress = cfg.mode == "global-2"
        for theta in theta_list:
            out, dt = timed(global_online, g, theta, eps, compress)
            times.append(dt)
            ranks.append(out.rank)
            errors.append(err(theta, out.evaluate(rows, cols)))
    else:
        evals = 0
        for theta in theta_list:
            m = MatrixOracle.from_kernel(oracle, X, Y, theta)
            before = oracle.evaluations
            pair = aca(m, eps)
            evals += oracle.evaluations - before
            _, dt = timed(aca, m, eps)
            times.append(dt)
            ranks.append(pair.rank)
            if not pair.converged:
                status = "unconverged"
            errors.append(err(theta, pair.evaluate(rows, cols)))

    if cfg.mode in ("ttk", "pttk"):
        rank_str = " ".join(str(r) for r in ranks[0])
    else:
        rank_str = f"{np.mean(ranks):.1f}" if ranks else ""
    return ResultRow(
        kernel=cfg.kernel,
        tol=eps,
        offline_time_s=offline_time,
        storage_bytes=storage,
        online_time_s=float(np.mean(times)) if times else None,
        error_mean=float(np.mean(errors)) if errors else None,
        error_max=float(np.max(errors)) if errors else None,
        ranks=rank_str,
        evaluations=int(evals),
        seed=cfg.seed,
        status=status,
    )


def write_reports(cfg: ExperimentConfig, rows) -> tuple:
    """CSV in :class:`ResultRow` column order plus a JSON sidecar with config and hardware."""
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_suffix(".csv")
    names = [f.name for f in fields(ResultRow)]
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            w.writerow(["" if getattr(r, k) is None else getattr(r, k) for k in names])
    json_path = out.with_suffix(".json")
    json_path.write_text(
        json.dumps(
            {"config": asdict(cfg), "hardware": hardware_info(), "rows": [asdict(r) for r in rows]},
            indent=2,
        )
    )
    return csv_path, json_path
