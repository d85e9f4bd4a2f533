from __future__ import annotations

import csv
import json
from dataclasses import fields

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pttk.chebyshev import Interval
from pttk.harness import (
    ConfigError,
    ExperimentConfig,
    ResultRow,
    env_seed,
    generate_points,
    parse_config,
    relative_error,
    run_experiment,
    subsampled_relative_error,
    timed,
)
from pttk.kernels import KernelOracle, KernelSpec, ProblemGeometry, cube

BOX = (Interval(0.0, 1.0), Interval(-2.0, 3.0))


def small(**kw) -> ExperimentConfig:
    base = dict(kernel="laplace3d", d=2, n_sources=60, n_targets=50, n=6, eps=(1e-4,),
                theta_samples=0, subsample=30, seed=3)
    return ExperimentConfig(**{**base, **kw})


def test_generate_points_empty_inside_and_seeded():
    assert generate_points(BOX, 0, 1).shape == (0, 2)
    P = generate_points(BOX, 500, 7)
    assert np.all(P[:, 0] >= 0) and np.all(P[:, 0] <= 1)
    assert np.all(P[:, 1] >= -2) and np.all(P[:, 1] <= 3)
    assert generate_points(BOX, 500, 7).tobytes() == P.tobytes()


def test_relative_error_trivial_cases():
    K = np.random.default_rng(0).standard_normal((8, 5))
    for norm in ("fro", "2"):
        assert relative_error(K, K, norm) == 0.0
        assert relative_error(K, np.zeros_like(K), norm) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ZeroDivisionError):
        relative_error(np.zeros((2, 2)), np.eye(2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_relative_error_of_svd_truncation(seed, k):
    K = np.random.default_rng(seed).standard_normal((12, 10))
    U, s, Vt = np.linalg.svd(K)
    Kk = (U[:, :k] * s[:k]) @ Vt[:k]
    assert relative_error(K, Kk, "2") == pytest.approx(s[k] / s[0], rel=1e-10)


def test_subsampled_error_uses_block_only():
    geom = ProblemGeometry(cube(0, 1, 1), cube(2, 3, 1))
    o = KernelOracle(KernelSpec("laplace3d"), geom)
    X = np.linspace(0, 1, 10)[:, None]
    Y = np.linspace(2, 3, 7)[:, None]
    rows, cols = np.array([1, 4]), np.array([0, 6])
    full = o.matrix(X, Y)
    approx = lambda r, c: 2 * full[np.ix_(r, c)]
    before = o.evaluations
    assert subsampled_relative_error(o, approx, X, Y, rows, cols) == pytest.approx(1.0)
    assert o.evaluations - before == 4


def test_timed_returns_result():
    out, dt = timed(lambda a: a + 1, 1)
    assert out == 2 and dt >= 0


def test_config_parser_grammar():
    cfg = parse_config(
        """
        # Matérn desk config
        kernel = matern
        d = 3
        source_box = 0, 1
        target_box = 1, 2
        param_box = 0.866, 1.732; 0.5, 3   # length scale; smoothness
        eps = 1e-4, 1e-6
        mode = pttk
        """
    )
    assert cfg.kernel == "matern" and cfg.eps == (1e-4, 1e-6)
    assert cfg.param_box == ((0.866, 1.732), (0.5, 3.0))
    assert cfg.seed == 0


@pytest.mark.parametrize(
    "text, match",
    [
        ("kernel = laplace3d\nkernel = exponential", "duplicate"),
        ("colour = red", "unknown"),
        ("n = many", "cannot parse"),
        ("just words", "key = value"),
        ("mode = fast", "mode"),
        ("kernel = nope", "nope"),
        ("source_box = 1, 0", "interval"),
        ("eps = -1", "positive"),
        ("kernel = matern", "parameter interval"),
        ("mode = ttk\nkernel = matern\nparam_box = 1, 2; 0.5, 3", "ttk"),
        ("mode = global-1\ntarget_box = 2, 3", "identical"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_seed_fallback_and_env(monkeypatch):
    assert parse_config("", seed_fallback=11).seed == 11
    assert parse_config("seed = 4", seed_fallback=11).seed == 4
    monkeypatch.delenv("PTTK_SEED", raising=False)
    assert env_seed(5) == 5
    monkeypatch.setenv("PTTK_SEED", "17")
    assert env_seed() == 17
    monkeypatch.setenv("PTTK_SEED", "x")
    with pytest.raises(ConfigError):
        env_seed()


def test_ttk_mode_without_theta_gives_single_row():
    res = run_experiment(small())
    assert len(res.rows) == 1
    row = res.rows[0]
    assert row.online_time_s is None
    assert row.status == "ok" and row.error_mean == row.error_max < 1e-3
    assert row.evaluations > 0 and row.storage_bytes > 0


@pytest.mark.parametrize("mode", ["pttk", "global-1", "global-2", "aca-baseline"])
def test_modes_run(mode):
    # touching boxes keep every theta slice at a comparable norm
    kw = dict(mode=mode, kernel="squared-exponential", param_box=((0.5, 1.5),), theta_samples=3,
              n=10, target_box=(1.0, 2.0))
    if mode.startswith("global"):
        kw.update(target_box=(0.0, 1.0), n_targets=60)
    row = run_experiment(small(**kw)).rows[0]
    assert row.status == "ok"
    assert row.error_max < 1e-2
    assert row.online_time_s > 0


def test_run_experiment_is_deterministic(tmp_path):
    cfg = small(mode="pttk", kernel="exponential", param_box=((0.5, 1.5),), theta_samples=4,
                eps=(1e-3, 1e-5))
    a = run_experiment(cfg.replace(output=str(tmp_path / "a")))
    b = run_experiment(cfg.replace(output=str(tmp_path / "b")))
    assert a.theta.tobytes() == b.theta.tobytes()
    for ra, rb in zip(a.rows, b.rows):
        assert (ra.ranks, ra.error_mean, ra.error_max, ra.evaluations, ra.storage_bytes) == (
            rb.ranks, rb.error_mean, rb.error_max, rb.evaluations, rb.storage_bytes)

    def stable(path):
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        return [{k: v for k, v in r.items() if not k.endswith("time_s")} for r in rows]

    assert stable(tmp_path / "a.csv") == stable(tmp_path / "b.csv")


def test_reports_have_row_columns_and_config(tmp_path):
    out = tmp_path / "sub" / "report"
    run_experiment(small(output=str(out)))
    with open(out.with_suffix(".csv")) as fh:
        header = next(csv.reader(fh))
    assert header == [f.name for f in fields(ResultRow)]
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["config"]["kernel"] == "laplace3d"
    assert "cpu_count" in side["hardware"] and len(side["rows"]) == 1
