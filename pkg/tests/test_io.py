from __future__ import annotations

import struct

import numpy as np
import pytest

from pttk import io
from pttk.chebyshev import Interval
from pttk.kernels import KernelOracle, KernelSpec, ProblemGeometry, cube
from pttk.parametric import (
    GlobalFactorization,
    ParametricFactorization,
    evaluate,
    global_offline,
    global_online,
    offline,
)
from pttk.tt import TtTensor


def random_tt(seed=0):
    rng = np.random.default_rng(seed)
    return TtTensor([rng.standard_normal(s) for s in [(1, 3, 2), (2, 4, 3), (3, 2, 1)]])


@pytest.fixture(scope="module")
def parametric():
    geom = ProblemGeometry(cube(0, 1, 2), cube(1, 2, 2), (Interval(0.5, 1.5),))
    o = KernelOracle(KernelSpec("squared-exponential"), geom)
    rng = np.random.default_rng(0)
    X, Y = rng.uniform(0, 1, (30, 2)), rng.uniform(1, 2, (25, 2))
    return offline(o, X, Y, n=6, eps=1e-6, seed=0)


def assert_bit_equal(a, b):
    assert a.shape == b.shape
    assert a.tobytes() == b.tobytes()


def test_tt_round_trip_bit_exact(tmp_path):
    t = random_tt()
    path = tmp_path / "t.pttk"
    size = io.save(t, path)
    assert size == path.stat().st_size
    back = io.load(path)
    for a, b in zip(t.cores, back.cores):
        assert_bit_equal(a, b)


def test_parametric_round_trip(tmp_path, parametric):
    f = parametric
    path = tmp_path / "f.pttk"
    io.save(f, path)
    g = io.load(path)
    assert isinstance(g, ParametricFactorization)
    assert_bit_equal(f.S, g.S)
    assert_bit_equal(f.T, g.T)
    for a, b in zip(f.param_cores, g.param_cores):
        assert_bit_equal(a, b)
    assert g.param_box == f.param_box and g.n == f.n
    assert g.meta == f.meta
    assert_bit_equal(evaluate(f, [0.8]), evaluate(g, [0.8]))


def test_global_round_trip(tmp_path):
    geom = ProblemGeometry(cube(0, 1, 1), cube(0, 1, 1), (Interval(0.5, 1.5),))
    o = KernelOracle(KernelSpec("exponential"), geom)
    X = np.random.default_rng(1).uniform(0, 1, (20, 1))
    g = global_offline(o, X, n=5, eps=1e-6)
    path = tmp_path / "g.pttk"
    io.save(g, path)
    h = io.load(path)
    assert isinstance(h, GlobalFactorization)
    assert h.split == g.split and h.meta == g.meta
    assert_bit_equal(g.Q, h.Q)
    assert_bit_equal(g.R, h.R)
    assert_bit_equal(global_online(g, [1.0]).W, global_online(h, [1.0]).W)


def test_storage_matches_formula_within_ten_percent(parametric):
    data = io.to_bytes(parametric)
    formula = 8 * parametric.storage()
    assert formula <= len(data) <= 1.10 * formula + 4096


def test_corrupted_byte_fails_crc():
    data = bytearray(io.to_bytes(random_tt()))
    data[-20] ^= 0x01
    with pytest.raises(io.ContainerError, match="CRC"):
        io.from_bytes(bytes(data))


def test_bad_magic():
    data = io.to_bytes(random_tt())
    with pytest.raises(io.ContainerError, match="magic"):
        io.from_bytes(b"XXXX" + data[4:])


def test_truncation_detected():
    data = io.to_bytes(random_tt())
    for cut in (3, 20, len(data) - 1):
        with pytest.raises(io.ContainerError):
            io.from_bytes(data[:cut])


def test_trailing_bytes_detected():
    with pytest.raises(io.ContainerError, match="trailing"):
        io.from_bytes(io.to_bytes(random_tt()) + b"\0")


def test_version_mismatch():
    data = bytearray(io.to_bytes(random_tt()))
    struct.pack_into("<Q", data, len(io.MAGIC), io.VERSION + 1)
    with pytest.raises(io.ContainerError, match="version"):
        io.from_bytes(bytes(data))


def test_unknown_object_rejected():
    with pytest.raises(TypeError):
        io.to_bytes(np.eye(2))
