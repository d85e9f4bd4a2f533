"""PTTK1 binary container for tensor trains and kernel factorizations.

Layout (all integers little-endian)::

    b"PTTK1"
    u64 version | u64 kind | u64 section count
    section*:
        4-byte ASCII tag | u64 dtype (0 = f64, 1 = UTF-8 JSON) | u64 ndim | ndim x u64 dims
        payload (f64 little-endian in C order, or the JSON bytes)
        u32 CRC32 of the section header and payload

``kind`` is 0 for a :class:`TtTensor`, 1 for a :class:`ParametricFactorization`
and 2 for a :class:`GlobalFactorization`.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .chebyshev import Interval
from .parametric import GlobalFactorization, ParametricFactorization
from .tt import TtTensor

MAGIC = b"PTTK1"
VERSION = 1
KIND_TT, KIND_PARAMETRIC, KIND_GLOBAL = 0, 1, 2
F64, JSON = 0, 1


class ContainerError(ValueError):
    """Malformed, corrupted or incompatible PTTK1 data."""


def _section(tag: str, arr=None, meta=None) -> bytes:
    if meta is not None:
        payload = json.dumps(meta, sort_keys=True).encode("utf-8")
        head = struct.pack("<4sQQQ", tag.encode(), JSON, 1, len(payload))
    else:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        head = struct.pack(f"<4sQQ{arr.ndim}Q", tag.encode(), F64, arr.ndim, *arr.shape)
        payload = arr.tobytes()
    body = head + payload
    return body + struct.pack("<I", zlib.crc32(body))


def _encode(kind: int, sections) -> bytes:
    out = [MAGIC, struct.pack("<QQQ", VERSION, kind, len(sections))]
    out += sections
    return b"".join(out)


def _boxes(box):
    return [[iv.lo, iv.hi] for iv in box]


def to_bytes(obj) -> bytes:
    if isinstance(obj, TtTensor):
        return _encode(KIND_TT, [_section("CORE", c) for c in obj.cores])
    if isinstance(obj, ParametricFactorization):
        meta = {"n": obj.n, "param_box": _boxes(obj.param_box), "meta": obj.meta}
        secs = [_section("META", meta=meta), _section("SMAT", obj.S), _section("TMAT", obj.T)]
        secs += [_section("CORE", c) for c in obj.param_cores]
        return _encode(KIND_PARAMETRIC, secs)
    if isinstance(obj, GlobalFactorization):
        meta = {"n": obj.n, "split": obj.split, "param_box": _boxes(obj.param_box), "meta": obj.meta}
        secs = [_section("META", meta=meta), _section("QMAT", obj.Q), _section("RMAT", obj.R)]
        secs += [_section("CORE", c) for c in obj.param_cores]
        return _encode(KIND_GLOBAL, secs)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise ContainerError(f"truncated container: needed {k} bytes at offset {self.pos}")
        out = self.data[self.pos:self.pos + k]
        self.pos += k
        return out

    def u64(self, count: int = 1):
        return struct.unpack(f"<{count}Q", self.take(8 * count))


def _read_section(rd: _Reader):
    start = rd.pos
    tag = rd.take(4).decode("ascii", errors="replace")
    dtype, ndim = rd.u64(2)
    if dtype not in (F64, JSON) or ndim > 16:
        raise ContainerError(f"section {tag!r}: bad dtype {dtype} or ndim {ndim}")
    dims = rd.u64(ndim) if ndim else ()
    size = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    payload = rd.take(size * (8 if dtype == F64 else 1))
    body = rd.data[start:rd.pos]
    (crc,) = struct.unpack("<I", rd.take(4))
    if zlib.crc32(body) != crc:
        raise ContainerError(f"CRC mismatch in section {tag!r}")
    if dtype == JSON:
        return tag, json.loads(payload.decode("utf-8"))
    return tag, np.frombuffer(payload, dtype="<f8").reshape(dims).astype(float)


def from_bytes(data: bytes):
    rd = _Reader(data)
    if rd.take(len(MAGIC)) != MAGIC:
        raise ContainerError("not a PTTK1 container (bad magic)")
    version, kind, count = rd.u64(3)
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}, expected {VERSION}")
    sections = [_read_section(rd) for _ in range(count)]
    if rd.pos != len(data):
        raise ContainerError(f"{len(data) - rd.pos} trailing bytes after the last section")
    cores = [v for t, v in sections if t == "CORE"]
    named = {t: v for t, v in sections if t != "CORE"}
    if kind == KIND_TT:
        return TtTensor(cores)
    try:
        meta = named["META"]
        box = tuple(Interval(lo, hi) for lo, hi in meta["param_box"])
        if kind == KIND_PARAMETRIC:
            return ParametricFactorization(named["SMAT"], named["TMAT"], cores, box, meta["n"], meta["meta"])
        if kind == KIND_GLOBAL:
            return GlobalFactorization(
                named["QMAT"], named["RMAT"], meta["split"], cores, box, meta["n"], meta["meta"]
            )
    except KeyError as exc:
        raise ContainerError(f"missing section or field {exc}") from None
    raise ContainerError(f"unknown container kind {kind}")


def save(obj, path) -> int:
    """Write ``obj`` to ``path``; returns the number of bytes written."""
    data = to_bytes(obj)
    Path(path).write_bytes(data)
    return len(data)


def load(path):
    return from_bytes(Path(path).read_bytes())
