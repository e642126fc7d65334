"""Tensor substrate: (C, F, T) feature maps, domain-tagged batches, and the
deterministic random source threaded through every stochastic operation.

Storage is float32; all reductions elsewhere accumulate in float64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    EmptyBatchError,
    InvalidParameterError,
    ParseError,
    ShapeMismatchError,
)

STORAGE_DTYPE = np.float32

FMT_MAGIC = b"FMT1"


class DomainTag(IntEnum):
    DESED = 0
    MAESTRO = 1


@dataclass(frozen=True)
class FeatureMap:
    """Immutable real-valued array indexed (channel, frequency, time)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=STORAGE_DTYPE)
        if arr.ndim != 3:
            raise ShapeMismatchError(f"feature map must be 3-D (C,F,T), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ShapeMismatchError(f"feature map dims must all be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("feature map contains NaN or Inf")
        arr = arr.copy() if arr is self.data else arr
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class Batch:
    """Ordered, shape-homogeneous collection of (FeatureMap, DomainTag) items."""

    maps: tuple[FeatureMap, ...]
    tags: tuple[DomainTag, ...]

    def __post_init__(self):
        if len(self.maps) == 0:
            raise EmptyBatchError("batch must contain at least one item")
        if len(self.maps) != len(self.tags):
            raise ShapeMismatchError(
                f"{len(self.maps)} maps but {len(self.tags)} domain tags"
            )
        ref = self.maps[0].shape
        for i, m in enumerate(self.maps):
            if m.shape != ref:
                raise ShapeMismatchError(
                    f"batch item {i} has shape {m.shape}, expected {ref}"
                )
        object.__setattr__(self, "tags", tuple(DomainTag(t) for t in self.tags))

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def shape(self) -> tuple[int, int, int]:
        """Common (C, F, T) of every item."""
        return self.maps[0].shape

    def stack(self) -> np.ndarray:
        """Copy items into one (N, C, F, T) float32 array."""
        return np.stack([m.data for m in self.maps]).astype(STORAGE_DTYPE)


def make_batch(maps: Sequence[FeatureMap], tags: Sequence[DomainTag]) -> Batch:
    """Assemble a batch, preserving input order."""
    if len(maps) == 0:
        raise EmptyBatchError("cannot build a batch from zero maps")
    return Batch(tuple(maps), tuple(tags))


class RandomSource:
    """Counter-based (Philox) random stream with explicit seed threading.

    A source is single-owner: pass it explicitly, never share across
    concurrent consumers. Identical seed plus identical call sequence
    yields identical outputs. ``split`` derives independent child streams.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    @classmethod
    def _wrap(cls, gen: np.random.Generator, seed: int) -> "RandomSource":
        src = cls.__new__(cls)
        src.seed = seed
        src._gen = gen
        return src

    def uniform(self, size=None):
        """Draw from U[0, 1); scalar float when size is None."""
        if size is None:
            return float(self._gen.random())
        return self._gen.random(size=size)

    def bernoulli(self, p: float) -> bool:
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError(f"probability must be in [0,1], got {p}")
        return bool(self._gen.random() < p)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def split(self, n: int) -> list["RandomSource"]:
        """Spawn n independent child streams (parent remains usable)."""
        return [self._wrap(g, self.seed) for g in self._gen.spawn(n)]


def beta_sample(rng: RandomSource, alpha: float, size=None):
    """Draw from the symmetric Beta(alpha, alpha) distribution.

    Uses Johnk's rejection algorithm in log space, which is exact for any
    alpha > 0 and efficient for alpha < 1 (the regime used here). Returns a
    scalar float when size is None, else an array of the given shape.
    """
    if not alpha > 0:
        raise InvalidParameterError(f"Beta coefficient must be > 0, got {alpha}")
    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n, dtype=np.float64)
    filled = 0
    while filled < n:
        m = n - filled
        u = rng.uniform(size=(2, m))
        with np.errstate(divide="ignore"):
            logx = np.log(u[0]) / alpha
            logy = np.log(u[1]) / alpha
        logsum = np.logaddexp(logx, logy)
        # reject x + y > 1; non-finite logsum means both uniforms were 0
        ok = (logsum <= 0.0) & np.isfinite(logsum)
        k = int(ok.sum())
        out[filled : filled + k] = np.exp(logx[ok] - logsum[ok])
        filled += k
    if size is None:
        return float(out[0])
    return out.reshape(size)


def write_fmt(batch: Batch, path) -> None:
    """Serialize a batch to the binary tensor format.

    Layout: magic "FMT1", u32-LE N,C,F,T, N*C*F*T little-endian float32 in
    (n,c,f,t) row-major order, then N domain-tag bytes (0=DESED, 1=MAESTRO).
    """
    n = len(batch)
    c, f, t = batch.shape
    with open(path, "wb") as fh:
        fh.write(FMT_MAGIC)
        fh.write(struct.pack("<4I", n, c, f, t))
        fh.write(batch.stack().astype("<f4", copy=False).tobytes(order="C"))
        fh.write(bytes(int(tag) for tag in batch.tags))


def read_fmt(path) -> Batch:
    """Read a batch from the binary tensor format written by ``write_fmt``."""
    raw = Path(path).read_bytes()
    if len(raw) < 20 or raw[:4] != FMT_MAGIC:
        raise ParseError("not a FMT1 tensor file", path=path)
    n, c, f, t = struct.unpack("<4I", raw[4:20])
    if n < 1 or c < 1 or f < 1 or t < 1:
        raise ParseError(f"degenerate dims N={n} C={c} F={f} T={t}", path=path)
    payload = n * c * f * t * 4
    expected = 20 + payload + n
    if len(raw) != expected:
        raise ParseError(
            f"file is {len(raw)} bytes, expected {expected} for dims "
            f"N={n} C={c} F={f} T={t}",
            path=path,
        )
    data = np.frombuffer(raw, dtype="<f4", count=n * c * f * t, offset=20)
    data = data.reshape(n, c, f, t)
    if not np.all(np.isfinite(data)):
        raise ParseError("tensor payload contains NaN or Inf", path=path)
    tag_bytes = raw[20 + payload :]
    if any(b not in (0, 1) for b in tag_bytes):
        raise ParseError("domain tag bytes must be 0 or 1", path=path)
    maps = [FeatureMap(data[i]) for i in range(n)]
    tags = [DomainTag(b) for b in tag_bytes]
    return make_batch(maps, tags)
