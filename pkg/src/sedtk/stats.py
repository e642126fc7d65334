"""Per-instance frequency-wise and channel-wise feature statistics.

One mean/std pair per frequency bin (reduced over channel and time) or per
channel (reduced over frequency and time). Std is the population form,
consistent with the instance normalization in :mod:`sedtk.norm`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Batch, DomainTag, FeatureMap
from .errors import InvalidParameterError


@dataclass(frozen=True)
class FreqStats:
    """Per-frequency-bin mean and population std, each of length F."""

    mu: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class ChanStats:
    """Per-channel mean and population std, each of length C."""

    mu: np.ndarray
    sigma: np.ndarray


def freq_stats(fmap: FeatureMap) -> FreqStats:
    """Statistics over (channel, time) for each frequency bin."""
    x = fmap.data
    mu = x.mean(axis=(0, 2), dtype=np.float64)
    sigma = x.std(axis=(0, 2), dtype=np.float64)
    return FreqStats(mu=mu, sigma=sigma)


def chan_stats(fmap: FeatureMap) -> ChanStats:
    """Statistics over (frequency, time) for each channel."""
    x = fmap.data
    mu = x.mean(axis=(1, 2), dtype=np.float64)
    sigma = x.std(axis=(1, 2), dtype=np.float64)
    return ChanStats(mu=mu, sigma=sigma)


def export_stats(batch: Batch, which: str, path) -> int:
    """Write one row per batch item: ``tag,mu...,sigma...`` (2F or 2C values).

    The rows are the concatenated statistic vectors consumed by external
    embedding/visualization tools. Returns the number of rows written.
    """
    if which == "frequency":
        vectors = [freq_stats(m) for m in batch.maps]
    elif which == "channel":
        vectors = [chan_stats(m) for m in batch.maps]
    else:
        raise InvalidParameterError(
            f"which must be 'frequency' or 'channel', got {which!r}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tag, st in zip(batch.tags, vectors):
            values = np.concatenate([st.mu, st.sigma])
            fh.write(DomainTag(tag).name + ",")
            fh.write(",".join(f"{v:.9g}" for v in values))
            fh.write("\n")
    return len(batch)
