"""Radiometric quantization: uint16 to uint8 via per-channel p99 scaling.

Raw samples are divided by the channel's 99th percentile, clipped to [0, 1]
and scaled by 255.  The pseudo-inverse rescales uint8-space deviations back
into the original uint16 value range so final scores are interpretable in
raw radiometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateChannel, StatsMismatch
from .numerics import round_half_away
from .raster import BandImage, TimeSeries, TimeSeriesBundle

__all__ = [
    "ChannelStats",
    "compute_p99",
    "invert_deviation_to_uint16",
    "load_stats",
    "quantize_bundle",
    "quantize_to_uint8",
    "save_stats",
]


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Per-channel 99th-percentile values (uint16 domain, stored as floats)."""

    p99: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.p99, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"p99 must be a non-empty 1-d vector, got shape {arr.shape}")
        if np.any(arr <= 0):
            bad = int(np.flatnonzero(arr <= 0)[0])
            raise DegenerateChannel(f"channel {bad} has non-positive p99 ({arr[bad]})")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "p99", arr)

    @property
    def channels(self) -> int:
        return len(self.p99)


def _nearest_rank_index(n: int) -> int:
    # 1-based order statistic ceil(0.99 * n), in exact integer arithmetic.
    return -((-99 * n) // 100)


def compute_p99(bundle: TimeSeriesBundle) -> ChannelStats:
    """Nearest-rank 99th percentile per channel, pooled over every image.

    The estimator is the order statistic at 1-based index ceil(0.99 * n):
    deterministic on integer data and reproducible across languages, unlike
    interpolating estimators.
    """
    channels = bundle.channels
    pooled = np.concatenate(
        [
            img.samples.reshape(channels, -1)
            for series in bundle.series
            for img in series.images
        ],
        axis=1,
    )
    n = pooled.shape[1]
    kth = _nearest_rank_index(n) - 1
    p99 = np.partition(pooled, kth, axis=1)[:, kth].astype(np.float64)
    if np.any(p99 <= 0):
        bad = int(np.flatnonzero(p99 <= 0)[0])
        raise DegenerateChannel(
            f"channel {bad} has p99 = {p99[bad]}; cannot quantize an all-zero channel"
        )
    return ChannelStats(p99=p99)


def quantize_values(samples: np.ndarray, p99: np.ndarray) -> np.ndarray:
    """Quantize a (C, H, W) uint16 block to uint8 with given per-channel p99."""
    scaled = samples.astype(np.float64) / p99[:, None, None]
    np.minimum(scaled, 1.0, out=scaled)
    scaled *= 255.0
    return np.clip(round_half_away(scaled), 0.0, 255.0).astype(np.uint8)


def quantize_to_uint8(image: BandImage, stats: ChannelStats) -> BandImage:
    """Map one uint16-domain image into uint8 space.

    q = clip(round(255 * min(v / p99, 1))), rounding half away from zero.
    """
    if image.domain != "uint16":
        raise StatsMismatch("quantize_to_uint8 expects a uint16-domain image")
    if stats.channels != image.channels:
        raise StatsMismatch(
            f"stats carry {stats.channels} channels, image has {image.channels}"
        )
    return BandImage(
        samples=quantize_values(image.samples, stats.p99),
        timestamp=image.timestamp,
        cloudy=image.cloudy,
    )


def quantize_bundle(bundle: TimeSeriesBundle, stats: ChannelStats) -> TimeSeriesBundle:
    """Quantize every image of a bundle into uint8 space."""
    series = tuple(
        TimeSeries(
            id=s.id,
            images=tuple(quantize_to_uint8(img, stats) for img in s.images),
            mask=s.mask,
        )
        for s in bundle.series
    )
    return TimeSeriesBundle(series=series, provenance=bundle.provenance)


def invert_deviation_to_uint16(per_band_abs_diffs: np.ndarray, stats: ChannelStats) -> float:
    """Rescale uint8-space per-band absolute differences into uint16 space.

    Each band is rescaled by its own p99 / 255 before the channel average,
    which is exact when p99 differs across channels and collapses to a
    single global rescale when p99 is uniform.
    """
    diffs = np.asarray(per_band_abs_diffs, dtype=np.float64)
    if diffs.ndim != 1 or diffs.size != stats.channels:
        raise StatsMismatch(
            f"expected {stats.channels} per-band differences, got shape {diffs.shape}"
        )
    return float(np.mean(diffs * (stats.p99 / 255.0)))


# ---------------------------------------------------------------------------
# Stats file interchange ({"p99": [...]})
# ---------------------------------------------------------------------------

def load_stats(path) -> ChannelStats:
    """Read a ``{"p99": [...]}`` JSON stats file."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(payload, dict) or "p99" not in payload:
        raise ValueError(f"{path}: expected an object with a 'p99' array")
    return ChannelStats(p99=np.asarray(payload["p99"], dtype=np.float64))


def save_stats(stats: ChannelStats, path) -> None:
    """Write a ``{"p99": [...]}`` JSON stats file (deterministic layout)."""
    text = json.dumps({"p99": [float(v) for v in stats.p99]}, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")
