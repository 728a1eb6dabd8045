"""Deterministic synthetic time-series bundles with controllable deviation.

Each series emulates a single-class homogeneous area observed under varying
acquisition conditions: one base spectral signature per series, a
multiplicative gain and an additive offset drawn once per acquisition
(shared by the whole image), and independent per-pixel sensor noise.  No
land-cover change happens over time, so all signature deviation comes from
the jitter parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .errors import InvalidParams
from .numerics import to_uint16
from .raster import BandImage, MaskRect, TimeSeries, TimeSeriesBundle

__all__ = ["SynthParams", "generate_bundle"]

_EPOCH = datetime(2017, 1, 1)
_REVISIT = timedelta(days=5)


@dataclass(frozen=True, eq=False)
class SynthParams:
    """Parameters of the synthetic bundle generator.

    ``base_signatures`` may pin one uint16 signature per series (shape
    (n_series, channels)); when omitted, signatures are drawn uniformly
    from [800, 12000] per channel, which makes series spectrally non-gray.
    Jitter defaults put the baseline deviation in a mid-range regime where
    both consistent and inconsistent augmentations are observable.
    """

    n_series: int = 8
    length: int = 20
    channels: int = 4
    image_size: int = 16
    k: int = 5
    seed: int = 0
    base_signatures: np.ndarray | None = None
    gain_jitter: float = 0.02
    offset_jitter: float = 20.0
    pixel_noise: float = 10.0
    cloudy_probability: float = 0.0

    def __post_init__(self) -> None:
        if self.n_series < 1:
            raise InvalidParams(f"n_series must be >= 1, got {self.n_series}")
        if self.length < 2:
            raise InvalidParams(f"length must be >= 2, got {self.length}")
        if self.channels < 1:
            raise InvalidParams(f"channels must be >= 1, got {self.channels}")
        if self.image_size < 1:
            raise InvalidParams(f"image_size must be >= 1, got {self.image_size}")
        if not 1 <= self.k <= self.image_size:
            raise InvalidParams(
                f"k must lie in [1, image_size], got k={self.k}, image_size={self.image_size}"
            )
        for name in ("gain_jitter", "offset_jitter", "pixel_noise"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidParams(f"{name} must be finite and >= 0, got {value}")
        if not 0.0 <= self.cloudy_probability <= 1.0:
            raise InvalidParams(
                f"cloudy_probability must lie in [0, 1], got {self.cloudy_probability}"
            )
        if self.base_signatures is not None:
            base = np.asarray(self.base_signatures, dtype=np.float64)
            if base.shape != (self.n_series, self.channels):
                raise InvalidParams(
                    f"base_signatures must have shape ({self.n_series}, {self.channels}), "
                    f"got {base.shape}"
                )
            if np.any(base < 0) or np.any(base > 65535):
                raise InvalidParams("base_signatures must lie in the uint16 range")
            base = base.copy()
            base.setflags(write=False)
            object.__setattr__(self, "base_signatures", base)


def _seed_word(seed: int) -> int:
    return seed & ((1 << 64) - 1)


def generate_bundle(params: SynthParams) -> TimeSeriesBundle:
    """Generate a bundle, fully determined by ``params`` (including seed).

    The image at (series i, timestamp tau) is
    clip_u16(round(base[i] * g + o + eps)) with g ~ Normal(1, gain_jitter^2)
    and o ~ Normal(0, offset_jitter^2) shared across the image and eps drawn
    per pixel.  The mask sits at the image center; acquisition timestamps
    advance in fixed five-day steps.  Each series uses its own substream, so
    per-series generation may run in parallel.
    """
    n, t, c, size = params.n_series, params.length, params.channels, params.image_size
    seed_word = _seed_word(params.seed)

    base = params.base_signatures
    if base is None:
        base_rng = np.random.default_rng(np.random.SeedSequence((seed_word, 0)))
        base = base_rng.integers(800, 12001, size=(n, c)).astype(np.float64)

    anchor = (size - params.k) // 2
    mask = MaskRect(row0=anchor, col0=anchor, k=params.k)

    series = []
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence((seed_word, 1 + i)))
        images = []
        for tau in range(t):
            gain = 1.0 + params.gain_jitter * rng.standard_normal()
            offset = params.offset_jitter * rng.standard_normal()
            cloudy = bool(rng.random() < params.cloudy_probability)
            eps = params.pixel_noise * rng.standard_normal(size=(c, size, size))
            raw = base[i][:, None, None] * gain + offset + eps
            images.append(
                BandImage(
                    samples=to_uint16(raw),
                    timestamp=_EPOCH + tau * _REVISIT,
                    cloudy=cloudy,
                )
            )
        series.append(TimeSeries(id=f"series-{i:03d}", images=tuple(images), mask=mask))

    provenance = (
        f"synth(seed={params.seed}, n_series={n}, length={t}, channels={c}, "
        f"image_size={size}, k={params.k}, gain_jitter={params.gain_jitter:g}, "
        f"offset_jitter={params.offset_jitter:g}, pixel_noise={params.pixel_noise:g}, "
        f"cloudy_probability={params.cloudy_probability:g})"
    )
    return TimeSeriesBundle(series=tuple(series), provenance=provenance)
