"""Shared builders for tiny deterministic test bundles."""

from datetime import datetime, timedelta

import numpy as np
import pytest

from augscore.raster import BandImage, MaskRect, TimeSeries, TimeSeriesBundle

EPOCH = datetime(2020, 1, 1)


def make_image(samples, day=0, cloudy=False):
    return BandImage(
        samples=np.asarray(samples),
        timestamp=EPOCH + timedelta(days=day),
        cloudy=cloudy,
    )


def constant_image(values, height=4, width=4, dtype=np.uint8, day=0, cloudy=False):
    """One image whose band c is the constant values[c]."""
    values = np.asarray(values)
    samples = np.broadcast_to(
        values[:, None, None], (len(values), height, width)
    ).astype(dtype)
    return make_image(samples, day=day, cloudy=cloudy)


def constant_series(per_image_values, k=2, height=4, width=4, dtype=np.uint8, series_id="s0"):
    """A series of constant images; per_image_values is a (T, C) table."""
    images = tuple(
        constant_image(row, height=height, width=width, dtype=dtype, day=day)
        for day, row in enumerate(per_image_values)
    )
    return TimeSeries(id=series_id, images=images, mask=MaskRect(0, 0, k))


def random_uint8_bundle(rng, n_series=None, length=None, channels=None, size=16, k_max=3):
    """A random uint8-domain bundle with random masks, for oracle comparisons."""
    n = n_series or int(rng.integers(1, 11))
    t = length or int(rng.integers(2, 11))
    c = channels or int(rng.integers(1, 5))
    series = []
    for i in range(n):
        k = int(rng.integers(1, k_max + 1))
        mask = MaskRect(
            row0=int(rng.integers(0, size - k + 1)),
            col0=int(rng.integers(0, size - k + 1)),
            k=k,
        )
        images = tuple(
            make_image(rng.integers(0, 256, size=(c, size, size)).astype(np.uint8), day=day)
            for day in range(t)
        )
        series.append(TimeSeries(id=f"r{i}", images=images, mask=mask))
    return TimeSeriesBundle(series=tuple(series))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
