"""The deviation metric, step by step, on a toy single-band series.

A pixel signature is the per-band mean over the series' mask window.  Its
deviation at one timestamp is the channel-averaged L1 distance to the
closest signature at any *other* timestamp.  Averaging those deviations
over the whole bundle gives the natural-deviation score and its sigma
band; anything (for instance an augmented signature) that lands outside
the band deviates more than the series does naturally.
"""

import numpy as np

from augscore import (
    ChannelStats,
    deviation,
    extract_signature,
    is_consistent,
    score_noaug,
)
from augscore.raster import BandImage, MaskRect, TimeSeries, TimeSeriesBundle
from datetime import datetime, timedelta


def constant_image(value, day):
    samples = np.full((1, 6, 6), value, dtype=np.uint8)
    return BandImage(samples, datetime(2020, 1, 1) + timedelta(days=day))


# three acquisitions whose signatures are 10, 14 and 30
series = TimeSeries(
    id="toy",
    images=tuple(constant_image(v, d) for d, v in enumerate([10, 14, 30])),
    mask=MaskRect(2, 2, 2),
)
stats = ChannelStats(p99=np.array([255.0]))  # identity rescale for the demo

sigs = [float(extract_signature(img, series.mask).values[0]) for img in series.images]
print("signatures:", sigs)

for tau in range(series.length):
    probe = extract_signature(series.images[tau], series.mask)
    rec = deviation(series, tau, probe, stats)
    print(f"  tau={tau}: nearest other signature is "
          f"{min(abs(sigs[tau]-s) for t, s in enumerate(sigs) if t != tau)} away "
          f"-> d = {rec.d_u8}")

bundle = TimeSeriesBundle(series=(series,))
base = score_noaug(bundle, stats)
print(f"\nnatural deviation: mean {base.mean_u8}, sigma {base.sigma_u8:.4f}")
print(f"band: anything above {base.mean_u8 + base.sigma_u8:.4f} is inconsistent")

for probe_value in (16.0, 60.0):
    probe_d = min(abs(probe_value - s) for s in sigs[1:])  # probe replaces tau=0
    verdict = is_consistent(probe_d, base.mean_u8, base.sigma_u8)
    print(f"  a probe signature at {probe_value} deviates {probe_d} "
          f"-> consistent: {verdict}")
