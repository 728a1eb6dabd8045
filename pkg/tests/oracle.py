"""Independent brute-force reimplementation of the deviation scores.

Everything here is deliberately written with plain Python loops, floats and
``math`` so it shares no code path with the package: signatures are summed
pixel by pixel, nearest neighbors come from an explicit double loop over
timestamps, and moments use textbook formulas.  Used as the ground truth
for the scoring engine.
"""

import math


def signature(samples, row0, col0, k):
    """Per-band mean over the k*k window; samples is indexable as [c][r][w]."""
    channels = len(samples)
    sig = []
    for c in range(channels):
        total = 0.0
        for r in range(row0, row0 + k):
            for w in range(col0, col0 + k):
                total += float(samples[c][r][w])
        sig.append(total / float(k * k))
    return sig


def nearest_deviation(sigs, tau, probe, p99):
    """(d_u8, d_u16) of a probe against all other-timestamp signatures."""
    channels = len(probe)
    best_total = None
    best_bands = None
    for other in range(len(sigs)):
        if other == tau:
            continue
        bands = [abs(probe[c] - sigs[other][c]) for c in range(channels)]
        total = sum(bands)
        if best_total is None or total < best_total:
            best_total = total
            best_bands = bands
    d_u8 = best_total / channels
    d_u16 = sum(bands_c * p99[c] / 255.0 for c, bands_c in enumerate(best_bands)) / channels
    return d_u8, d_u16


def noaug_score(bundle, p99):
    """Mean and population sigma over all per-record deviations, both spaces."""
    d8_all, d16_all = [], []
    for series in bundle.series:
        row0, col0, k = series.mask.row0, series.mask.col0, series.mask.k
        sigs = [signature(img.samples, row0, col0, k) for img in series.images]
        for tau in range(len(sigs)):
            d8, d16 = nearest_deviation(sigs, tau, sigs[tau], p99)
            d8_all.append(d8)
            d16_all.append(d16)
    return moments(d8_all) + moments(d16_all)


def moments(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)
