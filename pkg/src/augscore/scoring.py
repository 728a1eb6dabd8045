"""Signature deviation scores for unaugmented and augmented image time series.

The deviation of a probe signature within a series is the channel-averaged
L1 distance to the closest unaugmented signature at another timestamp:

    d = (1/C) * min over tau' != tau of || probe - sig(t[tau']) ||_1

The unaugmented score is the mean of d over every (series, timestamp); its
population standard deviation defines the natural-deviation band.  The
augmented score repeats each timestamp M times with freshly sampled
augmentation draws and averages d over (series, timestamp, repetition).
Reference signatures always stay unaugmented.

Every deviation is reported twice: in uint8 score space and, through the
per-band p99 pseudo-inverse, in the original uint16 space.

Randomness is counter-based: the draw for repetition m of image tau in
series i under (technique, alpha_max) comes from a substream keyed by the
tuple (master_seed, technique, alpha_max, i, tau, m), so results are
bit-identical no matter how work is ordered or parallelized.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import augment
from .augment import AugmentSpec, Technique
from .errors import DomainError, SeriesTooShort, StatsMismatch
from .numerics import to_uint8
from .preprocess import ChannelStats
from .raster import PixelSignature, TimeSeries, TimeSeriesBundle, extract_signature
from .streams import counter_uniforms, counter_words, float_word, fold_last, fold_words

__all__ = [
    "AugScore",
    "DeviationRecord",
    "NoaugScore",
    "ScoreSummary",
    "deviation",
    "is_consistent",
    "score_aug",
    "score_noaug",
    "sweep",
]


@dataclass(frozen=True)
class DeviationRecord:
    """Deviation of one probe signature, in both score spaces."""

    series_id: str
    tau: int
    d_u8: float
    d_u16: float


@dataclass(frozen=True, eq=False)
class NoaugScore:
    """Mean and population standard deviation of unaugmented deviations."""

    mean_u8: float
    sigma_u8: float
    mean_u16: float
    sigma_u16: float
    records: tuple[DeviationRecord, ...]


@dataclass(frozen=True)
class AugScore:
    """Mean augmented deviation for one (technique, alpha_max) cell.

    ``std_*`` is the population standard deviation of the individual
    deviation values and ``n_records`` their count, which together give the
    Monte-Carlo standard error of the mean.  ``alpha_max`` is None for the
    magnitude-free grayscale technique.
    """

    technique: Technique
    alpha_max: float | None
    mean_u8: float
    mean_u16: float
    std_u8: float
    std_u16: float
    n_records: int


@dataclass(frozen=True, eq=False)
class ScoreSummary:
    """A full sweep: the unaugmented baseline plus one cell per sweep point."""

    noaug: NoaugScore
    cells: tuple[AugScore, ...]
    repetitions: int
    seed: int
    apply_probability: float


def is_consistent(s_aug: float, s_noaug: float, sigma: float) -> bool:
    """Whether an augmented score stays within the natural deviation band.

    The boundary is inclusive: s_aug == s_noaug + sigma counts as consistent.
    All three values must be in the same score space.
    """
    return s_aug <= s_noaug + sigma


# ---------------------------------------------------------------------------
# Core kernels
# ---------------------------------------------------------------------------

def _nearest_deviation(
    refs: np.ndarray, probes: np.ndarray, exclude_tau: int | None, scale: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    # refs (T, C), probes (P, C), scale (C,) = p99 / 255.
    diffs = np.abs(probes[:, None, :] - refs[None, :, :])
    sums = diffs.sum(axis=2)
    if exclude_tau is not None:
        sums[:, exclude_tau] = np.inf
    pick = np.argmin(sums, axis=1)
    rows = np.arange(probes.shape[0])
    d_u8 = sums[rows, pick] / refs.shape[1]
    d_u16 = (diffs[rows, pick, :] * scale).mean(axis=1)
    return d_u8, d_u16


def _noaug_series(refs: np.ndarray, scale: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diffs = np.abs(refs[:, None, :] - refs[None, :, :])
    sums = diffs.sum(axis=2)
    np.fill_diagonal(sums, np.inf)
    pick = np.argmin(sums, axis=1)
    rows = np.arange(refs.shape[0])
    d_u8 = sums[rows, pick] / refs.shape[1]
    d_u16 = (diffs[rows, pick, :] * scale).mean(axis=1)
    return d_u8, d_u16


class _SeriesContext:
    """Precomputed per-series state shared (read-only) across sweep cells."""

    __slots__ = (
        "index",
        "id",
        "stack",
        "rows",
        "cols",
        "refs",
        "window",
        "means",
        "smooth",
        "noaug_d8",
        "noaug_d16",
    )

    def __init__(self, index: int, series: TimeSeries):
        self.index = index
        self.id = series.id
        self.stack = np.stack([img.samples for img in series.images])  # (T, C, H, W)
        self.rows, self.cols = series.mask.window()
        self.refs = np.stack(
            [extract_signature(img, series.mask).values for img in series.images]
        )
        self.window = self.stack[:, :, self.rows, self.cols]  # (T, C, k, k) view
        self.means = self.stack.astype(np.float64).mean(axis=(2, 3))  # (T, C)
        self.smooth: np.ndarray | None = None
        self.noaug_d8: np.ndarray | None = None
        self.noaug_d16: np.ndarray | None = None

    def ensure_smooth(self) -> None:
        if self.smooth is None:
            self.smooth = augment.smooth_reference(self.stack)

    @property
    def length(self) -> int:
        return self.stack.shape[0]


class _BundleContext:
    __slots__ = ("series", "scale", "channels")

    def __init__(self, bundle: TimeSeriesBundle, stats: ChannelStats):
        if bundle.domain != "uint8":
            raise DomainError("scores are computed on uint8-domain (quantized) bundles")
        if stats.channels != bundle.channels:
            raise StatsMismatch(
                f"stats carry {stats.channels} channels, bundle has {bundle.channels}"
            )
        for s in bundle.series:
            if s.length < 2:
                raise SeriesTooShort(
                    f"series {s.id!r} has {s.length} image(s); deviations need at least 2"
                )
        self.series = [_SeriesContext(i, s) for i, s in enumerate(bundle.series)]
        self.scale = stats.p99 / 255.0
        self.channels = bundle.channels
        for sc in self.series:
            sc.noaug_d8, sc.noaug_d16 = _noaug_series(sc.refs, self.scale)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def deviation(
    series: TimeSeries, tau: int, probe: PixelSignature, stats: ChannelStats
) -> DeviationRecord:
    """Deviation of one probe signature from its series at timestamp tau.

    The probe is the signature of the image at tau (or of an augmented
    version of it); the reference signatures are always the unaugmented
    ones, and tau itself is excluded from the minimum.
    """
    if series.domain != "uint8":
        raise DomainError("deviation expects a uint8-domain series")
    if series.length < 2:
        raise SeriesTooShort(f"series {series.id!r} needs at least 2 images")
    if not 0 <= tau < series.length:
        raise ValueError(f"tau {tau} outside [0, {series.length})")
    if len(probe) != series.channels:
        raise ValueError(
            f"probe has {len(probe)} bands, series has {series.channels}"
        )
    if stats.channels != series.channels:
        raise StatsMismatch(
            f"stats carry {stats.channels} channels, series has {series.channels}"
        )
    refs = np.stack([extract_signature(img, series.mask).values for img in series.images])
    d_u8, d_u16 = _nearest_deviation(refs, probe.values[None, :], tau, stats.p99 / 255.0)
    return DeviationRecord(series_id=series.id, tau=tau, d_u8=float(d_u8[0]), d_u16=float(d_u16[0]))


def score_noaug(bundle: TimeSeriesBundle, stats: ChannelStats) -> NoaugScore:
    """Expected deviation of unaugmented signatures, with its sigma band.

    The mean runs over all sum(T_i) individual deviations; sigma is the
    population standard deviation of the same values.
    """
    return _score_noaug_ctx(_BundleContext(bundle, stats))


def _score_noaug_ctx(ctx: _BundleContext) -> NoaugScore:
    d8_parts, d16_parts, records = [], [], []
    for sc in ctx.series:
        d8, d16 = sc.noaug_d8, sc.noaug_d16
        d8_parts.append(d8)
        d16_parts.append(d16)
        records.extend(
            DeviationRecord(sc.id, tau, float(d8[tau]), float(d16[tau]))
            for tau in range(sc.length)
        )
    d8_all = np.concatenate(d8_parts)
    d16_all = np.concatenate(d16_parts)
    return NoaugScore(
        mean_u8=float(np.mean(d8_all)),
        sigma_u8=float(np.std(d8_all)),
        mean_u16=float(np.mean(d16_all)),
        sigma_u16=float(np.std(d16_all)),
        records=tuple(records),
    )


def _augmented_window_signatures(
    sc: _SeriesContext,
    tau: int,
    technique: Technique,
    magnitudes: np.ndarray,
    noise_seeds: np.ndarray | None,
) -> np.ndarray:
    """Signatures of augmented copies of image tau, one per magnitude.

    Exactly equivalent to applying the per-image operator and extracting the
    mask signature, but per-pixel techniques are evaluated on the mask
    window only, with whole-image quantities (channel means, the smoothing
    pass, the noise field) taken from the full image.
    """
    win = sc.window[tau]  # (C, k, k) uint8
    count = len(magnitudes)
    shape = (count,) + win.shape
    if technique is Technique.GRAYSCALE:
        out = augment.grayscale_values(win)
        sig = out.astype(np.float64).mean(axis=(1, 2))
        return np.repeat(sig[None, :], count, axis=0)
    if technique is Technique.BRIGHTNESS:
        out = augment.brightness_values(np.broadcast_to(win, shape), magnitudes)
    elif technique is Technique.POSTERIZE:
        out = augment.posterize_values(np.broadcast_to(win, shape), magnitudes)
    elif technique is Technique.SOLARIZE:
        out = augment.solarize_values(np.broadcast_to(win, shape), magnitudes)
    elif technique is Technique.CONTRAST:
        out = augment.contrast_values(
            np.broadcast_to(win, shape), magnitudes, means=sc.means[tau]
        )
    elif technique is Technique.SHARPNESS:
        sc.ensure_smooth()
        smooth_win = sc.smooth[tau][:, sc.rows, sc.cols]
        out = augment.sharpness_values(
            np.broadcast_to(win, shape), magnitudes, smoothed=smooth_win
        )
    elif technique is Technique.GAUSSIAN_BLUR:
        full = np.broadcast_to(sc.stack[tau], (count,) + sc.stack[tau].shape)
        blurred = augment.gaussian_blur_values(full, magnitudes)
        out = blurred[:, :, sc.rows, sc.cols]
    elif technique is Technique.GAUSSIAN_NOISE:
        win_f = win.astype(np.float64)
        out_f = np.empty((count,) + win.shape, dtype=np.float64)
        full_shape = sc.stack[tau].shape
        for a in range(count):
            eps = augment.noise_field(full_shape, float(magnitudes[a]), int(noise_seeds[a]))
            out_f[a] = win_f + eps[:, sc.rows, sc.cols]
        out = to_uint8(out_f)
    else:  # pragma: no cover - enum is exhaustive
        raise AssertionError(technique)
    return out.astype(np.float64).mean(axis=(2, 3))


def _score_cell(
    ctx: _BundleContext,
    technique: Technique,
    alpha_max: float | None,
    repetitions: int,
    master_seed: int,
    apply_probability: float,
    magnitude_mode: str,
    include_self_reference: bool,
) -> AugScore:
    alpha_key = 0.0 if alpha_max is None else float(alpha_max)
    alpha_word = float_word(alpha_key)
    signed_low = -alpha_key if technique.signed else 0.0
    counters = np.arange(repetitions, dtype=np.uint64)
    d8_parts, d16_parts = [], []
    mean8_parts, mean16_parts = [], []
    for sc in ctx.series:
        cell_mean8 = np.empty(sc.length)
        cell_mean16 = np.empty(sc.length)
        for tau in range(sc.length):
            prefix = fold_words(master_seed, technique.index, alpha_word, sc.index, tau)
            keys = fold_last(prefix, counters)
            applied = counter_uniforms(keys, 0) < apply_probability
            probes = np.repeat(sc.refs[tau][None, :], repetitions, axis=0)
            idx = np.flatnonzero(applied)
            if idx.size:
                if technique.magnitude_free:
                    mags = np.zeros(idx.size)
                elif magnitude_mode == "fixed":
                    mags = np.full(idx.size, alpha_key)
                else:
                    u1 = counter_uniforms(keys, 1)[idx]
                    mags = signed_low + u1 * (alpha_key - signed_low)
                seeds = None
                if technique is Technique.GAUSSIAN_NOISE:
                    seeds = counter_words(keys, 2)[idx]
                probes[idx] = _augmented_window_signatures(sc, tau, technique, mags, seeds)
            exclude = None if include_self_reference else tau
            d8, d16 = _nearest_deviation(sc.refs, probes, exclude, ctx.scale)
            d8_parts.append(d8)
            d16_parts.append(d16)
            # Repetition means are taken relative to the deviation of the
            # unaugmented probe under the same reference set; draws that do
            # not alter the image then contribute exact zeros, which makes
            # the never-applied case reduce to the unaugmented score
            # bit-for-bit instead of merely to rounding accuracy.
            base8 = sc.noaug_d8[tau] if exclude is not None else 0.0
            base16 = sc.noaug_d16[tau] if exclude is not None else 0.0
            cell_mean8[tau] = base8 + np.mean(d8 - base8)
            cell_mean16[tau] = base16 + np.mean(d16 - base16)
        mean8_parts.append(cell_mean8)
        mean16_parts.append(cell_mean16)
    d8_all = np.concatenate(d8_parts)
    d16_all = np.concatenate(d16_parts)
    return AugScore(
        technique=technique,
        alpha_max=None if technique.magnitude_free else float(alpha_max),
        mean_u8=float(np.mean(np.concatenate(mean8_parts))),
        mean_u16=float(np.mean(np.concatenate(mean16_parts))),
        std_u8=float(np.std(d8_all)),
        std_u16=float(np.std(d16_all)),
        n_records=int(d8_all.size),
    )


def score_aug(
    bundle: TimeSeriesBundle,
    spec: AugmentSpec,
    repetitions: int,
    master_seed: int,
    stats: ChannelStats,
    include_self_reference: bool = False,
) -> AugScore:
    """Expected deviation of augmented signatures for one augmentation spec.

    Each of the ``repetitions`` passes re-samples the augmentation draw from
    the substream keyed by (master_seed, technique, alpha_max, series index,
    tau, repetition).  With ``include_self_reference`` (off by default, see
    the consistency question around the same-timestamp original) the
    unaugmented signature at tau itself also competes in the minimum.

    The mean is accumulated per (series, tau) relative to the unaugmented
    deviation there, then averaged across (series, tau) in a fixed order;
    this baseline-shifted form is the same quantity in exact arithmetic and
    guarantees the bit-exact reduction to :func:`score_noaug` when no draw
    alters its image.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    ctx = _BundleContext(bundle, stats)
    alpha = None if spec.technique.magnitude_free else float(spec.alpha_max)
    return _score_cell(
        ctx,
        spec.technique,
        alpha,
        repetitions,
        master_seed,
        spec.apply_probability,
        spec.magnitude_mode,
        include_self_reference,
    )


def sweep(
    bundle: TimeSeriesBundle,
    techniques,
    alpha_max_list,
    repetitions: int,
    master_seed: int,
    stats: ChannelStats,
    apply_probability: float = 0.5,
    magnitude_mode: str = "uniform",
    include_self_reference: bool = False,
    threads: int = 1,
) -> ScoreSummary:
    """Score every (technique, alpha_max) cell plus the unaugmented baseline.

    Grayscale contributes a single magnitude-free cell regardless of the
    alpha list.  Cells are evaluated independently (optionally on a thread
    pool) and assembled in canonical (technique token, alpha) order; because
    every draw comes from its own counter substream the result is
    bit-identical for any thread count.
    """
    techniques = list(dict.fromkeys(techniques))
    if not techniques:
        raise ValueError("technique list must not be empty")
    alphas = sorted(dict.fromkeys(float(a) for a in alpha_max_list))
    if not alphas:
        raise ValueError("alpha_max list must not be empty")
    for a in alphas:
        if not 0.0 <= a <= augment.SWEEP_ALPHA_LIMIT:
            raise ValueError(
                f"alpha_max {a} outside the magnitude scale [0, {augment.SWEEP_ALPHA_LIMIT:g}]"
            )
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    if not 0.0 <= apply_probability <= 1.0:
        raise ValueError(f"apply_probability must lie in [0, 1], got {apply_probability}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    ctx = _BundleContext(bundle, stats)
    noaug = _score_noaug_ctx(ctx)

    if Technique.SHARPNESS in techniques:
        for sc in ctx.series:
            sc.ensure_smooth()

    plan: list[tuple[Technique, float | None]] = []
    for tech in sorted(techniques, key=lambda t: t.token):
        if tech.magnitude_free:
            plan.append((tech, None))
        else:
            plan.extend((tech, a) for a in alphas)

    def run(cell: tuple[Technique, float | None]) -> AugScore:
        tech, alpha = cell
        return _score_cell(
            ctx,
            tech,
            alpha,
            repetitions,
            master_seed,
            apply_probability,
            magnitude_mode,
            include_self_reference,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = tuple(pool.map(run, plan))
    else:
        cells = tuple(run(cell) for cell in plan)

    return ScoreSummary(
        noaug=noaug,
        cells=cells,
        repetitions=repetitions,
        seed=master_seed,
        apply_probability=apply_probability,
    )
