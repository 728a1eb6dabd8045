"""Channel augmentation operators on uint8 images plus their stochastic sampler.

Eight techniques are supported: brightness, contrast, gaussian-blur,
gaussian-noise, grayscale, posterize, sharpness and solarize.  Magnitudes
live on a 0..20 scale where 20 is a strong transformation; the per-technique
parameter maps are:

    brightness / contrast / sharpness   factor f = 1 + 0.02 * magnitude
    gaussian-blur                       sigma = 0.1 * magnitude
    gaussian-noise                      sigma = 0.5 * magnitude (uint8 units)
    posterize                           kept bits = 8 - floor(magnitude / 5)
    solarize                            threshold = 256 * (1 - magnitude / 20)
    grayscale                           magnitude-free channel mean

Brightness, contrast and sharpness are signed (negative magnitudes darken,
flatten or smooth); the rest are unsigned.  Every operator does its
arithmetic in float64 and rounds exactly once, half away from zero, before
clipping back to [0, 255].

All value kernels accept either a single (C, H, W) block or a batch
(M, C, H, W) with one magnitude per batch entry; both paths run the same
arithmetic, so batched evaluation is bit-identical to one-at-a-time calls.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DomainError
from .numerics import round_half_away, to_uint8
from .raster import BandImage
from .streams import CounterStream

__all__ = [
    "AugmentDraw",
    "AugmentSpec",
    "SWEEP_ALPHA_LIMIT",
    "Technique",
    "apply",
    "brightness_values",
    "contrast_values",
    "gaussian_blur_values",
    "gaussian_noise_values",
    "grayscale_values",
    "noise_field",
    "op_brightness",
    "op_contrast",
    "op_gaussian_blur",
    "op_gaussian_noise",
    "op_grayscale",
    "op_posterize",
    "op_sharpness",
    "op_solarize",
    "posterize_values",
    "sample_draw",
    "sharpness_values",
    "smooth_reference",
    "solarize_values",
]

SWEEP_ALPHA_LIMIT = 20.0


class Technique(enum.Enum):
    """The eight channel augmentation techniques, keyed by their CLI token."""

    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    GAUSSIAN_BLUR = "gaussian-blur"
    GAUSSIAN_NOISE = "gaussian-noise"
    GRAYSCALE = "grayscale"
    POSTERIZE = "posterize"
    SHARPNESS = "sharpness"
    SOLARIZE = "solarize"

    @property
    def token(self) -> str:
        return self.value

    @property
    def signed(self) -> bool:
        """Whether magnitudes are sampled from [-alpha_max, alpha_max]."""
        return self in _SIGNED

    @property
    def magnitude_free(self) -> bool:
        return self is Technique.GRAYSCALE

    @classmethod
    def from_token(cls, token: str) -> "Technique":
        try:
            return cls(token)
        except ValueError:
            known = ", ".join(t.value for t in cls)
            raise ValueError(f"unknown technique {token!r} (known: {known})") from None

    @property
    def index(self) -> int:
        """Stable integer id used for substream derivation."""
        return _ORDER[self]


_SIGNED = {Technique.BRIGHTNESS, Technique.CONTRAST, Technique.SHARPNESS}
_ORDER = {tech: i for i, tech in enumerate(Technique)}


@dataclass(frozen=True)
class AugmentSpec:
    """One technique with its magnitude model and application probability.

    ``alpha_max`` is the sweep's per-run maximum magnitude.  The sweep scale
    spans 0..20 (see :data:`SWEEP_ALPHA_LIMIT`, enforced by the sweep and the
    CLI); larger values are accepted here so fixed-mode diagnostic runs can
    drive operators outside the scale.
    """

    technique: Technique
    alpha_max: float
    apply_probability: float = 0.5
    magnitude_mode: str = "uniform"

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha_max) or self.alpha_max < 0:
            raise ValueError(f"alpha_max must be finite and >= 0, got {self.alpha_max}")
        if not 0.0 <= self.apply_probability <= 1.0:
            raise ValueError(
                f"apply_probability must lie in [0, 1], got {self.apply_probability}"
            )
        if self.magnitude_mode not in ("uniform", "fixed"):
            raise ValueError(
                f"magnitude_mode must be 'uniform' or 'fixed', got {self.magnitude_mode!r}"
            )

    @property
    def magnitude_low(self) -> float:
        return -self.alpha_max if self.technique.signed else 0.0


@dataclass(frozen=True)
class AugmentDraw:
    """The resolved randomness of one augmentation application.

    ``magnitude`` is present iff the draw applied and the technique is
    magnitude-bearing.  ``noise_seed`` seeds the per-sample Gaussian noise
    stream and is carried by every draw so evaluation order never matters.
    """

    applied: bool
    magnitude: float | None
    noise_seed: int


def sample_draw(spec: AugmentSpec, stream: CounterStream) -> AugmentDraw:
    """Draw one application decision from a counter stream.

    The stream layout is fixed: offset 0 decides application against
    ``apply_probability``, offset 1 carries the magnitude uniform on
    [magnitude_low, alpha_max] (unused in fixed mode, where the magnitude is
    alpha_max itself), offset 2 carries the noise substream seed.
    """
    applied = stream.uniform(0) < spec.apply_probability
    magnitude: float | None = None
    if applied and not spec.technique.magnitude_free:
        if spec.magnitude_mode == "fixed":
            magnitude = float(spec.alpha_max)
        else:
            low = spec.magnitude_low
            magnitude = low + stream.uniform(1) * (spec.alpha_max - low)
    return AugmentDraw(applied=applied, magnitude=magnitude, noise_seed=stream.word(2))


# ---------------------------------------------------------------------------
# Value kernels
# ---------------------------------------------------------------------------

def _as_batch(values: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(values)
    if arr.ndim == 3:
        return arr[None], True
    if arr.ndim == 4:
        return arr, False
    raise ValueError(f"expected (C, H, W) or (M, C, H, W) values, got shape {arr.shape}")


def _as_magnitudes(magnitude, batch: int) -> np.ndarray:
    mags = np.atleast_1d(np.asarray(magnitude, dtype=np.float64))
    if mags.shape == (1,) and batch > 1:
        mags = np.broadcast_to(mags, (batch,))
    if mags.shape != (batch,):
        raise ValueError(f"expected {batch} magnitudes, got shape {mags.shape}")
    return mags


def _unbatch(out: np.ndarray, single: bool) -> np.ndarray:
    return out[0] if single else out


def brightness_values(values: np.ndarray, magnitude) -> np.ndarray:
    """Scale samples by f = 1 + 0.02 * magnitude."""
    batch, single = _as_batch(values)
    f = 1.0 + 0.02 * _as_magnitudes(magnitude, batch.shape[0])
    out = to_uint8(f[:, None, None, None] * batch.astype(np.float64))
    return _unbatch(out, single)


def contrast_values(values: np.ndarray, magnitude, means: np.ndarray | None = None) -> np.ndarray:
    """Blend samples toward the per-channel image mean: mu + f * (v - mu).

    ``means`` may supply precomputed whole-image channel means of shape
    (..., C); when omitted they are computed from ``values`` itself, which
    is only correct when ``values`` covers the full image.
    """
    batch, single = _as_batch(values)
    f = 1.0 + 0.02 * _as_magnitudes(magnitude, batch.shape[0])
    v = batch.astype(np.float64)
    if means is None:
        mu = v.mean(axis=(2, 3))
    else:
        mu = np.asarray(means, dtype=np.float64)
        if mu.ndim == 1:
            mu = np.broadcast_to(mu, (batch.shape[0], mu.shape[0]))
        if mu.shape != batch.shape[:2]:
            raise ValueError(f"means shape {mu.shape} does not match batch {batch.shape[:2]}")
    mu = mu[:, :, None, None]
    out = to_uint8(mu + f[:, None, None, None] * (v - mu))
    return _unbatch(out, single)


def _reflect_indices(n: int, radius: int) -> np.ndarray:
    # Mirror indexing without edge repetition (a b c d -> c b | a b c d | c b),
    # valid for any pad width.
    idx = np.arange(-radius, n + radius)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * n - 2
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def _gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _blur_group(v: np.ndarray, kernels: np.ndarray, radius: int) -> np.ndarray:
    # Separable convolution with reflect padding; v is float64 (G, C, H, W)
    # and kernels is (G, 2r + 1), one kernel per batch entry.
    h, w = v.shape[2], v.shape[3]
    rows = _reflect_indices(h, radius)
    cols = _reflect_indices(w, radius)
    padded = v[:, :, rows, :][:, :, :, cols]
    win = sliding_window_view(padded, 2 * radius + 1, axis=3)
    tmp = np.einsum("gchwk,gk->gchw", win, kernels)
    win = sliding_window_view(tmp, 2 * radius + 1, axis=2)
    return np.einsum("gchwk,gk->gchw", win, kernels)


def gaussian_blur_values(values: np.ndarray, magnitude) -> np.ndarray:
    """Per-band Gaussian blur with sigma = 0.1 * magnitude.

    The kernel radius is ceil(3 * sigma), the kernel is renormalized to sum
    to one and borders use reflect padding.  magnitude 0 is an exact
    identity.
    """
    batch, single = _as_batch(values)
    mags = _as_magnitudes(magnitude, batch.shape[0])
    sigmas = 0.1 * mags
    out = np.array(batch, dtype=np.uint8, copy=True)
    active = np.flatnonzero(sigmas > 0)
    if active.size:
        v = batch.astype(np.float64)
        radii = np.ceil(3.0 * sigmas[active]).astype(int)
        for radius in np.unique(radii):
            group = active[radii == radius]
            kernels = np.stack([_gaussian_kernel(sigmas[g], radius) for g in group])
            blurred = _blur_group(v[group], kernels, int(radius))
            out[group] = to_uint8(blurred)
    return _unbatch(out, single)


def noise_field(shape: tuple[int, ...], magnitude: float, noise_seed: int) -> np.ndarray:
    """The Gaussian noise field (sigma = 0.5 * magnitude) for one image.

    The field covers the whole image and is a pure function of
    ``noise_seed``, so any window of it can be reproduced independently of
    where the operator is evaluated.
    """
    sigma = 0.5 * float(magnitude)
    return np.random.default_rng(noise_seed).normal(0.0, sigma, size=shape)


def gaussian_noise_values(values: np.ndarray, magnitude: float, noise_seed: int) -> np.ndarray:
    """Additive i.i.d. Gaussian noise with sigma = 0.5 * magnitude.

    Single images only; batch callers loop, one seed per draw.
    """
    arr = np.asarray(values)
    if arr.ndim != 3:
        raise ValueError(f"gaussian noise operates on one (C, H, W) image, got {arr.shape}")
    eps = noise_field(arr.shape, magnitude, noise_seed)
    return to_uint8(arr.astype(np.float64) + eps)


def grayscale_values(values: np.ndarray) -> np.ndarray:
    """Replace every channel by the rounded per-pixel channel mean."""
    batch, single = _as_batch(values)
    g = round_half_away(batch.astype(np.float64).mean(axis=1))
    out = np.broadcast_to(g[:, None, :, :], batch.shape).astype(np.uint8)
    return _unbatch(out, single)


def posterize_values(values: np.ndarray, magnitude) -> np.ndarray:
    """Zero the low bits, keeping 8 - floor(magnitude / 5) bits per sample."""
    batch, single = _as_batch(values)
    mags = _as_magnitudes(magnitude, batch.shape[0])
    shifts = np.clip(np.floor(mags / 5.0).astype(int), 0, 8)
    masks = ((0xFF >> shifts) << shifts).astype(np.uint8)
    out = batch.astype(np.uint8) & masks[:, None, None, None]
    return _unbatch(out, single)


_SMOOTH_CENTER = 5.0
_SMOOTH_NORM = 13.0


def smooth_reference(values: np.ndarray) -> np.ndarray:
    """The sharpness operator's smoothing pass: 3x3 kernel
    [[1,1,1],[1,5,1],[1,1,1]] / 13 with reflect padding, returned unrounded
    as float64 so it can be cached and reused across blends.
    """
    batch, single = _as_batch(values)
    v = batch.astype(np.float64)
    rows = _reflect_indices(v.shape[2], 1)
    cols = _reflect_indices(v.shape[3], 1)
    p = v[:, :, rows, :][:, :, :, cols]
    acc = _SMOOTH_CENTER * p[:, :, 1:-1, 1:-1]
    acc += p[:, :, :-2, :-2]
    acc += p[:, :, :-2, 1:-1]
    acc += p[:, :, :-2, 2:]
    acc += p[:, :, 1:-1, :-2]
    acc += p[:, :, 1:-1, 2:]
    acc += p[:, :, 2:, :-2]
    acc += p[:, :, 2:, 1:-1]
    acc += p[:, :, 2:, 2:]
    out = acc / _SMOOTH_NORM
    return _unbatch(out, single)


def sharpness_values(values: np.ndarray, magnitude, smoothed: np.ndarray | None = None) -> np.ndarray:
    """Blend away from the smoothed image: s + f * (v - s), f = 1 + 0.02 * magnitude.

    ``smoothed`` may supply a precomputed :func:`smooth_reference` of the
    same shape; pass it when blending many magnitudes of one image.
    """
    batch, single = _as_batch(values)
    f = 1.0 + 0.02 * _as_magnitudes(magnitude, batch.shape[0])
    v = batch.astype(np.float64)
    if smoothed is None:
        s = smooth_reference(batch)
        if s.ndim == 3:
            s = s[None]
    else:
        s = np.asarray(smoothed, dtype=np.float64)
        if s.ndim == 3:
            s = np.broadcast_to(s, batch.shape)
        if s.shape != batch.shape:
            raise ValueError(f"smoothed shape {s.shape} does not match values {batch.shape}")
    out = to_uint8(s + f[:, None, None, None] * (v - s))
    return _unbatch(out, single)


def solarize_values(values: np.ndarray, magnitude) -> np.ndarray:
    """Invert samples at or above the threshold 256 * (1 - magnitude / 20)."""
    batch, single = _as_batch(values)
    mags = _as_magnitudes(magnitude, batch.shape[0])
    thresholds = 256.0 * (1.0 - mags / 20.0)
    out = np.where(batch >= thresholds[:, None, None, None], 255 - batch, batch)
    return _unbatch(out.astype(np.uint8), single)


# ---------------------------------------------------------------------------
# Image-level operators
# ---------------------------------------------------------------------------

def _require_uint8(image: BandImage) -> None:
    if image.domain != "uint8":
        raise DomainError(
            f"augmentation operates on uint8-domain images, got {image.domain}"
        )


def _rewrap(image: BandImage, samples: np.ndarray) -> BandImage:
    return BandImage(samples=samples, timestamp=image.timestamp, cloudy=image.cloudy)


def op_brightness(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, brightness_values(image.samples, magnitude))


def op_contrast(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, contrast_values(image.samples, magnitude))


def op_gaussian_blur(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, gaussian_blur_values(image.samples, magnitude))


def op_gaussian_noise(image: BandImage, magnitude: float, noise_seed: int) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, gaussian_noise_values(image.samples, magnitude, noise_seed))


def op_grayscale(image: BandImage) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, grayscale_values(image.samples))


def op_posterize(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, posterize_values(image.samples, magnitude))


def op_sharpness(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, sharpness_values(image.samples, magnitude))


def op_solarize(image: BandImage, magnitude: float) -> BandImage:
    _require_uint8(image)
    return _rewrap(image, solarize_values(image.samples, magnitude))


def apply(image: BandImage, draw: AugmentDraw, technique: Technique) -> BandImage:
    """Apply one resolved draw to a uint8-domain image.

    A non-applied draw returns the input object unchanged (bit-identical).
    """
    _require_uint8(image)
    if not draw.applied:
        return image
    if technique.magnitude_free:
        return op_grayscale(image)
    if draw.magnitude is None:
        raise ValueError(f"applied {technique.token} draw lacks a magnitude")
    if technique is Technique.GAUSSIAN_NOISE:
        return op_gaussian_noise(image, draw.magnitude, draw.noise_seed)
    op = _MAGNITUDE_OPS[technique]
    return op(image, draw.magnitude)


_MAGNITUDE_OPS = {
    Technique.BRIGHTNESS: op_brightness,
    Technique.CONTRAST: op_contrast,
    Technique.GAUSSIAN_BLUR: op_gaussian_blur,
    Technique.POSTERIZE: op_posterize,
    Technique.SHARPNESS: op_sharpness,
    Technique.SOLARIZE: op_solarize,
}
