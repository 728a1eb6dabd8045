"""Data model for multiband image time series and the bundle directory format.

A bundle directory holds a ``manifest.json`` plus one raw binary file per
image.  Image files are band-sequential (band-major, then row-major)
little-endian unsigned 16-bit samples with no header, exactly
``2 * C * H * W`` bytes each.  The manifest schema is::

    {
      "version": 1,
      "channels": C, "height": H, "width": W, "dtype": "u16le",
      "series": [
        {
          "id": "<opaque string>",
          "mask": {"row0": int, "col0": int, "k": int},
          "images": [
            {"timestamp": "<ISO-8601>", "path": "<relative>", "cloudy": bool}
          ]
        }
      ],
      "provenance": "<free text>"
    }

All types in this module are immutable after construction and safe to share
across threads; the operations are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    IoFailure,
    MalformedManifest,
    MaskOutOfBounds,
    MissingFile,
    RejectedEmptyBundle,
    SeriesTooShort,
)

__all__ = [
    "BandImage",
    "MaskRect",
    "PixelSignature",
    "TimeSeries",
    "TimeSeriesBundle",
    "extract_signature",
    "filter_cloudy",
    "filter_cloudy_bundle",
    "load_bundle",
    "save_bundle",
]

MANIFEST_NAME = "manifest.json"
_SAMPLE_DTYPES = (np.uint16, np.uint8)


def _frozen_copy(samples: np.ndarray) -> np.ndarray:
    arr = np.array(samples, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BandImage:
    """One multiband image: samples shaped (C, H, W) plus acquisition metadata.

    ``samples`` is uint16 for raw radiometry and uint8 after quantization;
    the dtype is the domain flag.  The array is copied and marked read-only.
    """

    samples: np.ndarray
    timestamp: datetime
    cloudy: bool = False

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples)
        if arr.ndim != 3:
            raise ValueError(f"samples must be (C, H, W), got shape {arr.shape}")
        if arr.dtype not in _SAMPLE_DTYPES:
            raise ValueError(f"samples must be uint16 or uint8, got {arr.dtype}")
        if min(arr.shape) < 1:
            raise ValueError(f"all dimensions must be >= 1, got shape {arr.shape}")
        object.__setattr__(self, "samples", _frozen_copy(arr))

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    @property
    def domain(self) -> str:
        """"uint8" or "uint16", derived from the sample dtype."""
        return "uint8" if self.samples.dtype == np.uint8 else "uint16"


@dataclass(frozen=True)
class MaskRect:
    """A k-by-k window of ones anchored at (row0, col0), shared by all bands."""

    row0: int
    col0: int
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"mask side k must be >= 1, got {self.k}")
        if self.row0 < 0 or self.col0 < 0:
            raise ValueError(f"mask anchor must be non-negative, got ({self.row0}, {self.col0})")

    def check_bounds(self, height: int, width: int) -> None:
        if self.row0 + self.k > height or self.col0 + self.k > width:
            raise MaskOutOfBounds(
                f"mask (row0={self.row0}, col0={self.col0}, k={self.k}) "
                f"does not fit a {height}x{width} image"
            )

    def window(self) -> tuple[slice, slice]:
        return slice(self.row0, self.row0 + self.k), slice(self.col0, self.col0 + self.k)


@dataclass(frozen=True, eq=False)
class PixelSignature:
    """Per-band mean over a mask window, in the numeric domain of its image."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"signature must be a 1-d vector, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered multiband image sequence over one ground area, plus its mask."""

    id: str
    images: tuple[BandImage, ...]
    mask: MaskRect

    def __post_init__(self) -> None:
        images = tuple(self.images)
        if not images:
            raise ValueError(f"series {self.id!r} has no images")
        first = images[0]
        shape = first.samples.shape
        dtype = first.samples.dtype
        for img in images[1:]:
            if img.samples.shape != shape:
                raise ValueError(
                    f"series {self.id!r}: image shapes differ "
                    f"({shape} vs {img.samples.shape})"
                )
            if img.samples.dtype != dtype:
                raise ValueError(f"series {self.id!r}: mixed sample domains")
        for a, b in zip(images, images[1:]):
            if not a.timestamp < b.timestamp:
                raise ValueError(
                    f"series {self.id!r}: timestamps must be strictly increasing "
                    f"({a.timestamp.isoformat()} !< {b.timestamp.isoformat()})"
                )
        self.mask.check_bounds(first.height, first.width)
        object.__setattr__(self, "images", images)

    @property
    def length(self) -> int:
        return len(self.images)

    @property
    def channels(self) -> int:
        return self.images[0].channels

    @property
    def height(self) -> int:
        return self.images[0].height

    @property
    def width(self) -> int:
        return self.images[0].width

    @property
    def domain(self) -> str:
        return self.images[0].domain


@dataclass(frozen=True, eq=False)
class TimeSeriesBundle:
    """A set of time series sharing one channel count."""

    series: tuple[TimeSeries, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        series = tuple(self.series)
        if not series:
            raise RejectedEmptyBundle("a bundle must contain at least one series")
        channels = series[0].channels
        for s in series[1:]:
            if s.channels != channels:
                raise ValueError(
                    f"series {s.id!r} has {s.channels} channels, expected {channels}"
                )
        object.__setattr__(self, "series", series)

    @property
    def channels(self) -> int:
        return self.series[0].channels

    @property
    def n_series(self) -> int:
        return len(self.series)

    @property
    def domain(self) -> str:
        return self.series[0].domain


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def filter_cloudy(series: TimeSeries) -> TimeSeries:
    """Drop cloud-flagged images, preserving order.

    Returns the series unchanged when nothing is flagged.  Raises
    :class:`SeriesTooShort` when fewer than two images remain, because the
    nearest-other-timestamp deviation needs at least one other acquisition.
    """
    kept = tuple(img for img in series.images if not img.cloudy)
    if len(kept) == len(series.images):
        return series
    if len(kept) < 2:
        raise SeriesTooShort(
            f"series {series.id!r}: only {len(kept)} cloud-free image(s) remain"
        )
    return TimeSeries(id=series.id, images=kept, mask=series.mask)


def filter_cloudy_bundle(bundle: TimeSeriesBundle) -> TimeSeriesBundle:
    """Apply :func:`filter_cloudy` to every series of a bundle."""
    filtered = tuple(filter_cloudy(s) for s in bundle.series)
    if all(f is s for f, s in zip(filtered, bundle.series)):
        return bundle
    return TimeSeriesBundle(series=filtered, provenance=bundle.provenance)


def extract_signature(image: BandImage, mask: MaskRect) -> PixelSignature:
    """Per-band arithmetic mean over the mask window, in float64.

    No intermediate integer truncation happens: the window is promoted to
    float64 before averaging, so signatures are exact to machine precision.
    """
    mask.check_bounds(image.height, image.width)
    rows, cols = mask.window()
    window = image.samples[:, rows, cols].astype(np.float64)
    return PixelSignature(values=window.mean(axis=(1, 2)))


# ---------------------------------------------------------------------------
# Bundle directory I/O
# ---------------------------------------------------------------------------

def _parse_timestamp(text: str) -> datetime:
    try:
        return datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MalformedManifest(f"bad timestamp {text!r}: {exc}") from None


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise MalformedManifest(f"{context}: missing key {key!r}")
    return mapping[key]


def load_bundle(path) -> TimeSeriesBundle:
    """Load a bundle directory written by :func:`save_bundle`.

    Raises:
        MissingFile: manifest or a referenced image file is absent.
        MalformedManifest: the manifest is invalid JSON or breaks the schema
            (including duplicate or non-increasing timestamps).
        DimensionMismatch: an image file size differs from 2*C*H*W bytes.
        MaskOutOfBounds: a mask rectangle does not fit the image extent.
    """
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise MissingFile(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedManifest(f"{manifest_path}: {exc}") from None
    if not isinstance(manifest, dict):
        raise MalformedManifest(f"{manifest_path}: top-level value must be an object")

    version = _require(manifest, "version", "manifest")
    if version != 1:
        raise MalformedManifest(f"unsupported manifest version {version!r}")
    dtype = _require(manifest, "dtype", "manifest")
    if dtype != "u16le":
        raise MalformedManifest(f"unsupported dtype {dtype!r} (expected 'u16le')")
    channels = int(_require(manifest, "channels", "manifest"))
    height = int(_require(manifest, "height", "manifest"))
    width = int(_require(manifest, "width", "manifest"))
    entries = _require(manifest, "series", "manifest")
    if not isinstance(entries, list) or not entries:
        raise MalformedManifest("manifest: 'series' must be a non-empty list")

    expected_bytes = 2 * channels * height * width
    series = []
    for entry in entries:
        sid = str(_require(entry, "id", "series entry"))
        mask_obj = _require(entry, "mask", f"series {sid!r}")
        mask = MaskRect(
            row0=int(_require(mask_obj, "row0", f"series {sid!r} mask")),
            col0=int(_require(mask_obj, "col0", f"series {sid!r} mask")),
            k=int(_require(mask_obj, "k", f"series {sid!r} mask")),
        )
        images = []
        for img_obj in _require(entry, "images", f"series {sid!r}"):
            rel = str(_require(img_obj, "path", f"series {sid!r} image"))
            file_path = root / rel
            if not file_path.is_file():
                raise MissingFile(f"series {sid!r}: missing image file {file_path}")
            data = file_path.read_bytes()
            if len(data) != expected_bytes:
                raise DimensionMismatch(
                    f"series {sid!r}: {file_path} is {len(data)} bytes, "
                    f"expected {expected_bytes} (= 2*{channels}*{height}*{width})"
                )
            samples = (
                np.frombuffer(data, dtype="<u2")
                .reshape(channels, height, width)
                .astype(np.uint16)
            )
            images.append(
                BandImage(
                    samples=samples,
                    timestamp=_parse_timestamp(str(_require(img_obj, "timestamp", "image"))),
                    cloudy=bool(img_obj.get("cloudy", False)),
                )
            )
        try:
            series.append(TimeSeries(id=sid, images=tuple(images), mask=mask))
        except ValueError as exc:
            raise MalformedManifest(str(exc)) from None

    return TimeSeriesBundle(series=tuple(series), provenance=str(manifest.get("provenance", "")))


def save_bundle(bundle: TimeSeriesBundle, path) -> None:
    """Write a bundle directory; loading it back reproduces the bundle bit-exactly.

    Only uint16-domain bundles are serialized (the directory format stores
    raw radiometry); quantized bundles are in-memory artifacts.
    """
    if bundle.domain != "uint16":
        raise ValueError("only uint16-domain bundles can be saved")
    first = bundle.series[0]
    height, width = first.height, first.width
    for s in bundle.series:
        if (s.height, s.width) != (height, width):
            raise ValueError(
                f"series {s.id!r} is {s.height}x{s.width}; the bundle format "
                f"requires one extent, expected {height}x{width}"
            )

    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
        entries = []
        for si, s in enumerate(bundle.series):
            images = []
            for ti, img in enumerate(s.images):
                rel = f"series_{si:04d}_image_{ti:04d}.u16le"
                (root / rel).write_bytes(img.samples.astype("<u2").tobytes())
                images.append(
                    {
                        "timestamp": img.timestamp.isoformat(),
                        "path": rel,
                        "cloudy": img.cloudy,
                    }
                )
            entries.append(
                {
                    "id": s.id,
                    "mask": {"row0": s.mask.row0, "col0": s.mask.col0, "k": s.mask.k},
                    "images": images,
                }
            )
        manifest = {
            "version": 1,
            "channels": bundle.channels,
            "height": height,
            "width": width,
            "dtype": "u16le",
            "series": entries,
            "provenance": bundle.provenance,
        }
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        (root / MANIFEST_NAME).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"failed to write bundle to {root}: {exc}") from None
