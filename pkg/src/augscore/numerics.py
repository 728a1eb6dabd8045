"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np

__all__ = ["round_half_away", "to_uint8", "to_uint16"]


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to the nearest integer with ties going away from zero.

    numpy's default rounding is half-to-even; every quantization step in
    this package instead pins half-away-from-zero so results are
    reproducible across languages and library versions.
    """
    x = np.asarray(x, dtype=np.float64)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def to_uint8(x: np.ndarray) -> np.ndarray:
    """Round half-away, clip to [0, 255] and cast to uint8."""
    return np.clip(round_half_away(x), 0.0, 255.0).astype(np.uint8)


def to_uint16(x: np.ndarray) -> np.ndarray:
    """Round half-away, clip to [0, 65535] and cast to uint16."""
    return np.clip(round_half_away(x), 0.0, 65535.0).astype(np.uint16)
