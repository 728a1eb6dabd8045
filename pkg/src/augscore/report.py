"""Serialize sweep results to CSV/JSON-free formats and render score panels.

The CSV schema has one row per (technique, alpha_max) cell::

    technique,alpha_max,s_aug_u8,s_aug_u16,s_noaug_u8,s_noaug_u16,
    sigma_u8,sigma_u16,consistent,M,seed

Numbers carry 6 significant digits; the ``consistent`` flag is evaluated in
uint16 score space from the printed numbers, so recomputing it from a row
always agrees with the flag.  SVG panels mirror the score-curve figures:
one panel per technique, the unaugmented score as a dashed line inside its
shaded sigma band, and the augmented curve colored per segment blue or red
by externally supplied training results (black without them).

Both emitters are deterministic: the same inputs produce byte-identical
files on any platform.  Files are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .augment import Technique
from .errors import (
    IoFailure,
    MalformedCsv,
    MissingFile,
    OutOfRangeMap,
    UnknownTechniqueInTrainingCsv,
)
from .scoring import AugScore, NoaugScore, ScoreSummary, is_consistent

__all__ = [
    "CSV_COLUMNS",
    "TrainingResult",
    "read_training_csv",
    "render_plot",
    "summary_from_csv",
    "write_csv",
    "write_json",
]

CSV_COLUMNS = (
    "technique",
    "alpha_max",
    "s_aug_u8",
    "s_aug_u16",
    "s_noaug_u8",
    "s_noaug_u16",
    "sigma_u8",
    "sigma_u16",
    "consistent",
    "M",
    "seed",
)

TRAINING_COLUMNS = ("technique", "alpha_max", "map_aug", "map_noaug")

_KNOWN_TOKENS = {tech.token for tech in Technique}


@dataclass(frozen=True)
class TrainingResult:
    """Externally measured training performance for one sweep cell."""

    technique: str
    alpha_max: float
    map_aug: float
    map_noaug: float

    def __post_init__(self) -> None:
        for name in ("map_aug", "map_noaug"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise OutOfRangeMap(f"{name} must lie in [0, 1], got {value}")

    @property
    def improved(self) -> bool:
        return self.map_aug > self.map_noaug


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _cell_sort_key(cell: AugScore):
    alpha = -1.0 if cell.alpha_max is None else cell.alpha_max
    return (cell.technique.token, alpha)


def write_csv(summary: ScoreSummary, path) -> None:
    """Write one row per sweep cell, sorted by (technique, alpha_max)."""
    lines = [",".join(CSV_COLUMNS)]
    noaug = summary.noaug
    printed = {
        "s_noaug_u8": _fmt(noaug.mean_u8),
        "s_noaug_u16": _fmt(noaug.mean_u16),
        "sigma_u8": _fmt(noaug.sigma_u8),
        "sigma_u16": _fmt(noaug.sigma_u16),
    }
    for cell in sorted(summary.cells, key=_cell_sort_key):
        s_aug_u16 = _fmt(cell.mean_u16)
        consistent = is_consistent(
            float(s_aug_u16), float(printed["s_noaug_u16"]), float(printed["sigma_u16"])
        )
        lines.append(
            ",".join(
                (
                    cell.technique.token,
                    "" if cell.alpha_max is None else _fmt(cell.alpha_max),
                    _fmt(cell.mean_u8),
                    s_aug_u16,
                    printed["s_noaug_u8"],
                    printed["s_noaug_u16"],
                    printed["sigma_u8"],
                    printed["sigma_u16"],
                    "true" if consistent else "false",
                    str(summary.repetitions),
                    str(summary.seed),
                )
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"failed to write {path}: {exc}") from None


def write_json(summary: ScoreSummary, path) -> None:
    """Write the summary as structured JSON (full float precision).

    The layout mirrors the CSV schema: baseline statistics once, one entry
    per sweep cell with its consistency verdict (uint16 space).  Output is
    deterministic for identical summaries.
    """
    noaug = summary.noaug
    payload = {
        "s_noaug": {
            "u8": {"mean": noaug.mean_u8, "sigma": noaug.sigma_u8},
            "u16": {"mean": noaug.mean_u16, "sigma": noaug.sigma_u16},
        },
        "M": summary.repetitions,
        "seed": summary.seed,
        "cells": [
            {
                "technique": cell.technique.token,
                "alpha_max": cell.alpha_max,
                "s_aug_u8": cell.mean_u8,
                "s_aug_u16": cell.mean_u16,
                "consistent": is_consistent(cell.mean_u16, noaug.mean_u16, noaug.sigma_u16),
            }
            for cell in sorted(summary.cells, key=_cell_sort_key)
        ],
    }
    try:
        Path(path).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
            newline="\n",
        )
    except OSError as exc:
        raise IoFailure(f"failed to write {path}: {exc}") from None


def summary_from_csv(path) -> ScoreSummary:
    """Rebuild a (aggregates-only) summary from a scores CSV.

    Per-record deviation data and cell spreads are not stored in the CSV, so
    the rebuilt summary carries empty records and zero spreads; it holds
    everything needed for plotting.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"scores CSV not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file") from None
        if tuple(header) != CSV_COLUMNS:
            raise MalformedCsv(
                f"{path}: expected header {','.join(CSV_COLUMNS)}, got {','.join(header)}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise MalformedCsv(f"{path}: no data rows")

    cells = []
    noaug_fields = None
    meta = None
    for row in rows:
        if len(row) != len(CSV_COLUMNS):
            raise MalformedCsv(f"{path}: row has {len(row)} fields, expected {len(CSV_COLUMNS)}")
        rec = dict(zip(CSV_COLUMNS, row))
        token = rec["technique"]
        if token not in _KNOWN_TOKENS:
            raise MalformedCsv(f"{path}: unknown technique {token!r}")
        try:
            alpha = None if rec["alpha_max"] == "" else float(rec["alpha_max"])
            cell = AugScore(
                technique=Technique.from_token(token),
                alpha_max=alpha,
                mean_u8=float(rec["s_aug_u8"]),
                mean_u16=float(rec["s_aug_u16"]),
                std_u8=0.0,
                std_u16=0.0,
                n_records=0,
            )
            fields = (
                float(rec["s_noaug_u8"]),
                float(rec["s_noaug_u16"]),
                float(rec["sigma_u8"]),
                float(rec["sigma_u16"]),
            )
            row_meta = (int(rec["M"]), int(rec["seed"]))
        except ValueError as exc:
            raise MalformedCsv(f"{path}: {exc}") from None
        if noaug_fields is None:
            noaug_fields, meta = fields, row_meta
        elif fields != noaug_fields or row_meta != meta:
            raise MalformedCsv(f"{path}: rows disagree on baseline columns")
        cells.append(cell)

    noaug = NoaugScore(
        mean_u8=noaug_fields[0],
        mean_u16=noaug_fields[1],
        sigma_u8=noaug_fields[2],
        sigma_u16=noaug_fields[3],
        records=(),
    )
    return ScoreSummary(
        noaug=noaug,
        cells=tuple(cells),
        repetitions=meta[0],
        seed=meta[1],
        apply_probability=math.nan,
    )


def read_training_csv(path) -> list[TrainingResult]:
    """Parse externally produced training results.

    Expects the exact header ``technique,alpha_max,map_aug,map_noaug``.
    Technique tokens are kept verbatim here; :func:`render_plot` rejects
    unknown ones.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"training CSV not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file") from None
        if tuple(header) != TRAINING_COLUMNS:
            raise MalformedCsv(
                f"{path}: expected header {','.join(TRAINING_COLUMNS)}, got {','.join(header)}"
            )
        results = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(TRAINING_COLUMNS):
                raise MalformedCsv(
                    f"{path}: row has {len(row)} fields, expected {len(TRAINING_COLUMNS)}"
                )
            try:
                results.append(
                    TrainingResult(
                        technique=row[0],
                        alpha_max=float(row[1]),
                        map_aug=float(row[2]),
                        map_noaug=float(row[3]),
                    )
                )
            except ValueError as exc:
                raise MalformedCsv(f"{path}: {exc}") from None
    return results


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_PANEL_W = 230.0
_PANEL_H = 180.0
_MARGIN_L = 46.0
_MARGIN_R = 12.0
_MARGIN_T = 24.0
_MARGIN_B = 34.0
_FIG_PAD = 8.0
_COLUMNS = 4

_COLOR_IMPROVED = "#1f77b4"
_COLOR_WORSE = "#d62728"
_COLOR_NEUTRAL = "#000000"
_COLOR_BAND = "#d9d9d9"
_COLOR_BASELINE = "#888888"


def _coord(value: float) -> str:
    return f"{value:.2f}"


def _segment_color(lookup, token: str, alpha: float | None) -> str:
    hit = lookup.get((token, None if alpha is None else round(alpha, 9)))
    if hit is None:
        return _COLOR_NEUTRAL
    return _COLOR_IMPROVED if hit.improved else _COLOR_WORSE


def render_plot(
    summary: ScoreSummary,
    training: list[TrainingResult] | None,
    path,
    space: str = "u16",
) -> None:
    """Render one score panel per technique into a deterministic SVG file.

    ``space`` selects the score space: "u16" (default, original radiometry)
    or "u8" (quantized).  When ``training`` rows are supplied, each curve
    segment is colored by the verdict at its left point: blue when the
    augmented run beat the unaugmented baseline, red otherwise; segments
    without a matching training row stay black.
    """
    if space not in ("u8", "u16"):
        raise ValueError(f"space must be 'u8' or 'u16', got {space!r}")
    aug_value = (lambda c: c.mean_u8) if space == "u8" else (lambda c: c.mean_u16)
    s_noaug = summary.noaug.mean_u8 if space == "u8" else summary.noaug.mean_u16
    sigma = summary.noaug.sigma_u8 if space == "u8" else summary.noaug.sigma_u16

    lookup = {}
    for row in training or []:
        if row.technique not in _KNOWN_TOKENS:
            raise UnknownTechniqueInTrainingCsv(
                f"training CSV names unknown technique {row.technique!r}"
            )
        key = (row.technique, round(row.alpha_max, 9))
        lookup.setdefault(key, row)
        if row.technique == Technique.GRAYSCALE.token:
            lookup.setdefault((row.technique, None), row)

    by_tech: dict[Technique, list[AugScore]] = {}
    for cell in sorted(summary.cells, key=_cell_sort_key):
        by_tech.setdefault(cell.technique, []).append(cell)
    techniques = sorted(by_tech, key=lambda t: t.token)

    alphas = [c.alpha_max for cells in by_tech.values() for c in cells if c.alpha_max is not None]
    x_lo, x_hi = (min(alphas), max(alphas)) if alphas else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    n_panels = len(techniques)
    cols = min(_COLUMNS, n_panels)
    rows_count = (n_panels + cols - 1) // cols
    fig_w = 2 * _FIG_PAD + cols * _PANEL_W
    fig_h = 2 * _FIG_PAD + rows_count * _PANEL_H

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_coord(fig_w)}" '
        f'height="{_coord(fig_h)}" viewBox="0 0 {_coord(fig_w)} {_coord(fig_h)}" '
        f'font-family="Helvetica, Arial, sans-serif">\n'
    )
    out.write(f'<rect width="{_coord(fig_w)}" height="{_coord(fig_h)}" fill="#ffffff"/>\n')

    for i, tech in enumerate(techniques):
        cells = by_tech[tech]
        panel_x = _FIG_PAD + (i % cols) * _PANEL_W
        panel_y = _FIG_PAD + (i // cols) * _PANEL_H
        plot_x = panel_x + _MARGIN_L
        plot_y = panel_y + _MARGIN_T
        plot_w = _PANEL_W - _MARGIN_L - _MARGIN_R
        plot_h = _PANEL_H - _MARGIN_T - _MARGIN_B

        values = [aug_value(c) for c in cells]
        y_hi = max(values + [s_noaug + sigma])
        y_hi = y_hi * 1.08 if y_hi > 0 else 1.0

        def sx(alpha: float) -> float:
            return plot_x + (alpha - x_lo) / (x_hi - x_lo) * plot_w

        def sy(value: float) -> float:
            return plot_y + plot_h - min(value, y_hi) / y_hi * plot_h

        out.write(f'<g class="panel" data-technique="{tech.token}">\n')
        out.write(
            f'<text x="{_coord(panel_x + _PANEL_W / 2)}" y="{_coord(panel_y + 14)}" '
            f'text-anchor="middle" font-size="11">{tech.token}</text>\n'
        )

        band_top = sy(s_noaug + sigma)
        band_bot = sy(max(s_noaug - sigma, 0.0))
        out.write(
            f'<rect x="{_coord(plot_x)}" y="{_coord(band_top)}" '
            f'width="{_coord(plot_w)}" height="{_coord(max(band_bot - band_top, 0.0))}" '
            f'fill="{_COLOR_BAND}"/>\n'
        )
        baseline_y = sy(s_noaug)
        out.write(
            f'<line x1="{_coord(plot_x)}" y1="{_coord(baseline_y)}" '
            f'x2="{_coord(plot_x + plot_w)}" y2="{_coord(baseline_y)}" '
            f'stroke="{_COLOR_BASELINE}" stroke-dasharray="5,3"/>\n'
        )

        if tech.magnitude_free:
            y = sy(values[0])
            color = _segment_color(lookup, tech.token, None)
            out.write(
                f'<line x1="{_coord(plot_x)}" y1="{_coord(y)}" '
                f'x2="{_coord(plot_x + plot_w)}" y2="{_coord(y)}" '
                f'stroke="{color}" stroke-width="1.5"/>\n'
            )
        else:
            points = [(c.alpha_max, aug_value(c)) for c in cells]
            for (a0, v0), (a1, v1) in zip(points, points[1:]):
                color = _segment_color(lookup, tech.token, a0)
                out.write(
                    f'<line x1="{_coord(sx(a0))}" y1="{_coord(sy(v0))}" '
                    f'x2="{_coord(sx(a1))}" y2="{_coord(sy(v1))}" '
                    f'stroke="{color}" stroke-width="1.5"/>\n'
                )
            for a0, v0 in points:
                color = _segment_color(lookup, tech.token, a0)
                out.write(
                    f'<circle cx="{_coord(sx(a0))}" cy="{_coord(sy(v0))}" r="1.6" '
                    f'fill="{color}"/>\n'
                )

        # axes and ticks
        out.write(
            f'<line x1="{_coord(plot_x)}" y1="{_coord(plot_y)}" '
            f'x2="{_coord(plot_x)}" y2="{_coord(plot_y + plot_h)}" stroke="#000000"/>\n'
        )
        out.write(
            f'<line x1="{_coord(plot_x)}" y1="{_coord(plot_y + plot_h)}" '
            f'x2="{_coord(plot_x + plot_w)}" y2="{_coord(plot_y + plot_h)}" '
            f'stroke="#000000"/>\n'
        )
        for frac in (0.0, 0.5, 1.0):
            alpha = x_lo + frac * (x_hi - x_lo)
            x = sx(alpha)
            out.write(
                f'<line x1="{_coord(x)}" y1="{_coord(plot_y + plot_h)}" '
                f'x2="{_coord(x)}" y2="{_coord(plot_y + plot_h + 3)}" stroke="#000000"/>\n'
            )
            out.write(
                f'<text x="{_coord(x)}" y="{_coord(plot_y + plot_h + 14)}" '
                f'text-anchor="middle" font-size="9">{_fmt(alpha)}</text>\n'
            )
            value = frac * y_hi
            y = sy(value)
            out.write(
                f'<line x1="{_coord(plot_x - 3)}" y1="{_coord(y)}" '
                f'x2="{_coord(plot_x)}" y2="{_coord(y)}" stroke="#000000"/>\n'
            )
            out.write(
                f'<text x="{_coord(plot_x - 5)}" y="{_coord(y + 3)}" '
                f'text-anchor="end" font-size="9">{_fmt(value)}</text>\n'
            )
        out.write(
            f'<text x="{_coord(plot_x + plot_w / 2)}" '
            f'y="{_coord(plot_y + plot_h + 26)}" text-anchor="middle" '
            f'font-size="9">max magnitude</text>\n'
        )
        out.write("</g>\n")

    out.write("</svg>\n")
    try:
        Path(path).write_text(out.getvalue(), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"failed to write {path}: {exc}") from None
