"""Command-line entry points: synth, sweep and plot.

Every command is deterministic given its flags (including --seed).  Exit
codes: 0 on success, 1 on runtime or data errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys


from .augment import SWEEP_ALPHA_LIMIT, Technique
from .errors import AugscoreError, InvalidParams
from .preprocess import compute_p99, load_stats, quantize_bundle, save_stats
from .raster import filter_cloudy_bundle, load_bundle, save_bundle
from .report import read_training_csv, render_plot, summary_from_csv, write_csv
from .scoring import sweep
from .synth import SynthParams, generate_bundle

__all__ = ["main"]

_THREADS_ENV = "AUGSCORE_THREADS"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _alpha_list(text: str) -> list[float]:
    """Parse magnitude lists: comma-separated numbers and a..b range tokens."""
    values: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise argparse.ArgumentTypeError(f"empty magnitude token in {text!r}")
        if ".." in token:
            lo_text, hi_text = token.split("..", 1)
            try:
                lo, hi = int(lo_text), int(hi_text)
            except ValueError:
                raise argparse.ArgumentTypeError(
                    f"range token must be int..int, got {token!r}"
                ) from None
            if hi < lo:
                raise argparse.ArgumentTypeError(f"descending range {token!r}")
            values.extend(float(v) for v in range(lo, hi + 1))
        else:
            try:
                values.append(float(token))
            except ValueError:
                raise argparse.ArgumentTypeError(f"not a number: {token!r}") from None
    for v in values:
        if not 0.0 <= v <= SWEEP_ALPHA_LIMIT:
            raise argparse.ArgumentTypeError(
                f"magnitude {v:g} outside [0, {SWEEP_ALPHA_LIMIT:g}]"
            )
    return values


def _technique_list(text: str) -> list[Technique]:
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise argparse.ArgumentTypeError("technique list is empty")
    if "all" in tokens:
        return list(Technique)
    techniques = []
    for token in tokens:
        try:
            techniques.append(Technique.from_token(token))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return techniques


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


def _default_threads() -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="augscore",
        description=(
            "Measure whether channel augmentations keep pixel signatures within "
            "the natural deviation of an image time series."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p_synth = sub.add_parser(
        "synth",
        help="generate a deterministic synthetic bundle directory",
        formatter_class=fmt,
    )
    p_synth.add_argument("--out", required=True, help="output bundle directory")
    p_synth.add_argument("--series", type=int, default=8, help="number of time series")
    p_synth.add_argument("--length", type=int, default=20, help="images per series")
    p_synth.add_argument("--channels", type=int, default=4, help="bands per image")
    p_synth.add_argument("--size", type=int, default=16, help="image height and width")
    p_synth.add_argument("--k", type=int, default=5, help="mask side length")
    p_synth.add_argument("--seed", type=int, default=0, help="generator seed")
    p_synth.add_argument(
        "--gain-jitter", type=float, default=0.02, help="per-acquisition gain std"
    )
    p_synth.add_argument(
        "--offset-jitter", type=float, default=20.0, help="per-acquisition offset std"
    )
    p_synth.add_argument("--pixel-noise", type=float, default=10.0, help="per-pixel noise std")
    p_synth.add_argument(
        "--cloudy-probability", type=float, default=0.0, help="chance an image is cloud-flagged"
    )
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser(
        "sweep",
        help="score a bundle across techniques and magnitudes, writing a CSV",
        formatter_class=fmt,
    )
    p_sweep.add_argument("--bundle", required=True, help="bundle directory to score")
    p_sweep.add_argument(
        "--techniques",
        type=_technique_list,
        default="all",
        help="comma list of technique tokens, or 'all'",
    )
    p_sweep.add_argument(
        "--alpha",
        type=_alpha_list,
        default="1..20",
        help="max magnitudes: comma list and a..b ranges",
    )
    p_sweep.add_argument(
        "--M",
        dest="repetitions",
        type=_positive_int,
        default=100,
        help="stochastic repetitions per cell",
    )
    p_sweep.add_argument(
        "--p",
        "--apply-probability",
        dest="apply_probability",
        type=_probability,
        default=0.5,
        help="application probability",
    )
    p_sweep.add_argument("--seed", type=int, default=0, help="master seed")
    p_sweep.add_argument("--stats", default=None, help="read p99 stats from this JSON file")
    p_sweep.add_argument(
        "--save-stats", default=None, help="write the p99 stats used to this JSON file"
    )
    p_sweep.add_argument(
        "--include-self-reference",
        action="store_true",
        help="let the same-timestamp original compete in the minimum",
    )
    p_sweep.add_argument(
        "--threads",
        type=_positive_int,
        default=_default_threads(),
        help=f"worker threads (env {_THREADS_ENV})",
    )
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser(
        "plot",
        help="render score-curve panels from a sweep CSV",
        formatter_class=fmt,
    )
    p_plot.add_argument("scores", help="sweep CSV to plot")
    p_plot.add_argument("--training", default=None, help="optional training-results CSV")
    p_plot.add_argument(
        "--space", choices=("u8", "u16"), default="u16", help="score space to plot"
    )
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        params = SynthParams(
            n_series=args.series,
            length=args.length,
            channels=args.channels,
            image_size=args.size,
            k=args.k,
            seed=args.seed,
            gain_jitter=args.gain_jitter,
            offset_jitter=args.offset_jitter,
            pixel_noise=args.pixel_noise,
            cloudy_probability=args.cloudy_probability,
        )
    except InvalidParams as exc:
        print(f"augscore synth: invalid flags: {exc}", file=sys.stderr)
        return 2
    bundle = generate_bundle(params)
    save_bundle(bundle, args.out)
    print(f"wrote bundle: {args.out}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    # argparse leaves string defaults unparsed; run them through the
    # converters so defaults and explicit flags take the same path
    if isinstance(args.techniques, str):
        args.techniques = _technique_list(args.techniques)
    if isinstance(args.alpha, str):
        args.alpha = _alpha_list(args.alpha)
    bundle = load_bundle(args.bundle)
    bundle = filter_cloudy_bundle(bundle)
    if args.stats is not None:
        stats = load_stats(args.stats)
    else:
        stats = compute_p99(bundle)
    if args.save_stats is not None:
        save_stats(stats, args.save_stats)
    if Technique.GRAYSCALE in args.techniques:
        print(
            "note: grayscale is magnitude-free; --alpha is ignored for it",
            file=sys.stderr,
        )
    quantized = quantize_bundle(bundle, stats)
    summary = sweep(
        quantized,
        techniques=args.techniques,
        alpha_max_list=args.alpha,
        repetitions=args.repetitions,
        master_seed=args.seed,
        stats=stats,
        apply_probability=args.apply_probability,
        include_self_reference=args.include_self_reference,
        threads=args.threads,
    )
    write_csv(summary, args.out)
    noaug = summary.noaug
    print(f"S_noaug = {noaug.mean_u8:.6g} +/- {noaug.sigma_u8:.6g} (uint8 space)")
    print(f"S_noaug = {noaug.mean_u16:.6g} +/- {noaug.sigma_u16:.6g} (uint16 space)")
    print(f"wrote scores: {args.out}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    summary = summary_from_csv(args.scores)
    training = read_training_csv(args.training) if args.training is not None else None
    render_plot(summary, training, args.out, space=args.space)
    print(f"wrote figure: {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AugscoreError as exc:
        print(f"augscore {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"augscore {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
