"""End-to-end consistency analysis: synthesize, quantize, sweep, report.

Pipeline: generate a bundle -> drop cloudy images -> per-channel p99
quantization to uint8 -> score the unaugmented baseline and every
(technique, max magnitude) cell -> write the CSV and the score-curve SVG.
Equivalent CLI:

    augscore synth --out demo_output/sweep_bundle --series 6 --length 16 --seed 3
    augscore sweep --bundle demo_output/sweep_bundle --techniques all \
        --alpha 2..20 --M 50 --seed 42 --out demo_output/scores.csv
    augscore plot demo_output/scores.csv --out demo_output/scores.svg
"""

from pathlib import Path

from augscore import (
    SynthParams,
    Technique,
    compute_p99,
    filter_cloudy_bundle,
    generate_bundle,
    is_consistent,
    quantize_bundle,
    render_plot,
    sweep,
    write_csv,
)

out = Path("demo_output")
out.mkdir(exist_ok=True)

bundle = generate_bundle(
    SynthParams(n_series=6, length=16, channels=4, image_size=12, k=5, seed=3)
)
bundle = filter_cloudy_bundle(bundle)

stats = compute_p99(bundle)
print("per-channel p99:", stats.p99)

quantized = quantize_bundle(bundle, stats)
summary = sweep(
    quantized,
    techniques=list(Technique),
    alpha_max_list=[float(a) for a in range(2, 21, 2)],
    repetitions=50,
    master_seed=42,
    stats=stats,
)

noaug = summary.noaug
print(f"\nS_noaug = {noaug.mean_u16:.2f} +/- {noaug.sigma_u16:.2f} (uint16 space)")
print(f"consistency band top: {noaug.mean_u16 + noaug.sigma_u16:.2f}\n")

print(f"{'technique':16s} {'alpha':>5s} {'S_aug(u16)':>11s}  verdict")
for cell in summary.cells:
    if cell.alpha_max not in (None, 2.0, 10.0, 20.0):
        continue
    verdict = is_consistent(cell.mean_u16, noaug.mean_u16, noaug.sigma_u16)
    alpha = "-" if cell.alpha_max is None else f"{cell.alpha_max:g}"
    print(f"{cell.technique.token:16s} {alpha:>5s} {cell.mean_u16:>11.2f}  "
          f"{'consistent' if verdict else 'INCONSISTENT'}")

write_csv(summary, out / "scores.csv")
render_plot(summary, None, out / "scores.svg")
print(f"\nwrote {out/'scores.csv'} and {out/'scores.svg'}")
