"""Tour of the eight channel augmentation operators on one uint8 image.

Magnitudes run on a 0..20 scale (20 = strong).  Brightness, contrast and
sharpness also take negative magnitudes; grayscale has no magnitude at
all.  Beyond the raw pixels, what matters for consistency analysis is how
much each operator moves the mask-window signature.
"""

import numpy as np

from augscore import Technique
from augscore.augment import (
    brightness_values,
    contrast_values,
    gaussian_blur_values,
    gaussian_noise_values,
    grayscale_values,
    posterize_values,
    sharpness_values,
    solarize_values,
)

rng = np.random.default_rng(11)
# a 3-band image with distinct band levels plus texture
base = np.stack([np.full((8, 8), v) for v in (60, 120, 200)])
image = np.clip(base + rng.integers(-15, 16, size=base.shape), 0, 255).astype(np.uint8)

print("original band means:", image.mean(axis=(1, 2)).round(2))


def show(name, out):
    moved = np.abs(out.astype(float) - image.astype(float)).mean()
    print(f"{name:28s} band means {out.mean(axis=(1, 2)).round(2)}  "
          f"mean |pixel change| {moved:.2f}")


for alpha in (5.0, 20.0):
    print(f"\n--- magnitude {alpha:g} ---")
    show(f"brightness(+{alpha:g})", brightness_values(image, alpha))
    show(f"brightness(-{alpha:g})", brightness_values(image, -alpha))
    show(f"contrast(+{alpha:g})", contrast_values(image, alpha))
    show(f"gaussian-blur({alpha:g})", gaussian_blur_values(image, alpha))
    show(f"gaussian-noise({alpha:g})", gaussian_noise_values(image, alpha, noise_seed=1))
    show(f"posterize({alpha:g})", posterize_values(image, alpha))
    show(f"sharpness(+{alpha:g})", sharpness_values(image, alpha))
    show(f"solarize({alpha:g})", solarize_values(image, alpha))

print("\n--- magnitude-free ---")
show("grayscale", grayscale_values(image))
print("\nnote how grayscale rewrites the spectral profile (band means collapse)")
print("while blur or posterize barely move the band means at all.")

print("\nsigned techniques:", [t.token for t in Technique if t.signed])
print("unsigned techniques:", [t.token for t in Technique if not t.signed and not t.magnitude_free])
