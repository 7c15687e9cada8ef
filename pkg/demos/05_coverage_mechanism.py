#!/usr/bin/env python3
"""How the angular spread of illumination drives specular coverage.

Takes a sparse-source panorama and blurs it with progressively wider
Gaussians, re-rendering a chrome sphere each time (exposure re-anchored
per image, as when equating maximum luminance across stimuli). Coverage
climbs monotonically toward the Ganzfeld limit while diffuseness2 falls,
tying the image statistic to the illumination statistic.
"""

from pathlib import Path

import numpy as np

from shinylab.envmap import EquirectMap, gaussian_blur
from shinylab.imstats import specular_coverage
from shinylab.render import metal, normalize_exposure, render_sphere, tone_map
from shinylab.sphharm import diffuseness2, order_powers, project

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

H, W = 256, 512
rng = np.random.default_rng(4)
lum = np.full((H, W), 0.01)
for _ in range(6):
    i, j = rng.integers(40, 180), rng.integers(0, W)
    di, dj = np.arange(H)[:, None] - i, (np.arange(W)[None, :] - j + W // 2) % W - W // 2
    lum += 120.0 * np.exp(-(di**2 + dj**2) / 6.0)
probe = EquirectMap.from_luminance(lum)

print(f"{'blur width (px)':>16} {'coverage':>9} {'diffuseness2':>13}")
rows = ["blur_width_px,coverage,diffuseness2"]
for width in (0.0, 8.0, 32.0, 128.0, 384.0):
    emap = probe if width == 0 else gaussian_blur(probe, width)
    raster, mask = render_sphere(emap, metal(), 256)
    scaled, _ = normalize_exposure(raster, mask)
    cov = specular_coverage(tone_map(scaled, mask)).coverage
    d2 = diffuseness2(order_powers(project(emap, 30)))
    print(f"{width:16g} {cov:9.3f} {d2:13.3f}")
    rows.append(f"{width:g},{cov:.6f},{d2:.6f}")

(OUT / "coverage_vs_blur.csv").write_text("\n".join(rows) + "\n")
print(f"\ntable written to {OUT / 'coverage_vs_blur.csv'}")
print("the same physical material sweeps from a sparse-highlight look to a")
print("nearly uniform, fully covered one purely through the illumination")
