#!/usr/bin/env python3
"""Build a synthetic light probe and split it into frequency bands.

Constructs a panorama with a sky gradient plus a few localized sources,
then writes the original, a low-pass (blurred) version, and a high-pass
(original minus blurred) version as Radiance .hdr files, mirroring the
filter widths by rescaling them from a 4800-pixel-wide reference to the
demo resolution.
"""

from pathlib import Path

import numpy as np

from shinylab.envmap import (
    EquirectMap,
    desaturate,
    high_pass,
    low_pass,
    pixel_directions,
    rescale_filter_width,
    save,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

H, W = 256, 512
theta, phi = pixel_directions(H, W)
tt, pp = np.meshgrid(theta, phi, indexing="ij")

# hemisphere sky gradient + ground bounce + three localized sources
lum = 0.7 * np.clip(np.cos(tt), 0, None) + 0.08
for pf, af, peak, sigma in ((0.3, 0.2, 20.0, 6.0), (0.42, 0.55, 12.0, 4.0), (0.35, 0.8, 8.0, 10.0)):
    di = tt / np.pi * H - pf * H
    dj = (pp / (2 * np.pi) * W - af * W + W / 2) % W - W / 2
    lum += peak * np.exp(-(di**2 + dj**2) / (2 * sigma**2))
probe = desaturate(EquirectMap.from_luminance(lum))
save(probe, OUT / "probe.hdr")

# reference widths quoted at 4800x2400, rescaled to this resolution
for ref_width in (800.0, 10.0):
    width = rescale_filter_width(ref_width, 4800, W)
    lp = low_pass(probe, width)
    hp = high_pass(probe, width)
    save(lp, OUT / f"probe_lp{ref_width:g}.hdr")
    save(hp, OUT / f"probe_hp{ref_width:g}.hdr")
    resid = lp.data + hp.data - probe.data
    print(
        f"reference width {ref_width:>5g}px -> {width:5.2f}px here | "
        f"lp mean {lp.data.mean():.4f} | hp clamp loss "
        f"{np.minimum(hp.data, 0).sum() / hp.data.size:+.5f} | "
        f"lp+hp residual {np.abs(resid).max():.2e}"
    )

print(f"\nwrote probe and filtered variants to {OUT}/")
print("view them with any HDR-aware viewer, or feed them to `shinylab render`")
