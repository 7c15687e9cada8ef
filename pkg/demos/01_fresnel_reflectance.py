#!/usr/bin/env python3
"""Fresnel reflectance curves for the three reference materials.

Chromium reflects a large share of the incident light at every angle,
obsidian (shiny black glass) reflects almost nothing until the incidence
gets steep, and aluminum barely dips below 85%. This difference in how
much of the sphere "lights up" is the root of the metal / shiny-black
confusions the rest of the toolkit quantifies.

Writes demos/output/fresnel_<material>.csv and, when matplotlib is
importable, a combined plot.
"""

from pathlib import Path

from shinylab.optics import ALUMINUM_IOR, CHROME_IOR, OBSIDIAN_IOR, ComplexIOR, curve

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

materials = {
    "obsidian": ComplexIOR(*OBSIDIAN_IOR),
    "chromium": ComplexIOR(*CHROME_IOR),
    "aluminum": ComplexIOR(*ALUMINUM_IOR),
}

curves = {}
print(f"{'theta':>6} " + " ".join(f"{name:>9}" for name in materials))
for name, ior in materials.items():
    curves[name] = curve(ior, 1.0)
    with open(OUT / f"fresnel_{name}.csv", "w") as fh:
        fh.write("theta_deg,reflectance\n")
        for theta, refl in curves[name].samples():
            fh.write(f"{theta:g},{refl:.9f}\n")

for i in range(0, 91, 10):
    row = " ".join(f"{curves[n].reflectance[i]:9.4f}" for n in materials)
    print(f"{i:>5}° {row}")

print("\nnormal-incidence reflectances:")
for name, ior in materials.items():
    print(f"  {name:>9}: {curves[name].reflectance[0]:.4f}  (n={ior.n}, k={ior.k})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, c in curves.items():
        ax.plot(c.theta_deg, c.reflectance, label=name)
    ax.set_xlabel("incident angle (degrees)")
    ax.set_ylabel("unpolarized reflectance")
    ax.set_ylim(0, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "fresnel_curves.png", dpi=120)
    print(f"\nplot saved to {OUT / 'fresnel_curves.png'}")
except ImportError:
    print("\nmatplotlib not available; skipped the plot")
