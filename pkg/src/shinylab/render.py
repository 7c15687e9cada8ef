"""Analytic stimulus renderer: specular spheres under environment lighting.

Geometry is a unit sphere (optionally with a sinusoidal surface deformation
for highlight variety) under an orthographic camera. Each object pixel
samples the environment along the mirror direction, weighted by the exact
Fresnel reflectance at the local incident angle; shiny white adds a
Lambertian term lit by the irradiance obtained from the map's order-2
spherical-harmonic expansion (cosine-lobe convolution). Single bounce, no
shadowing or inter-reflections.

Rendered rasters are linear radiance. Exposure normalization scales a
raster so its brightest object pixel tone-maps to exactly 254, and tone
mapping applies a global gamma of 2.2 against a uniform background of 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sphharm
from .envmap import EquirectMap, gaussian_blur
from .errors import DomainError, ExposureError
from .optics import CHROME_IOR, OBSIDIAN_IOR, ComplexIOR, reflectance_unpolarized

GAMMA = 2.2
BACKGROUND_GRAY = 100
MAX_OBJECT_VALUE = 254

# Cosine-lobe SH convolution weights for irradiance, orders 0..2.
_COS_LOBE = np.array([math.pi, 2.0 * math.pi / 3.0, math.pi / 4.0])

# (material, intensity factor) table: one base exposure per map, shared by
# all materials, plus a dimmed metal and a boosted shiny black variant.
STANDARD_CONDITIONS = (
    ("metal", 1.0),
    ("metal", 0.2),
    ("shiny_black", 1.0),
    ("shiny_black", 5.0),
    ("shiny_white", 1.0),
)


@dataclass(frozen=True)
class MaterialSpec:
    """Surface material: kind, complex IOR, and diffuse albedo."""

    kind: str
    ior: ComplexIOR
    diffuse_albedo: float = 0.0

    def __post_init__(self):
        if self.kind not in ("metal", "shiny_black", "shiny_white"):
            raise DomainError(f"unknown material kind {self.kind!r}")
        if not (0.0 <= self.diffuse_albedo <= 1.0):
            raise DomainError(f"diffuse albedo must lie in [0, 1], got {self.diffuse_albedo}")
        if self.kind == "metal" and self.ior.k <= 0:
            raise DomainError("metal materials need a conductor IOR (k > 0)")
        if self.kind == "shiny_black" and (self.ior.k != 0 or self.diffuse_albedo != 0):
            raise DomainError("shiny black is a pure dielectric with zero albedo")
        if self.kind == "shiny_white" and (self.ior.k != 0 or self.diffuse_albedo <= 0):
            raise DomainError("shiny white is a dielectric with positive albedo")


def metal() -> MaterialSpec:
    """Polished chrome."""
    return MaterialSpec("metal", ComplexIOR(*CHROME_IOR))


def shiny_black() -> MaterialSpec:
    """Obsidian-like pure specular dielectric."""
    return MaterialSpec("shiny_black", ComplexIOR(*OBSIDIAN_IOR))


def shiny_white(albedo: float = 0.5) -> MaterialSpec:
    """Same specular response as shiny black plus a Lambertian component."""
    return MaterialSpec("shiny_white", ComplexIOR(*OBSIDIAN_IOR), diffuse_albedo=albedo)


MATERIALS = {"metal": metal, "shiny_black": shiny_black, "shiny_white": shiny_white}


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

# name -> (amplitude, angular frequency) of the sinusoidal height deformation
OBJECT_SHAPES = {
    "sphere": (0.0, 0.0),
    "wavy": (0.12, 3.0),
    "dimpled": (0.07, 6.0),
}


def object_normals(name: str, size: int):
    """Normals and mask of an object's orthographic projection.

    Returns (normals (size, size, 3), mask (size, size) bool). The camera
    sits on the -y axis looking at +y with world +z up, so view = (0,-1,0)
    and the mask is the unit disk regardless of deformation (the
    deformation window vanishes at the rim).
    """
    if name not in OBJECT_SHAPES:
        raise DomainError(f"unknown object {name!r} (have {sorted(OBJECT_SHAPES)})")
    if size < 32:
        raise DomainError(f"render size must be >= 32, got {size}")
    amp, freq = OBJECT_SHAPES[name]
    px = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    x, z = np.meshgrid(px, -px)  # row 0 is the top of the image
    r2 = x * x + z * z
    mask = r2 <= 1.0
    s = np.sqrt(np.maximum(0.0, 1.0 - r2))
    s_safe = np.maximum(s, 1e-12)

    # Height field along the view axis: y = -s - amp*(1-r2)*sin(a*x)*sin(a*z).
    # Camera-facing normal of y = g(x, z) is (g_x, -1, g_z) normalized.
    gx = x / s_safe
    gz = z / s_safe
    if amp > 0.0:
        a = freq * math.pi
        sx, cx = np.sin(a * x), np.cos(a * x)
        sz, cz = np.sin(a * z), np.cos(a * z)
        gx = gx - amp * (-2.0 * x * sx * sz + (1.0 - r2) * a * cx * sz)
        gz = gz - amp * (-2.0 * z * sx * cz + (1.0 - r2) * a * sx * cz)
    normals = np.stack([gx, np.full_like(gx, -1.0), gz], axis=-1)
    normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
    # exact rim: horizontal normals
    rim = mask & (s == 0.0)
    if rim.any():
        rn = np.stack([x[rim], np.zeros(rim.sum()), z[rim]], axis=-1)
        normals[rim] = rn / np.linalg.norm(rn, axis=-1, keepdims=True)
    return normals, mask


def sample_environment(emap: EquirectMap, directions: np.ndarray, mode: str = "bilinear"):
    """Sample map luminance along unit directions (..., 3) -> (...).

    Directions use world +z up; azimuth wraps, polar rows clamp.
    """
    if mode not in ("bilinear", "nearest"):
        raise DomainError(f"unknown sampling mode {mode!r}")
    h, w = emap.height, emap.width
    lum = emap.luminance()
    d = directions
    theta = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(d[..., 1], d[..., 0]), 2.0 * np.pi)
    row = theta / np.pi * h - 0.5
    col = phi / (2.0 * np.pi) * w - 0.5
    if mode == "nearest":
        i = np.clip(np.rint(row).astype(int), 0, h - 1)
        j = np.mod(np.rint(col).astype(int), w)
        return lum[i, j]
    i0 = np.floor(row).astype(int)
    j0 = np.floor(col).astype(int)
    fi = row - i0
    fj = col - j0
    i0c = np.clip(i0, 0, h - 1)
    i1c = np.clip(i0 + 1, 0, h - 1)
    j0w = np.mod(j0, w)
    j1w = np.mod(j0 + 1, w)
    top = lum[i0c, j0w] * (1 - fj) + lum[i0c, j1w] * fj
    bot = lum[i1c, j0w] * (1 - fj) + lum[i1c, j1w] * fj
    return top * (1 - fi) + bot * fi


def direction_to_pixel(direction, height: int, width: int):
    """Continuous (row, col) pixel coordinates of a unit direction."""
    d = np.asarray(direction, dtype=np.float64)
    theta = math.acos(max(-1.0, min(1.0, d[2])))
    phi = math.atan2(d[1], d[0]) % (2.0 * math.pi)
    return theta / math.pi * height - 0.5, phi / (2.0 * math.pi) * width - 0.5


def _irradiance(emap: EquirectMap, normals: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Irradiance E(n) over object pixels from the map's order-2 SH expansion."""
    spec = sphharm.project(emap, 2)
    n = normals[mask]
    theta = np.arccos(np.clip(n[:, 2], -1.0, 1.0))
    phi = np.arctan2(n[:, 1], n[:, 0])
    basis = sphharm.real_basis(2, theta, phi)  # (N, 9)
    lobe = np.repeat(_COS_LOBE, [1, 3, 5])
    e = basis @ (lobe * spec.coeffs)
    out = np.zeros(mask.shape)
    out[mask] = np.maximum(e, 0.0)  # SH ringing can dip below zero
    return out


def render_components(
    emap: EquirectMap,
    material: MaterialSpec,
    size: int,
    object_name: str = "sphere",
    sampling: str = "bilinear",
    pre_blur_width: float | None = None,
):
    """Specular and diffuse linear-radiance components plus the object mask.

    `pre_blur_width` blurs the environment before lookup, a cheap stand-in
    for small amounts of surface roughness (mirror BRDF otherwise).
    """
    if pre_blur_width is not None:
        emap = gaussian_blur(emap, pre_blur_width)
    normals, mask = object_normals(object_name, size)
    view = np.array([0.0, -1.0, 0.0])
    cos_i = np.clip(normals @ view, 0.0, 1.0)
    theta_deg = np.degrees(np.arccos(cos_i[mask]))
    refl = np.zeros(mask.shape)
    refl[mask] = reflectance_unpolarized(material.ior, theta_deg)

    mirror = 2.0 * cos_i[..., None] * normals - view
    mirror /= np.linalg.norm(mirror, axis=-1, keepdims=True)
    env = sample_environment(emap, mirror, mode=sampling)
    specular = np.where(mask, refl * env, 0.0)

    if material.diffuse_albedo > 0.0:
        diffuse = material.diffuse_albedo / math.pi * _irradiance(emap, normals, mask)
        diffuse = np.where(mask, diffuse, 0.0)
    else:
        diffuse = np.zeros(mask.shape)
    return specular, diffuse, mask


def render_sphere(
    emap: EquirectMap,
    material: MaterialSpec,
    size: int,
    object_name: str = "sphere",
    sampling: str = "bilinear",
    pre_blur_width: float | None = None,
):
    """Linear-radiance raster and object mask for one material under one map."""
    specular, diffuse, mask = render_components(
        emap, material, size, object_name, sampling, pre_blur_width
    )
    return specular + diffuse, mask


# ---------------------------------------------------------------------------
# Exposure and tone mapping
# ---------------------------------------------------------------------------

def exposure_target_linear(target: int = MAX_OBJECT_VALUE) -> float:
    """Linear radiance that tone-maps to exactly the 8-bit target value."""
    return (target / 255.0) ** GAMMA


def normalize_exposure(raster: np.ndarray, mask: np.ndarray, target: int = MAX_OBJECT_VALUE):
    """Scale a linear raster so its brightest object pixel tone-maps to target.

    Returns (scaled raster, scale); reuse the scale on sibling stimuli that
    must share the same exposure.
    """
    vals = raster[mask]
    if vals.size == 0:
        raise ExposureError("cannot normalize exposure: empty object mask")
    peak = float(vals.max())
    if peak <= 0.0:
        raise ExposureError("cannot normalize exposure: no positive object pixels")
    scale = exposure_target_linear(target) / peak
    return raster * scale, scale


def tone_map_value(v):
    """Global tone curve: 8-bit value of linear radiance v (gamma 2.2)."""
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    out = np.rint(255.0 * v ** (1.0 / GAMMA))
    return int(out) if out.ndim == 0 else out.astype(np.uint8)


@dataclass(frozen=True)
class StimulusMeta:
    object: str
    material: str
    light_map: str
    factor: float
    exposure_scale: float
    renormalized: bool = False

    @property
    def stimulus_id(self) -> str:
        return f"{self.object}__{self.light_map}__{self.material}__x{self.factor:g}"


@dataclass
class Stimulus:
    """8-bit grayscale stimulus image, its object mask, and render metadata."""

    image: np.ndarray
    mask: np.ndarray
    meta: StimulusMeta = field(
        default_factory=lambda: StimulusMeta("sphere", "metal", "map", 1.0, 1.0)
    )

    def __post_init__(self):
        img = np.asarray(self.image)
        msk = np.asarray(self.mask, dtype=bool)
        if img.shape != msk.shape or img.dtype != np.uint8:
            raise DomainError("stimulus needs a uint8 image and a same-shape mask")
        if img[msk].size and img[msk].max() > MAX_OBJECT_VALUE:
            raise DomainError(f"object pixels must not exceed {MAX_OBJECT_VALUE}")
        if not np.all(img[~msk] == BACKGROUND_GRAY):
            raise DomainError(f"background pixels must equal {BACKGROUND_GRAY}")
        self.image = img
        self.mask = msk


def tone_map(raster: np.ndarray, mask: np.ndarray, meta: StimulusMeta | None = None) -> Stimulus:
    """Tone-map a normalized linear raster into an 8-bit stimulus.

    Object pixels get the global gamma curve, the background is set to the
    uniform gray of 100. The raster must already be exposure-normalized so
    no object pixel exceeds 254.
    """
    values = tone_map_value(raster)
    if values[mask].size and values[mask].max() > MAX_OBJECT_VALUE:
        raise DomainError(
            "raster is not exposure-normalized (object pixel would tone-map above 254)"
        )
    img = np.full(raster.shape, BACKGROUND_GRAY, dtype=np.uint8)
    img[mask] = values[mask]
    if meta is None:
        meta = StimulusMeta("sphere", "unknown", "map", 1.0, 1.0)
    return Stimulus(image=img, mask=mask, meta=meta)


def render_condition_set(
    maps: dict,
    objects=("sphere",),
    size: int = 256,
    conditions=STANDARD_CONDITIONS,
) -> list:
    """Render every (map x object x condition) stimulus.

    For each map and object the base exposure is anchored on the metal
    render at factor 1 (brightest pixel -> 254) and shared across
    materials; intensity factors scale the illumination before that shared
    exposure. Any stimulus that would exceed 254 (the boosted conditions)
    is re-normalized down to peak at exactly 254.
    """
    if not maps or not objects or not conditions:
        raise DomainError("need at least one map, object and condition")
    ceiling = exposure_target_linear()
    stimuli = []
    kinds = list(dict.fromkeys(kind for kind, _ in conditions))
    for map_id, emap in maps.items():
        for obj in objects:
            rasters = {
                kind: render_sphere(emap, MATERIALS[kind](), size, object_name=obj)
                for kind in kinds
            }
            base = rasters.get("metal", rasters[kinds[0]])
            _, scale = normalize_exposure(base[0], base[1])
            for kind, factor in conditions:
                raster, mask = rasters[kind]
                scaled = raster * (factor * scale)
                total = factor * scale
                renorm = False
                peak = float(scaled[mask].max())
                if peak > ceiling * (1.0 + 1e-12):
                    scaled *= ceiling / peak
                    total *= ceiling / peak
                    renorm = True
                meta = StimulusMeta(
                    object=obj,
                    material=kind,
                    light_map=map_id,
                    factor=factor,
                    exposure_scale=total,
                    renormalized=renorm,
                )
                stimuli.append(tone_map(scaled, mask, meta))
    return stimuli
