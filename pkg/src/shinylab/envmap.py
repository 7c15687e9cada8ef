"""Equirectangular HDR environment maps: I/O, scaling, desaturation, filtering.

Maps are 2:1 panoramas of linear radiance. Row 0 is the zenith (polar angle
0), column 0 is azimuth 0, and pixel centers sit at
theta = pi*(i+0.5)/height, phi = 2*pi*(j+0.5)/width.

Supported containers: Radiance RGBE (.hdr/.pic, the standard light-probe
format; flat and new-style RLE scanlines on read, flat on write) and binary
PFM (.pfm, float32, lossless for tests).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DomainError, FormatError

# Rec.709 luma weights, consistent with an sRGB pipeline.
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

# "N pixel wide" Gaussian: +-3 sigma support spans the named width.
SIGMA_PER_WIDTH = 1.0 / 6.0


@dataclass
class EquirectMap:
    """Linear-radiance equirectangular panorama, shape (height, width, 3).

    `signed` marks maps that legitimately carry negative values (high-pass
    residuals); ordinary radiance maps must be non-negative.
    """

    data: np.ndarray
    signed: bool = False

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 3 or a.shape[2] != 3:
            raise DomainError(f"expected (height, width, 3) pixel array, got {a.shape}")
        h, w = a.shape[:2]
        if w != 2 * h:
            raise DomainError(f"equirectangular maps must be 2:1, got {w}x{h}")
        if not np.all(np.isfinite(a)):
            raise DomainError("map contains non-finite radiance values")
        if not self.signed and a.min() < 0:
            raise DomainError("radiance values must be non-negative")
        self.data = a

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def luminance(self) -> np.ndarray:
        """Rec.709 luminance channel, shape (height, width)."""
        return self.data @ LUMA_WEIGHTS

    def copy(self) -> "EquirectMap":
        return EquirectMap(self.data.copy(), signed=self.signed)

    @classmethod
    def constant(cls, height: int, value=1.0) -> "EquirectMap":
        """Uniform map (a Ganzfeld) of the given radiance."""
        data = np.broadcast_to(
            np.asarray(value, dtype=np.float64), (height, 2 * height, 3)
        ).copy()
        return cls(data)

    @classmethod
    def from_luminance(cls, gray: np.ndarray, signed: bool = False) -> "EquirectMap":
        """Promote a (height, width) luminance image to a gray RGB map."""
        gray = np.asarray(gray, dtype=np.float64)
        return cls(np.repeat(gray[:, :, None], 3, axis=2), signed=signed)


def pixel_directions(height: int, width: int):
    """(theta, phi) grids of the pixel centers, shapes (height,), (width,)."""
    theta = np.pi * (np.arange(height) + 0.5) / height
    phi = 2.0 * np.pi * (np.arange(width) + 0.5) / width
    return theta, phi


# ---------------------------------------------------------------------------
# Radiance RGBE container
# ---------------------------------------------------------------------------

def _rgbe_encode(rgb: np.ndarray) -> np.ndarray:
    """float RGB -> uint8 RGBE, mirroring Radiance's setcolr()."""
    rgb = np.maximum(rgb, 0.0)
    m = rgb.max(axis=-1)
    out = np.zeros(rgb.shape[:-1] + (4,), dtype=np.uint8)
    nz = m > 1e-32
    frac, exp = np.frexp(m[nz])
    scale = frac * 255.9999 / m[nz]
    out[nz, :3] = (rgb[nz] * scale[:, None]).astype(np.uint8)
    out[nz, 3] = (exp + 128).astype(np.uint8)
    return out


def _rgbe_decode(rgbe: np.ndarray) -> np.ndarray:
    """uint8 RGBE -> float RGB, mirroring Radiance's colr_color()."""
    e = rgbe[..., 3].astype(np.int32)
    f = np.ldexp(1.0, e - (128 + 8))
    rgb = (rgbe[..., :3].astype(np.float64) + 0.5) * f[..., None]
    rgb[e == 0] = 0.0
    return rgb


def _read_rgbe(fh) -> np.ndarray:
    magic = fh.readline()
    if not magic.startswith(b"#?"):
        raise FormatError("not a Radiance RGBE file (missing #? magic)")
    fmt_ok = False
    while True:
        line = fh.readline()
        if line == b"":
            raise FormatError("corrupt RGBE header: unexpected end of file")
        if line in (b"\n", b"\r\n"):
            break
        if line.strip() == b"FORMAT=32-bit_rle_rgbe":
            fmt_ok = True
    if not fmt_ok:
        raise FormatError("corrupt RGBE header: missing FORMAT=32-bit_rle_rgbe")
    res = fh.readline().decode("ascii", "replace")
    m = re.match(r"-Y (\d+) \+X (\d+)\s*$", res)
    if not m:
        raise FormatError(f"unsupported RGBE resolution line: {res!r}")
    h, w = int(m.group(1)), int(m.group(2))
    rgbe = np.zeros((h, w, 4), dtype=np.uint8)
    for y in range(h):
        rgbe[y] = _read_rgbe_scanline(fh, w)
    return _rgbe_decode(rgbe)


def _read_rgbe_scanline(fh, w: int) -> np.ndarray:
    head = fh.read(4)
    if len(head) < 4:
        raise FormatError("corrupt RGBE data: truncated scanline")
    if head[0] == 2 and head[1] == 2 and (head[2] << 8) + head[3] == w:
        # new-style RLE, per-component runs
        row = np.zeros((w, 4), dtype=np.uint8)
        for c in range(4):
            i = 0
            while i < w:
                b = fh.read(1)
                if not b:
                    raise FormatError("corrupt RGBE data: truncated RLE stream")
                count = b[0]
                if count > 128:
                    count -= 128
                    v = fh.read(1)
                    if not v or i + count > w:
                        raise FormatError("corrupt RGBE data: bad RLE run")
                    row[i : i + count, c] = v[0]
                else:
                    data = fh.read(count)
                    if len(data) < count or i + count > w:
                        raise FormatError("corrupt RGBE data: bad RLE literal")
                    row[i : i + count, c] = np.frombuffer(data, np.uint8)
                i += count
        return row
    if head[0] == 1 and head[1] == 1 and head[2] == 1:
        raise FormatError("old-style RLE RGBE scanlines are not supported")
    # flat scanline: the 4 bytes read are the first pixel
    rest = fh.read(4 * (w - 1))
    if len(rest) < 4 * (w - 1):
        raise FormatError("corrupt RGBE data: truncated flat scanline")
    return np.frombuffer(head + rest, np.uint8).reshape(w, 4)


def _write_rgbe(fh, rgb: np.ndarray) -> None:
    h, w = rgb.shape[:2]
    fh.write(b"#?RADIANCE\n")
    fh.write(b"FORMAT=32-bit_rle_rgbe\n\n")
    fh.write(f"-Y {h} +X {w}\n".encode("ascii"))
    fh.write(_rgbe_encode(rgb).tobytes())


# ---------------------------------------------------------------------------
# PFM container
# ---------------------------------------------------------------------------

def _read_pfm(fh) -> np.ndarray:
    def token():
        t = b""
        while True:
            ch = fh.read(1)
            if ch == b"":
                raise FormatError("corrupt PFM header: unexpected end of file")
            if ch.isspace():
                if t:
                    return t
                continue
            t += ch

    magic = token()
    if magic not in (b"PF", b"Pf"):
        raise FormatError(f"not a PFM file (magic {magic!r})")
    try:
        w, h = int(token()), int(token())
        scale = float(token())
    except ValueError as exc:
        raise FormatError("corrupt PFM header") from exc
    channels = 3 if magic == b"PF" else 1
    count = w * h * channels
    raw = fh.read(4 * count)
    if len(raw) < 4 * count:
        raise FormatError("corrupt PFM data: truncated")
    dtype = "<f4" if scale < 0 else ">f4"
    a = np.frombuffer(raw, dtype=dtype).reshape(h, w, channels).astype(np.float64)
    a = a[::-1]  # PFM rows run bottom-to-top
    if channels == 1:
        a = np.repeat(a, 3, axis=2)
    return a


def _write_pfm(fh, rgb: np.ndarray) -> None:
    h, w = rgb.shape[:2]
    fh.write(b"PF\n")
    fh.write(f"{w} {h}\n".encode("ascii"))
    fh.write(b"-1.0\n")
    fh.write(rgb[::-1].astype("<f4").tobytes())


def load(path) -> EquirectMap:
    """Load an .hdr/.pic (RGBE) or .pfm panorama as linear radiance.

    Tiny negative values (possible in PFM) are clamped to zero; the 2:1
    aspect invariant is enforced.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        probe = fh.read(2)
        fh.seek(0)
        if probe == b"#?":
            rgb = _read_rgbe(fh)
        elif probe in (b"PF", b"Pf"):
            rgb = _read_pfm(fh)
        else:
            raise FormatError(f"unknown container for {path.name!r} (not RGBE or PFM)")
    return EquirectMap(np.maximum(rgb, 0.0))


def save(emap: EquirectMap, path) -> None:
    """Write a panorama; container chosen by extension (.hdr/.pic or .pfm).

    Negative values (signed high-pass maps) are clamped to zero at save time.
    """
    path = Path(path)
    rgb = np.maximum(emap.data, 0.0)
    suffix = path.suffix.lower()
    with open(path, "wb") as fh:
        if suffix in (".hdr", ".pic", ".rgbe"):
            _write_rgbe(fh, rgb)
        elif suffix == ".pfm":
            _write_pfm(fh, rgb)
        else:
            raise FormatError(f"unknown output container {suffix!r} (use .hdr or .pfm)")


# ---------------------------------------------------------------------------
# Radiometric operations
# ---------------------------------------------------------------------------

def scale_intensity(emap: EquirectMap, factor: float) -> EquirectMap:
    """Multiply every channel by a positive factor."""
    if not (factor > 0 and math.isfinite(factor)):
        raise DomainError(f"intensity factor must be positive, got {factor}")
    return EquirectMap(emap.data * factor, signed=emap.signed)


def desaturate(emap: EquirectMap) -> EquirectMap:
    """Replace each pixel with its Rec.709 luminance, (Y, Y, Y)."""
    return EquirectMap.from_luminance(emap.luminance(), signed=emap.signed)


def _gaussian_kernel(width_px: float, sigma_per_width: float) -> np.ndarray:
    sigma = width_px * sigma_per_width
    radius = max(1, int(math.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(
    emap: EquirectMap, width_px: float, sigma_per_width: float = SIGMA_PER_WIDTH
) -> EquirectMap:
    """Separable planar Gaussian blur on the equirectangular grid.

    sigma = width_px * sigma_per_width (default width/6, so +-3 sigma spans
    the named width); the kernel is truncated at +-3 sigma and renormalized
    to unit sum. The horizontal axis wraps (azimuthal periodicity), the
    vertical axis clamps at the poles, so a constant map is preserved
    exactly. `width_px` is expressed at this map's own resolution; rescale
    proportionally when transferring a width between resolutions (see
    rescale_filter_width).
    """
    if not (width_px > 0 and math.isfinite(width_px)):
        raise DomainError(f"filter width must be positive, got {width_px}")
    if not (sigma_per_width > 0):
        raise DomainError(f"sigma-per-width ratio must be positive, got {sigma_per_width}")
    kernel = _gaussian_kernel(width_px, sigma_per_width)
    out = np.empty_like(emap.data)
    for c in range(3):
        tmp = correlate1d(emap.data[:, :, c], kernel, axis=1, mode="wrap")
        out[:, :, c] = correlate1d(tmp, kernel, axis=0, mode="nearest")
    return EquirectMap(out, signed=emap.signed)


def low_pass(
    emap: EquirectMap, width_px: float, sigma_per_width: float = SIGMA_PER_WIDTH
) -> EquirectMap:
    """Low-pass filtered map: the Gaussian-blurred panorama itself."""
    return gaussian_blur(emap, width_px, sigma_per_width)


def high_pass(
    emap: EquirectMap, width_px: float, sigma_per_width: float = SIGMA_PER_WIDTH
) -> EquirectMap:
    """High-pass filtered map: original minus blurred.

    The result keeps its signed values internally (low_pass + high_pass
    reconstructs the original); negatives are clamped only when saved.
    """
    blurred = gaussian_blur(emap, width_px, sigma_per_width)
    return EquirectMap(emap.data - blurred.data, signed=True)


def rescale_filter_width(width_px: float, from_width: int, to_width: int) -> float:
    """Transfer a filter width between map resolutions proportionally.

    E.g. a width quoted for 4800-wide panoramas becomes width*800/4800 on an
    800-wide map.
    """
    if from_width <= 0 or to_width <= 0:
        raise DomainError("resolutions must be positive")
    return width_px * (to_width / from_width)
