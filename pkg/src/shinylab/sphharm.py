"""Real spherical-harmonic analysis of environment maps.

Projects the luminance channel of a panorama onto the real orthonormal
spherical-harmonic basis (Condon-Shortley phase in the Legendre part),
computes per-order RMS power, and derives the diffuseness, brilliance and
diffuseness2 statistics of the angular light distribution:

    diffuseness  = P_1 / P_0
    brilliance   = sum_{l>=3} P_l / sum_{l>=0} P_l   (powers to order >= 30)
    diffuseness2 = P_2 / P_0

Projection is midpoint quadrature over pixel centers with solid-angle
weights sin(theta) * (pi/height) * (2*pi/width), evaluated separably over
rows and columns, which reorders but does not alter the per-pixel sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envmap import EquirectMap, pixel_directions
from .errors import DomainError, MetricError

BRILLIANCE_MIN_ORDER = 30


@dataclass(frozen=True)
class ShSpectrum:
    """Real SH coefficients for the luminance channel.

    `coeffs` is a flat array of length (max_order+1)^2 in the standard
    l*(l+1)+m layout.
    """

    max_order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        n = (self.max_order + 1) ** 2
        if self.max_order < 0 or c.shape != (n,):
            raise DomainError(
                f"spectrum to order {self.max_order} needs {n} coefficients, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise DomainError("spectrum contains non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    def coeff(self, l: int, m: int) -> float:
        if not (0 <= l <= self.max_order and -l <= m <= l):
            raise DomainError(f"no coefficient (l={l}, m={m}) in order-{self.max_order} spectrum")
        return float(self.coeffs[l * (l + 1) + m])


def _theta_basis(max_order: int, cos_theta: np.ndarray) -> np.ndarray:
    """Normalized associated-Legendre values N_{l,m} P_l^m(cos theta).

    Includes the Condon-Shortley phase. Shape (L+1, L+1, *cos_theta.shape);
    entries with m > l are zero. Uses the standard fully-normalized
    recurrence, stable far beyond order 30.
    """
    x = np.asarray(cos_theta, dtype=np.float64)
    L = max_order
    out = np.zeros((L + 1, L + 1) + x.shape)
    sx = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    pmm = np.full_like(x, 0.5 / math.sqrt(math.pi))
    for m in range(L + 1):
        if m > 0:
            pmm = -math.sqrt((2 * m + 1) / (2.0 * m)) * sx * pmm
        out[m, m] = pmm
        if m + 1 <= L:
            out[m + 1, m] = math.sqrt(2 * m + 3.0) * x * pmm
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def real_basis(max_order: int, theta, phi) -> np.ndarray:
    """Evaluate all real SH basis functions at arbitrary directions.

    theta/phi broadcast together; returns shape (*broadcast, (L+1)^2) in the
    l*(l+1)+m layout. Convenient for small orders or modest direction
    counts; the grid projection below uses a separable path instead.
    """
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta, phi = np.broadcast_arrays(theta, phi)
    P = _theta_basis(max_order, np.cos(theta))
    L = max_order
    out = np.zeros(theta.shape + ((L + 1) ** 2,))
    sqrt2 = math.sqrt(2.0)
    for l in range(L + 1):
        base = l * (l + 1)
        out[..., base] = P[l, 0]
        for m in range(1, l + 1):
            sign = -1.0 if m % 2 else 1.0
            out[..., base + m] = sqrt2 * sign * P[l, m] * np.cos(m * phi)
            out[..., base - m] = sqrt2 * sign * P[l, m] * np.sin(m * phi)
    return out


def project(emap: EquirectMap, max_order: int) -> ShSpectrum:
    """Project a map's luminance onto the real SH basis up to max_order."""
    if max_order < 0:
        raise DomainError(f"max_order must be >= 0, got {max_order}")
    h, w = emap.height, emap.width
    if h < 2 or w < 4:
        raise DomainError(f"map {w}x{h} is too small for meaningful quadrature")
    L = max_order
    lum = emap.luminance()
    theta, phi = pixel_directions(h, w)
    weights = np.sin(theta) * (np.pi / h) * (2.0 * np.pi / w)

    m_range = np.arange(L + 1)
    cos_m = np.cos(np.outer(phi, m_range))  # (W, L+1)
    sin_m = np.sin(np.outer(phi, m_range))
    Fc = lum @ cos_m  # (H, L+1): per-row azimuthal moments
    Fs = lum @ sin_m

    P = _theta_basis(L, np.cos(theta))  # (L+1, L+1, H)
    PW = P * weights  # solid-angle weighted theta basis
    Cc = np.einsum("lmh,hm->lm", PW, Fc)
    Cs = np.einsum("lmh,hm->lm", PW, Fs)

    coeffs = np.zeros((L + 1) ** 2)
    sqrt2 = math.sqrt(2.0)
    for l in range(L + 1):
        base = l * (l + 1)
        coeffs[base] = Cc[l, 0]
        for m in range(1, l + 1):
            sign = -1.0 if m % 2 else 1.0
            coeffs[base + m] = sqrt2 * sign * Cc[l, m]
            coeffs[base - m] = sqrt2 * sign * Cs[l, m]
    return ShSpectrum(max_order=L, coeffs=coeffs)


def reconstruct(spec: ShSpectrum, width: int, height: int) -> EquirectMap:
    """Evaluate the spectrum at every pixel center as a grayscale map.

    Band-limited reconstructions can ring below zero, so the result is a
    signed map.
    """
    if height < 1 or width != 2 * height:
        raise DomainError(f"target resolution must be 2:1, got {width}x{height}")
    L = spec.max_order
    theta, phi = pixel_directions(height, width)
    P = _theta_basis(L, np.cos(theta))  # (L+1, L+1, H)

    sqrt2 = math.sqrt(2.0)
    Gc = np.zeros((height, L + 1))
    Gs = np.zeros((height, L + 1))
    for l in range(L + 1):
        base = l * (l + 1)
        Gc[:, 0] += spec.coeffs[base] * P[l, 0]
        for m in range(1, l + 1):
            sign = -1.0 if m % 2 else 1.0
            Gc[:, m] += sqrt2 * sign * spec.coeffs[base + m] * P[l, m]
            Gs[:, m] += sqrt2 * sign * spec.coeffs[base - m] * P[l, m]

    m_range = np.arange(L + 1)
    cos_m = np.cos(np.outer(phi, m_range))  # (W, L+1)
    sin_m = np.sin(np.outer(phi, m_range))
    gray = Gc @ cos_m.T + Gs @ sin_m.T
    return EquirectMap.from_luminance(gray, signed=True)


def order_powers(spec: ShSpectrum, mode: str = "rms") -> np.ndarray:
    """Per-order power summary P_l of a spectrum.

    mode "rms" (default): sqrt(sum_m c_{l,m}^2 / (2l+1)), the root mean
    square over the 2l+1 coefficients at order l. mode "sum": plain
    sum of squares, for sensitivity analyses.
    """
    if mode not in ("rms", "sum"):
        raise DomainError(f"unknown power mode {mode!r}")
    powers = np.zeros(spec.max_order + 1)
    for l in range(spec.max_order + 1):
        base = l * (l + 1)
        sq = spec.coeffs[base - l : base + l + 1] ** 2
        powers[l] = sq.sum() if mode == "sum" else math.sqrt(sq.sum() / (2 * l + 1))
    return powers


def diffuseness(powers: np.ndarray) -> float:
    """First-order power relative to the ambient (zero-order) power."""
    powers = np.asarray(powers, dtype=np.float64)
    if len(powers) < 2:
        raise DomainError("diffuseness needs powers through order 1")
    if powers[0] <= 0:
        raise MetricError("diffuseness is undefined when the zero-order power is 0")
    return float(powers[1] / powers[0])


def brilliance(powers: np.ndarray) -> float:
    """Share of total power sitting at order 3 and above."""
    powers = np.asarray(powers, dtype=np.float64)
    if len(powers) < BRILLIANCE_MIN_ORDER + 1:
        raise DomainError(
            f"brilliance requires powers through order {BRILLIANCE_MIN_ORDER}, "
            f"got {len(powers) - 1}"
        )
    total = powers.sum()
    if total <= 0:
        raise MetricError("brilliance is undefined for zero total power")
    return float(powers[3:].sum() / total)


def diffuseness2(powers: np.ndarray) -> float:
    """Second-order power relative to the ambient (zero-order) power."""
    powers = np.asarray(powers, dtype=np.float64)
    if len(powers) < 3:
        raise DomainError("diffuseness2 needs powers through order 2")
    if powers[0] <= 0:
        raise MetricError("diffuseness2 is undefined when the zero-order power is 0")
    return float(powers[2] / powers[0])


def light_metrics(emap: EquirectMap, max_order: int = BRILLIANCE_MIN_ORDER) -> dict:
    """Project a map and return its three angular-structure statistics."""
    powers = order_powers(project(emap, max_order))
    return {
        "diffuseness": diffuseness(powers),
        "brilliance": brilliance(powers),
        "diffuseness2": diffuseness2(powers),
    }
