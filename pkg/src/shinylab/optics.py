"""Fresnel reflectance from a complex index of refraction.

Covers dielectrics (k = 0) and conductors (k > 0) in an ambient medium of
index 1, plus the facing/grazing and metalness reparameterizations some
renderers use instead of (n, k). Unpolarized reflectance is the arithmetic
mean of the s- and p-power reflectances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedParameterizationError

# Reference optical constants (real part n, extinction coefficient k).
CHROME_IOR = (3.21, 3.30)
OBSIDIAN_IOR = (1.51, 0.0)
ALUMINUM_IOR = (1.2, 7.0)

# High-n dielectric stand-in that metalness-style material models switch to.
METAL_PROXY_N = 50.0


@dataclass(frozen=True)
class ComplexIOR:
    """Complex index of refraction n - ik.

    k = 0 identifies a dielectric, k > 0 a conductor.
    """

    n: float
    k: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.n) and math.isfinite(self.k)):
            raise DomainError(f"IOR components must be finite, got ({self.n}, {self.k})")
        if self.n <= 0:
            raise DomainError(f"refraction coefficient n must be > 0, got {self.n}")
        if self.k < 0:
            raise DomainError(f"extinction coefficient k must be >= 0, got {self.k}")

    @property
    def is_dielectric(self) -> bool:
        return self.k == 0.0


@dataclass(frozen=True)
class ReflectanceCurve:
    """Unpolarized reflectance sampled over incident angles in degrees."""

    theta_deg: np.ndarray
    reflectance: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta_deg, dtype=np.float64)
        r = np.asarray(self.reflectance, dtype=np.float64)
        if t.ndim != 1 or t.shape != r.shape:
            raise DomainError("curve needs matching 1-d angle and reflectance arrays")
        if np.any(np.diff(t) <= 0):
            raise DomainError("curve angles must be strictly increasing")
        if np.any((r < 0) | (r > 1)):
            raise DomainError("reflectance values must lie in [0, 1]")
        object.__setattr__(self, "theta_deg", t)
        object.__setattr__(self, "reflectance", r)

    def samples(self):
        """List of (theta_deg, reflectance) pairs."""
        return list(zip(self.theta_deg.tolist(), self.reflectance.tolist()))


def _amplitude_coefficients(ior: ComplexIOR, theta_deg):
    """Complex s/p amplitude reflection coefficients (internal).

    Uses N = n + ik internally; |r|^2 is identical under the n - ik
    convention (the whole computation conjugates). The transmitted-angle
    cosine takes the principal square root with the sign flipped where
    needed so the transmitted wave decays into the medium.
    """
    theta = np.radians(np.asarray(theta_deg, dtype=np.float64))
    N = complex(ior.n, ior.k)
    ci = np.cos(theta)
    si = np.sin(theta)
    ct = np.sqrt(1.0 - (si / N) ** 2)
    ct = np.where(np.imag(N * ct) < 0, -ct, ct)
    rs = (ci - N * ct) / (ci + N * ct)
    rp = (N * ci - ct) / (N * ci + ct)
    return rs, rp


def _check_theta(theta_deg) -> np.ndarray:
    theta = np.asarray(theta_deg, dtype=np.float64)
    if not np.all(np.isfinite(theta)):
        raise DomainError("incident angle must be finite")
    if np.any((theta < 0) | (theta > 90)):
        raise DomainError("incident angle must lie in [0, 90] degrees")
    return theta


def reflectance_unpolarized(ior: ComplexIOR, theta_deg):
    """Unpolarized Fresnel power reflectance at an incident angle in degrees.

    Accepts a scalar or an array of angles in [0, 90]; 90 is treated as the
    grazing limit and returns exactly 1. Scalar in, float out.
    """
    theta = _check_theta(theta_deg)
    rs, rp = _amplitude_coefficients(ior, theta)
    R = 0.5 * (np.abs(rs) ** 2 + np.abs(rp) ** 2)
    R = np.where(theta >= 90.0, 1.0, R)
    R = np.clip(R, 0.0, 1.0)
    return float(R) if np.isscalar(theta_deg) or R.ndim == 0 else R


def normal_incidence_reflectance(ior: ComplexIOR) -> float:
    """Closed-form reflectance at 0 degrees: ((n-1)^2 + k^2) / ((n+1)^2 + k^2)."""
    n, k = ior.n, ior.k
    return ((n - 1.0) ** 2 + k ** 2) / ((n + 1.0) ** 2 + k ** 2)


def ior_from_facing_grazing(r_facing: float, r_grazing: float = 1.0) -> ComplexIOR:
    """Recover the IOR from reflectances at 0 deg (facing) and 90 deg (grazing).

    Only the dielectric branch is modeled: r_grazing must be 1 and the
    result has k = 0 with n = (1 + sqrt(r))/(1 - sqrt(r)). Conductor
    combinations are rejected as unsupported rather than guessed.
    """
    if not (0.0 <= r_facing < 1.0):
        raise DomainError(f"facing reflectance must lie in [0, 1), got {r_facing}")
    if r_grazing != 1.0:
        raise UnsupportedParameterizationError(
            "only the dielectric branch (grazing reflectance = 1) is supported"
        )
    s = math.sqrt(r_facing)
    n = (1.0 + s) / (1.0 - s)
    return ComplexIOR(n=n, k=0.0)


def metalness_ior(metalness: int, dielectric_n: float) -> ComplexIOR:
    """Metalness switch: 0 passes the dielectric n through, 1 selects the
    high-n metal proxy (50, 0). Fractional metalness has no defined meaning."""
    if metalness not in (0, 1):
        raise DomainError(f"metalness must be 0 or 1, got {metalness}")
    if not dielectric_n > 1.0:
        raise DomainError(f"dielectric n must be > 1, got {dielectric_n}")
    if metalness == 0:
        return ComplexIOR(n=dielectric_n, k=0.0)
    return ComplexIOR(n=METAL_PROXY_N, k=0.0)


def curve(ior: ComplexIOR, step_deg: float) -> ReflectanceCurve:
    """Sample the unpolarized reflectance at 0, step, 2*step, ... up to 90 deg."""
    if not (0.0 < step_deg <= 10.0):
        raise DomainError(f"step must lie in (0, 10] degrees, got {step_deg}")
    n_steps = int(math.floor(90.0 / step_deg + 1e-9))
    theta = np.arange(n_steps + 1, dtype=np.float64) * step_deg
    theta[-1] = min(theta[-1], 90.0)
    return ReflectanceCurve(theta_deg=theta, reflectance=reflectance_unpolarized(ior, theta))
