import math

import numpy as np
import pytest

from shinylab.errors import DomainError, UnsupportedParameterizationError
from shinylab.optics import (
    ALUMINUM_IOR,
    CHROME_IOR,
    OBSIDIAN_IOR,
    ComplexIOR,
    ReflectanceCurve,
    _amplitude_coefficients,
    curve,
    ior_from_facing_grazing,
    metalness_ior,
    normal_incidence_reflectance,
    reflectance_unpolarized,
)

OBSIDIAN = ComplexIOR(*OBSIDIAN_IOR)
CHROME = ComplexIOR(*CHROME_IOR)
ALUMINUM = ComplexIOR(*ALUMINUM_IOR)


class TestNormalIncidence:
    # closed form ((n-1)^2 + k^2) / ((n+1)^2 + k^2)
    def test_obsidian(self):
        assert normal_incidence_reflectance(OBSIDIAN) == pytest.approx(0.0412851, abs=1e-6)

    def test_chrome(self):
        assert normal_incidence_reflectance(CHROME) == pytest.approx(0.5512702, abs=1e-6)

    def test_aluminum(self):
        # closed form gives 49.04/53.84 = 0.9108470
        assert normal_incidence_reflectance(ALUMINUM) == pytest.approx(0.9108470, abs=1e-6)

    def test_metal_proxy(self):
        assert normal_incidence_reflectance(ComplexIOR(50, 0)) == pytest.approx(0.9231065, abs=1e-6)

    def test_index_matched(self):
        assert normal_incidence_reflectance(ComplexIOR(1, 0)) == 0.0


class TestReflectanceUnpolarized:
    def test_matches_closed_form_at_zero(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            ior = ComplexIOR(rng.uniform(1, 60), rng.uniform(0, 10))
            assert abs(
                reflectance_unpolarized(ior, 0.0) - normal_incidence_reflectance(ior)
            ) < 1e-9

    def test_index_matched_reflects_nothing(self):
        assert reflectance_unpolarized(ComplexIOR(1, 0), 37.0) == pytest.approx(0.0, abs=1e-12)

    def test_grazing_limit(self):
        for ior in (OBSIDIAN, CHROME, ALUMINUM):
            assert reflectance_unpolarized(ior, 90.0) == 1.0
            assert abs(reflectance_unpolarized(ior, 89.999) - 1.0) < 1e-3

    def test_obsidian_at_45_frozen(self):
        # exact Fresnel value (R_p = R_s^2 at 45 degrees)
        assert reflectance_unpolarized(OBSIDIAN, 45.0) == pytest.approx(0.051642, abs=1e-5)

    def test_bounded_for_random_iors_and_angles(self):
        rng = np.random.default_rng(11)
        theta = rng.uniform(0, 90, size=64)
        for _ in range(100):
            ior = ComplexIOR(rng.uniform(0.05, 60), rng.uniform(0, 30))
            R = reflectance_unpolarized(ior, theta)
            assert np.all((R >= 0) & (R <= 1))

    def test_array_input(self):
        R = reflectance_unpolarized(CHROME, np.array([0.0, 45.0, 90.0]))
        assert R.shape == (3,)
        assert R[2] == 1.0

    def test_brewster_angle_kills_p_polarization(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = rng.uniform(1.1, 4.0)
            theta_b = math.degrees(math.atan(n))
            _, rp = _amplitude_coefficients(ComplexIOR(n, 0), theta_b)
            assert abs(rp) ** 2 < 1e-6

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            reflectance_unpolarized(CHROME, -1.0)
        with pytest.raises(DomainError):
            reflectance_unpolarized(CHROME, 90.5)
        with pytest.raises(DomainError):
            reflectance_unpolarized(CHROME, float("nan"))
        with pytest.raises(DomainError):
            ComplexIOR(float("inf"), 0)
        with pytest.raises(DomainError):
            ComplexIOR(0.0, 1.0)
        with pytest.raises(DomainError):
            ComplexIOR(1.5, -0.1)


class TestFacingGrazing:
    def test_obsidian_roundtrip_from_published_value(self):
        ior = ior_from_facing_grazing(0.04126, 1.0)
        assert ior.k == 0.0
        assert ior.n == pytest.approx(1.51, abs=1e-3)

    def test_zero_facing_is_vacuum(self):
        assert ior_from_facing_grazing(0.0, 1.0) == ComplexIOR(1.0, 0.0)

    def test_metal_proxy_recovered(self):
        ior = ior_from_facing_grazing(0.9231, 1.0)
        assert ior.n == pytest.approx(50.0, abs=0.1)

    def test_roundtrip_identity_on_dielectrics(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = rng.uniform(1.0 + 1e-6, 60)
            r0 = normal_incidence_reflectance(ComplexIOR(n, 0))
            back = ior_from_facing_grazing(r0, 1.0)
            assert abs(normal_incidence_reflectance(back) - r0) < 1e-6

    def test_facing_reflectance_of_one_rejected(self):
        with pytest.raises(DomainError):
            ior_from_facing_grazing(1.0, 1.0)

    def test_conductor_branch_unsupported(self):
        with pytest.raises(UnsupportedParameterizationError):
            ior_from_facing_grazing(0.9, 0.98)


class TestMetalness:
    def test_dielectric_passthrough(self):
        assert metalness_ior(0, 1.51) == ComplexIOR(1.51, 0.0)
        assert metalness_ior(0, 3.0) == ComplexIOR(3.0, 0.0)

    def test_metal_switch(self):
        assert metalness_ior(1, 1.51) == ComplexIOR(50.0, 0.0)

    def test_fractional_metalness_rejected(self):
        with pytest.raises(DomainError):
            metalness_ior(0.5, 1.51)

    def test_low_n_rejected(self):
        with pytest.raises(DomainError):
            metalness_ior(0, 1.0)


class TestCurve:
    def test_samples_match_pointwise_evaluation(self):
        c = curve(CHROME, 5.0)
        assert np.array_equal(c.theta_deg, np.arange(0, 91, 5.0))
        for theta, refl in c.samples():
            assert refl == reflectance_unpolarized(CHROME, theta)

    def test_obsidian_low_reflectance_at_moderate_angles(self):
        c = curve(OBSIDIAN, 1.0)
        low = c.reflectance[c.theta_deg <= 43.0]
        assert low.max() < 0.05
        # the 0.05 crossing sits between 43 and 44 degrees
        assert c.reflectance[c.theta_deg == 44.0][0] > 0.05

    def test_aluminum_stays_bright_frozen_minimum(self):
        # evaluating the closed Fresnel form over the 1-degree grid:
        # the pseudo-Brewster dip bottoms out at 0.846577
        c = curve(ALUMINUM, 1.0)
        assert c.reflectance.min() == pytest.approx(0.846577, abs=1e-3)
        assert c.reflectance.min() > 0.84

    def test_terminal_sample_is_grazing(self):
        for step in (1.0, 2.5, 9.0):
            c = curve(CHROME, step)
            assert c.reflectance[-1] == pytest.approx(1.0, abs=1e-3)

    def test_step_validation(self):
        with pytest.raises(DomainError):
            curve(CHROME, 0.0)
        with pytest.raises(DomainError):
            curve(CHROME, 10.5)

    def test_curve_type_invariants(self):
        with pytest.raises(DomainError):
            ReflectanceCurve(np.array([0.0, 0.0]), np.array([0.1, 0.2]))
        with pytest.raises(DomainError):
            ReflectanceCurve(np.array([0.0, 1.0]), np.array([0.1, 1.2]))
