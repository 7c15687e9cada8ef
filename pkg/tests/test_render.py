import math

import numpy as np
import pytest

from shinylab.envmap import EquirectMap, gaussian_blur, pixel_directions
from shinylab.errors import DomainError, ExposureError
from shinylab.imstats import specular_coverage
from shinylab.optics import ComplexIOR, curve
from shinylab.render import (
    BACKGROUND_GRAY,
    MaterialSpec,
    Stimulus,
    exposure_target_linear,
    metal,
    normalize_exposure,
    object_normals,
    render_components,
    render_condition_set,
    render_sphere,
    shiny_black,
    shiny_white,
    tone_map,
    tone_map_value,
)


def russet_map(height=64, seed=0, low=0.0, high=2.0):
    rng = np.random.default_rng(seed)
    return EquirectMap(rng.uniform(low, high, size=(height, 2 * height, 3)))


def blob_map(height=64, sources=((0.35, 0.25, 6.0),), ambient=0.05):
    """Panorama with localized bright sources on a dim ambient.

    Each source is (polar frac, azimuth frac, peak) with a Gaussian footprint;
    structurally closer to a real light probe than uniform noise.
    """
    h, w = height, 2 * height
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    data = np.full((h, w), float(ambient))
    for pf, af, peak in sources:
        di = ii - pf * h
        dj = (jj - af * w + w / 2) % w - w / 2  # azimuthal wrap
        data += peak * np.exp(-(di**2 + dj**2) / (2 * (h / 24) ** 2))
    return EquirectMap.from_luminance(data)


class TestMaterials:
    def test_standard_materials(self):
        assert metal().ior == ComplexIOR(3.21, 3.30)
        assert shiny_black().ior == ComplexIOR(1.51, 0.0)
        w = shiny_white()
        assert w.ior == shiny_black().ior and w.diffuse_albedo == 0.5

    def test_invariants(self):
        with pytest.raises(DomainError):
            MaterialSpec("metal", ComplexIOR(3.0, 0.0))  # metal needs k > 0
        with pytest.raises(DomainError):
            MaterialSpec("shiny_black", ComplexIOR(1.5, 0.2))
        with pytest.raises(DomainError):
            MaterialSpec("shiny_black", ComplexIOR(1.5, 0.0), diffuse_albedo=0.3)
        with pytest.raises(DomainError):
            MaterialSpec("shiny_white", ComplexIOR(1.5, 0.0), diffuse_albedo=0.0)


class TestGeometry:
    def test_mask_is_projected_disk(self):
        size = 64
        normals, mask = object_normals("sphere", size)
        px = (np.arange(size) + 0.5) / size * 2 - 1
        x, z = np.meshgrid(px, -px)
        assert np.array_equal(mask, x * x + z * z <= 1.0)

    def test_normals_unit_and_camera_facing(self):
        for name in ("sphere", "wavy", "dimpled"):
            normals, mask = object_normals(name, 64)
            n = normals[mask]
            assert np.abs(np.linalg.norm(n, axis=1) - 1.0).max() < 1e-9
            assert np.all(n[:, 1] <= 1e-9)  # toward the camera at -y

    def test_deformation_keeps_disk_mask(self):
        _, mask_s = object_normals("sphere", 96)
        _, mask_w = object_normals("wavy", 96)
        assert np.array_equal(mask_s, mask_w)

    def test_size_and_name_validation(self):
        with pytest.raises(DomainError):
            object_normals("sphere", 16)
        with pytest.raises(DomainError):
            object_normals("cube", 64)


class TestRenderSphere:
    def test_uniform_map_perfect_mirror(self):
        # nearly-unit reflectance at all angles: constant environment in,
        # constant radiance out
        c = 0.73
        m = EquirectMap.constant(32, c)
        raster, mask = render_sphere(m, MaterialSpec("shiny_black", ComplexIOR(1e9, 0.0)), 64)
        assert np.abs(raster[mask] - c).max() < 1e-4
        assert np.all(raster[~mask] == 0.0)

    def test_black_map_black_object(self):
        raster, mask = render_sphere(EquirectMap.constant(32, 0.0), metal(), 64)
        assert np.all(raster == 0.0)

    def test_single_texel_highlight_centroid(self):
        h, w, size = 64, 128, 256
        i0, j0 = 24, 96  # a direction in front of the sphere
        data = np.zeros((h, w, 3))
        data[i0, j0] = 50.0
        m = EquirectMap(data)
        raster, mask = render_sphere(m, metal(), size, sampling="nearest")

        lit = raster > 0
        assert lit.any()
        # one connected highlight: its bounding box is tight
        rows, cols = np.nonzero(lit)
        assert np.ptp(rows) <= 6 and np.ptp(cols) <= 6

        theta, phi = pixel_directions(h, w)
        d = np.array(
            [
                math.sin(theta[i0]) * math.cos(phi[j0]),
                math.sin(theta[i0]) * math.sin(phi[j0]),
                math.cos(theta[i0]),
            ]
        )
        n = d + np.array([0.0, -1.0, 0.0])
        n /= np.linalg.norm(n)
        col_pred = (n[0] + 1.0) / 2.0 * size - 0.5
        row_pred = (1.0 - n[2]) / 2.0 * size - 0.5
        weights = raster[lit]
        row_c = (rows * weights).sum() / weights.sum()
        col_c = (cols * weights).sum() / weights.sum()
        assert abs(row_c - row_pred) <= 1.0
        assert abs(col_c - col_pred) <= 1.0

    def test_superposition_of_white_material(self):
        m = russet_map(48, seed=1)
        black_raster, _ = render_sphere(m, shiny_black(), 64)
        spec, diff, mask = render_components(m, shiny_white(), 64)
        white_raster, _ = render_sphere(m, shiny_white(), 64)
        assert np.abs(white_raster - (black_raster + diff)).max() < 1e-6
        assert np.abs(white_raster - (spec + diff)).max() < 1e-9
        assert diff[mask].min() >= 0.0

    def test_diffuse_term_under_uniform_illumination(self):
        # E = pi * c under a uniform map, so the Lambertian term is albedo * c
        c = 2.0
        m = EquirectMap.constant(64, c)
        _, diff, mask = render_components(m, shiny_white(albedo=0.5), 64)
        assert np.abs(diff[mask] - 0.5 * c).max() < 2e-3

    def test_diffuse_term_against_brute_force_irradiance(self):
        # clamped-cosine light field; oracle integrates
        # E(n) = sum L(w) max(n.w, 0) dOmega directly over all pixels
        h, w, size, albedo = 128, 256, 64, 0.5
        theta, phi = pixel_directions(h, w)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        lum = np.maximum(np.cos(tt), 0.0)
        m = EquirectMap.from_luminance(lum)

        normals, mask = object_normals("sphere", size)
        dirs = np.stack(
            [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
        )
        d_omega = (np.sin(theta) * (np.pi / h) * (2 * np.pi / w))[:, None]
        cosine = np.tensordot(normals[mask], dirs, axes=([1], [2]))
        e_exact = np.tensordot(np.maximum(cosine, 0.0), lum * d_omega, axes=([1, 2], [0, 1]))
        expected = albedo / math.pi * e_exact

        _, diff, _ = render_components(m, shiny_white(albedo), size)
        err = np.abs(diff[mask] - expected)
        # order-2 truncation leaves sub-percent residue on this light field
        assert err.max() < 0.01 * expected.max()

    def test_chrome_dominates_obsidian_below_grazing(self):
        # chrome's Fresnel curve sits above obsidian's until ~86.8 degrees,
        # where the dielectric's faster approach to 1 crosses over by at
        # most 0.0132; below that the dominance is strict
        c_m = curve(metal().ior, 1.0)
        c_b = curve(shiny_black().ior, 1.0)
        diff = c_m.reflectance - c_b.reflectance
        assert diff[c_m.theta_deg <= 86.0].min() > 0.0
        assert diff.min() > -0.0132 - 1e-4
        m = blob_map(48)
        raster_m, mask = render_sphere(m, metal(), 64)
        raster_b, _ = render_sphere(m, shiny_black(), 64)
        # coverage ordering (the observable consequence): with a shared
        # exposure the chrome image is at least as covered
        scaled_m, s = normalize_exposure(raster_m, mask)
        stim_m = tone_map(scaled_m, mask)
        stim_b = tone_map(np.minimum(raster_b * s, exposure_target_linear()), mask)
        assert specular_coverage(stim_m).coverage >= specular_coverage(stim_b).coverage


class TestExposureAndToneMap:
    def test_normalization_hits_254(self):
        raster = np.array([[0.5, 2.0], [0.1, 0.0]])
        mask = np.ones((2, 2), dtype=bool)
        scaled, s = normalize_exposure(raster, mask)
        assert tone_map_value(scaled.max()) == 254
        assert s == pytest.approx(exposure_target_linear() / 2.0)

    def test_idempotent(self):
        raster = np.array([[0.25, exposure_target_linear()]])
        mask = np.ones((1, 2), dtype=bool)
        _, s = normalize_exposure(raster, mask)
        assert s == pytest.approx(1.0, abs=1e-6)

    def test_reused_scale_keeps_darker_material_below_ceiling(self):
        # with a localized source the exposure peak sits at an interior
        # reflection where chrome far outreflects obsidian
        m = blob_map(48, sources=((0.45, 0.75, 8.0),))
        raster_m, mask = render_sphere(m, metal(), 64)
        raster_b, _ = render_sphere(m, shiny_black(), 64)
        _, s = normalize_exposure(raster_m, mask)
        black = tone_map(raster_b * s, mask)
        assert black.image[mask].max() < 254

    def test_all_black_raster_rejected(self):
        with pytest.raises(ExposureError):
            normalize_exposure(np.zeros((4, 4)), np.ones((4, 4), dtype=bool))

    def test_tone_curve_values(self):
        assert tone_map_value(0.0) == 0
        assert tone_map_value(0.5) == 186
        assert tone_map_value(exposure_target_linear()) == 254
        assert tone_map_value(1.0) == 255
        assert tone_map_value(2.0) == 255  # clamped

    def test_tone_map_sets_background(self):
        raster = np.full((4, 4), 0.5)
        mask = np.zeros((4, 4), dtype=bool)
        mask[1:3, 1:3] = True
        stim = tone_map(raster, mask)
        assert np.all(stim.image[~mask] == BACKGROUND_GRAY)
        assert np.all(stim.image[mask] == 186)

    def test_tone_map_rejects_unnormalized(self):
        raster = np.full((4, 4), 1.0)  # would tone-map to 255
        with pytest.raises(DomainError):
            tone_map(raster, np.ones((4, 4), dtype=bool))

    def test_stimulus_invariants(self):
        img = np.full((4, 4), BACKGROUND_GRAY, dtype=np.uint8)
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 0] = True
        img[0, 0] = 255
        with pytest.raises(DomainError):
            Stimulus(image=img, mask=mask)
        img[0, 0] = 254
        img[3, 3] = 99  # background violated
        with pytest.raises(DomainError):
            Stimulus(image=img, mask=mask)


@pytest.fixture(scope="module")
def stimuli():
    maps = {
        "m0": blob_map(32, sources=((0.45, 0.75, 8.0),)),
        "m1": blob_map(32, sources=((0.35, 0.25, 6.0), (0.55, 0.6, 3.0))),
        "m2": blob_map(32, sources=((0.25, 0.5, 10.0),), ambient=0.02),
        "m3": blob_map(32, sources=((0.5, 0.9, 4.0),), ambient=0.3),
        "m4": russet_map(32, seed=14, high=1.5),
    }
    return render_condition_set(maps, size=64)


class TestConditionSet:

    def test_five_conditions_per_map(self, stimuli):
        assert len(stimuli) == 25
        ids = {s.meta.stimulus_id for s in stimuli}
        assert len(ids) == 25

    def test_three_objects_give_75(self):
        maps = {f"m{i}": russet_map(32, seed=20 + i) for i in range(5)}
        stimuli = render_condition_set(maps, objects=("sphere", "wavy", "dimpled"), size=64)
        assert len(stimuli) == 75

    def test_metal_base_peaks_at_254(self, stimuli):
        for s in stimuli:
            if s.meta.material == "metal" and s.meta.factor == 1.0:
                assert s.image[s.mask].max() == 254

    def test_all_object_pixels_capped(self, stimuli):
        for s in stimuli:
            assert s.image[s.mask].max() <= 254
            assert np.all(s.image[~s.mask] == BACKGROUND_GRAY)

    def test_dim_metal_darker(self, stimuli):
        by_key = {(s.meta.light_map, s.meta.material, s.meta.factor): s for s in stimuli}
        for i in range(5):
            bright = by_key[(f"m{i}", "metal", 1.0)]
            dim = by_key[(f"m{i}", "metal", 0.2)]
            assert dim.image[dim.mask].mean() < bright.image[bright.mask].mean()

    def test_boosted_black_covers_more(self, stimuli):
        by_key = {(s.meta.light_map, s.meta.material, s.meta.factor): s for s in stimuli}
        for i in range(5):
            base = specular_coverage(by_key[(f"m{i}", "shiny_black", 1.0)]).coverage
            boosted = specular_coverage(by_key[(f"m{i}", "shiny_black", 5.0)]).coverage
            assert boosted >= base

    def test_renormalization_flagged_when_boost_would_clip(self, stimuli):
        flagged = [s for s in stimuli if s.meta.renormalized]
        assert flagged, "expected at least one boosted stimulus to need adjustment"
        for s in flagged:
            assert s.image[s.mask].max() == 254
        # dimmed metal never needs the downward adjustment
        assert not any(
            s.meta.renormalized for s in stimuli if s.meta.material == "metal"
        )

    def test_background_independent_of_material(self, stimuli):
        imgs = [s for s in stimuli if s.meta.light_map == "m0"]
        bgs = {tuple(s.image[~s.mask][:16]) for s in imgs}
        assert bgs == {tuple([BACKGROUND_GRAY] * 16)}


class TestCoverageMechanism:
    def test_ganzfeld_limit_full_coverage(self):
        m = EquirectMap.constant(32, 1.0)
        raster, mask = render_sphere(m, metal(), 96)
        scaled, _ = normalize_exposure(raster, mask)
        stim = tone_map(scaled, mask)
        assert specular_coverage(stim).coverage >= 0.999

    def test_pre_blur_option_widens_the_highlight(self):
        data = np.zeros((64, 128, 3))
        data[24, 96] = 50.0
        m = EquirectMap(data)
        sharp, mask = render_sphere(m, metal(), 64)
        soft, _ = render_sphere(m, metal(), 64, pre_blur_width=16.0)
        assert np.count_nonzero(soft > 1e-9) > np.count_nonzero(sharp > 1e-9)
        # energy comes from the same lookup, only spread out
        assert soft[mask].max() < sharp[mask].max()

    def test_blurring_never_decreases_coverage(self):
        # sparse sources spread into larger highlights
        data = np.zeros((128, 256, 3))
        rng = np.random.default_rng(6)
        for _ in range(6):
            i, j = rng.integers(20, 100), rng.integers(0, 256)
            data[i, j] = 400.0
        m = EquirectMap(data)
        coverages = []
        for width in (0.0, 8.0, 32.0):
            blurred = m if width == 0 else gaussian_blur(m, width)
            raster, mask = render_sphere(blurred, metal(), 96)
            scaled, _ = normalize_exposure(raster, mask)
            coverages.append(specular_coverage(tone_map(scaled, mask)).coverage)
        assert coverages == sorted(coverages)
        assert coverages[-1] > coverages[0]
