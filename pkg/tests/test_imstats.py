import numpy as np
import pytest

from shinylab.errors import DomainError
from shinylab.imstats import infer_mask, mean_intensity, specular_coverage


def synthetic(obj_values, background=100, side=8):
    """Square image whose object (left half) takes the given values."""
    img = np.full((side, side), background, dtype=np.uint8)
    mask = np.zeros((side, side), dtype=bool)
    mask[:, : side // 2] = True
    vals = np.resize(np.array(obj_values, dtype=np.uint8), mask.sum())
    img[mask] = vals
    return img, mask


class TestCoverage:
    def test_fully_bright_object(self):
        img, mask = synthetic([254])
        assert specular_coverage(img, mask).coverage == 1.0

    def test_fully_dark_object(self):
        img, mask = synthetic([0])
        assert specular_coverage(img, mask).coverage == 0.0

    def test_half_bright(self):
        img, mask = synthetic([200, 10])
        res = specular_coverage(img, mask, threshold=50)
        assert res.coverage == 0.5
        assert res.above_pixels * 2 == res.object_pixels

    def test_threshold_is_strict(self):
        img, mask = synthetic([50])
        assert specular_coverage(img, mask, threshold=50).coverage == 0.0
        img, mask = synthetic([51])
        assert specular_coverage(img, mask, threshold=50).coverage == 1.0

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(0)
        img, mask = synthetic(rng.integers(0, 255, size=1000))
        prev = 1.0
        for t in range(0, 256, 5):
            cov = specular_coverage(img, mask, threshold=t).coverage
            assert cov <= prev
            prev = cov
        assert specular_coverage(img, mask, threshold=255).coverage == 0.0

    def test_background_invariance(self):
        rng = np.random.default_rng(1)
        img, mask = synthetic(rng.integers(0, 255, size=1000))
        noisy = img.copy()
        noisy[~mask] = rng.integers(0, 255, size=(~mask).sum())
        assert (
            specular_coverage(noisy, mask).coverage == specular_coverage(img, mask).coverage
        )
        assert mean_intensity(noisy, mask) == mean_intensity(img, mask)

    def test_supra_threshold_pixels_weighted_equally(self):
        # saturating every supra-threshold pixel changes the mean but not
        # the coverage
        rng = np.random.default_rng(2)
        img, mask = synthetic(rng.integers(0, 255, size=1000))
        saturated = img.copy()
        saturated[mask & (img > 50)] = 255
        assert (
            specular_coverage(saturated, mask, 50).coverage
            == specular_coverage(img, mask, 50).coverage
        )
        assert mean_intensity(saturated, mask) > mean_intensity(img, mask)

    def test_empty_mask_rejected(self):
        img = np.full((4, 4), 100, dtype=np.uint8)
        with pytest.raises(DomainError):
            specular_coverage(img, np.zeros((4, 4), dtype=bool))
        with pytest.raises(DomainError):
            specular_coverage(img)  # inferred mask is empty too

    def test_threshold_validation(self):
        img, mask = synthetic([100])
        with pytest.raises(DomainError):
            specular_coverage(img, mask, threshold=300)


class TestMeanIntensity:
    def test_constant_object(self):
        img, mask = synthetic([128])
        assert mean_intensity(img, mask) == 128.0

    def test_black_object(self):
        img, mask = synthetic([0])
        assert mean_intensity(img, mask) == 0.0

    def test_half_and_half(self):
        img, mask = synthetic([200, 10])
        assert mean_intensity(img, mask) == 105.0


class TestInferredMask:
    def test_background_constant_heuristic(self):
        img = np.full((6, 6), 100, dtype=np.uint8)
        img[2:4, 2:4] = 77
        mask = infer_mask(img)
        assert mask.sum() == 4
        assert mean_intensity(img) == 77.0
