import numpy as np
import pytest

from inpaintmask.errors import DomainError, ParameterError
from inpaintmask.image import BinaryMask
from inpaintmask.morphology import dilate
from inpaintmask.sdf import (
    SignedDistanceField,
    euclidean_distance_to,
    level_region,
    normalize_sdf,
    render_offset_map,
    signed_distance,
)

from conftest import random_blob_mask, random_mask


def brute_force_distance_to(mask: BinaryMask) -> np.ndarray:
    """O(N^2) oracle: exact integer squared distances, then sqrt."""
    h, w = mask.extents
    fg = np.argwhere(mask.as_bool()).astype(np.int64)
    yy, xx = np.mgrid[0:h, 0:w]
    pts = np.stack([yy.ravel(), xx.ravel()], axis=1).astype(np.int64)
    d2 = (pts[:, None, 0] - fg[None, :, 0]) ** 2 + (pts[:, None, 1] - fg[None, :, 1]) ** 2
    return np.sqrt(d2.min(axis=1).astype(np.float64)).reshape(h, w)


class TestDistanceTo:
    def test_row_example(self):
        m = BinaryMask(np.array([[0, 0, 1, 0, 0]]))
        assert np.array_equal(euclidean_distance_to(m), [[2, 1, 0, 1, 2]])

    def test_all_ones_zero(self):
        assert np.all(euclidean_distance_to(BinaryMask(np.ones((4, 4)))) == 0)

    def test_two_endpoints(self):
        m = BinaryMask(np.array([[1, 0, 0, 0, 1]]))
        assert np.array_equal(euclidean_distance_to(m), [[0, 1, 2, 1, 0]])

    def test_empty_mask_rejected(self):
        with pytest.raises(DomainError):
            euclidean_distance_to(BinaryMask(np.zeros((3, 3))))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = random_mask(rng, (16, 16), p=rng.uniform(0.05, 0.6))
            got = euclidean_distance_to(m)
            want = brute_force_distance_to(m)
            assert np.abs(got - want).max() <= 1e-6


class TestSignedDistance:
    def test_row_example(self):
        phi = signed_distance(BinaryMask(np.array([[0, 0, 1, 0, 0]])))
        assert np.array_equal(phi.data, [[2, 1, -1, 1, 2]])

    def test_complement_flips_sign_pattern(self):
        rng = np.random.default_rng(12)
        m = random_mask(rng, (12, 12))
        a = signed_distance(m).data
        b = signed_distance(m.complement()).data
        assert np.all(np.sign(a) == -np.sign(b))

    def test_center_pixel_corner_distance(self):
        m = np.zeros((5, 5))
        m[2, 2] = 1
        phi = signed_distance(BinaryMask(m))
        assert phi.data[0, 0] == pytest.approx(2 * np.sqrt(2))

    def test_no_zero_values_and_sign_partition(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            m = random_mask(rng, (14, 14))
            phi = signed_distance(m)
            assert np.abs(phi.data).min() >= 1.0
            assert np.array_equal(phi.interior_mask().data, m.data)

    def test_degenerate_masks_rejected(self):
        with pytest.raises(DomainError):
            signed_distance(BinaryMask(np.zeros((3, 3))))
        with pytest.raises(DomainError):
            signed_distance(BinaryMask(np.ones((3, 3))))

    def test_threshold_matches_dilation(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            m = random_blob_mask(rng, (24, 24))
            phi = signed_distance(m)
            for r in (0.0, 1.0, 2.5, 4.0):
                thresh = BinaryMask(phi.data <= r)
                assert np.array_equal(thresh.data, dilate(m, r).data)


class TestNormalize:
    def test_divides_by_peak(self):
        field = SignedDistanceField(np.array([[-4.0, 2.0], [1.0, 3.0]]))
        normed = normalize_sdf(field)
        assert normed.normalized
        assert np.array_equal(normed.data, field.data / 4.0)

    def test_renormalization_rejected(self):
        field = normalize_sdf(SignedDistanceField(np.array([[-2.0, 1.0]])))
        with pytest.raises(ParameterError):
            normalize_sdf(field)

    def test_argextrema_preserved(self):
        rng = np.random.default_rng(15)
        m = random_blob_mask(rng, (20, 20))
        phi = signed_distance(m)
        normed = normalize_sdf(phi)
        assert np.argmax(phi.data) == np.argmax(normed.data)
        assert np.argmin(phi.data) == np.argmin(normed.data)

    def test_all_zero_rejected(self):
        with pytest.raises(DomainError):
            normalize_sdf(SignedDistanceField(np.zeros((3, 3))))


class TestOffsetRender:
    @pytest.fixture()
    def normed(self):
        # grid wide enough that normalized ring distances land between the
        # alphas compared below
        m = np.zeros((81, 81))
        m[36:45, 36:45] = 1
        return normalize_sdf(signed_distance(BinaryMask(m)))

    def test_alpha_zero_region_is_mask(self, normed):
        region = level_region(normed, 0.0)
        assert np.array_equal(region.data, normed.interior_mask().data)

    def test_larger_alpha_grows_region(self, normed):
        small = level_region(normed, 0.01).as_bool()
        big = level_region(normed, 0.07).as_bool()
        assert np.all(big | ~small)  # superset
        assert big.sum() > small.sum()

    def test_interior_darker_than_exterior(self, normed):
        for alpha in (0.0, 0.03, 0.07):
            img = render_offset_map(normed, alpha)
            inside = img.data[normed.data < 0]
            outside = img.data[normed.data > 0]
            assert inside.max() < outside.min()

    def test_requires_normalized(self):
        m = np.zeros((9, 9))
        m[4, 4] = 1
        with pytest.raises(ParameterError):
            render_offset_map(signed_distance(BinaryMask(m)), 0.0)
