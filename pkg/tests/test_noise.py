import numpy as np
import pytest

from star_denoise.core.errors import ParamError
from star_denoise.core.noise import (
    add_dead_lines,
    add_gaussian,
    add_impulse,
    apply_spec,
    simulate,
    spec_chain,
)


@pytest.fixture
def interior_cube(rng):
    # Strictly inside (0, 1) so corrupted voxels are easy to spot
    return rng.uniform(0.2, 0.8, (20, 16, 10))


class TestGaussian:
    def test_zero_sigma_is_identity(self, interior_cube):
        np.testing.assert_array_equal(add_gaussian(interior_cube, 0, seed=3), interior_cube)

    def test_standard_deviation(self):
        x = np.full((64, 64, 8), 0.5)
        noise = add_gaussian(x, 30, seed=11) - x
        assert abs(noise.std() - 30 / 255) < 0.03 * 30 / 255

    def test_deterministic(self, interior_cube):
        a = add_gaussian(interior_cube, 30, seed=4)
        b = add_gaussian(interior_cube, 30, seed=4)
        c = add_gaussian(interior_cube, 30, seed=5)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_not_clipped(self):
        y = add_gaussian(np.full((32, 32, 4), 0.5), 70, seed=0)
        assert y.max() > 1.0 and y.min() < 0.0

    def test_bands_are_independent_of_band_count(self, interior_cube):
        full = add_gaussian(interior_cube, 30, seed=9)
        prefix = add_gaussian(interior_cube[:, :, :4], 30, seed=9)
        np.testing.assert_array_equal(full[:, :, :4], prefix)

    def test_independent_draws_have_sigma_each(self):
        x = np.full((64, 64, 8), 0.5)
        difference = add_gaussian(x, 20, seed=1) - add_gaussian(x, 20, seed=2)
        assert abs(difference.std() - np.sqrt(2) * 20 / 255) < 0.03 * np.sqrt(2) * 20 / 255
        assert abs(difference.mean()) < 0.05 * 20 / 255

    def test_negative_sigma(self, interior_cube):
        with pytest.raises(ParamError):
            add_gaussian(interior_cube, -1, seed=0)


class TestImpulse:
    def test_zero_ratio(self, interior_cube):
        np.testing.assert_array_equal(add_impulse(interior_cube, 0.0, seed=1), interior_cube)

    def test_full_ratio(self, interior_cube):
        y = add_impulse(interior_cube, 1.0, seed=1)
        assert np.all((y == 0.0) | (y == 1.0))

    def test_exact_count_per_band(self, interior_cube):
        y = add_impulse(interior_cube, 0.2, seed=2)
        expected = round(0.2 * 20 * 16)
        changed = np.sum(y != interior_cube, axis=(0, 1))
        assert np.all(changed == expected)
        assert set(np.unique(y[y != interior_cube])) <= {0.0, 1.0}

    def test_bad_ratio(self, interior_cube):
        with pytest.raises(ParamError):
            add_impulse(interior_cube, 1.5, seed=0)

    def test_half_count_rounds_up(self):
        x = np.full((1, 5, 3), 0.5)
        y = add_impulse(x, 0.5, seed=0)
        assert np.all(np.sum(y != x, axis=(0, 1)) == 3)


class TestDeadLines:
    def test_zero_ratio(self, interior_cube):
        np.testing.assert_array_equal(add_dead_lines(interior_cube, 0.0, seed=1), interior_cube)

    def test_affected_band_count(self, interior_cube):
        y = add_dead_lines(interior_cube, 0.2, seed=3)
        dead_columns = np.all(y == 0.0, axis=0)
        affected = np.any(dead_columns, axis=0)
        assert affected.sum() == round(0.2 * 10)
        assert np.all(dead_columns.sum(axis=0)[affected] <= 3)

    def test_half_band_count_rounds_up(self):
        x = np.full((4, 6, 5), 0.5)
        y = add_dead_lines(x, 0.5, seed=2)
        assert np.any(np.all(y == 0.0, axis=0), axis=0).sum() == 3

    def test_columns_span_full_height(self, interior_cube):
        y = add_dead_lines(interior_cube, 0.5, seed=4)
        zeroed = y == 0.0
        # Any zero voxel belongs to a fully zeroed column
        assert np.array_equal(np.any(zeroed, axis=0), np.all(zeroed, axis=0))

    def test_other_bands_untouched(self, interior_cube):
        y = add_dead_lines(interior_cube, 0.2, seed=3)
        affected = np.any(np.all(y == 0.0, axis=0), axis=0)
        np.testing.assert_array_equal(y[:, :, ~affected], interior_cube[:, :, ~affected])


class TestSimulate:
    def test_clean_passthrough(self, interior_cube):
        np.testing.assert_array_equal(simulate(interior_cube, 0, 0, 0, seed=1), interior_cube)

    def test_matches_spec_chain(self, interior_cube):
        expected = interior_cube
        for spec in spec_chain(30, 0.2, 0.2, seed=8):
            expected = apply_spec(expected, spec)
        np.testing.assert_array_equal(simulate(interior_cube, 30, 0.2, 0.2, seed=8), expected)

    def test_chain_order_and_seeds(self):
        chain = spec_chain(10, 0.1, 0.3, seed=0)
        assert [spec.kind for spec in chain] == ["gaussian", "impulse", "deadlines"]
        assert len({spec.seed for spec in chain}) == 3

    def test_deterministic(self, interior_cube):
        a = simulate(interior_cube, 30, 0.2, 0.2, seed=12)
        b = simulate(interior_cube, 30, 0.2, 0.2, seed=12)
        assert a.tobytes() == b.tobytes()

    @pytest.mark.parametrize(
        "ratios", [(0.0, 1.5, 0.0), (0.0, -0.1, 0.0), (0.0, 0.0, 1.01), (-1.0, 0.0, 0.0)]
    )
    def test_out_of_range_arguments(self, interior_cube, ratios):
        with pytest.raises(ParamError):
            spec_chain(*ratios, seed=0)
        with pytest.raises(ParamError):
            simulate(interior_cube, *ratios, seed=0)
