import numpy as np
import pytest

from star_denoise.core.errors import ParamError
from star_denoise.core.prox import matrix_svt, nuclear_norm, soft_threshold, tensor_svt
from star_denoise.core.tensor import fold, unfold


class TestSoftThreshold:
    def test_examples(self):
        assert soft_threshold(np.array(0.5), 0.2) == pytest.approx(0.3)
        assert soft_threshold(np.array(-0.1), 0.2) == 0.0
        assert soft_threshold(np.array(-0.7), 0.2) == pytest.approx(-0.5)

    def test_zero_threshold_is_identity(self, rng):
        x = rng.standard_normal(20)
        np.testing.assert_array_equal(soft_threshold(x, 0.0), x)

    def test_is_scalar_prox(self, rng):
        grid = np.arange(-5.0, 5.0 + 1e-9, 1e-3)
        for _ in range(100):
            x = rng.uniform(-4, 4)
            tau = rng.uniform(0, 2)
            best = grid[np.argmin(0.5 * (grid - x) ** 2 + tau * np.abs(grid))]
            assert float(soft_threshold(np.array(x), tau)) == pytest.approx(best, abs=1e-3)

    def test_never_grows_entries(self, rng):
        x = rng.standard_normal(500) * 3
        for tau in (0.0, 0.1, 1.0, 10.0):
            assert np.all(np.abs(soft_threshold(x, tau)) <= np.abs(x))

    def test_negative_threshold(self):
        with pytest.raises(ParamError):
            soft_threshold(np.zeros(2), -1.0)


class TestMatrixSvt:
    def test_diagonal(self):
        np.testing.assert_allclose(matrix_svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-12)

    def test_zero_threshold(self, rng):
        m = rng.standard_normal((5, 3))
        np.testing.assert_allclose(matrix_svt(m, 0.0), m, atol=1e-12)

    def test_kills_everything_above_top_singular_value(self, rng):
        m = rng.standard_normal((4, 4))
        top = np.linalg.svd(m, compute_uv=False)[0]
        assert not np.any(matrix_svt(m, top + 1e-9))


    @pytest.mark.parametrize("eps", [1e-3, 1e-2])
    def test_is_prox_of_nuclear_norm(self, rng, eps):
        tau = 0.5
        for _ in range(50):
            m = rng.standard_normal((4, 4))
            x = matrix_svt(m, tau)
            perturbed = x + eps * rng.standard_normal((1000, 4, 4))
            costs = 0.5 * np.sum((perturbed - m) ** 2, axis=(1, 2)) + tau * np.sum(
                np.linalg.svd(perturbed, compute_uv=False), axis=1
            )
            base = 0.5 * np.sum((x - m) ** 2) + tau * np.sum(np.linalg.svd(x, compute_uv=False))
            assert np.all(costs >= base - 1e-12)


class TestTensorSvt:
    def test_single_slice_matches_matrix_svt(self, rng):
        m = rng.standard_normal((5, 4))
        t = m[:, :, None]
        np.testing.assert_allclose(tensor_svt(t, 0.7)[:, :, 0], matrix_svt(m, 0.7), atol=1e-10)

    def test_zero_threshold(self, rng):
        t = rng.standard_normal((4, 3, 5))
        np.testing.assert_allclose(tensor_svt(t, 0.0), t, atol=1e-8)

    def test_tube_rank_one_vanishes(self, rng):
        u = rng.standard_normal(4)
        v = rng.standard_normal(3)
        c, n3 = 0.8, 6
        t = np.einsum("i,j,k->ijk", u, v, np.full(n3, c))
        tubal = np.linalg.norm(u) * np.linalg.norm(v) * c * np.sqrt(n3)
        assert not np.any(np.abs(tensor_svt(t, tubal * 1.001)) > 1e-12)
        assert np.linalg.norm(tensor_svt(t, tubal * 0.5)) > 0

    @pytest.mark.parametrize("n3", [1, 2, 5, 6])
    def test_is_prox_of_nuclear_norm(self, rng, n3):
        t = rng.standard_normal((4, 3, n3))
        tau = 0.6
        x = tensor_svt(t, tau)

        def cost(z):
            return 0.5 * np.sum((z - t) ** 2) + tau * nuclear_norm(z)

        base = cost(x)
        for _ in range(50):
            assert cost(x + 1e-3 * rng.standard_normal(t.shape)) >= base - 1e-12

    @pytest.mark.parametrize("tnn", ["tsvd", "mode3-unfold"])
    def test_non_expansive(self, rng, tnn):
        for _ in range(30):
            a = rng.standard_normal((4, 3, 5))
            b = a + 0.3 * rng.standard_normal(a.shape)
            gap = np.linalg.norm(tensor_svt(a, 0.4, tnn=tnn) - tensor_svt(b, 0.4, tnn=tnn))
            assert gap <= np.linalg.norm(a - b) + 1e-12

    def test_output_is_real(self, rng):
        out = tensor_svt(rng.standard_normal((3, 3, 4)), 0.3)
        assert out.dtype == np.float64

    def test_batch_matches_single(self, rng):
        batch = rng.standard_normal((4, 3, 3, 5))
        out = tensor_svt(batch, 0.5)
        for index in range(4):
            np.testing.assert_allclose(out[index], tensor_svt(batch[index], 0.5), atol=1e-12)

    def test_mode3_unfold_variant(self, rng):
        t = rng.standard_normal((3, 4, 2))
        expected = fold(matrix_svt(unfold(t, 3), 0.4), 3, t.shape)
        np.testing.assert_allclose(tensor_svt(t, 0.4, tnn="mode3-unfold"), expected, atol=1e-12)

    def test_unknown_norm(self):
        with pytest.raises(ParamError):
            tensor_svt(np.zeros((2, 2, 2)), 0.1, tnn="nuclear")

    def test_nuclear_norm_of_single_slice(self, rng):
        m = rng.standard_normal((4, 3))
        expected = np.sum(np.linalg.svd(m, compute_uv=False))
        assert nuclear_norm(m[:, :, None]) == pytest.approx(expected, rel=1e-12)
        assert nuclear_norm(m[:, :, None], "mode3-unfold") == pytest.approx(
            np.linalg.norm(m), rel=1e-12
        )
