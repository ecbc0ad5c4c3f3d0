import numpy as np
import pytest

from star_denoise.core.dictionary import DictionarySet, dct_basis, tucker_apply
from star_denoise.core.errors import DimsError


class TestDctBasis:
    def test_size_one(self):
        np.testing.assert_array_equal(dct_basis(1), [[1.0]])

    def test_size_two(self):
        h = 1 / np.sqrt(2)
        np.testing.assert_allclose(dct_basis(2), [[h, h], [h, -h]], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 9, 16])
    def test_orthonormal(self, n):
        d = dct_basis(n)
        assert np.abs(d.T @ d - np.eye(n)).max() < 1e-12

    def test_rejects_empty(self):
        with pytest.raises(DimsError):
            dct_basis(0)


class TestTuckerApply:
    def test_identity_dictionaries(self, rng):
        b = rng.standard_normal((2, 3, 4))
        d = DictionarySet(np.eye(2), np.eye(3), np.eye(4))
        np.testing.assert_array_equal(tucker_apply(b, d), b)

    def test_dct_is_isometry(self, rng):
        b = rng.standard_normal((4, 5, 3))
        d = DictionarySet.dct((4, 5, 3))
        forward = tucker_apply(b, d)
        assert np.linalg.norm(forward) == pytest.approx(np.linalg.norm(b), rel=1e-12)
        np.testing.assert_allclose(tucker_apply(forward, d, adjoint=True), b, atol=1e-12)

    def test_true_adjoint(self, rng):
        d = DictionarySet(*(rng.standard_normal((n, n)) for n in (3, 4, 2)))
        for _ in range(20):
            x = rng.standard_normal((3, 4, 2))
            y = rng.standard_normal((3, 4, 2))
            lhs = np.sum(tucker_apply(x, d) * y)
            rhs = np.sum(x * tucker_apply(y, d, adjoint=True))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_batch_matches_single(self, rng):
        d = DictionarySet.dct((3, 3, 2))
        batch = rng.standard_normal((5, 3, 3, 2))
        out = tucker_apply(batch, d)
        for index in range(5):
            np.testing.assert_allclose(out[index], tucker_apply(batch[index], d), atol=1e-14)

    def test_dims_mismatch(self):
        with pytest.raises(DimsError):
            tucker_apply(np.zeros((2, 2, 2)), DictionarySet.dct((3, 3, 3)))


class TestDictionarySet:
    def test_from_lists_round_trips(self):
        d = DictionarySet.dct((2, 3, 1))
        again = DictionarySet.from_lists(**d.to_lists())
        assert again.signal_dims == (2, 3, 1)
        np.testing.assert_array_equal(again.d2, d.d2)

    def test_from_lists_requires_square(self):
        with pytest.raises(DimsError):
            DictionarySet.from_lists([[1.0, 0.0]], [[1.0]], [[1.0]])
