import numpy as np
import pytest

from star_denoise.core.config import HOME_ENV


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_low_rank_cube(n1=32, n2=32, n3=8, rank=4, seed=0):
    """Cube in [0, 1] whose spectra span ``rank`` smooth endmembers."""
    gen = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n1)[:, None]
    y = np.linspace(0.0, 1.0, n2)[None, :]
    bands = np.linspace(0.0, 1.0, n3)
    abundances = []
    for r in range(rank):
        fx, fy = gen.uniform(0.5, 2.0, size=2)
        phase = gen.uniform(0, np.pi)
        abundances.append(0.5 + 0.5 * np.sin(np.pi * fx * x + phase) * np.cos(np.pi * fy * y))
    abundances = np.stack(abundances, axis=-1)
    abundances /= abundances.sum(axis=-1, keepdims=True)
    centers = np.linspace(0.15, 0.85, rank)
    spectra = np.stack(
        [0.2 + 0.6 * np.exp(-((bands - c) ** 2) / 0.08) for c in centers], axis=0
    )
    return np.einsum("ijr,rk->ijk", abundances, spectra)


@pytest.fixture
def clean_cube():
    return smooth_low_rank_cube()


@pytest.fixture(autouse=True)
def config_home(tmp_path, monkeypatch):
    home = tmp_path / "star-home"
    monkeypatch.setenv(HOME_ENV, str(home))
    return home
