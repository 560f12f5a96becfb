"""Random generators shared across the test suite."""

import numpy as np

from qdeconv import DensityMatrix, dagger


def random_operator(gen: np.random.Generator) -> np.ndarray:
    """Entries uniform in [-1, 1] + i[-1, 1]."""
    return gen.uniform(-1, 1, (2, 2)) + 1j * gen.uniform(-1, 1, (2, 2))


def random_hermitian(gen: np.random.Generator) -> np.ndarray:
    a = random_operator(gen)
    return (a + dagger(a)) / 2


def random_density_matrix(gen: np.random.Generator) -> DensityMatrix:
    """Ginibre construction: G G^dag normalized to unit trace."""
    g = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
    rho = g @ dagger(g)
    return DensityMatrix(rho / np.trace(rho).real)


def random_pure_state(gen: np.random.Generator) -> DensityMatrix:
    v = gen.normal(size=2) + 1j * gen.normal(size=2)
    return DensityMatrix.pure(v)


def random_unitary(gen: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from the QR decomposition of a Ginibre matrix."""
    g = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
