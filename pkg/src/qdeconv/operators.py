"""Exact 2x2 complex operator algebra: Pauli basis, states, expectations.

Operators are plain ``numpy`` arrays of shape (2, 2) and dtype complex;
the helpers here add the Pauli-basis view (four coefficients such that
``O = c0*I + cx*X + cy*Y + cz*Z``), validated density matrices, and the
measurement-expectation primitive used everywhere else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian

__all__ = [
    "ID2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULIS",
    "AXES",
    "AXIS_INDEX",
    "Tolerances",
    "DEFAULT_TOL",
    "op2",
    "dagger",
    "pauli_decompose",
    "pauli_reconstruct",
    "expectation",
    "eigenvalues_hermitian",
    "bloch_vector",
    "DensityMatrix",
    "ry_state",
]

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Basis order {I, X, Y, Z} is the source of truth for every 4-vector and
# 4x4 matrix in the package.
PAULIS = (ID2, SIGMA_X, SIGMA_Y, SIGMA_Z)

AXES = ("x", "y", "z")
AXIS_INDEX = {"x": 1, "y": 2, "z": 3}


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through validating constructors.

    ``exact`` guards identities that hold exactly in real arithmetic;
    ``psd`` is the slack allowed on eigenvalue positivity checks.
    """

    exact: float = 1e-12
    psd: float = 1e-10


DEFAULT_TOL = Tolerances()


def op2(entries) -> np.ndarray:
    """Coerce ``entries`` to a 2x2 complex array, rejecting NaN/Inf."""
    o = np.asarray(entries, dtype=complex)
    if o.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {o.shape}")
    if not np.all(np.isfinite(o.real)) or not np.all(np.isfinite(o.imag)):
        raise ValueError("operator entries must be finite")
    return o


def dagger(o: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(o).conj().T


def pauli_decompose(o: np.ndarray) -> np.ndarray:
    """Coefficients ``c_i = Tr[sigma_i O] / 2`` in basis order {I, X, Y, Z}.

    With this normalization the inverse is the plain weighted sum
    ``O = sum_i c_i sigma_i`` (see :func:`pauli_reconstruct`).
    """
    o = np.asarray(o, dtype=complex)
    return np.array([np.trace(p @ o) / 2 for p in PAULIS], dtype=complex)


def pauli_reconstruct(coeffs) -> np.ndarray:
    """Rebuild the operator ``sum_i c_i sigma_i`` from four coefficients."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (4,):
        raise ValueError(f"expected 4 coefficients, got shape {c.shape}")
    return c[0] * ID2 + c[1] * SIGMA_X + c[2] * SIGMA_Y + c[3] * SIGMA_Z


def expectation(obs: np.ndarray, state) -> complex:
    """``Tr[obs rho]``; ``state`` may be a DensityMatrix or a bare matrix."""
    rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    return complex(np.trace(np.asarray(obs) @ rho))


def eigenvalues_hermitian(o: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Both eigenvalues of a Hermitian 2x2 matrix, ascending, in closed form."""
    o = np.asarray(o, dtype=complex)
    if np.max(np.abs(o - dagger(o))) > 1e-10:
        raise NotHermitian("eigenvalues_hermitian requires a Hermitian operator")
    a = o[0, 0].real
    d = o[1, 1].real
    mean = (a + d) / 2
    radius = np.sqrt(((a - d) / 2) ** 2 + abs(o[0, 1]) ** 2)
    return (mean - radius, mean + radius)


def bloch_vector(state) -> np.ndarray:
    """Real Bloch vector (rx, ry, rz) with ``rho = (I + r.sigma)/2``."""
    rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    return np.array([np.trace(s @ rho).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


@dataclass(frozen=True)
class DensityMatrix:
    """A validated single-qubit state.

    Construction checks Hermiticity, unit trace, positive semidefiniteness
    and the Bloch-norm bound. Channels preserve these properties by theorem,
    so hot loops may use :meth:`unchecked` to skip re-validation.
    """

    matrix: np.ndarray
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        m = op2(self.matrix)
        object.__setattr__(self, "matrix", m)
        if np.max(np.abs(m - dagger(m))) > self.tol.exact:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m) - 1) > self.tol.exact:
            raise ValueError(f"density matrix must have unit trace, got {np.trace(m)}")
        lo, _ = eigenvalues_hermitian(m, self.tol)
        if lo < -self.tol.psd:
            raise ValueError(f"density matrix must be PSD, min eigenvalue {lo}")
        norm = float(np.linalg.norm(bloch_vector(m)))
        if norm > 1 + self.tol.psd:
            raise ValueError(f"Bloch vector norm {norm} exceeds 1")

    @classmethod
    def unchecked(cls, matrix: np.ndarray) -> "DensityMatrix":
        """Wrap ``matrix`` without validation (for inner Monte Carlo loops)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", np.asarray(matrix, dtype=complex))
        object.__setattr__(obj, "tol", DEFAULT_TOL)
        return obj

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        """|psi><psi| from a length-2 ket (normalized here)."""
        v = np.asarray(ket, dtype=complex).reshape(2)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_bloch(cls, rx: float, ry: float, rz: float) -> "DensityMatrix":
        return cls((ID2 + rx * SIGMA_X + ry * SIGMA_Y + rz * SIGMA_Z) / 2)

    @property
    def bloch(self) -> np.ndarray:
        return bloch_vector(self.matrix)


def ry_state(theta: float) -> DensityMatrix:
    """State ``Ry(theta)|0>``, i.e. Bloch vector (sin theta, 0, cos theta)."""
    return DensityMatrix.pure([np.cos(theta / 2), np.sin(theta / 2)])
