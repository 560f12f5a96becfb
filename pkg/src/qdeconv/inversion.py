"""Closed-form inverse maps for all supported channels.

Every invertible channel here gets an :class:`InverseMap` holding the
signed operator sum of the inverse, its PTM, and the per-axis correction
scalars consumed by :mod:`qdeconv.deconvolution`. The closed forms are
primary; :func:`invert_ptm` is the independent numerical oracle used by the
test suite to cross-check them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    AmplitudeDamping,
    BitFlip,
    BitPhaseFlip,
    Decoherence,
    Depolarizing,
    GeneralPauli,
    NoiseModel,
    PhaseFlip,
    SignedKrausMap,
    TwoKraus,
    compose_maps,
    is_completely_positive,
    kraus_of,
    min_choi_eigenvalue,
    ptm_of,
)
from .errors import NonInvertible, NotDiagonal, SingularPtm
from .operators import ID2, PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z, dagger

__all__ = [
    "CorrectionFactors",
    "InverseMap",
    "InverseCheck",
    "SINGULARITY_THRESHOLD",
    "invert_ptm",
    "operator_sum_from_pauli_diagonal",
    "inverse_of",
    "adjoint",
    "verify_inverse",
]

# Parameters closer than this to a singular point raise NonInvertible: the
# corresponding corrections would amplify variance beyond any realistic
# shot budget.
SINGULARITY_THRESHOLD = 1e-6


@dataclass(frozen=True)
class CorrectionFactors:
    """Per-axis deconvolution data: ``<s_a>_ideal = f_a * (<s_a>_noisy + off_a)``
    with ``off_x = off_y = 0`` and ``off_z = z_offset``."""

    fx: float
    fy: float
    fz: float
    z_offset: float = 0.0

    def factor(self, axis: str) -> float:
        return {"x": self.fx, "y": self.fy, "z": self.fz}[axis]

    def offset(self, axis: str) -> float:
        return self.z_offset if axis == "z" else 0.0


@dataclass(frozen=True)
class InverseMap:
    kraus: SignedKrausMap
    ptm: np.ndarray
    source: NoiseModel
    correction_factors: CorrectionFactors


@dataclass(frozen=True)
class InverseCheck:
    """Result of :func:`verify_inverse`."""

    max_deviation: float
    direct_is_cp: bool
    inverse_is_cp: bool
    inverse_min_choi_eigenvalue: float


def invert_ptm(ptm: np.ndarray, det_threshold: float = 1e-12) -> np.ndarray:
    """Numeric 4x4 inverse; raises :class:`SingularPtm` for singular noise."""
    ptm = np.asarray(ptm, dtype=float)
    det = float(np.linalg.det(ptm))
    if abs(det) <= det_threshold:
        raise SingularPtm(det)
    return np.linalg.inv(ptm)


def operator_sum_from_pauli_diagonal(ptm: np.ndarray, atol: float = 1e-12) -> SignedKrausMap:
    """Signed operator sum ``sum_j b_j s_j O s_j`` matching a diagonal PTM.

    The weights solve the eigenvalue-matching system
    ``diag(G) = H4 @ b`` with the 4x4 Hadamard-sign matrix ``H4``; terms with
    zero weight are dropped.
    """
    ptm = np.asarray(ptm, dtype=float)
    off = ptm - np.diag(np.diag(ptm))
    if np.max(np.abs(off)) > atol:
        raise NotDiagonal(f"PTM has off-diagonal entries up to {np.max(np.abs(off)):.3e}")
    if abs(ptm[0, 0] - 1.0) > atol:
        raise NotDiagonal(f"PTM (0,0) entry must be 1, got {ptm[0, 0]}")
    h4 = np.array(
        [
            [1, 1, 1, 1],
            [1, 1, -1, -1],
            [1, -1, 1, -1],
            [1, -1, -1, 1],
        ],
        dtype=float,
    )
    # H4 is its own inverse up to 1/4.
    betas = h4 @ np.diag(ptm) / 4
    terms = tuple(
        (float(b), s) for b, s in zip(betas, PAULIS) if abs(b) > 1e-15
    )
    return SignedKrausMap(terms)


def _require(value: float, what: str, model: NoiseModel, threshold: float) -> None:
    if abs(value) <= threshold:
        raise NonInvertible(model, f"{what} = {value:.3e} is (near) zero")


def _pauli_inverse(
    model: NoiseModel,
    diag: tuple[float, float, float],
    threshold: float,
) -> InverseMap:
    """Inverse of a channel with PTM ``diag(1, dx, dy, dz)``."""
    dx, dy, dz = diag
    for value, name in ((dx, "x contraction"), (dy, "y contraction"), (dz, "z contraction")):
        _require(value, name, model, threshold)
    inv_ptm = np.diag([1.0, 1 / dx, 1 / dy, 1 / dz])
    kraus = operator_sum_from_pauli_diagonal(inv_ptm)
    cf = CorrectionFactors(fx=1 / dx, fy=1 / dy, fz=1 / dz)
    return InverseMap(kraus=kraus, ptm=inv_ptm, source=model, correction_factors=cf)


def inverse_of(
    model: NoiseModel, singular_threshold: float = SINGULARITY_THRESHOLD
) -> InverseMap:
    """Closed-form inverse map of ``model``.

    Raises :class:`NonInvertible` when the channel parameters are within
    ``singular_threshold`` of a singular point (p = 1/2 for flips, p = 1 for
    depolarizing, gamma = 1 for damping, vanishing cosines for the
    two-Kraus family).
    """
    if isinstance(model, BitFlip):
        c = 1 - 2 * model.p
        return _pauli_inverse(model, (1.0, c, c), singular_threshold)
    if isinstance(model, PhaseFlip):
        c = 1 - 2 * model.p
        return _pauli_inverse(model, (c, c, 1.0), singular_threshold)
    if isinstance(model, BitPhaseFlip):
        c = 1 - 2 * model.p
        return _pauli_inverse(model, (c, 1.0, c), singular_threshold)
    if isinstance(model, Depolarizing):
        c = 1 - model.p
        return _pauli_inverse(model, (c, c, c), singular_threshold)
    if isinstance(model, GeneralPauli):
        dx = 1 - 2 * (model.py + model.pz)
        dy = 1 - 2 * (model.px + model.pz)
        dz = 1 - 2 * (model.px + model.py)
        return _pauli_inverse(model, (dx, dy, dz), singular_threshold)
    if isinstance(model, AmplitudeDamping):
        return _amplitude_damping_inverse(model, singular_threshold)
    if isinstance(model, TwoKraus):
        return _two_kraus_inverse(model, singular_threshold)
    if isinstance(model, Decoherence):
        return _decoherence_inverse(model, singular_threshold)
    raise TypeError(f"unknown noise model {model!r}")


def _amplitude_damping_inverse(
    model: AmplitudeDamping, threshold: float
) -> InverseMap:
    g = model.gamma
    _require(1 - g, "1 - gamma", model, threshold)
    kappa = 1 / math.sqrt(1 - g)
    tau = math.sqrt(g / (1 - g))
    k0 = np.array([[1, 0], [0, kappa]], dtype=complex)
    terms = [(1.0, k0)]
    if tau > 0:
        terms.append((-1.0, np.array([[0, tau], [0, 0]], dtype=complex)))
    inv_ptm = np.array(
        [
            [1, 0, 0, 0],
            [0, kappa, 0, 0],
            [0, 0, kappa, 0],
            [-g / (1 - g), 0, 0, 1 / (1 - g)],
        ],
        dtype=float,
    )
    cf = CorrectionFactors(fx=kappa, fy=kappa, fz=1 / (1 - g), z_offset=-g)
    return InverseMap(
        kraus=SignedKrausMap(tuple(terms)), ptm=inv_ptm, source=model, correction_factors=cf
    )


def _two_kraus_inverse(model: TwoKraus, threshold: float) -> InverseMap:
    a, b = model.alpha, model.beta
    cm = math.cos(a - b)
    cp = math.cos(a + b)
    _require(cm, "cos(alpha - beta)", model, threshold)
    _require(cp, "cos(alpha + beta)", model, threshold)
    h = 2 / (math.cos(2 * a) + math.cos(2 * b))  # = 1/(cm*cp), finite by the above
    b1 = np.array([[math.cos(b), 0], [0, math.cos(a)]], dtype=complex)
    b2 = np.array([[0, math.sin(b)], [math.sin(a), 0]], dtype=complex)
    terms = [(h, b1)]
    if np.any(b2 != 0):
        terms.append((-h, b2))
    inv_ptm = np.array(
        [
            [1, 0, 0, 0],
            [0, 1 / cm, 0, 0],
            [0, 0, 1 / cp, 0],
            [(math.cos(2 * b) - math.cos(2 * a)) * h / 2, 0, 0, h],
        ],
        dtype=float,
    )
    cf = CorrectionFactors(
        fx=1 / cm,
        fy=1 / cp,
        fz=h,
        z_offset=math.cos(b) ** 2 + math.sin(a) ** 2 - 1,
    )
    return InverseMap(
        kraus=SignedKrausMap(tuple(terms)), ptm=inv_ptm, source=model, correction_factors=cf
    )


def _decoherence_inverse(model: Decoherence, threshold: float) -> InverseMap:
    # (N_AD o N_z)^-1 = N_z^-1 o N_AD^-1
    inv_z = inverse_of(PhaseFlip(model.p), threshold)
    inv_ad = inverse_of(AmplitudeDamping(model.gamma), threshold)
    kraus = compose_maps(inv_z.kraus, inv_ad.kraus)
    inv_ptm = inv_z.ptm @ inv_ad.ptm
    g = model.gamma
    f_transverse = inv_z.correction_factors.fx * inv_ad.correction_factors.fx
    cf = CorrectionFactors(
        fx=f_transverse, fy=f_transverse, fz=1 / (1 - g), z_offset=-g
    )
    return InverseMap(kraus=kraus, ptm=inv_ptm, source=model, correction_factors=cf)


def adjoint(kmap: SignedKrausMap) -> SignedKrausMap:
    """Adjoint under the Hilbert-Schmidt inner product: each A_k -> A_k^dag."""
    return SignedKrausMap(
        tuple((w, dagger(a)) for w, a in kmap.terms), label=kmap.label
    )


def verify_inverse(model: NoiseModel, inv: InverseMap) -> InverseCheck:
    """How well ``inv`` undoes ``model``, plus CP certificates for both."""
    direct = kraus_of(model)
    product = inv.ptm @ ptm_of(direct)
    deviation = float(np.max(np.abs(product - np.eye(4))))
    return InverseCheck(
        max_deviation=deviation,
        direct_is_cp=is_completely_positive(direct),
        inverse_is_cp=is_completely_positive(inv.kraus),
        inverse_min_choi_eigenvalue=min_choi_eigenvalue(inv.kraus),
    )
