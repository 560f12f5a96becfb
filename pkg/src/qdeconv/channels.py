"""Qubit channels as signed operator sums and as Pauli transfer matrices.

A channel (or any Hermiticity-preserving map) is stored as a
:class:`SignedKrausMap`: a list of real-weighted terms ``(w_k, A_k)`` acting
as ``rho -> sum_k w_k A_k rho A_k^dag``. Physical channels have all weights
+1; the inverse maps built in :mod:`qdeconv.inversion` carry negative
weights. The 4x4 real PTM ``G_ij = Tr[sigma_i Phi(sigma_j)] / 2`` is the
algebraic workhorse for composition and inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, UnphysicalT2
from .operators import DEFAULT_TOL, ID2, PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z, dagger, op2

__all__ = [
    "SignedKrausMap",
    "NoiseModel",
    "BitFlip",
    "PhaseFlip",
    "BitPhaseFlip",
    "Depolarizing",
    "GeneralPauli",
    "AmplitudeDamping",
    "TwoKraus",
    "Decoherence",
    "kraus_of",
    "apply",
    "ptm_of",
    "apply_ptm",
    "compose",
    "compose_n",
    "compose_maps",
    "unitary_map",
    "choi_of",
    "min_choi_eigenvalue",
    "is_completely_positive",
    "is_trace_preserving",
    "is_unital",
    "decoherence_from_times",
]

_KET0 = np.array([1, 0], dtype=complex)
_KET1 = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class SignedKrausMap:
    """Operator sum ``rho -> sum_k w_k A_k rho A_k^dag`` with real weights."""

    terms: tuple[tuple[float, np.ndarray], ...]
    label: str | None = None

    def __post_init__(self):
        checked = []
        for w, a in self.terms:
            w = float(w)
            if not math.isfinite(w) or w == 0.0:
                raise ValueError(f"term weights must be finite and nonzero, got {w}")
            checked.append((w, op2(a)))
        object.__setattr__(self, "terms", tuple(checked))


class NoiseModel:
    """Base class for the parametric channel descriptors below."""

    __slots__ = ()


def _check_prob(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise InvalidParameter(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class BitFlip(NoiseModel):
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob(self.p, "p"))


@dataclass(frozen=True)
class PhaseFlip(NoiseModel):
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob(self.p, "p"))


@dataclass(frozen=True)
class BitPhaseFlip(NoiseModel):
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob(self.p, "p"))


@dataclass(frozen=True)
class Depolarizing(NoiseModel):
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob(self.p, "p"))


@dataclass(frozen=True)
class GeneralPauli(NoiseModel):
    px: float
    py: float
    pz: float

    def __post_init__(self):
        object.__setattr__(self, "px", _check_prob(self.px, "px"))
        object.__setattr__(self, "py", _check_prob(self.py, "py"))
        object.__setattr__(self, "pz", _check_prob(self.pz, "pz"))
        if self.px + self.py + self.pz > 1.0 + 1e-12:
            raise InvalidParameter(
                f"px + py + pz must not exceed 1, got {self.px + self.py + self.pz}"
            )

    @property
    def p0(self) -> float:
        return 1.0 - self.px - self.py - self.pz


@dataclass(frozen=True)
class AmplitudeDamping(NoiseModel):
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_prob(self.gamma, "gamma"))


@dataclass(frozen=True)
class TwoKraus(NoiseModel):
    """Channel generated by ``A0 = cos(a)|0><0| + cos(b)|1><1|`` and
    ``A1 = sin(b)|0><1| + sin(a)|1><0|``. Reduces to bit flip at a == b and
    to amplitude damping at a == 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not (0.0 <= v < 2 * math.pi) or not math.isfinite(v):
                raise InvalidParameter(f"{name} must lie in [0, 2*pi), got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class Decoherence(NoiseModel):
    """Dephasing with probability ``p`` followed by amplitude damping with
    strength ``gamma``. Order is fixed: damping acts after dephasing."""

    p: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob(self.p, "p"))
        object.__setattr__(self, "gamma", _check_prob(self.gamma, "gamma"))


def _flip_map(p: float, sigma: np.ndarray, label: str) -> SignedKrausMap:
    terms = []
    if p < 1.0:
        terms.append((1.0, np.sqrt(1 - p) * ID2))
    if p > 0.0:
        terms.append((1.0, np.sqrt(p) * sigma))
    return SignedKrausMap(tuple(terms), label=label)


def kraus_of(model: NoiseModel) -> SignedKrausMap:
    """CPTP operator-sum representation of ``model``."""
    if isinstance(model, BitFlip):
        return _flip_map(model.p, SIGMA_X, f"bit-flip(p={model.p})")
    if isinstance(model, PhaseFlip):
        return _flip_map(model.p, SIGMA_Z, f"phase-flip(p={model.p})")
    if isinstance(model, BitPhaseFlip):
        return _flip_map(model.p, SIGMA_Y, f"bit-phase-flip(p={model.p})")
    if isinstance(model, Depolarizing):
        p = model.p
        terms = [(1.0, np.sqrt(1 - 3 * p / 4) * ID2)]
        if p > 0:
            for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
                terms.append((1.0, np.sqrt(p) * s / 2))
        return SignedKrausMap(tuple(terms), label=f"depolarizing(p={p})")
    if isinstance(model, GeneralPauli):
        probs = (model.p0, model.px, model.py, model.pz)
        terms = tuple(
            (1.0, np.sqrt(q) * s) for q, s in zip(probs, PAULIS) if q > 0
        )
        return SignedKrausMap(terms, label=f"general-pauli{probs[1:]}")
    if isinstance(model, AmplitudeDamping):
        g = model.gamma
        v0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
        terms = [(1.0, v0)]
        if g > 0:
            terms.append((1.0, np.sqrt(g) * np.outer(_KET0, _KET1)))
        return SignedKrausMap(tuple(terms), label=f"amplitude-damping(gamma={g})")
    if isinstance(model, TwoKraus):
        a, b = model.alpha, model.beta
        a0 = np.array([[np.cos(a), 0], [0, np.cos(b)]], dtype=complex)
        a1 = np.array([[0, np.sin(b)], [np.sin(a), 0]], dtype=complex)
        terms = [(1.0, a0)]
        if np.any(a1 != 0):
            terms.append((1.0, a1))
        return SignedKrausMap(tuple(terms), label=f"two-kraus(a={a}, b={b})")
    if isinstance(model, Decoherence):
        damping = kraus_of(AmplitudeDamping(model.gamma))
        dephasing = kraus_of(PhaseFlip(model.p))
        composed = compose_maps(damping, dephasing)
        return SignedKrausMap(
            composed.terms, label=f"decoherence(p={model.p}, gamma={model.gamma})"
        )
    raise TypeError(f"unknown noise model {model!r}")


def apply(kmap: SignedKrausMap, state: np.ndarray) -> np.ndarray:
    """Act with the map on an operator: ``sum_k w_k A_k state A_k^dag``."""
    state = np.asarray(state, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for w, a in kmap.terms:
        out += w * (a @ state @ dagger(a))
    return out


def ptm_of(kmap: SignedKrausMap) -> np.ndarray:
    """4x4 real Pauli transfer matrix, ``G_ij = Tr[sigma_i Phi(sigma_j)]/2``."""
    ptm = np.empty((4, 4), dtype=float)
    for j, sj in enumerate(PAULIS):
        image = apply(kmap, sj)
        for i, si in enumerate(PAULIS):
            ptm[i, j] = (np.trace(si @ image) / 2).real
    return ptm


def apply_ptm(ptm: np.ndarray, coeffs) -> np.ndarray:
    """Act on Pauli coefficients: the channel in the vectorized picture."""
    return np.asarray(ptm) @ np.asarray(coeffs)


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """PTM of "inner first, then outer"."""
    return np.asarray(outer) @ np.asarray(inner)


def compose_n(ptm: np.ndarray, m: int) -> np.ndarray:
    """m-fold repeated application of a channel's PTM (m >= 1)."""
    m = int(m)
    if m < 1:
        raise InvalidParameter(f"repetition count must be >= 1, got {m}")
    return np.linalg.matrix_power(np.asarray(ptm), m)


def compose_maps(outer: SignedKrausMap, inner: SignedKrausMap) -> SignedKrausMap:
    """Operator sum of ``outer o inner`` (inner acts first)."""
    terms = tuple(
        (wo * wi, ao @ ai) for wo, ao in outer.terms for wi, ai in inner.terms
    )
    return SignedKrausMap(terms)


def unitary_map(u: np.ndarray) -> SignedKrausMap:
    """One-term map ``rho -> U rho U^dag``."""
    return SignedKrausMap(((1.0, op2(u)),))


def choi_of(kmap: SignedKrausMap) -> np.ndarray:
    """Choi matrix ``sum_k w_k (A_k x I)|Om><Om|(A_k^dag x I)`` with the
    unnormalized ``|Om> = |00> + |11>``. Only the eigenvalue signs are used
    downstream, so the normalization convention is irrelevant."""
    choi = np.zeros((4, 4), dtype=complex)
    for w, a in kmap.terms:
        v = a.reshape(-1)  # (A x I)|Om> in the |00>,|01>,|10>,|11> basis
        choi += w * np.outer(v, v.conj())
    return choi


def min_choi_eigenvalue(kmap: SignedKrausMap) -> float:
    return float(np.linalg.eigvalsh(choi_of(kmap))[0])


def is_completely_positive(kmap: SignedKrausMap, atol: float = DEFAULT_TOL.psd) -> bool:
    return min_choi_eigenvalue(kmap) >= -atol


def is_trace_preserving(kmap: SignedKrausMap, atol: float = DEFAULT_TOL.psd) -> bool:
    acc = np.zeros((2, 2), dtype=complex)
    for w, a in kmap.terms:
        acc += w * (dagger(a) @ a)
    return bool(np.max(np.abs(acc - ID2)) <= atol)


def is_unital(kmap: SignedKrausMap, atol: float = DEFAULT_TOL.psd) -> bool:
    acc = np.zeros((2, 2), dtype=complex)
    for w, a in kmap.terms:
        acc += w * (a @ dagger(a))
    return bool(np.max(np.abs(acc - ID2)) <= atol)


def decoherence_from_times(t1: float, t2: float, t: float) -> Decoherence:
    """Decoherence parameters from relaxation times:
    ``gamma = 1 - exp(-t/T1)`` and ``p = (1 - exp(-(t/T2 - t/2T1)))/2``."""
    if not (t1 > 0) or not (t2 > 0):
        raise InvalidParameter(f"T1 and T2 must be positive, got T1={t1}, T2={t2}")
    if t < 0:
        raise InvalidParameter(f"duration t must be nonnegative, got {t}")
    if t2 > 2 * t1:
        raise UnphysicalT2(f"T2 = {t2} exceeds 2*T1 = {2 * t1}")
    gamma = 1.0 - math.exp(-t / t1)
    p = 0.5 * (1.0 - math.exp(-(t / t2 - t / (2 * t1))))
    return Decoherence(p=p, gamma=gamma)
