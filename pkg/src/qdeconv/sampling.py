"""Seeded Monte Carlo measurement sampling and readout-error modeling.

All stochasticity flows through :class:`RngSpec`: a (seed, stream) pair
mapped onto numpy's SeedSequence spawn keys, so identical specs reproduce
identical outcome counts regardless of execution order or thread count.
Sampling draws one binomial variate per (state, basis, n_shots) group,
which has the same statistics as shot-by-shot Bernoulli draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deconvolution import EstimationResult
from .errors import InvalidParameter, SingularAssignment
from .operators import AXIS_INDEX, PAULIS, DensityMatrix, expectation

__all__ = [
    "RngSpec",
    "ShotRecord",
    "AssignmentMatrix",
    "sample_pauli",
    "sample_pauli_noisy",
    "mean_from_counts",
    "mean_from_frequencies",
    "inject_pauli_error",
    "apply_readout_error",
    "mitigate_readout",
]


@dataclass(frozen=True)
class RngSpec:
    """Deterministic, splittable random stream identity."""

    seed: int
    stream: tuple[int, ...] = ()

    def split(self, *parts: int) -> "RngSpec":
        """Derive a disjoint child stream (e.g. per sweep point and basis)."""
        return RngSpec(self.seed, self.stream + tuple(int(p) for p in parts))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class ShotRecord:
    """Outcome counts of projective measurements in one Pauli basis."""

    basis: str
    n0: int
    n1: int

    def __post_init__(self):
        if self.basis not in AXIS_INDEX:
            raise ValueError(f"basis must be one of x, y, z; got {self.basis!r}")
        if self.n0 < 0 or self.n1 < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def n_shots(self) -> int:
        return self.n0 + self.n1

    @property
    def frequencies(self) -> np.ndarray:
        n = self.n_shots
        return np.array([self.n0 / n, self.n1 / n])


@dataclass(frozen=True)
class AssignmentMatrix:
    """Column-stochastic readout confusion matrix, A[i, j] = P(read i | true j)."""

    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.shape != (2, 2):
            raise ValueError(f"assignment matrix must be 2x2, got shape {a.shape}")
        if np.any(a < -1e-12) or np.any(a > 1 + 1e-12):
            raise ValueError("assignment matrix entries must lie in [0, 1]")
        if np.max(np.abs(a.sum(axis=0) - 1.0)) > 1e-12:
            raise ValueError("assignment matrix columns must sum to 1")
        object.__setattr__(self, "matrix", a)

    @classmethod
    def identity(cls) -> "AssignmentMatrix":
        return cls(np.eye(2))


def _outcome_probability(state: DensityMatrix, basis: str) -> float:
    mean = expectation(PAULIS[AXIS_INDEX[basis]], state).real
    return float(np.clip((1 + mean) / 2, 0.0, 1.0))


def sample_pauli(
    state: DensityMatrix, basis: str, n_shots: int, rng: RngSpec
) -> ShotRecord:
    """i.i.d. projective measurements with P(outcome 0) = (1 + <sigma>)/2."""
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    p0 = _outcome_probability(state, basis)
    n0 = int(rng.generator().binomial(n_shots, p0))
    return ShotRecord(basis=basis, n0=n0, n1=n_shots - n0)


def sample_pauli_noisy(
    state: DensityMatrix,
    error_probs: tuple[float, float, float],
    basis: str,
    n_shots: int,
    rng: RngSpec,
) -> ShotRecord:
    """Measure with a Pauli error injected independently before each shot.

    Shots are grouped by which Pauli was drawn (multinomial over
    {I, X, Y, Z}) and each group measured on the corresponding conjugated
    state; statistically identical to per-shot injection.
    """
    px, py, pz = (float(p) for p in error_probs)
    _check_pauli_probs(px, py, pz)
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    gen = rng.generator()
    pvals = np.array([max(0.0, 1 - px - py - pz), px, py, pz])
    group_sizes = gen.multinomial(n_shots, pvals / pvals.sum())
    n0 = 0
    for sigma, size in zip(PAULIS, group_sizes):
        if size == 0:
            continue
        conjugated = DensityMatrix.unchecked(sigma @ state.matrix @ sigma.conj().T)
        p0 = _outcome_probability(conjugated, basis)
        n0 += int(gen.binomial(int(size), p0))
    return ShotRecord(basis=basis, n0=n0, n1=n_shots - n0)


def mean_from_counts(rec: ShotRecord) -> EstimationResult:
    """Sample mean (n0 - n1)/n with its binomial standard error."""
    n = rec.n_shots
    if n < 2:
        raise ValueError(f"need at least 2 shots to estimate an error, got {n}")
    mean = (rec.n0 - rec.n1) / n
    std_error = float(np.sqrt(max(0.0, 1 - mean**2) / (n - 1)))
    return EstimationResult(mean=mean, std_error=std_error, n_shots=n, correction=1.0)


def mean_from_frequencies(freqs: np.ndarray, n_shots: int) -> EstimationResult:
    """Like :func:`mean_from_counts` but for (possibly non-integer)
    mitigated outcome frequencies."""
    if n_shots < 2:
        raise ValueError(f"need at least 2 shots to estimate an error, got {n_shots}")
    f0, f1 = float(freqs[0]), float(freqs[1])
    mean = f0 - f1
    std_error = float(np.sqrt(max(0.0, 1 - mean**2) / (n_shots - 1)))
    return EstimationResult(mean=mean, std_error=std_error, n_shots=n_shots, correction=1.0)


def _check_pauli_probs(px: float, py: float, pz: float) -> None:
    for name, p in (("px", px), ("py", py), ("pz", pz)):
        if p < 0 or p > 1 or not np.isfinite(p):
            raise InvalidParameter(f"{name} must lie in [0, 1], got {p}")
    if px + py + pz > 1 + 1e-12:
        raise InvalidParameter(f"px + py + pz must not exceed 1, got {px + py + pz}")


def inject_pauli_error(
    state: DensityMatrix, probs: tuple[float, float, float], rng: RngSpec
) -> DensityMatrix:
    """Apply I/X/Y/Z drawn with probabilities (1 - px - py - pz, px, py, pz)."""
    px, py, pz = (float(p) for p in probs)
    _check_pauli_probs(px, py, pz)
    gen = rng.generator()
    pvals = np.array([max(0.0, 1 - px - py - pz), px, py, pz])
    idx = int(gen.choice(4, p=pvals / pvals.sum()))
    if idx == 0:
        return state
    sigma = PAULIS[idx]
    return DensityMatrix.unchecked(sigma @ state.matrix @ sigma.conj().T)


def apply_readout_error(
    rec: ShotRecord, a: AssignmentMatrix, rng: RngSpec
) -> ShotRecord:
    """Misclassify each recorded outcome with the column-conditional
    probabilities of ``a``."""
    gen = rng.generator()
    read0_from_true0 = int(gen.binomial(rec.n0, a.matrix[0, 0])) if rec.n0 else 0
    read0_from_true1 = int(gen.binomial(rec.n1, a.matrix[0, 1])) if rec.n1 else 0
    n0 = read0_from_true0 + read0_from_true1
    return ShotRecord(basis=rec.basis, n0=n0, n1=rec.n_shots - n0)


def mitigate_readout(
    freqs: np.ndarray, a: AssignmentMatrix, det_threshold: float = 1e-6
) -> tuple[np.ndarray, bool]:
    """Invert the assignment matrix on measured frequencies.

    Returns the mitigated frequency vector and a flag that is True when the
    raw solution left the probability simplex and had to be clipped and
    renormalized (clipped points bias downstream deconvolution).
    """
    det = float(np.linalg.det(a.matrix))
    if abs(det) <= det_threshold:
        raise SingularAssignment(f"assignment matrix determinant {det:.3e} too small")
    raw = np.linalg.solve(a.matrix, np.asarray(freqs, dtype=float))
    clipped = bool(np.any(raw < -1e-12) or np.any(raw > 1 + 1e-12))
    raw = np.clip(raw, 0.0, 1.0)
    if clipped:
        total = raw.sum()
        raw = raw / total if total > 0 else np.array([0.5, 0.5])
    return raw, clipped
