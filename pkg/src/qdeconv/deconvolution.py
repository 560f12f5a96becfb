"""Quorum estimators and noise deconvolution of expectation values.

The estimators here consume noisy Pauli means (exact, simulated, or
imported from hardware counts) and return noise-free estimates. The
mitigated mean of a Pauli observable is ``f * (noisy + offset)`` with the
per-axis scalars cached on :class:`~qdeconv.inversion.InverseMap`; the
correction inflates the variance by ``f**2``, which is tracked explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channels import Decoherence, NoiseModel, is_unital, kraus_of
from .errors import CorrectionOverflow, InvalidParameter, NonUnitalUnsupported, NotHermitian
from .inversion import SINGULARITY_THRESHOLD, InverseMap, inverse_of
from .operators import AXES, AXIS_INDEX, ID2, PAULIS, dagger

__all__ = [
    "EstimationResult",
    "QuorumEstimator",
    "CORRECTION_CAP",
    "quorum_estimator",
    "correction_for",
    "correction_for_repeated",
    "deconvolve_observable",
    "deconvolve_pauli_string",
    "required_shots",
]

# Corrections larger than this are refused outright: reaching the original
# precision would need cap**2 times more shots.
CORRECTION_CAP = 1e6


@dataclass(frozen=True)
class EstimationResult:
    """A mean with its standard error and the correction factor applied."""

    mean: float
    std_error: float
    n_shots: int
    correction: float = 1.0

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error}")


@dataclass(frozen=True)
class QuorumEstimator:
    """The operator whose quorum-averaged expectation reproduces <O>."""

    axis: str
    operator: np.ndarray


def _hermitian_weights(obs: np.ndarray) -> tuple[float, np.ndarray]:
    obs = np.asarray(obs, dtype=complex)
    if np.max(np.abs(obs - dagger(obs))) > 1e-10:
        raise NotHermitian("observable must be Hermitian")
    tr = np.trace(obs).real
    weights = np.array(
        [np.trace(obs @ PAULIS[AXIS_INDEX[a]]).real for a in AXES]
    )
    return float(tr), weights


def quorum_estimator(obs: np.ndarray, axis: str) -> QuorumEstimator:
    """``(3 Tr[O s_a]/2) s_a + (Tr[O]/2) I`` for the Pauli quorum."""
    tr, weights = _hermitian_weights(obs)
    sigma = PAULIS[AXIS_INDEX[axis]]
    operator = (3 * weights[AXES.index(axis)] / 2) * sigma + (tr / 2) * ID2
    return QuorumEstimator(axis=axis, operator=operator)


def correction_for(
    model: NoiseModel,
    axis: str,
    singular_threshold: float = SINGULARITY_THRESHOLD,
) -> tuple[float, float]:
    """Closed-form ``(factor, offset)`` with mitigated = factor*(noisy + offset)."""
    cf = inverse_of(model, singular_threshold).correction_factors
    return cf.factor(axis), cf.offset(axis)


def correction_for_repeated(
    model: Decoherence,
    axis: str,
    m: int,
    cap: float = CORRECTION_CAP,
) -> tuple[float, float]:
    """Correction for ``m`` repeated applications of a decoherence channel."""
    if not isinstance(model, Decoherence):
        raise TypeError("repeated corrections are defined for decoherence noise")
    m = int(m)
    if m < 1:
        raise InvalidParameter(f"repetition count must be >= 1, got {m}")
    if axis in ("x", "y"):
        base = (1 - 2 * model.p) * math.sqrt(1 - model.gamma)
        try:
            factor = base ** (-m) if base != 0 else math.inf
        except OverflowError:
            factor = math.inf
        offset = 0.0
    elif axis == "z":
        survival = (1 - model.gamma) ** m
        factor = 1 / survival if survival != 0 else math.inf
        offset = -1 + survival
    else:
        raise ValueError(f"unknown axis {axis!r}")
    if not math.isfinite(factor) or abs(factor) > cap:
        raise CorrectionOverflow(
            f"correction factor {factor:.3e} exceeds cap {cap:.1e} at depth {m}"
        )
    return factor, offset


def deconvolve_observable(
    obs: np.ndarray,
    noisy_pauli_means: Mapping[str, EstimationResult],
    inv: InverseMap,
) -> EstimationResult:
    """Noise-free estimate of ``<obs>`` from noisy Pauli means.

    Implements the qubit deconvolution formula: half the trace plus the
    Pauli-weighted sum of adjoint-inverse images of the quorum,
    ``<O> = Tr[O]/2 + sum_a Tr[O s_a]/2 * f_a * (<s_a>_noisy + off_a)``.
    Standard errors combine in quadrature assuming independent per-axis
    shot batches.
    """
    tr, weights = _hermitian_weights(obs)
    cf = inv.correction_factors
    mean = tr / 2
    var = 0.0
    var_unmitigated = 0.0
    n_shots = 0
    max_factor = 1.0
    for axis, w in zip(AXES, weights):
        if abs(w) < 1e-14:
            continue
        if axis not in noisy_pauli_means:
            raise KeyError(f"observable requires a noisy mean for axis {axis!r}")
        est = noisy_pauli_means[axis]
        f = cf.factor(axis)
        mean += (w / 2) * f * (est.mean + cf.offset(axis))
        var += (abs(w) / 2 * abs(f) * est.std_error) ** 2
        var_unmitigated += (abs(w) / 2 * est.std_error) ** 2
        n_shots += est.n_shots
        max_factor = max(max_factor, abs(f))
    if var_unmitigated > 0:
        correction = math.sqrt(var / var_unmitigated)
    else:
        correction = max_factor
    return EstimationResult(
        mean=float(mean),
        std_error=math.sqrt(var),
        n_shots=n_shots,
        correction=correction,
    )


def deconvolve_pauli_string(
    letters: Sequence[str],
    noisy_mean: EstimationResult,
    per_qubit_models: Sequence[NoiseModel],
) -> EstimationResult:
    """Correction for a tensor-product Pauli observable under independent
    per-qubit noise. Only unital channels factorize (offset-free
    corrections); anything else raises :class:`NonUnitalUnsupported`."""
    letters = [str(ch).upper() for ch in letters]
    if len(letters) < 1:
        raise ValueError("Pauli string must have length >= 1")
    if len(letters) != len(per_qubit_models):
        raise ValueError(
            f"{len(letters)} letters but {len(per_qubit_models)} noise models"
        )
    factor = 1.0
    for letter, model in zip(letters, per_qubit_models):
        if letter == "I":
            continue
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli letter {letter!r}")
        if not is_unital(kraus_of(model)):
            raise NonUnitalUnsupported(
                f"{model!r} is not unital; its z-offset breaks factorization"
            )
        f, _ = correction_for(model, letter.lower())
        factor *= f
    return EstimationResult(
        mean=factor * noisy_mean.mean,
        std_error=abs(factor) * noisy_mean.std_error,
        n_shots=noisy_mean.n_shots,
        correction=factor * noisy_mean.correction,
    )


def required_shots(
    target_std_error: float,
    correction: float,
    noisy_variance_bound: float = 1.0,
) -> int:
    """Smallest n with ``|c| * sqrt(var / n) <= target``."""
    if target_std_error <= 0:
        raise ValueError(f"target std error must be positive, got {target_std_error}")
    ratio = correction**2 * noisy_variance_bound / target_std_error**2
    n = max(1, math.ceil(ratio - 1e-9))
    while abs(correction) * math.sqrt(noisy_variance_bound / n) > target_std_error:
        n += 1
    return n
