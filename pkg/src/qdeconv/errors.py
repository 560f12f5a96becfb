"""Exception types shared across the package."""

from __future__ import annotations


class QdeconvError(Exception):
    """Base class for all package errors."""


class NotHermitian(QdeconvError):
    """Operator expected to be Hermitian is not (within tolerance)."""


class InvalidParameter(QdeconvError):
    """Channel or sampler parameter outside its legal range."""


class UnphysicalT2(InvalidParameter):
    """Relaxation times violate T2 <= 2*T1, which would give p < 0."""


class SingularPtm(QdeconvError):
    """Pauli transfer matrix is not invertible."""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(f"PTM is singular (determinant {determinant:.3e})")


class NonInvertible(QdeconvError):
    """Noise model has no inverse map (or is too close to a singular point)."""

    def __init__(self, model, reason: str):
        self.model = model
        self.reason = reason
        super().__init__(f"{model!r} is not invertible: {reason}")


class NotDiagonal(QdeconvError):
    """PTM expected to be diagonal in the Pauli basis is not."""


class CorrectionOverflow(QdeconvError):
    """Deconvolution factor exceeds the configured cap; the corrected
    estimate would be statistically meaningless."""


class NonUnitalUnsupported(QdeconvError):
    """Pauli-string deconvolution requires unital per-qubit channels."""


class SingularAssignment(QdeconvError):
    """Readout assignment matrix is not invertible."""


class DegenerateFit(QdeconvError):
    """Decay data cannot support a gate-time fit."""


class ConfigError(QdeconvError):
    """Invalid experiment configuration; message names the offending field."""
