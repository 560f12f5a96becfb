"""Experiment runners: decoherence decay, Pauli-channel sweeps, gate-time
refits, channel reports, and their CSV/JSON serialization.

Every emitted mitigated value is exactly what :mod:`qdeconv.deconvolution`
produces from the emitted noisy value and the header config, so output
files are self-consistent and re-derivable by an external script. Ideal
columns are analytic, never sampled.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

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
    is_completely_positive,
    is_trace_preserving,
    is_unital,
    kraus_of,
    min_choi_eigenvalue,
    ptm_of,
)
from .deconvolution import (
    EstimationResult,
    correction_for,
    correction_for_repeated,
)
from .errors import ConfigError, DegenerateFit, NonInvertible
from .inversion import InverseCheck, InverseMap, inverse_of, verify_inverse
from .operators import AXES, DensityMatrix, pauli_reconstruct
from .sampling import (
    AssignmentMatrix,
    RngSpec,
    ShotRecord,
    apply_readout_error,
    mean_from_counts,
    mean_from_frequencies,
    mitigate_readout,
    sample_pauli,
    sample_pauli_noisy,
)

__all__ = [
    "DecayConfig",
    "SweepConfig",
    "CurvePoint",
    "GateTimeFit",
    "ChannelReport",
    "run_decoherence_decay",
    "run_pauli_sweep",
    "fit_gate_time",
    "channel_report",
    "mitigate_counts",
    "curve_table",
    "write_curve_csv",
    "curve_points_as_json",
    "model_kind",
    "model_params",
    "report_as_dict",
    "format_report",
]

DEFAULT_DECAY_DEPTHS = tuple(range(0, 201, 10))
DEFAULT_DECAY_SHOTS = 2048
DEFAULT_SWEEP_THETAS = 25
DEFAULT_SWEEP_SHOTS = 1024

_PLUS_COEFFS = np.array([0.5, 0.5, 0.0, 0.0])


@dataclass(frozen=True)
class DecayConfig:
    """Repeated-decoherence decay experiment (measure <sigma_x> on |+>)."""

    model: Decoherence
    depths: tuple[int, ...] = DEFAULT_DECAY_DEPTHS
    n_shots: int = DEFAULT_DECAY_SHOTS
    seed: int = 0
    deconvolve: bool = True
    readout: AssignmentMatrix | None = None
    reference_curves: bool = True

    def __post_init__(self):
        if not isinstance(self.model, Decoherence):
            raise ConfigError("model: decay experiments require a decoherence model")
        depths = tuple(int(m) for m in self.depths)
        if len(depths) == 0:
            raise ConfigError("depths: at least one depth is required")
        if any(m < 0 for m in depths):
            raise ConfigError(f"depths: must be nonnegative, got {min(depths)}")
        object.__setattr__(self, "depths", depths)
        if self.n_shots < 2:
            raise ConfigError(f"n_shots: must be >= 2, got {self.n_shots}")


@dataclass(frozen=True)
class SweepConfig:
    """Ry(theta) preparation, stochastic Pauli error, all-basis tomography."""

    model: GeneralPauli
    n_thetas: int = DEFAULT_SWEEP_THETAS
    n_shots: int = DEFAULT_SWEEP_SHOTS
    seed: int = 0
    deconvolve: bool = True
    readout: AssignmentMatrix | None = None

    def __post_init__(self):
        if not isinstance(self.model, GeneralPauli):
            raise ConfigError("model: sweep experiments require a general Pauli model")
        if self.n_thetas < 2:
            raise ConfigError(f"thetas: must be >= 2, got {self.n_thetas}")
        if self.n_shots < 2:
            raise ConfigError(f"n_shots: must be >= 2, got {self.n_shots}")


@dataclass(frozen=True)
class CurvePoint:
    abscissa: float
    noisy: dict[str, EstimationResult]
    mitigated: dict[str, EstimationResult]
    ideal: dict[str, float]
    correction: dict[str, float]
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class GateTimeFit:
    t: float
    stderr: float
    residual: float
    n_points: int


def _measure(
    state: DensityMatrix,
    basis: str,
    n_shots: int,
    rng: RngSpec,
    readout: AssignmentMatrix | None,
    error_probs: tuple[float, float, float] | None = None,
) -> tuple[EstimationResult, bool]:
    if error_probs is None:
        rec = sample_pauli(state, basis, n_shots, rng.split(0))
    else:
        rec = sample_pauli_noisy(state, error_probs, basis, n_shots, rng.split(0))
    if readout is None:
        return mean_from_counts(rec), False
    rec = apply_readout_error(rec, readout, rng.split(1))
    freqs, clipped = mitigate_readout(rec.frequencies, readout)
    return mean_from_frequencies(freqs, rec.n_shots), clipped


def _scaled(noisy: EstimationResult, factor: float, offset: float) -> EstimationResult:
    return EstimationResult(
        mean=factor * (noisy.mean + offset),
        std_error=abs(factor) * noisy.std_error,
        n_shots=noisy.n_shots,
        correction=abs(factor) * noisy.correction,
    )


def run_decoherence_decay(cfg: DecayConfig) -> list[CurvePoint]:
    """Noisy, deconvolved and ideal <sigma_x> for each circuit depth."""
    model = cfg.model
    max_depth = max(cfg.depths)
    if cfg.deconvolve and max_depth > 0:
        correction_for_repeated(model, "x", max_depth)  # fail fast on overflow
    ptm = ptm_of(kraus_of(model))
    dephasing_ptm = ptm_of(kraus_of(PhaseFlip(model.p)))
    damping_ptm = ptm_of(kraus_of(AmplitudeDamping(model.gamma)))
    rng = RngSpec(cfg.seed)
    points = []
    for i, m in enumerate(sorted(cfg.depths)):
        state = _decayed_plus(ptm, m)
        noisy, clipped = _measure(state, "x", cfg.n_shots, rng.split(i, 0), cfg.readout)
        if cfg.deconvolve and m > 0:
            f, off = correction_for_repeated(model, "x", m)
            mitigated = _scaled(noisy, f, off)
            factor = f
        else:
            mitigated = noisy
            factor = 1.0
        extras: dict[str, float] = {}
        if cfg.readout is not None:
            extras["x_readout_clipped"] = float(clipped)
        if cfg.reference_curves:
            for key, ref_ptm, stream in (
                ("dephasing_only", dephasing_ptm, 2),
                ("damping_only", damping_ptm, 3),
            ):
                ref, _ = _measure(
                    _decayed_plus(ref_ptm, m), "x", cfg.n_shots, rng.split(i, stream), cfg.readout
                )
                extras[key] = ref.mean
                extras[key + "_err"] = ref.std_error
        points.append(
            CurvePoint(
                abscissa=float(m),
                noisy={"x": noisy},
                mitigated={"x": mitigated},
                ideal={"x": 1.0},
                correction={"x": factor},
                extras=extras,
            )
        )
    return points


def _decayed_plus(ptm: np.ndarray, m: int) -> DensityMatrix:
    coeffs = _PLUS_COEFFS if m == 0 else np.linalg.matrix_power(ptm, m) @ _PLUS_COEFFS
    return DensityMatrix.unchecked(pauli_reconstruct(coeffs))


def run_pauli_sweep(cfg: SweepConfig) -> list[CurvePoint]:
    """Three-basis tomography of Ry(theta)|0> under a general Pauli channel."""
    model = cfg.model
    inv = inverse_of(model)  # fail fast if the channel cannot be deconvolved
    error_probs = (model.px, model.py, model.pz)
    rng = RngSpec(cfg.seed)
    thetas = np.linspace(0.0, 2 * np.pi, cfg.n_thetas)
    points = []
    for i, theta in enumerate(thetas):
        state = DensityMatrix.pure([np.cos(theta / 2), np.sin(theta / 2)])
        noisy = {}
        mitigated = {}
        correction = {}
        extras: dict[str, float] = {}
        for b, axis in enumerate(AXES):
            est, clipped = _measure(
                state, axis, cfg.n_shots, rng.split(i, b), cfg.readout, error_probs
            )
            noisy[axis] = est
            if cfg.readout is not None:
                extras[f"{axis}_readout_clipped"] = float(clipped)
            if cfg.deconvolve:
                factor = inv.correction_factors.factor(axis)
                mitigated[axis] = _scaled(est, factor, 0.0)
                correction[axis] = factor
            else:
                mitigated[axis] = est
                correction[axis] = 1.0
        points.append(
            CurvePoint(
                abscissa=float(theta),
                noisy=noisy,
                mitigated=mitigated,
                ideal={"x": math.sin(theta), "y": 0.0, "z": math.cos(theta)},
                correction=correction,
                extras=extras,
            )
        )
    return points


def fit_gate_time(
    decay_data: Sequence[tuple[float, float, float]], t1: float, t2: float
) -> GateTimeFit:
    """Weighted least-squares gate time from a noisy decay curve.

    Uses the identity ``(1-2p)sqrt(1-gamma) = exp(-t/T2)``: the noisy mean
    at depth m is ``exp(-m t / T2)``, so ``log(mean)`` is linear in m with
    slope ``-t/T2``. T1 and T2 stay fixed at their calibration values.
    """
    pts = [(float(m), float(y), float(s)) for m, y, s in decay_data]
    if len({m for m, _, _ in pts}) < 3:
        raise DegenerateFit("need at least 3 points with distinct depths")
    kept = [(m, y, s) for m, y, s in pts if y > 0]
    if len(pts) - len(kept) > len(kept):
        raise DegenerateFit("nonpositive means dominate the decay data")
    means = [y for _, y, _ in kept]
    if max(means) - min(means) < 1e-15:
        if abs(means[0] - 1.0) <= 1e-12:
            den = sum((y / max(s, 1e-12)) ** 2 * m**2 for m, y, s in kept)
            stderr = t2 / math.sqrt(den) if den > 0 else math.inf
            return GateTimeFit(t=0.0, stderr=stderr, residual=0.0, n_points=len(kept))
        raise DegenerateFit("all means equal; data carry no decay signal")
    num = 0.0
    den = 0.0
    for m, y, s in kept:
        w = (y / max(s, 1e-12)) ** 2  # delta method: Var[log y] = (s/y)^2
        num += w * m * math.log(y)
        den += w * m**2
    if den <= 0:
        raise DegenerateFit("no positive-depth data to fit")
    t_fit = -t2 * num / den
    stderr = t2 / math.sqrt(den)
    residual = sum(
        (y / max(s, 1e-12)) ** 2 * (math.log(y) + m * t_fit / t2) ** 2
        for m, y, s in kept
    )
    return GateTimeFit(t=t_fit, stderr=stderr, residual=residual, n_points=len(kept))


@dataclass(frozen=True)
class ChannelReport:
    model: NoiseModel
    kraus: SignedKrausMap
    ptm: np.ndarray
    is_cp: bool
    is_tp: bool
    is_unital: bool
    min_choi_eigenvalue: float
    invertible: bool
    non_invertible_reason: str | None
    inverse: InverseMap | None
    inverse_check: InverseCheck | None
    corrections: dict[str, tuple[float, float]] | None


def channel_report(model: NoiseModel) -> ChannelReport:
    """Everything worth knowing about a channel and its inverse."""
    kraus = kraus_of(model)
    ptm = ptm_of(kraus)
    inverse = None
    check = None
    corrections = None
    reason = None
    try:
        inverse = inverse_of(model)
    except NonInvertible as exc:
        reason = exc.reason
    if inverse is not None:
        check = verify_inverse(model, inverse)
        cf = inverse.correction_factors
        corrections = {axis: (cf.factor(axis), cf.offset(axis)) for axis in AXES}
    return ChannelReport(
        model=model,
        kraus=kraus,
        ptm=ptm,
        is_cp=is_completely_positive(kraus),
        is_tp=is_trace_preserving(kraus),
        is_unital=is_unital(kraus),
        min_choi_eigenvalue=min_choi_eigenvalue(kraus),
        invertible=inverse is not None,
        non_invertible_reason=reason,
        inverse=inverse,
        inverse_check=check,
        corrections=corrections,
    )


def mitigate_counts(
    records: Sequence[Mapping],
    model: NoiseModel | None,
    assignment: AssignmentMatrix | None = None,
    default_depth: int = 1,
    deconvolve: bool = True,
) -> list[dict]:
    """Readout mitigation followed by noise deconvolution on imported counts.

    Each record needs ``basis``, ``n0`` and ``n1`` keys and may carry ``m``
    (depth for repeated decoherence; defaults to ``default_depth``).
    """
    rows = []
    for idx, record in enumerate(records):
        try:
            basis = str(record["basis"]).lower()
            rec = ShotRecord(basis=basis, n0=int(record["n0"]), n1=int(record["n1"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"counts record {idx}: {exc}") from exc
        depth = int(record.get("m", default_depth))
        clipped = False
        if assignment is not None:
            freqs, clipped = mitigate_readout(rec.frequencies, assignment)
            noisy = mean_from_frequencies(freqs, rec.n_shots)
        else:
            noisy = mean_from_counts(rec)
        if deconvolve and model is not None and depth > 0:
            if isinstance(model, Decoherence):
                factor, offset = correction_for_repeated(model, basis, depth)
            elif depth != 1:
                raise ConfigError(
                    f"counts record {idx}: depth {depth} requires a decoherence model"
                )
            else:
                factor, offset = correction_for(model, basis)
            mitigated = _scaled(noisy, factor, offset)
        else:
            factor = 1.0
            mitigated = noisy
        rows.append(
            {
                "basis": basis,
                "m": depth,
                "n_shots": rec.n_shots,
                "noisy_mean": noisy.mean,
                "noisy_err": noisy.std_error,
                "mitigated_mean": mitigated.mean,
                "mitigated_err": mitigated.std_error,
                "correction": factor,
                "readout_clipped": clipped,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Serialization

_MODEL_KINDS: dict[type, str] = {
    BitFlip: "bit-flip",
    PhaseFlip: "phase-flip",
    BitPhaseFlip: "bit-phase-flip",
    Depolarizing: "depolarizing",
    GeneralPauli: "general-pauli",
    AmplitudeDamping: "amplitude-damping",
    TwoKraus: "two-kraus",
    Decoherence: "decoherence",
}


def model_kind(model: NoiseModel) -> str:
    return _MODEL_KINDS[type(model)]


def model_params(model: NoiseModel) -> dict[str, float]:
    if isinstance(model, (BitFlip, PhaseFlip, BitPhaseFlip, Depolarizing)):
        return {"p": model.p}
    if isinstance(model, GeneralPauli):
        return {"px": model.px, "py": model.py, "pz": model.pz}
    if isinstance(model, AmplitudeDamping):
        return {"gamma": model.gamma}
    if isinstance(model, TwoKraus):
        return {"alpha": model.alpha, "beta": model.beta}
    if isinstance(model, Decoherence):
        return {"p": model.p, "gamma": model.gamma}
    raise TypeError(f"unknown noise model {model!r}")


def _cmatrix(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def _kraus_json(kmap: SignedKrausMap) -> list:
    return [{"weight": float(w), "operator": _cmatrix(a)} for w, a in kmap.terms]


def report_as_dict(report: ChannelReport) -> dict:
    out = {
        "model": {"kind": model_kind(report.model), **model_params(report.model)},
        "kraus_terms": _kraus_json(report.kraus),
        "ptm": np.asarray(report.ptm).tolist(),
        "is_completely_positive": report.is_cp,
        "is_trace_preserving": report.is_tp,
        "is_unital": report.is_unital,
        "min_choi_eigenvalue": report.min_choi_eigenvalue,
        "invertible": report.invertible,
    }
    if not report.invertible:
        out["non_invertible_reason"] = report.non_invertible_reason
        return out
    check = report.inverse_check
    out["inverse"] = {
        "kraus_terms": _kraus_json(report.inverse.kraus),
        "ptm": np.asarray(report.inverse.ptm).tolist(),
        "is_completely_positive": check.inverse_is_cp,
        "min_choi_eigenvalue": check.inverse_min_choi_eigenvalue,
        "composition_deviation": check.max_deviation,
        "corrections": {
            axis: {"factor": f, "offset": off}
            for axis, (f, off) in report.corrections.items()
        },
    }
    return out


def _format_matrix(a: np.ndarray, fmt: str = "{: .6g}") -> str:
    a = np.asarray(a)
    lines = []
    for row in a:
        cells = []
        for z in row:
            z = complex(z)
            if abs(z.imag) < 1e-15:
                cells.append(fmt.format(z.real))
            else:
                cells.append(f"{z.real:.6g}{z.imag:+.6g}j")
        lines.append("  [" + ", ".join(cells) + "]")
    return "\n".join(lines)


def format_report(report: ChannelReport) -> str:
    lines = [f"channel: {model_kind(report.model)} {model_params(report.model)}"]
    lines.append(f"kraus terms ({len(report.kraus.terms)}):")
    for w, a in report.kraus.terms:
        lines.append(f"  weight {w:+.6g}:")
        lines.append(_format_matrix(a))
    lines.append("ptm:")
    lines.append(_format_matrix(report.ptm))
    lines.append(
        f"CP: {report.is_cp}   TP: {report.is_tp}   unital: {report.is_unital}"
        f"   min Choi eigenvalue: {report.min_choi_eigenvalue:.3e}"
    )
    if not report.invertible:
        lines.append(f"invertible: False ({report.non_invertible_reason})")
        return "\n".join(lines)
    check = report.inverse_check
    lines.append("invertible: True")
    lines.append("inverse operator sum:")
    for w, a in report.inverse.kraus.terms:
        lines.append(f"  weight {w:+.6g}:")
        lines.append(_format_matrix(a))
    lines.append("inverse ptm:")
    lines.append(_format_matrix(report.inverse.ptm))
    lines.append(
        f"inverse CP: {check.inverse_is_cp}"
        f"   min Choi eigenvalue: {check.inverse_min_choi_eigenvalue:.3e}"
        f"   composition deviation: {check.max_deviation:.3e}"
    )
    lines.append("corrections (mitigated = factor * (noisy + offset)):")
    for axis, (f, off) in report.corrections.items():
        lines.append(f"  {axis}: factor {f:.9g}  offset {off:.9g}")
    return "\n".join(lines)


def curve_table(
    points: Sequence[CurvePoint], abscissa_label: str
) -> tuple[list[str], list[list[float]]]:
    """Flatten curve points into (header, rows) following the column layout
    abscissa, per-axis quadruplets, ideal values, correction factors, extras."""
    axes = [a for a in AXES if a in points[0].noisy]
    header = [abscissa_label]
    for a in axes:
        header += [f"{a}_noisy", f"{a}_noisy_err", f"{a}_mitigated", f"{a}_mitigated_err"]
    header += [f"{a}_ideal" for a in axes]
    header += [f"{a}_correction" for a in axes]
    extras_keys = list(points[0].extras.keys())
    header += extras_keys
    rows = []
    for pt in points:
        row = [pt.abscissa]
        for a in axes:
            row += [
                pt.noisy[a].mean,
                pt.noisy[a].std_error,
                pt.mitigated[a].mean,
                pt.mitigated[a].std_error,
            ]
        row += [pt.ideal[a] for a in axes]
        row += [pt.correction[a] for a in axes]
        row += [pt.extras[k] for k in extras_keys]
        rows.append(row)
    return header, rows


def write_curve_csv(
    out: TextIO,
    points: Sequence[CurvePoint],
    config: Mapping,
    abscissa_label: str,
) -> None:
    """CSV with a '#'-prefixed JSON header carrying the resolved config."""
    out.write("# " + json.dumps(dict(config), sort_keys=True) + "\n")
    header, rows = curve_table(points, abscissa_label)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])


def curve_points_as_json(
    points: Sequence[CurvePoint], config: Mapping, abscissa_label: str
) -> dict:
    header, rows = curve_table(points, abscissa_label)
    return {
        "config": dict(config),
        "columns": header,
        "points": [dict(zip(header, row)) for row in rows],
    }
