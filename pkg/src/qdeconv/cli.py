"""Command-line interface.

Subcommands: ``report``, ``invert``, ``sim decay``, ``sim sweep``,
``fit gate-time`` and ``mitigate counts``. Options resolve with precedence
flags > config file (JSON) > defaults; the resolved configuration is echoed
in the output header so every run is auditable. Exit codes: 0 success,
2 configuration error, 3 non-invertible noise, 4 correction overflow.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path

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
    TwoKraus,
    decoherence_from_times,
)
from .errors import (
    ConfigError,
    CorrectionOverflow,
    DegenerateFit,
    InvalidParameter,
    NonInvertible,
    SingularAssignment,
    SingularPtm,
)
from .experiments import (
    DecayConfig,
    SweepConfig,
    channel_report,
    curve_points_as_json,
    fit_gate_time,
    format_report,
    mitigate_counts,
    model_kind,
    model_params,
    report_as_dict,
    run_decoherence_decay,
    run_pauli_sweep,
    write_curve_csv,
)
from .sampling import AssignmentMatrix

__all__ = ["main"]

_MODEL_CHOICES = (
    "bit-flip",
    "phase-flip",
    "bit-phase-flip",
    "depolarizing",
    "general-pauli",
    "amplitude-damping",
    "two-kraus",
    "decoherence",
)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=_MODEL_CHOICES, help="noise model kind")
    parser.add_argument("--p", type=float, help="flip/depolarizing/dephasing probability")
    parser.add_argument("--px", type=float, help="Pauli-x error probability")
    parser.add_argument("--py", type=float, help="Pauli-y error probability")
    parser.add_argument("--pz", type=float, help="Pauli-z error probability")
    parser.add_argument("--gamma", type=float, help="amplitude damping strength")
    parser.add_argument("--alpha", type=float, help="two-Kraus angle alpha (radians)")
    parser.add_argument("--beta", type=float, help="two-Kraus angle beta (radians)")
    parser.add_argument("--t1", type=float, help="relaxation time T1 in seconds")
    parser.add_argument("--t2", type=float, help="relaxation time T2 in seconds")
    parser.add_argument("--gate-time", type=float, help="noise duration t in seconds")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    parser.add_argument("--out", type=Path, help="output path (default: stdout)")
    parser.add_argument("--figure", type=Path, help="figure output path (PNG)")
    parser.add_argument(
        "--no-figure", action="store_true", help="do not render a figure next to --out"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdeconv",
        description="Single-qubit noise channels, inverse maps, and noise deconvolution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_report = sub.add_parser("report", help="full channel/inverse report")
    _add_model_flags(p_report)
    _add_common_flags(p_report)
    p_report.add_argument("--format", choices=("text", "json"), default="text")

    p_invert = sub.add_parser("invert", help="inverse map of a channel")
    _add_model_flags(p_invert)
    _add_common_flags(p_invert)
    p_invert.add_argument("--format", choices=("text", "json"), default="text")

    p_sim = sub.add_parser("sim", help="simulated experiments")
    sim_sub = p_sim.add_subparsers(dest="subcommand", required=True)

    p_decay = sim_sub.add_parser("decay", help="repeated-decoherence decay of <sigma_x>")
    _add_model_flags(p_decay)
    _add_common_flags(p_decay)
    p_decay.add_argument("--depths", help="comma list '0,10,20' or range 'start:stop:step'")
    p_decay.add_argument("--shots", type=int, help="shots per point (default 2048)")
    p_decay.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    p_decay.add_argument("--no-deconvolve", action="store_true")
    p_decay.add_argument("--readout-matrix", help="a00,a01,a10,a11 (column-stochastic)")
    p_decay.add_argument("--no-reference-curves", action="store_true")
    p_decay.add_argument("--format", choices=("csv", "json"), default="csv")

    p_sweep = sim_sub.add_parser("sweep", help="Ry(theta) sweep under a general Pauli channel")
    _add_model_flags(p_sweep)
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--thetas", type=int, help="number of angles in [0, 2pi] (default 25)")
    p_sweep.add_argument("--shots", type=int, help="shots per point and basis (default 1024)")
    p_sweep.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    p_sweep.add_argument("--no-deconvolve", action="store_true")
    p_sweep.add_argument("--readout-matrix", help="a00,a01,a10,a11 (column-stochastic)")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")

    p_fit = sub.add_parser("fit", help="noise-parameter refits")
    fit_sub = p_fit.add_subparsers(dest="subcommand", required=True)
    p_gate = fit_sub.add_parser("gate-time", help="gate time from a noisy decay curve")
    p_gate.add_argument("--data", type=Path, required=True, help="decay CSV (from 'sim decay')")
    p_gate.add_argument("--t1", type=float, help="calibrated T1 in seconds")
    p_gate.add_argument("--t2", type=float, help="calibrated T2 in seconds")
    p_gate.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    p_gate.add_argument("--out", type=Path, help="output path (default: stdout)")
    p_gate.add_argument("--format", choices=("text", "json"), default="text")

    p_mit = sub.add_parser("mitigate", help="post-process externally produced data")
    mit_sub = p_mit.add_subparsers(dest="subcommand", required=True)
    p_counts = mit_sub.add_parser(
        "counts", help="readout mitigation + deconvolution of imported counts"
    )
    _add_model_flags(p_counts)
    p_counts.add_argument("--counts", type=Path, required=True, help="JSON counts file")
    p_counts.add_argument("--readout-matrix", help="a00,a01,a10,a11 (column-stochastic)")
    p_counts.add_argument("--depth", type=int, help="default decoherence depth m (default 1)")
    p_counts.add_argument("--no-deconvolve", action="store_true")
    p_counts.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    p_counts.add_argument("--out", type=Path, help="output path (default: stdout)")
    p_counts.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser


class _Options:
    """Flags > config file > defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict = {}
        path = getattr(args, "config", None)
        if path is not None:
            try:
                with open(path) as fh:
                    loaded = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"config: cannot read {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigError(f"config: {path} must hold a JSON object")
            self.file = loaded

    def get(self, name: str, default=None):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.file:
            return self.file[name]
        return default

    def get_bool(self, name: str, negated_flag: str, default: bool = True) -> bool:
        if getattr(self.args, negated_flag, False):
            return False
        value = self.file.get(name, default)
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value


def _build_model(opts: _Options, default_kind: str | None = None) -> NoiseModel:
    kind = opts.get("model", default_kind)
    if kind is None:
        raise ConfigError("model: a noise model is required (--model)")
    try:
        if kind in ("bit-flip", "phase-flip", "bit-phase-flip", "depolarizing"):
            p = opts.get("p")
            if p is None:
                raise ConfigError(f"p: {kind} requires --p")
            cls = {
                "bit-flip": BitFlip,
                "phase-flip": PhaseFlip,
                "bit-phase-flip": BitPhaseFlip,
                "depolarizing": Depolarizing,
            }[kind]
            return cls(float(p))
        if kind == "general-pauli":
            probs = [opts.get(k) for k in ("px", "py", "pz")]
            if any(v is None for v in probs):
                raise ConfigError("px/py/pz: general-pauli requires --px, --py and --pz")
            return GeneralPauli(*(float(v) for v in probs))
        if kind == "amplitude-damping":
            g = opts.get("gamma")
            if g is None:
                raise ConfigError("gamma: amplitude-damping requires --gamma")
            return AmplitudeDamping(float(g))
        if kind == "two-kraus":
            a, b = opts.get("alpha"), opts.get("beta")
            if a is None or b is None:
                raise ConfigError("alpha/beta: two-kraus requires --alpha and --beta")
            return TwoKraus(float(a), float(b))
        if kind == "decoherence":
            return _build_decoherence(opts)
    except InvalidParameter as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"model: unknown kind {kind!r}")


def _build_decoherence(opts: _Options) -> Decoherence:
    t1, t2, t = opts.get("t1"), opts.get("t2"), opts.get("gate_time")
    if t1 is not None or t2 is not None or t is not None:
        if t1 is None or t2 is None or t is None:
            raise ConfigError("t1/t2/gate_time: all three are required together")
        return decoherence_from_times(float(t1), float(t2), float(t))
    p, g = opts.get("p"), opts.get("gamma")
    if p is None or g is None:
        raise ConfigError(
            "decoherence requires either --t1/--t2/--gate-time or --p/--gamma"
        )
    return Decoherence(float(p), float(g))


def _parse_depths(spec) -> tuple[int, ...]:
    if spec is None:
        return tuple(range(0, 201, 10))
    if isinstance(spec, (list, tuple)):
        return tuple(int(v) for v in spec)
    text = str(spec)
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) != 3:
                raise ValueError("range needs start:stop:step")
            start, stop, step = parts
            return tuple(range(start, stop + 1, step))
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"depths: cannot parse {text!r}: {exc}") from exc


def _parse_readout(spec) -> AssignmentMatrix | None:
    if spec is None:
        return None
    if isinstance(spec, AssignmentMatrix):
        return spec
    try:
        if isinstance(spec, str):
            values = [float(v) for v in spec.split(",")]
        else:
            values = list(np.asarray(spec, dtype=float).reshape(-1))
        if len(values) != 4:
            raise ValueError("expected 4 entries a00,a01,a10,a11")
        return AssignmentMatrix(np.array(values).reshape(2, 2))
    except ValueError as exc:
        raise ConfigError(f"readout_matrix: {exc}") from exc


@contextlib.contextmanager
def _open_out(path: Path | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _figure_path(args: argparse.Namespace) -> Path | None:
    if getattr(args, "no_figure", False):
        return None
    explicit = getattr(args, "figure", None)
    if explicit is not None:
        return explicit
    out = getattr(args, "out", None)
    if out is not None:
        return Path(out).with_suffix(".png")
    return None


def _model_config(model: NoiseModel) -> dict:
    return {"model": model_kind(model), **model_params(model)}


def _cmd_report(args: argparse.Namespace, inverse_only: bool) -> int:
    opts = _Options(args)
    model = _build_model(opts)
    report = channel_report(model)
    if args.format == "json":
        payload = report_as_dict(report)
        if inverse_only:
            payload = {
                "model": payload["model"],
                "invertible": payload["invertible"],
                **(
                    {"inverse": payload["inverse"]}
                    if report.invertible
                    else {"non_invertible_reason": payload["non_invertible_reason"]}
                ),
            }
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = format_report(report)
        if inverse_only and report.invertible:
            text = text[text.index("inverse operator sum:") :]
            text = f"channel: {model_kind(model)} {model_params(model)}\n" + text
    with _open_out(args.out) as fh:
        fh.write(text + "\n")
    fig_path = _figure_path(args)
    if fig_path is not None:
        from .figures import render_report_figure

        render_report_figure(report, str(fig_path))
    return 0


def _cmd_sim_decay(args: argparse.Namespace) -> int:
    opts = _Options(args)
    model = _build_model(opts, default_kind="decoherence")
    if not isinstance(model, Decoherence):
        raise ConfigError("model: 'sim decay' requires a decoherence model")
    readout = _parse_readout(opts.get("readout_matrix"))
    cfg = DecayConfig(
        model=model,
        depths=_parse_depths(opts.get("depths")),
        n_shots=int(opts.get("shots", 2048)),
        seed=int(opts.get("seed", 0)),
        deconvolve=opts.get_bool("deconvolve", "no_deconvolve"),
        readout=readout,
        reference_curves=opts.get_bool("reference_curves", "no_reference_curves"),
    )
    points = run_decoherence_decay(cfg)
    config = {
        "experiment": "decoherence-decay",
        **_model_config(model),
        "depths": list(cfg.depths),
        "n_shots": cfg.n_shots,
        "seed": cfg.seed,
        "deconvolve": cfg.deconvolve,
        "readout_matrix": None if readout is None else readout.matrix.tolist(),
        "reference_curves": cfg.reference_curves,
    }
    for key in ("t1", "t2", "gate_time"):
        value = opts.get(key)
        if value is not None:
            config[key] = float(value)
    _write_points(args, points, config, "m")
    fig_path = _figure_path(args)
    if fig_path is not None:
        from .figures import render_decay_figure

        render_decay_figure(points, str(fig_path))
    return 0


def _cmd_sim_sweep(args: argparse.Namespace) -> int:
    opts = _Options(args)
    model = _build_model(opts, default_kind="general-pauli")
    if not isinstance(model, GeneralPauli):
        raise ConfigError("model: 'sim sweep' requires a general-pauli model")
    readout = _parse_readout(opts.get("readout_matrix"))
    cfg = SweepConfig(
        model=model,
        n_thetas=int(opts.get("thetas", 25)),
        n_shots=int(opts.get("shots", 1024)),
        seed=int(opts.get("seed", 0)),
        deconvolve=opts.get_bool("deconvolve", "no_deconvolve"),
        readout=readout,
    )
    points = run_pauli_sweep(cfg)
    config = {
        "experiment": "pauli-sweep",
        **_model_config(model),
        "n_thetas": cfg.n_thetas,
        "n_shots": cfg.n_shots,
        "seed": cfg.seed,
        "deconvolve": cfg.deconvolve,
        "readout_matrix": None if readout is None else readout.matrix.tolist(),
    }
    _write_points(args, points, config, "theta")
    fig_path = _figure_path(args)
    if fig_path is not None:
        from .figures import render_sweep_figure

        render_sweep_figure(points, str(fig_path))
    return 0


def _write_points(args, points, config, abscissa_label: str) -> None:
    with _open_out(args.out) as fh:
        if args.format == "json":
            json.dump(curve_points_as_json(points, config, abscissa_label), fh, indent=2)
            fh.write("\n")
        else:
            write_curve_csv(fh, points, config, abscissa_label)


def _read_decay_csv(path: Path) -> list[tuple[float, float, float]]:
    try:
        with open(path) as fh:
            rows = [line for line in fh if not line.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"data: cannot read {path}: {exc}") from exc
    reader = csv.DictReader(rows)
    if reader.fieldnames is None:
        raise ConfigError(f"data: {path} is empty")
    fields = reader.fieldnames
    if "x_noisy" in fields and "x_noisy_err" in fields:
        m_col, y_col, s_col = fields[0], "x_noisy", "x_noisy_err"
    elif len(fields) >= 3:
        m_col, y_col, s_col = fields[0], fields[1], fields[2]
    else:
        raise ConfigError(f"data: need columns (m, mean, err), found {fields}")
    data = []
    for i, row in enumerate(reader):
        try:
            data.append((float(row[m_col]), float(row[y_col]), float(row[s_col])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"data: row {i}: {exc}") from exc
    return data


def _cmd_fit_gate_time(args: argparse.Namespace) -> int:
    opts = _Options(args)
    t1, t2 = opts.get("t1"), opts.get("t2")
    if t1 is None or t2 is None:
        raise ConfigError("t1/t2: the gate-time fit requires --t1 and --t2")
    data = _read_decay_csv(args.data)
    fit = fit_gate_time(data, float(t1), float(t2))
    if args.format == "json":
        text = json.dumps(
            {
                "gate_time": fit.t,
                "stderr": fit.stderr,
                "residual": fit.residual,
                "n_points": fit.n_points,
                "t1": float(t1),
                "t2": float(t2),
            },
            indent=2,
            sort_keys=True,
        )
    else:
        text = (
            f"gate time: {fit.t:.6e} s +- {fit.stderr:.3e} s"
            f" (residual {fit.residual:.4g}, {fit.n_points} points)"
        )
    with _open_out(args.out) as fh:
        fh.write(text + "\n")
    return 0


def _cmd_mitigate_counts(args: argparse.Namespace) -> int:
    opts = _Options(args)
    try:
        with open(args.counts) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"counts: cannot read {args.counts}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"counts: {args.counts} is not valid JSON: {exc}") from exc
    if isinstance(payload, dict):
        records = payload.get("records")
        matrix_spec = payload.get("assignment_matrix")
    else:
        records = payload
        matrix_spec = None
    if not isinstance(records, list) or not records:
        raise ConfigError("counts: expected a nonempty JSON array of records")
    flag_matrix = opts.get("readout_matrix")
    assignment = _parse_readout(flag_matrix if flag_matrix is not None else matrix_spec)
    deconvolve = opts.get_bool("deconvolve", "no_deconvolve")
    model = None
    if deconvolve:
        model = _build_model(opts)
    rows = mitigate_counts(
        records,
        model,
        assignment=assignment,
        default_depth=int(opts.get("depth", 1)),
        deconvolve=deconvolve,
    )
    config = {
        "command": "mitigate-counts",
        "counts": str(args.counts),
        "deconvolve": deconvolve,
        "assignment_matrix": None if assignment is None else assignment.matrix.tolist(),
        **({} if model is None else _model_config(model)),
    }
    with _open_out(args.out) as fh:
        if args.format == "json":
            json.dump({"config": config, "rows": rows}, fh, indent=2)
            fh.write("\n")
        else:
            fh.write("# " + json.dumps(config, sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            header = list(rows[0].keys())
            writer.writerow(header)
            for row in rows:
                writer.writerow([row[k] for k in header])
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return _cmd_report(args, inverse_only=False)
        if args.command == "invert":
            return _cmd_report(args, inverse_only=True)
        if args.command == "sim" and args.subcommand == "decay":
            return _cmd_sim_decay(args)
        if args.command == "sim" and args.subcommand == "sweep":
            return _cmd_sim_sweep(args)
        if args.command == "fit" and args.subcommand == "gate-time":
            return _cmd_fit_gate_time(args)
        if args.command == "mitigate" and args.subcommand == "counts":
            return _cmd_mitigate_counts(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, InvalidParameter, DegenerateFit, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonInvertible, SingularPtm, SingularAssignment) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CorrectionOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
