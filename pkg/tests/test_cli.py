import json

import pytest

from qdeconv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_report_text(capsys):
    code, out, err = run(capsys, "report", "--model", "bit-flip", "--p", "0.25")
    assert code == 0
    assert "invertible: True" in out
    assert "weight +1.5" in out


def test_report_json(capsys):
    code, out, _ = run(
        capsys, "report", "--model", "amplitude-damping", "--gamma", "0.36", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["is_unital"] is False
    assert payload["inverse"]["corrections"]["x"]["factor"] == pytest.approx(1.25)


def test_report_non_invertible_still_succeeds(capsys):
    code, out, _ = run(capsys, "report", "--model", "bit-flip", "--p", "0.5")
    assert code == 0
    assert "invertible: False" in out


def test_invert_subcommand(capsys):
    code, out, _ = run(capsys, "invert", "--model", "depolarizing", "--p", "0.2")
    assert code == 0
    assert "inverse operator sum" in out
    assert "kraus terms (4)" not in out


def test_missing_parameter_is_config_error(capsys):
    code, _, err = run(capsys, "report", "--model", "bit-flip")
    assert code == 2
    assert "requires --p" in err


def test_invalid_parameter_is_config_error(capsys):
    code, _, err = run(capsys, "report", "--model", "bit-flip", "--p", "1.5")
    assert code == 2


def test_sim_sweep_stdout_and_exit_codes(capsys):
    code, out, _ = run(
        capsys,
        *"sim sweep --px 0.1 --py 0.05 --pz 0.2 --thetas 5 --shots 64 --seed 1".split(),
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# {")
    assert lines[1].split(",")[0] == "theta"
    assert len(lines) == 2 + 5
    # px + py = 0.5 makes the z contraction vanish: non-invertible noise
    code, _, err = run(
        capsys,
        *"sim sweep --px 0.25 --py 0.25 --pz 0.0 --thetas 5 --shots 64".split(),
    )
    assert code == 3
    assert "not invertible" in err


def test_sim_decay_overflow_exit_code(capsys):
    code, _, err = run(
        capsys,
        *(
            "sim decay --t1 35.91e-6 --t2 25.11e-6 --gate-time 40e-9"
            " --depths 0,20000000 --shots 64"
        ).split(),
    )
    assert code == 4
    assert "exceeds cap" in err


def test_sim_decay_csv_and_figure(tmp_path, capsys):
    out_csv = tmp_path / "decay.csv"
    code, _, _ = run(
        capsys,
        *(
            "sim decay --t1 35.91e-6 --t2 25.11e-6 --gate-time 40e-9"
            " --depths 0:100:50 --shots 128 --seed 9"
        ).split(),
        "--out",
        str(out_csv),
    )
    assert code == 0
    assert out_csv.exists()
    figure = tmp_path / "decay.png"
    assert figure.exists() and figure.stat().st_size > 0
    header = out_csv.read_text().splitlines()[0]
    config = json.loads(header[2:])
    assert config["experiment"] == "decoherence-decay"
    assert config["t2"] == pytest.approx(25.11e-6)


def test_no_figure_flag(tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys,
        *"sim sweep --px 0.1 --py 0.05 --pz 0.2 --thetas 3 --shots 32 --no-figure".split(),
        "--out",
        str(out_csv),
    )
    assert code == 0
    assert not (tmp_path / "sweep.png").exists()


def test_report_figure(tmp_path, capsys):
    fig = tmp_path / "ptm.png"
    code, _, _ = run(
        capsys,
        *"report --model general-pauli --px 0.1 --py 0.05 --pz 0.2".split(),
        "--figure",
        str(fig),
    )
    assert code == 0
    assert fig.exists() and fig.stat().st_size > 0


def test_byte_identical_reruns(tmp_path, capsys):
    args = (
        "sim sweep --px 0.1 --py 0.05 --pz 0.2 --thetas 7 --shots 256"
        " --seed 42 --no-figure"
    ).split()
    paths = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code, _, _ = run(capsys, *args, "--out", str(path))
        assert code == 0
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_config_file_precedence(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps(
            {
                "px": 0.1,
                "py": 0.05,
                "pz": 0.2,
                "thetas": 4,
                "shots": 32,
                "seed": 5,
            }
        )
    )
    code, out, _ = run(capsys, "sim", "sweep", "--config", str(config))
    assert code == 0
    assert json.loads(out.splitlines()[0][2:])["n_thetas"] == 4
    # flags override the file
    code, out, _ = run(capsys, "sim", "sweep", "--config", str(config), "--thetas", "6")
    assert code == 0
    assert json.loads(out.splitlines()[0][2:])["n_thetas"] == 6


def test_bad_config_file(tmp_path, capsys):
    config = tmp_path / "broken.json"
    config.write_text("not json")
    code, _, err = run(capsys, "sim", "sweep", "--config", str(config))
    assert code == 2
    assert "not valid JSON" in err


def test_fit_gate_time_from_sim_output(tmp_path, capsys):
    out_csv = tmp_path / "decay.csv"
    code, _, _ = run(
        capsys,
        *(
            "sim decay --t1 17.43e-6 --t2 10.67e-6 --gate-time 35e-9"
            " --depths 0:175:25 --shots 2048 --seed 11 --no-figure"
        ).split(),
        "--out",
        str(out_csv),
    )
    assert code == 0
    code, out, _ = run(
        capsys,
        *f"fit gate-time --data {out_csv} --t1 17.43e-6 --t2 10.67e-6 --format json".split(),
    )
    assert code == 0
    fit = json.loads(out)
    assert abs(fit["gate_time"] - 35e-9) <= 2 * fit["stderr"]


def test_mitigate_counts_roundtrip(tmp_path, capsys):
    counts = tmp_path / "counts.json"
    counts.write_text(
        json.dumps(
            {
                "records": [
                    {"basis": "x", "n0": 850, "n1": 174},
                    {"basis": "y", "n0": 500, "n1": 524},
                    {"basis": "z", "n0": 700, "n1": 324, "m": 3},
                ],
                "assignment_matrix": [[0.95, 0.03], [0.05, 0.97]],
            }
        )
    )
    code, out, _ = run(
        capsys,
        *(
            f"mitigate counts --counts {counts} --model decoherence"
            " --t1 35.91e-6 --t2 25.11e-6 --gate-time 40e-9 --format json"
        ).split(),
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["rows"]) == 3
    assert payload["rows"][2]["m"] == 3
    assert payload["config"]["assignment_matrix"][0][0] == pytest.approx(0.95)


def test_mitigate_counts_csv_default(tmp_path, capsys):
    counts = tmp_path / "counts.json"
    counts.write_text(json.dumps([{"basis": "z", "n0": 700, "n1": 324}]))
    code, out, _ = run(
        capsys,
        *f"mitigate counts --counts {counts} --model bit-flip --p 0.25".split(),
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[1].startswith("basis,")
    assert len(lines) == 3


def test_mitigate_counts_no_deconvolve_needs_no_model(tmp_path, capsys):
    counts = tmp_path / "counts.json"
    counts.write_text(json.dumps([{"basis": "z", "n0": 700, "n1": 324}]))
    code, out, _ = run(
        capsys, *f"mitigate counts --counts {counts} --no-deconvolve".split()
    )
    assert code == 0
