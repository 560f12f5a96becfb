"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
"""

import contextlib
import time

import numpy as np
import pytest

from qdeconv import (
    AXES,
    AssignmentMatrix,
    AmplitudeDamping,
    BitFlip,
    BitPhaseFlip,
    DecayConfig,
    Decoherence,
    DensityMatrix,
    Depolarizing,
    EstimationResult,
    GeneralPauli,
    PhaseFlip,
    RngSpec,
    ShotRecord,
    SweepConfig,
    TwoKraus,
    apply,
    apply_readout_error,
    deconvolve_observable,
    decoherence_from_times,
    expectation,
    fit_gate_time,
    inverse_of,
    kraus_of,
    mean_from_counts,
    min_choi_eigenvalue,
    mitigate_readout,
    ptm_of,
    run_decoherence_decay,
    run_pauli_sweep,
    sample_pauli,
    sample_pauli_noisy,
    unitary_map,
)
from qdeconv.operators import PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z
from helpers import random_density_matrix, random_unitary

PAULI_BY_AXIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

QUBIT25 = dict(t1=35.91e-6, t2=25.11e-6)
QUBIT4 = dict(t1=17.43e-6, t2=10.67e-6)
GATE_TIME = 40e-9


@contextlib.contextmanager
def criterion(number: int, description: str, runtime_limit: float | None = None):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"[FAIL] criterion {number}: {description}")
        raise
    elapsed = time.monotonic() - start
    print(f"[PASS] criterion {number}: {description} ({elapsed:.2f}s)")
    if runtime_limit is not None:
        assert elapsed < runtime_limit, f"criterion {number} took {elapsed:.2f}s"


def grid(lo, hi, n=11):
    return np.linspace(lo, hi, n)


def acceptance_models(start: float = 0.0):
    """Every channel family on >= 11 points per parameter, singular points
    excluded by construction of the ranges."""
    models = []
    for p in grid(start, 0.45):
        models += [BitFlip(p), PhaseFlip(p), BitPhaseFlip(p)]
    for p in grid(start, 0.9):
        models.append(Depolarizing(p))
    # the Pauli grid upper bound is chosen so no pairwise sum hits the
    # singular value 1/2
    gp_hi = 0.29 if start > 0 else 0.3
    for px in grid(start, gp_hi):
        for py in grid(start, gp_hi):
            for pz in grid(start, gp_hi):
                models.append(GeneralPauli(px, py, pz))
    for g in grid(start, 0.9):
        models.append(AmplitudeDamping(g))
    for a in grid(start, 0.6):
        for b in grid(start, 0.6):
            models.append(TwoKraus(a, b))
    for p in grid(start, 0.45):
        for g in grid(start, 0.9):
            models.append(Decoherence(p, g))
    return models


def test_criterion_1_inverse_map_identity():
    with criterion(1, "inverse-map identity on parameter grids", runtime_limit=1.0):
        for model in acceptance_models():
            inv = inverse_of(model)
            direct = ptm_of(kraus_of(model))
            deviation = np.max(np.abs(inv.ptm @ direct - np.eye(4)))
            assert deviation <= 1e-10, (model, deviation)


def test_criterion_2_non_cp_certification():
    with criterion(2, "inverses are non-CP, direct channels are CP", runtime_limit=1.0):
        for model in acceptance_models():
            assert min_choi_eigenvalue(kraus_of(model)) >= -1e-10, model
        for model in acceptance_models(start=0.05):
            inv = inverse_of(model)
            assert min_choi_eigenvalue(inv.kraus) < -1e-8, model


def test_criterion_3_exact_deconvolution_oracle():
    with criterion(3, "exact deconvolution on 500 random states", runtime_limit=5.0):
        gen = np.random.default_rng(301)
        states = [random_density_matrix(gen) for _ in range(500)]
        models = [
            BitFlip(0.25),
            PhaseFlip(0.1),
            BitPhaseFlip(0.3),
            Depolarizing(0.2),
            GeneralPauli(0.1, 0.05, 0.2),
            AmplitudeDamping(0.36),
            TwoKraus(0.3, 0.5),
            Decoherence(0.05, 0.2),
        ]
        for model in models:
            inv = inverse_of(model)
            kmap = kraus_of(model)
            for rho in states:
                noisy_state = apply(kmap, rho.matrix)
                means = {
                    axis: EstimationResult(
                        mean=expectation(PAULI_BY_AXIS[axis], noisy_state).real,
                        std_error=0.0,
                        n_shots=0,
                    )
                    for axis in AXES
                }
                for axis in AXES:
                    out = deconvolve_observable(PAULI_BY_AXIS[axis], means, inv)
                    ideal = expectation(PAULI_BY_AXIS[axis], rho).real
                    assert abs(out.mean - ideal) <= 1e-10, (model, axis)


def test_criterion_4_pauli_sweep_reproduction():
    with criterion(4, "general Pauli channel sweep at desk scale", runtime_limit=10.0):
        cfg = SweepConfig(
            model=GeneralPauli(0.1, 0.05, 0.2), n_thetas=25, n_shots=1024, seed=2024
        )
        points = run_pauli_sweep(cfg)
        assert len(points) == 25
        for pt in points:
            for axis in AXES:
                est = pt.mitigated[axis]
                assert est.std_error > 0
                assert abs(est.mean - pt.ideal[axis]) <= 5 * est.std_error, (
                    pt.abscissa,
                    axis,
                )
        # theta = pi/2 sits on the grid: noisy <sigma_x> concentrates at 0.5
        mid = points[6]
        assert mid.abscissa == pytest.approx(np.pi / 2)
        noisy_x = mid.noisy["x"]
        assert abs(noisy_x.mean - 0.5) <= 5 * noisy_x.std_error
        # sigma_y statistical error is amplified by the 2.5 correction factor
        expected_err = 2.5 / np.sqrt(1024)
        for pt in points:
            assert abs(pt.mitigated["y"].std_error - expected_err) <= 0.2 * expected_err


def test_criterion_5_decoherence_decay_reproduction():
    with criterion(5, "decoherence decay with qubit-25 calibration", runtime_limit=30.0):
        model = decoherence_from_times(QUBIT25["t1"], QUBIT25["t2"], GATE_TIME)
        cfg = DecayConfig(
            model=model,
            depths=tuple(range(0, 201, 10)),
            n_shots=2048,
            seed=2024,
            reference_curves=False,
        )
        points = run_decoherence_decay(cfg)
        t_over_t2 = GATE_TIME / QUBIT25["t2"]
        for pt in points:
            expected = np.exp(-pt.abscissa * t_over_t2)
            err = pt.noisy["x"].std_error
            if err == 0:
                assert pt.noisy["x"].mean == pytest.approx(expected, abs=1e-12)
            else:
                assert abs(pt.noisy["x"].mean - expected) <= 5 * err, pt.abscissa
        sampled = [pt.mitigated["x"] for pt in points if pt.mitigated["x"].std_error > 0]
        weights = np.array([1 / est.std_error**2 for est in sampled])
        means = np.array([est.mean for est in sampled])
        weighted_mean = float(weights @ means / weights.sum())
        combined_err = float(1 / np.sqrt(weights.sum()))
        assert abs(weighted_mean - 1.0) <= 3 * combined_err


def test_criterion_6_variance_law():
    with criterion(6, "variance amplification by c^2 for c in {2, 2.5}"):
        n_runs = 1000
        n_shots = 1024

        # c = 2: bit-flip x with p = 0.25, measuring sigma_z on |0>
        model = BitFlip(0.25)
        state = DensityMatrix.unchecked(apply(kraus_of(model), np.diag([1.0, 0.0])))
        factor = 2.0
        rng = RngSpec(606)
        noisy_means = [
            mean_from_counts(sample_pauli(state, "z", n_shots, rng.split(0, i))).mean
            for i in range(n_runs)
        ]
        mitig_means = [
            factor
            * mean_from_counts(sample_pauli(state, "z", n_shots, rng.split(1, i))).mean
            for i in range(n_runs)
        ]
        ratio = np.var(mitig_means, ddof=1) / np.var(noisy_means, ddof=1)
        assert abs(ratio - factor**2) <= 0.15 * factor**2

        # c = 2.5: Fig. 3 general Pauli channel, measuring sigma_y
        gp = GeneralPauli(0.1, 0.05, 0.2)
        prep = DensityMatrix.pure([np.cos(np.pi / 6), np.sin(np.pi / 6)])
        factor = 2.5
        noisy_means = [
            mean_from_counts(
                sample_pauli_noisy(prep, (0.1, 0.05, 0.2), "y", n_shots, rng.split(2, i))
            ).mean
            for i in range(n_runs)
        ]
        mitig_means = [
            factor
            * mean_from_counts(
                sample_pauli_noisy(prep, (0.1, 0.05, 0.2), "y", n_shots, rng.split(3, i))
            ).mean
            for i in range(n_runs)
        ]
        ratio = np.var(mitig_means, ddof=1) / np.var(noisy_means, ddof=1)
        assert abs(ratio - factor**2) <= 0.15 * factor**2


def test_criterion_7_gate_time_refit():
    with criterion(7, "gate-time refit at qubit-4 calibration"):
        t_true = 35e-9
        model = decoherence_from_times(QUBIT4["t1"], QUBIT4["t2"], t_true)
        cfg = DecayConfig(
            model=model,
            depths=tuple(range(0, 200, 25)),
            n_shots=2048,
            seed=707,
            reference_curves=False,
        )
        points = run_decoherence_decay(cfg)
        data = [
            (pt.abscissa, pt.noisy["x"].mean, pt.noisy["x"].std_error) for pt in points
        ]
        fit = fit_gate_time(data, QUBIT4["t1"], QUBIT4["t2"])
        assert abs(fit.t - t_true) <= 2 * fit.stderr


def test_criterion_8_limiting_case_reductions():
    with criterion(8, "two-Kraus limits match bit-flip and amplitude damping"):
        for alpha in grid(0.0, 0.6):
            tk = TwoKraus(alpha, alpha)
            bf = BitFlip(np.sin(alpha) ** 2)
            assert np.max(np.abs(ptm_of(kraus_of(tk)) - ptm_of(kraus_of(bf)))) <= 1e-12
            inv_tk, inv_bf = inverse_of(tk), inverse_of(bf)
            assert np.max(np.abs(inv_tk.ptm - inv_bf.ptm)) <= 1e-12
            for axis in AXES:
                cf_tk, cf_bf = inv_tk.correction_factors, inv_bf.correction_factors
                assert abs(cf_tk.factor(axis) - cf_bf.factor(axis)) <= 1e-12
                assert abs(cf_tk.offset(axis) - cf_bf.offset(axis)) <= 1e-12
        for beta in grid(0.0, 1.2):
            tk = TwoKraus(0.0, beta)
            ad = AmplitudeDamping(np.sin(beta) ** 2)
            assert np.max(np.abs(ptm_of(kraus_of(tk)) - ptm_of(kraus_of(ad)))) <= 1e-12
            inv_tk, inv_ad = inverse_of(tk), inverse_of(ad)
            assert np.max(np.abs(inv_tk.ptm - inv_ad.ptm)) <= 1e-12
            for axis in AXES:
                cf_tk, cf_ad = inv_tk.correction_factors, inv_ad.correction_factors
                assert abs(cf_tk.factor(axis) - cf_ad.factor(axis)) <= 1e-12
                assert abs(cf_tk.offset(axis) - cf_ad.offset(axis)) <= 1e-12


def test_criterion_9_depolarizing_commutation_and_composition():
    with criterion(9, "depolarizing commutation and composition"):
        gen = np.random.default_rng(909)
        gamma_dep = ptm_of(kraus_of(Depolarizing(0.42)))
        for _ in range(100):
            gamma_u = ptm_of(unitary_map(random_unitary(gen)))
            assert np.max(np.abs(gamma_dep @ gamma_u - gamma_u @ gamma_dep)) <= 1e-12
        probs = [0.05, 0.1, 0.2, 0.15, 0.08]
        composed = np.eye(4)
        for p in probs:
            composed = ptm_of(kraus_of(Depolarizing(p))) @ composed
        p_tot = 1.0 - np.prod([1 - p for p in probs])
        single = ptm_of(kraus_of(Depolarizing(p_tot)))
        assert np.max(np.abs(composed - single)) <= 1e-12


def test_criterion_10_readout_round_trip():
    with criterion(10, "assignment-matrix mitigation round trip"):
        gen = np.random.default_rng(1010)
        rng = RngSpec(1011)
        n = 4096
        trials = 0
        while trials < 50:
            a00 = gen.uniform(0.65, 1.0)
            a11 = gen.uniform(0.65, 1.0)
            if a00 + a11 - 1 < 0.3:  # det of a column-stochastic 2x2
                continue
            a = AssignmentMatrix(np.array([[a00, 1 - a11], [1 - a00, a11]]))
            p_true = gen.uniform(0.2, 0.8)
            n0 = int(round(n * p_true))
            rec = ShotRecord("z", n0, n - n0)
            noisy = apply_readout_error(rec, a, rng.split(trials))
            freqs, _ = mitigate_readout(noisy.frequencies, a)
            q = float(a.matrix[0] @ rec.frequencies)
            inv = np.linalg.inv(a.matrix)
            sigma = abs(inv[0, 0] - inv[0, 1]) * np.sqrt(q * (1 - q) / n)
            assert abs(freqs[0] - rec.frequencies[0]) <= 3 * sigma, trials
            trials += 1
