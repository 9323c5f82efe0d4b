"""Acceptance criteria 1-12, each printing one PASS/FAIL line.

Criteria 8-12 run the scaled experiments and take several minutes in total.
"""
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import signal

import oracles
from rakeness import experiments as ex
from rakeness.eigen import assignment_bruteforce, design_correlation, find_J, lambda_of_J, oracle_solve
from rakeness.rmpi import rip_constant
from rakeness.signals.ecg import ecg_generate_batch, sample_ecg_params
from rakeness.spectral import (
    SpectralDensity,
    SpectralDesignInput,
    default_n_half,
    design_spectrum,
    r_min,
    rakeness_between,
)
from rakeness.waveforms import StationaryAntipodalSource, antipodal_stationary

ECG_C = ex.ECG_BAND * ex.ECG_T
SWEEP_R = (1 / (2 * ECG_C), 0.02, 0.038, 0.1, 0.3, 1.0)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def ecg_sweep():
    cfg = ex.default_config("ecg", r_list=SWEEP_R, M_list=(32, 96))
    t0 = time.perf_counter()
    train, test = ex.training_corpus(cfg), ex.test_corpus(cfg)
    rep = ex.sweep_r(cfg, train=train, test=test)
    return cfg, train, test, rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ecg_runs(ecg_sweep):
    cfg, train, test, rep, sweep_time = ecg_sweep
    cfg = replace(cfg, r_list=(rep.best_r,))
    t0 = time.perf_counter()
    designs = ex.build_designs(cfg, train=train)
    design_time = time.perf_counter() - t0
    rows, times = {}, {}
    for M in cfg.M_list:
        t1 = time.perf_counter()
        rows[M] = ex.run_trials(cfg, designs, ex.plan_rows(cfg, M_list=(M,)), test=test)
        times[M] = time.perf_counter() - t1
    return rep.best_r, rows, sweep_time + design_time + times[32]


def test_criterion_01_closed_form_vs_brute_force(capsys):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_inf, worst_gap = 0.0, 0.0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        mu = np.sort(rng.dirichlet(np.ones(n)))[::-1]
        r = float(rng.uniform(1.0 / n, 1.0))
        J = find_J(mu, r)
        lam = np.zeros(n)
        lam[:J] = lambda_of_J(mu, J, r)
        ref = oracle_solve(mu, r)
        worst_inf = max(worst_inf, float(np.abs(lam - ref.lambda_).max()))
        worst_gap = max(worst_gap, abs(float(lam @ mu) - ref.objective))
    elapsed = time.perf_counter() - t0
    ok = worst_inf < 1e-4 and worst_gap < 1e-5 and elapsed < 60
    report(capsys, 1, ok, f"max |dlambda| = {worst_inf:.2e}, max gap = {worst_gap:.2e}, {elapsed:.1f} s")


def test_criterion_02_assignment(capsys):
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(1000):
        lam = np.sort(rng.random(5))[::-1]
        mu = np.sort(rng.random(5))[::-1]
        try:
            _, best, identity = assignment_bruteforce(lam, mu)
            failures += identity < best - 1e-12
        except AssertionError:
            failures += 1
    report(capsys, 2, failures == 0, f"{failures} of 1000 instances beat the identity")


def test_criterion_03_feasibility_invariants(capsys):
    rng = np.random.default_rng(3)
    worst = {"sum": 0.0, "sq": 0.0, "neg": 0.0, "trace": 0.0, "spec": 0.0}
    for k in range(200):
        n = int(rng.integers(2, 20))
        G = rng.standard_normal((n, n))
        A = G @ G.T if k % 4 else np.eye(n)  # identity: fully degenerate mu
        A /= np.trace(A)
        r = float(rng.uniform(1.0 / n, 1.0))
        d = design_correlation(A, r)
        worst["sum"] = max(worst["sum"], abs(d.lambda_.sum() - 1))
        if np.ptp(d.mu) > 1e-9:
            worst["sq"] = max(worst["sq"], abs((d.lambda_**2).sum() - r))
        else:
            worst["sq"] = max(worst["sq"], max((d.lambda_**2).sum() - r, 0.0))
        worst["neg"] = max(worst["neg"], max(-d.lambda_.min(), 0.0))
        worst["trace"] = max(worst["trace"], abs(np.trace(d.B) - 1))
    for k in range(30):
        B = float(rng.uniform(0.5, 4.0))
        n = default_n_half(B, 1.0)
        a = SpectralDensity.from_values(rng.random(2 * n + 1) ** 3 + 1e-6, B)
        lo = r_min(B)
        r = lo + (1 - lo) * float(rng.uniform(1e-4, 1.0))
        sd = design_spectrum(SpectralDesignInput(a, 1.0, r))
        viol = max(
            -sd.values.min(),
            abs(sd.df * sd.values.sum() - 1),
            float(np.abs(sd.values - sd.values[::-1]).max()) / sd.values.max(),
            rakeness_between(sd, sd, 1.0) / r - 1,
        )
        worst["spec"] = max(worst["spec"], viol)
    ok = (
        worst["sum"] < 1e-9 and worst["sq"] < 1e-8 and worst["neg"] == 0
        and worst["trace"] < 1e-9 and worst["spec"] < 1e-8
    )
    report(capsys, 3, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_04_r_min(capsys):
    cs = (0.5, 1.0, 2.0, 5.0, 10.0)
    errs = [abs(r_min(c) - oracles.white_self_rakeness(c)) for c in cs]
    prod = [r_min(c) * c for c in cs]
    dense = [r_min(c) * c for c in np.linspace(0.05, 200, 4000)]
    ok = max(errs) < 1e-6 and all(np.diff(dense) > 0) and max(dense) < 0.5 and all(np.diff(prod) > 0)
    report(capsys, 4, ok, f"max error {max(errs):.1e}, r_min*c from {dense[0]:.4f} to {dense[-1]:.6f}")


def test_criterion_05_rip(capsys):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        P = rng.standard_normal((6, 10)) / np.sqrt(6)
        worst = max(worst, abs(rip_constant(P, 2) - oracles.rip_enumeration(P, 2)))
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    ortho = rip_constant(Q, 3)
    null_col = rip_constant(np.column_stack([np.eye(3), np.zeros(3)]), 1)
    ok = worst < 1e-12 and ortho < 1e-12 and abs(null_col - 1) < 1e-12
    report(capsys, 5, ok, f"oracle gap {worst:.1e}, orthonormal {ortho:.1e}, null column {null_col:.6f}")


def test_criterion_06_waveform_statistics(capsys):
    S = 100000
    x = antipodal_stationary(SpectralDensity.flat(128.0, 32), S, 256.0, seed=11)
    lags = [float(np.mean(x[: S - k] * x[k:])) for k in range(1, 9)]
    bound = 3 / np.sqrt(S)
    white_ok = float(np.mean(x * x)) == 1.0 and max(abs(v) for v in lags) < bound
    f0 = SpectralDensity.flat(128.0, 64).frequencies
    target = SpectralDensity.from_values(1.0 + 0.8 * np.cos(np.pi * f0 / 128) + 0.4 * np.exp(-((f0 / 20) ** 2)), 128.0)
    X = StationaryAntipodalSource(target, 256, 256.0).sample(200, seed=9)
    f, P = signal.welch(X, fs=256.0, nperseg=64, return_onesided=False, detrend=False, axis=1)
    P = P.mean(axis=0)
    keep = np.abs(f) < 128.0
    ref = np.interp(f[keep], target.frequencies, target.values)
    l1 = float(np.abs(P[keep] - ref).sum() / ref.sum())
    ok = white_ok and l1 < 0.1
    report(capsys, 6, ok, f"max |lag 1-8| {max(abs(v) for v in lags):.4f} (bound {bound:.4f}), periodogram L1 {l1:.3f}")


def test_criterion_07_ode_convergence(capsys):
    params = [sample_ecg_params(s) for s in range(20)]
    a = ecg_generate_batch(params, range(20), oversample=8)
    b = ecg_generate_batch(params, range(20), oversample=16)
    worst = float(np.sqrt(np.mean((a - b) ** 2, axis=1)).max())
    report(capsys, 7, worst < 1e-4, f"max RMS change {worst:.2e}")


@pytest.mark.slow
def test_criterion_08_ecg_improvement(capsys, ecg_runs):
    r, rows, elapsed = ecg_runs
    d = ex.paired_delta(rows[32], r, 32)
    ok = d.mean >= 2.0 and d.excludes_zero and elapsed < 600
    report(capsys, 8, ok, f"r = {r:g}, delta {d.mean:+.2f} dB, CI [{d.ci_low:.2f}, {d.ci_high:.2f}], {elapsed:.0f} s")


@pytest.mark.slow
def test_criterion_09_ecg_gap_shrinks(capsys, ecg_runs):
    r, rows, _ = ecg_runs
    d32 = ex.paired_delta(rows[32], r, 32)
    d96 = ex.paired_delta(rows[96], r, 96)
    ok = d96.mean > 0 and d96.mean < d32.mean
    report(capsys, 9, ok, f"delta at M=96 {d96.mean:+.2f} dB vs M=32 {d32.mean:+.2f} dB")


@pytest.mark.slow
def test_criterion_10_image_improvement(capsys):
    cfg = ex.default_config("image", M_list=(115,), r_list=(0.047,))
    t0 = time.perf_counter()
    rows = ex.run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    d = ex.paired_delta(rows, 0.047, 115)
    ok = d.mean >= 0.5 and d.excludes_zero and elapsed < 900
    report(capsys, 10, ok, f"delta {d.mean:+.2f} dB, CI [{d.ci_low:.2f}, {d.ci_high:.2f}], {elapsed:.0f} s")


def test_criterion_11_image_design(capsys):
    cfg = ex.default_config("image")
    designs = ex.build_designs(cfg, r_list=(0.047,))
    spreads, Js = [], []
    for k, A in designs.correlations.items():
        mu = np.sort(np.linalg.eigvalsh(A))[::-1]
        spreads.append(mu[0] / mu[35])
        Js.append(designs.designs[0.047][k].J)
    ok = min(spreads) > 10 and all(20 <= J <= 36 for J in Js)
    report(capsys, 11, ok, f"min mu0/mu35 {min(spreads):.0f}, J = {Js}")


@pytest.mark.slow
def test_criterion_12_interior_optimum(capsys, ecg_sweep):
    rep = ecg_sweep[3]
    table = [(r, m) for r, m, _, _, status in rep.table if status == "ok"]
    means = [m for _, m in table]
    best = int(np.argmax(means))
    ok = len(table) == len(SWEEP_R) and 0 < best < len(table) - 1
    line = ", ".join(f"{r:g}: {m:.2f}" for r, m in table)
    report(capsys, 12, ok, f"best r = {table[best][0]:g}; {line}")
