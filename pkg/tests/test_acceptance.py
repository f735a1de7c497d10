"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict that pytest prints in the
"acceptance criteria" summary section.
"""

from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dcsit import cli
from dcsit.analysis import (
    dof_achievable_k3,
    dof_baseline,
    dof_centralized_bound,
    dof_weak,
    fit_dof_slope,
    fit_exponent,
    fit_log_mean_exponent,
    is_weak_regime,
    k3_branches,
    weak_threshold,
)
from dcsit.config import ExperimentConfig, validate
from dcsit.experiments import run_leakage, run_posterior
from dcsit.model import TrialBatch
from dcsit.precoding import ApZfPartition, apzf_from_estimate, composite_apzf_batch, gaussian_sampler, normalization_lambda
from dcsit.quantization import QuantizerConfig, bits_for_budget, distortion_stats
from dcsit import rng as rngmod
from dcsit.schemes import run_toy, run_weak, sweep

F = Fraction
DESK_GRID = tuple(10.0**e for e in range(2, 9))
# The schemes' rates approach their slopes only far above desk-scale SNR
# (see README); the slope criteria are measured here.
HIGH_GRID = tuple(10.0**e for e in range(24, 57, 2))
TRIALS = 1000


def record(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {name}: {'PASS' if ok else 'FAIL'}  {detail}")


# ---------------------------------------------------------------------------
# 1. analytic formulas, exact arithmetic


def test_criterion_1_analytic_formulas():
    failures = []

    def expect(cond, what):
        if not cond:
            failures.append(what)

    a = (F(1, 10), F(0), F(0))
    expect(dof_centralized_bound(a, exact=True) == F(6, 5), "bound(0.1,0,0) = 1.2")
    expect(dof_weak(a, exact=True) == F(6, 5), "weak(0.1,0,0) = 1.2")
    expect(dof_achievable_k3(a, exact=True) == F(6, 5), "k3(0.1,0,0) = 1.2")
    expect(dof_baseline(a, exact=True) == 1, "baseline(0.1,0,0) = 1")
    expect(dof_weak((0.1, 0.0, 0.0)) == 1.2, "float input 0.1 read as 1/10")
    expect(weak_threshold(3) == F(1, 4), "threshold 1/4 at K=3")
    expect(weak_threshold(2) == 1, "threshold 1 at K=2")
    expect(is_weak_regime((F(1, 4), 0, 0)) and not is_weak_regime((F(1, 4) + F(1, 10**9), 0, 0)), "K=3 boundary")
    expect(is_weak_regime((1, 1)), "K=2, alpha=1 is weak")
    for a2 in (F(0), F(1, 10), F(1, 4)):
        first, second = k3_branches((F(1, 4), a2, 0))
        expect(first == second == F(3, 2), f"continuity at a1=1/4, a2={a2}")
    for i in range(1, 101):
        x = F(i, 100)
        expect(dof_achievable_k3((x, x, 0), exact=True) == dof_centralized_bound((x, x, 0), exact=True), f"tight at a1=a2={x}")
    # ordering on the 0.01 grid of sorted triples
    grid = [F(i, 100) for i in range(101)]
    n_checked = 0
    for i in range(101):
        for j in range(i + 1):
            for k in range(j + 1):
                t = (grid[i], grid[j], grid[k])
                n_checked += 1
                if not dof_baseline(t, exact=True) <= dof_achievable_k3(t, exact=True) <= dof_centralized_bound(t, exact=True):
                    failures.append(f"ordering at {t}")
    ok = not failures
    record("1", ok, f"exact formulas, {n_checked} sorted triples ordered; failures={failures[:3]}")
    assert ok, failures[:10]


# ---------------------------------------------------------------------------
# 2. rank of the composite precoder


@pytest.mark.parametrize("K,n", [(3, 1), (3, 2), (4, 2)])
def test_criterion_2_rank(K, n):
    alphas = tuple(np.linspace(0.8, 0.1, K))
    part = ApZfPartition(K, n, tuple(range(K - n, K)))
    bad = 0
    for P in (1e2, 1e4, 1e6):
        batch = TrialBatch.draw(int(P), 1000, K)
        T = composite_apzf_batch(batch.estimates(alphas, P), part, None, P)
        s = np.linalg.svd(T, compute_uv=False)
        bad += int(np.sum(s[:, -1] < 1e-6 * s[:, 0]))
    ok = bad == 0
    record(f"2 (K={K}, n={n})", ok, f"rank K-n={K - n} on 3x1000 draws, failures={bad}")
    assert ok


# ---------------------------------------------------------------------------
# 3. leakage exponent with distributed CSIT


@pytest.mark.parametrize("n,alphas", [(1, (0.5, 0.0, 0.0)), (2, (0.7, 0.3, 0.0))])
def test_criterion_3_leakage(n, alphas):
    cfg = validate(ExperimentConfig(K=3, n_active=n, alphas=alphas, P_grid=DESK_GRID, trials=TRIALS, tolerance=0.15), "leakage-scaling")
    c = run_leakage(cfg)["checks"][0]
    record(f"3 (n={n}, alphas={alphas})", c["pass"], f"exponent={c['empirical']:.3f} target={c['analytic_target']:.2f} tol=0.15")
    assert c["pass"]


# ---------------------------------------------------------------------------
# 4. perfect-CSIT leakage


def test_criterion_4_perfect_leakage():
    cfg = validate(ExperimentConfig(K=3, n_active=1, alphas=(1.0, 0.0, 0.0), P_grid=DESK_GRID, trials=TRIALS, perfect_csit=True), "leakage-scaling")
    slope, ratio = run_leakage(cfg)["checks"]
    ok = slope["empirical"] <= -1 and ratio["empirical"] < 1e-6
    record("4", ok, f"exponent={slope['empirical']:.3f} (<= -1), leakage(1e8)/leakage(1e2)={ratio['empirical']:.2e} (< 1e-6)")
    assert ok


# ---------------------------------------------------------------------------
# 5. normalization


@pytest.mark.parametrize("K,n", [(3, 1), (3, 2), (4, 2)])
def test_criterion_5_normalization(K, n):
    P = 100.0
    part = ApZfPartition(K, n, tuple(range(n)))
    lam = normalization_lambda(None, part, None, P, num_samples=100_000, rng_seed=0)
    H = gaussian_sampler(rngmod.substream(1, 0, rngmod.LAMBDA), 100_000, n, K)
    T = lam * apzf_from_estimate(H, part, None, P)
    m = float(np.mean(np.sum(np.abs(T) ** 2, axis=(-2, -1))))
    ok = 0.97 <= m <= 1.03
    record(f"5 (K={K}, n={n})", ok, f"E||T||_F^2={m:.4f} on fresh 1e5 samples, P=1e2")
    assert ok


# ---------------------------------------------------------------------------
# 6. posterior oracle


def test_criterion_6_posterior():
    cfg = validate(ExperimentConfig(K=2, alphas=(0.5, 0.2), P_grid=(100.0,), trials=100_000, tolerance=0.05), "posterior-check")
    err = run_posterior(cfg)["checks"][0]
    cfg = validate(ExperimentConfig(K=2, alphas=(0.5, 0.2), P_grid=tuple(10.0**e for e in range(4, 9)), trials=20_000, tolerance=0.05), "posterior-check")
    peak = run_posterior(cfg)["checks"][-1]
    assert peak["check"] == "peak_density_exponent"
    ok = err["pass"] and peak["pass"]
    record("6", ok, f"rel. Frobenius error={err['empirical']:.4f} (<= 0.05); peak exponent={peak['empirical']:.4f} target=0.25 tol=0.02")
    assert ok


# ---------------------------------------------------------------------------
# 7 and 9. scheme slopes and term powers


CASES = {
    "a": ("weak", 3, (0.2, 0.0, 0.0), 1.4),
    "b": ("toy", 3, (0.1, 0.0, 0.0), 1.2),
    "c": ("arbitrary_k3", 3, (0.5, 0.25, 0.0), 12 / 7),
    "d": ("baseline_zf", 3, (0.5, 0.0, 0.0), 1.0),
}


@pytest.fixture(scope="module")
def high_snr_runs():
    return {k: sweep(s, K, a, HIGH_GRID, trials=TRIALS, seed=0) for k, (s, K, a, _) in CASES.items()}


@pytest.fixture(scope="module")
def desk_runs():
    return {k: sweep(s, K, a, DESK_GRID, trials=TRIALS, seed=0) for k, (s, K, a, _) in CASES.items()}


def _slope(reports):
    return fit_dof_slope([(r.P, r.sum_rate) for r in reports]).slope


@pytest.mark.parametrize("case", list(CASES))
def test_criterion_7_scheme_slope(case, high_snr_runs, desk_runs):
    scheme, K, alphas, target = CASES[case]
    slope = _slope(high_snr_runs[case])
    desk = _slope(desk_runs[case])
    ok = abs(slope - target) <= 0.1
    record(f"7{case} ({scheme} {alphas})", ok,
           f"slope={slope:.3f} target={target:.3f} tol=0.1 on P=1e24..1e56 (P=1e2..1e8 slope: {desk:.3f})")
    assert ok


def test_criterion_7_improvement_over_baseline(high_snr_runs):
    base = _slope(high_snr_runs["d"])
    a, c = _slope(high_snr_runs["a"]), _slope(high_snr_runs["c"])
    ok = a > base + 0.1 and c > base + 0.1
    record("7 (improvement)", ok, f"weak {a:.3f} and arbitrary_k3 {c:.3f} vs baseline {base:.3f}")
    assert ok


@pytest.mark.parametrize("case", list(CASES))
def test_criterion_9_term_powers(case, high_snr_runs):
    reports = high_snr_runs[case]
    P = [r.P for r in reports]
    worst, detail = 0.0, []
    for label, target in reports[0].term_exponent.items():
        slope = fit_log_mean_exponent(P, [r.term_log10_power[label] for r in reports]).slope
        worst = max(worst, abs(slope - target))
        detail.append(f"{label}={slope:.3f}/{target:g}")
    ok = worst <= 0.1
    record(f"9{case} ({CASES[case][0]})", ok, f"max deviation {worst:.3f} (tol 0.1): " + " ".join(detail))
    assert ok


# ---------------------------------------------------------------------------
# 8. budget booleans


def test_criterion_8_budget_booleans():
    mismatches = []
    for i in range(101):
        a1 = i / 100
        weak = run_weak(3, (a1, 0.0, 0.0), 1e4, trials=2, symbols=4)
        if weak.feasible != is_weak_regime((a1, 0.0, 0.0), 3):
            mismatches.append(("weak", a1))
        toy = run_toy((a1, 0.0, 0.0), 1e4, trials=2, symbols=4)
        if toy.feasible != (F(i, 100) <= F(1, 7)):
            mismatches.append(("toy", a1))
    ok = not mismatches
    record("8", ok, f"101 values of alpha1 per scheme, mismatches={mismatches[:4]}")
    assert ok


# ---------------------------------------------------------------------------
# 10. quantizer noise floor


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.5])
def test_criterion_10_quantizer_floor(alpha):
    rng = np.random.default_rng(10)
    pts = []
    for P in DESK_GRID:
        power = P**alpha
        x = np.sqrt(power / 2) * (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000))
        stats = distortion_stats(x, QuantizerConfig(bits_for_budget(alpha, P), power))
        pts.append((P, stats.mean_distortion))
    slope = fit_exponent(pts).slope
    ok = slope <= 0.1
    record(f"10 (alpha={alpha})", ok, f"distortion exponent={slope:.3f} (<= 0.1), distortion range {min(d for _, d in pts):.2f}..{max(d for _, d in pts):.2f}")
    assert ok


# ---------------------------------------------------------------------------
# 11. reproducibility


def test_criterion_11_reproducibility(tmp_path):
    cfg = ExperimentConfig(scheme="arbitrary_k3", alphas=(0.5, 0.25, 0.0), trials=200, seed=7)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.json"
        cli.main(["simulate", "--config", str(path), "--out", str(out)])
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    record("11", ok, f"two simulate runs, manifests of {len(outs[0])} bytes identical={outs[0] == outs[1]}")
    assert ok
