"""Acceptance suite: one test per criterion, each also logged as a PASS/FAIL line.

The end-to-end criteria (Figure 1 and Table 1/2 analogues, determinism)
share two full ``run`` invocations of the default configuration, one on a
single thread and one on several.
"""

import csv
import io
import os
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from inflation_rf.cart import GrowConfig, grow
from inflation_rf.cli import main
from inflation_rf.econobench import add_constant, ar1_fit, ols_fit
from inflation_rf.filters import HPConfig, hp_one_sided, hp_two_sided, output_gap
from inflation_rf.forest import ForestConfig, mse_curve, train_forest
from inflation_rf.interpret import average_slope, impurity_importance, partial_effect
from inflation_rf.panel_data import FEATURE_NAMES, Dataset, assemble_dataset
from inflation_rf.synth import AdditiveDGP, SynthSpec, synth_panel

from oracles import brute_predict, brute_tree, hp_dense, ols_dense
from test_cart import random_instance

MAX_THREADS = max(4, os.cpu_count() or 1)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def full_runs(tmp_path_factory):
    """Two default end-to-end runs: (dir at 1 thread, dir at max threads, seconds of the first)."""
    base = tmp_path_factory.mktemp("runs")
    t0 = time.perf_counter()
    assert main(["run", "--out", str(base / "one"), "--threads", "1"]) == 0
    elapsed = time.perf_counter() - t0
    assert main(["run", "--out", str(base / "many"), "--threads", str(MAX_THREADS)]) == 0
    return base / "one", base / "many", elapsed


@pytest.fixture(scope="module")
def benchmark_forest():
    ds = assemble_dataset(synth_panel(SynthSpec()))
    t0 = time.perf_counter()
    f = train_forest(ds, ForestConfig(n_trees=1000, min_parent=10, seed=42))
    curve = dict(mse_curve(f, ds, [1, 10, 100, 1000]))
    return ds, curve, time.perf_counter() - t0


def test_criterion_1_tree_oracle(acceptance):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        X, y, p = random_instance(rng)
        tree = grow(X, y, GrowConfig(min_parent=p, m_try=X.shape[1]))
        ref = brute_tree(X, y, range(len(y)), p)
        Q = np.vstack([X, rng.normal(size=(10, X.shape[1])) * 2])
        mismatches += not np.array_equal(tree.predict(Q), [brute_predict(ref, q) for q in Q])
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10
    acceptance("1 tree oracle", ok, f"{mismatches}/200 mismatches, {elapsed:.1f}s (limit 10s)")
    assert ok


def test_criterion_2_hp_filter(acceptance):
    t = np.arange(80.0)
    line = 5 + 0.3 * t
    linear_gap = line - hp_one_sided(line, HPConfig())
    loglinear_gap = output_gap(1000 * 1.007**t, HPConfig())
    worst_line = max(np.nanmax(np.abs(linear_gap)), np.nanmax(np.abs(loglinear_gap)))
    rng = np.random.default_rng(2)
    worst_dense = 0.0
    for _ in range(20):
        y = rng.standard_normal(100).cumsum()
        worst_dense = max(worst_dense, np.abs(hp_two_sided(y, 1600.0) - hp_dense(y, 1600.0)).max())
    ok = worst_line <= 1e-8 and worst_dense <= 1e-8
    acceptance("2 HP filter", ok, f"max one-sided gap {worst_line:.1e}, max dense diff {worst_dense:.1e} (limit 1e-8)")
    assert ok


def test_criterion_3_ols_ar1(acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        n, k = int(rng.integers(15, 200)), int(rng.integers(1, 7))
        X = add_constant(rng.normal(size=(n, k)))
        y = X @ rng.normal(size=k + 1) + rng.standard_normal(n) * rng.uniform(0.2, 3, n)
        fit = ols_fit(X, y)
        coef, se, r2, f = ols_dense(X, y)
        for got, want in ((fit.coef, coef), (fit.se, se), (fit.r2, r2), (fit.fstat, f)):
            worst = max(worst, np.max(np.abs(np.asarray(got) - want) / np.maximum(np.abs(want), 1e-300)))
    alt = np.array([1.0, -1.0] * 20)
    lag = float(ar1_fit(alt[1:], alt[:-1]).coef[1])
    ok = worst <= 1e-8 and lag == -1.0
    acceptance("3 OLS/AR(1)", ok, f"max relative diff {worst:.1e} (limit 1e-8), alternating lag coef {lag!r}")
    assert ok


def test_criterion_4_curve_order(acceptance, benchmark_forest):
    ds, c, elapsed = benchmark_forest
    ok = c[100] <= c[10] <= c[1] and elapsed < 300 and abs(len(ds) - 4900) < 250
    detail = f"MSE(1)={c[1]:.4f} MSE(10)={c[10]:.4f} MSE(100)={c[100]:.4f}, {len(ds)} rows, {elapsed:.0f}s (limit 300s)"
    acceptance("4a OOB curve ordering", ok, detail)
    assert ok


def test_criterion_4_decline_share(acceptance, benchmark_forest):
    _, c, _ = benchmark_forest
    share = (c[1] - c[10]) / (c[1] - c[1000])
    ok = share >= 0.90
    acceptance("4b MSE(10) share of decline", ok, f"{share:.3f} (need >= 0.90), MSE(1000)={c[1000]:.4f}")
    assert ok


def test_criterion_5_table1(acceptance, full_runs):
    one, _, elapsed = full_runs
    table = rows((one / "table1.csv").read_text())
    rhos = []
    for n in (100, 1000):
        cells = [r for r in table if int(r["n_trees"]) == n]
        rhos.append(spearmanr([int(r["p"]) for r in cells], [float(r["ml_in"]) for r in cells])[0])
    bench = next(r for r in table if (r["p"], r["n_trees"]) == ("10", "1000"))
    gain = 1 - float(bench["ratio_ols_out"])
    worst = max(max(float(r["ratio_ar1_out"]), float(r["ratio_ols_out"])) for r in table)
    ok = len(table) == 24 and min(rhos) >= 0.9 and gain >= 0.10 and worst < 1 and elapsed < 600
    detail = (
        f"spearman rho {min(rhos):.3f} (need >= 0.9), OOB gain over OLS {gain:.1%} (need >= 10%), "
        f"max out-of-sample ratio {worst:.3f} (need < 1), full run {elapsed:.0f}s (limit 600s)"
    )
    acceptance("5 Table 1 analogue", ok, detail)
    assert ok


def test_criterion_6_noise_feature_last(acceptance):
    last = 0
    for seed in range(20):
        ds = assemble_dataset(synth_panel(SynthSpec(seed=seed)))
        noise = np.random.default_rng([seed, 7]).standard_normal(len(ds))
        aug = Dataset(np.column_stack([ds.X, noise]), ds.y, ds.country, ds.date, FEATURE_NAMES + ("noise",))
        imp = impurity_importance(train_forest(aug, ForestConfig(n_trees=100, seed=seed)), aug)
        last += imp.ranking()[-1] == "noise"
    ok = last >= 19
    acceptance("6 importance recovery", ok, f"noise ranked last in {last}/20 runs (need >= 19)")
    assert ok


def test_criterion_7_partial_effect(acceptance):
    dgp = AdditiveDGP()
    ds = dgp.sample(4941, seed=42)
    f = train_forest(ds, ForestConfig(n_trees=1000, min_parent=10, seed=42))
    curve = partial_effect(f, ds, 1, n_grid=50)
    inner = slice(5, 45)  # central 80% of the grid
    est = curve.predictions[inner] - curve.predictions[inner].mean()
    true = dgp.g(curve.grid[inner])
    true = true - true.mean()
    dev = np.abs(est - true).max() / ds.y.std()
    true_slope = np.polyfit(curve.grid, dgp.g(curve.grid), 1)[0]
    slope_ratio = average_slope(curve) / true_slope
    ok = dev <= 0.15 and abs(slope_ratio - 1) <= 0.20
    acceptance("7 partial-effect recovery", ok, f"max centered deviation {dev:.3f} std (limit 0.15), slope ratio {slope_ratio:.3f} (limit 1 +/- 0.2)")
    assert ok


def test_criterion_8_determinism(acceptance, full_runs):
    one, many, _ = full_runs
    a = {p.name: p.read_bytes() for p in sorted(one.iterdir())}
    b = {p.name: p.read_bytes() for p in sorted(many.iterdir())}
    differing = sorted(n for n in a.keys() | b.keys() if a.get(n) != b.get(n))
    ok = not differing and len(a) > 40
    acceptance("8 determinism", ok, f"{len(a)} files at 1 vs {MAX_THREADS} threads, {len(differing)} differ")
    assert ok


def test_criterion_9_horizons(acceptance, full_runs):
    one, _, _ = full_runs
    table = rows((one / "table2.csv").read_text())
    ratios = {int(r["horizon"]): float(r["ratio_ols_out"]) for r in table}
    ok = set(ratios) == {6, 12} and all(v < 1 for v in ratios.values())
    acceptance("9 horizons", ok, ", ".join(f"h={h} ML/OLS {v:.3f}" for h, v in sorted(ratios.items())) + " (need < 1)")
    assert ok


def test_figure1_matches_run_output(benchmark_forest, full_runs):
    _, c, _ = benchmark_forest
    one, _, _ = full_runs
    emitted = {int(r["n_trees"]): float(r["oob_mse"]) for r in rows((one / "mse_curve.csv").read_text())}
    assert all(emitted[k] == c[k] for k in c)
