"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Criterion 5 requires the bqp benchmark corpus on disk (see
scripts/fetch_beasley.py); without it that single test fails with
instructions while everything else runs.

Criterion 7 checks per-iteration invariants on every solve performed by
criteria 2-6, so those tests register their instrumented runs here.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from binopt.cli import main as cli_main
from binopt.cubic import cubic_value, prox_scalar
from binopt.instances import (
    gen_onebit,
    gen_qubo_synthetic,
    gen_recovery,
    parse_beasley,
)
from binopt.metrics import (
    accuracy,
    bit_error_rate,
    brute_force_min,
    finite_difference_gradient,
    gap,
    grid_prox_min_batch,
)
from binopt.objectives import LqRecoveryObjective, OneBitMimoObjective, QuboObjective
from binopt.penalty import is_binary
from binopt.presets import initial_point, preset_for
from binopt.solver import Termination, solve

# registry of (label, config, report) for criterion 7
RUNS = []


def _instrumented_solve(label, inst, **overrides):
    cfg = preset_for(inst, record_diagnostics=True, **overrides)
    report = solve(inst.objective(), initial_point(inst), cfg)
    RUNS.append((label, cfg, report))
    return cfg, report


def test_criterion_1_prox_matches_grid_oracle():
    """Closed-form prox candidates attain the dense-grid minimum."""
    t0 = time.perf_counter()
    z_values = np.round(np.arange(-1.0, 2.0 + 1e-9, 1e-2), 10)
    taus = (0.01, 0.05, 1.0 / 6.0, 0.2, 0.5, 1.0)
    worst = 0.0
    for tau in taus:
        grid_minima = grid_prox_min_batch(z_values, tau, grid_step=1e-6)
        for z, grid_min in zip(z_values, grid_minima):
            for c in prox_scalar(float(z), tau).candidates:
                cand_obj = cubic_value(c) + (c - z) ** 2 / (2.0 * tau)
                dev = abs(cand_obj - grid_min)
                worst = max(worst, dev)
                assert dev <= 1e-8, (z, tau, c, dev)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s"
    print(f"\n[criterion 1] PASS: prox vs grid oracle, max deviation "
          f"{worst:.2e} over {len(z_values) * len(taus)} cases ({elapsed:.1f}s)")


def test_criterion_2_toy_scale_optimality():
    """Toy quadratic instances: within 5% of brute force on >= 90%."""
    t0 = time.perf_counter()
    ns = (8, 12, 16)
    cases = (1, 2, 3, 4, 5)
    hits = 0
    total = 200
    for t in range(total):
        inst = gen_qubo_synthetic(ns[t % 3], cases[t % 5], seed=t)
        _, f_opt = brute_force_min(inst.objective())
        cfg, report = _instrumented_solve("criterion2-qubo", inst)
        assert is_binary(report.x_final), f"trial {t} returned a non-binary point"
        assert report.stationarity_residual < cfg.epsilon
        if f_opt == 0.0:
            hits += report.objective_value == 0.0
        else:
            hits += gap(report.objective_value, f_opt) <= 5.0
    elapsed = time.perf_counter() - t0
    assert hits >= 0.9 * total, f"only {hits}/{total} within 5% of optimum"
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5 min"
    print(f"\n[criterion 2] PASS: {hits}/{total} instances within 5% gap "
          f"({elapsed:.1f}s)")


# criterion 3 and criterion 9 share the same run specification
_C3_ARGS = [
    "solve", "recovery", "--m", "500", "--n", "1000", "--s", "100",
    "--q", "2", "--nf", "0", "--preset", "recovery", "--trials", "20",
    "--seed", "1003",
]


def test_criterion_3_exact_recovery():
    """Median recovery accuracy is exactly 1.0 on the reference setting."""
    t0 = time.perf_counter()
    accs = []
    for trial in range(20):
        inst = gen_recovery(500, 1000, 100, 2.0, 0.0, seed=1003 + trial)
        _, report = _instrumented_solve("criterion3-recovery", inst)
        accs.append(accuracy(report.x_final, inst.x_star))
    elapsed = time.perf_counter() - t0
    med = float(np.median(accs))
    assert med == 1.0, f"median accuracy {med} != 1.0"
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min"
    print(f"\n[criterion 3] PASS: median Acc = {med:.3f} "
          f"({sum(a == 1.0 for a in accs)}/20 exact, {elapsed:.1f}s)")


def test_criterion_4_noise_robustness():
    """Median accuracy stays 1.0 across noise levels."""
    t0 = time.perf_counter()
    medians = {}
    for nf, base in ((0.0, 2000), (0.04, 2004), (0.1, 2010)):
        accs = []
        for trial in range(20):
            inst = gen_recovery(500, 1000, 300, 2.0, nf, seed=base + trial)
            _, report = _instrumented_solve("criterion4-recovery", inst)
            accs.append(accuracy(report.x_final, inst.x_star))
        medians[nf] = float(np.median(accs))
        assert medians[nf] == 1.0, f"median accuracy {medians[nf]} != 1.0 at nf={nf}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5 min"
    print(f"\n[criterion 4] PASS: median Acc = 1.0 at nf in {sorted(medians)} "
          f"({elapsed:.1f}s)")


# gaps reported for the bqp100 set by the reference benchmark runs,
# accepted with +1.0 percentage point of slack
_BQP100_REFERENCE_GAP = {
    "bqp100-1": 0.00, "bqp100-2": 0.43, "bqp100-3": 0.28, "bqp100-4": 0.46,
    "bqp100-5": 2.37, "bqp100-6": 1.68, "bqp100-7": 1.15, "bqp100-8": 1.03,
    "bqp100-9": 0.10, "bqp100-10": 0.00,
}


def _beasley_corpus_dir() -> Path:
    env = os.environ.get("BINOPT_BEASLEY_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent.parent / "data" / "beasley"


def test_criterion_5_beasley_gaps():
    """bqp100 gaps within +1.0pp of the reference run's gaps."""
    corpus = _beasley_corpus_dir()
    missing = [
        name for name in _BQP100_REFERENCE_GAP
        if not (corpus / f"{name}.sparse").exists()
    ]
    if missing:
        pytest.fail(
            f"[criterion 5] FAIL: benchmark corpus not available under {corpus} "
            f"(missing {missing[0]}.sparse and {len(missing) - 1} more). The "
            "OR-Library bqp data cannot be redistributed here and this "
            "environment has no route to fetch it (package-manager-only "
            "network). Run scripts/fetch_beasley.py on a machine with "
            "internet access, or point BINOPT_BEASLEY_DIR at a directory "
            "with bqp100-*.sparse files, then rerun."
        )
    t0 = time.perf_counter()
    achieved = {}
    for name, ref_gap in _BQP100_REFERENCE_GAP.items():
        inst = parse_beasley(corpus / f"{name}.sparse")
        assert inst.best_known is not None
        cfg, report = _instrumented_solve("criterion5-qubo", inst)
        g = gap(report.objective_value, inst.best_known)
        achieved[name] = g
        assert g <= ref_gap + 1.0, f"{name}: gap {g:.2f} > {ref_gap + 1.0:.2f}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 1 min"
    worst = max(achieved, key=achieved.get)
    print(f"\n[criterion 5] PASS: all bqp100 gaps within tolerance "
          f"(worst {worst} at {achieved[worst]:.2f}%, {elapsed:.1f}s)")


def test_criterion_6_onebit_ber_trend():
    """Mean BER is non-increasing in SNR and small at 20 dB."""
    t0 = time.perf_counter()
    snrs = (0, 5, 10, 15, 20)
    mean_ber = []
    for si, snr in enumerate(snrs):
        vals = []
        for trial in range(20):
            inst = gen_onebit(400, 200, float(snr), seed=3000 + 100 * si + trial)
            _, report = _instrumented_solve("criterion6-onebit", inst)
            assert is_binary(report.x_final)
            vals.append(bit_error_rate(report.x_final, inst.x_star))
        mean_ber.append(float(np.mean(vals)))
    elapsed = time.perf_counter() - t0
    for lo, hi in zip(mean_ber[1:], mean_ber[:-1]):
        assert lo <= hi + 1e-12, f"BER not non-increasing: {mean_ber}"
    assert mean_ber[-1] <= 0.05, f"BER at 20 dB is {mean_ber[-1]:.4f} > 0.05"
    assert elapsed < 180.0, f"runtime {elapsed:.1f}s exceeds 3 min"
    trend = ", ".join(f"{b:.3f}" for b in mean_ber)
    print(f"\n[criterion 6] PASS: mean BER [{trend}] over SNR {list(snrs)} "
          f"({elapsed:.1f}s)")


def test_criterion_7_algorithmic_invariants():
    """Per-iteration invariants on every solve from criteria 2-6."""
    assert RUNS, "no registered runs; criteria 2-6 must execute first"
    labels = {label for label, _, _ in RUNS}
    assert any("criterion2" in l for l in labels)
    assert any("criterion3" in l for l in labels)
    assert any("criterion4" in l for l in labels)
    assert any("criterion6" in l for l in labels)
    checked_snap = 0
    for label, cfg, report in RUNS:
        diag = report.diagnostics
        assert diag is not None, label
        # sufficient decrease at every accepted step
        assert all(m >= 0.0 for m in diag.descent_margins), label
        # iterate feasibility
        assert diag.all_feasible, label
        # penalty weight boundedness
        cap = max(cfg.lambda0, cfg.pi * cfg.theta)
        assert all(lam <= cap + 1e-12 for lam in report.lambda_trace), label
        # eventual binarity under the snap condition (exact bound known)
        if diag.snap_ready_flags is not None:
            for ready, binary in zip(diag.snap_ready_flags, diag.binary_flags):
                if ready:
                    assert binary, label
                    checked_snap += 1
        # finite termination through the stopping rule
        assert report.terminated_by is Termination.STOPPING_RULE, label
        assert report.iterations <= 1_000_000
    print(f"\n[criterion 7] PASS: invariants hold on {len(RUNS)} solves "
          f"({checked_snap} snap-condition iterations checked)")


def test_criterion_8_gradient_oracles():
    """Finite-difference checks for the three objective families."""
    t0 = time.perf_counter()

    def check(obj, x, rtol=1e-5):
        g = obj.gradient(x)
        fd = finite_difference_gradient(obj.value, x)
        scale = max(1.0, float(np.max(np.abs(g))))
        np.testing.assert_allclose(g, fd, atol=rtol * scale)

    rng = np.random.default_rng(88)
    for _ in range(20):
        check(QuboObjective(rng.normal(size=(6, 6))), rng.uniform(0.1, 0.9, 6))
    for q in (1.5, 2.0, 2.5):
        obj = LqRecoveryObjective(rng.normal(size=(8, 5)), rng.normal(size=8), q)
        for _ in range(20):
            check(obj, rng.uniform(0.1, 0.9, 5))
    y = np.where(rng.random(10) < 0.5, 1.0, -1.0)
    obj = OneBitMimoObjective(rng.normal(size=(10, 4)), y, 0.8)
    for _ in range(20):
        check(obj, rng.uniform(0.1, 0.9, 4))
    # deep-tail margin around -8
    H = np.array([[2.5, 2.5, 2.5, 2.5], [0.3, -1.2, 0.7, 0.1]])
    deep = OneBitMimoObjective(H, np.array([1.0, -1.0]), 1.0)
    x = np.full(4, 0.1)
    assert deep._margins(x)[0] == pytest.approx(-8.0, abs=1e-12)
    check(deep, x)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10s"
    print(f"\n[criterion 8] PASS: gradient oracles at 1e-5 for all families, "
          f"deep tail included ({elapsed:.1f}s)")


def test_criterion_9_byte_identical_reruns(tmp_path):
    """The criterion-3 CLI run repeated with the same seed is byte-identical."""
    out1 = tmp_path / "run1.jsonl"
    out2 = tmp_path / "run2.jsonl"
    assert cli_main(_C3_ARGS + ["--output", str(out1)]) == 0
    assert cli_main(_C3_ARGS + ["--output", str(out2)]) == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2, "JSON-lines outputs differ between identical runs"
    assert len(b1.splitlines()) == 20
    print(f"\n[criterion 9] PASS: {len(b1)} bytes identical across reruns")
