"""Acceptance suite AC-1 .. AC-9.

Every test records one PASS/FAIL line (shown in the terminal summary and
printed directly when this file is run as a script).  Measurements come from
the same functions the CLI recipes use.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from kurograph import freqdist, recipes
from kurograph.graphon import constant, cosine

HERE = Path(__file__).parent


def record(ac, ok, detail, seconds, limit):
    within = seconds <= limit
    passed = bool(ok and within)
    line = f"{ac} {'PASS' if passed else 'FAIL'}: {detail}; runtime {seconds:.1f} s (limit {limit:g} s)"
    ACCEPTANCE_LINES[ac] = line
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def model():
    return freqdist.standard_normal()


def test_ac1_classical_threshold(model):
    t0 = time.perf_counter()
    rep, _ = recipes.kc_for(constant(1.0), model, 256)
    dt = time.perf_counter() - t0
    target = 2 * math.sqrt(2 * math.pi) / math.pi
    record("AC-1", abs(rep.kc_plus - target) <= 1e-3 and abs(rep.kc_plus - 1.59577) <= 1e-3,
           f"K_c+ = {rep.kc_plus:.6f}, expected 1.59577 +- 1e-3", dt, 1.0)


def test_ac2_cosine_threshold(model):
    t0 = time.perf_counter()
    rep, _ = recipes.kc_for(cosine(), model, 512)
    dt = time.perf_counter() - t0
    target = 4 / (math.pi * model.g0)
    rel = rep.kc_plus / target - 1
    record("AC-2", abs(rel) <= 5e-3 and abs(rep.kc_plus - 3.2) < 0.05,
           f"K_c+ = {rep.kc_plus:.5f}, 4/(pi g(0)) = {target:.5f} ({100 * rel:+.3f}%)", dt, 1.0)


@pytest.mark.slow
def test_ac3_mean_field_pitchfork(model):
    t0 = time.perf_counter()
    data, fit, pred = recipes.er_galerkin_branch(model, points=15, lo=0.02, hi=0.3, J=8, M=40, n=64)
    dt = time.perf_counter() - t0
    A = float(pred.coefficient[0])
    ok_exp = 0.45 <= fit.exponent <= 0.55
    ok_amp = abs(fit.A / A - 1) <= 0.10
    record("AC-3", ok_exp and ok_amp,
           f"exponent {fit.exponent:.4f} (need [0.45, 0.55]), A_fit {fit.A:.4f} vs {A:.4f} "
           f"({100 * (fit.A / A - 1):+.1f}%, need 10%)", dt, 600.0)


@pytest.mark.slow
def test_ac4_finite_n_pitchfork(model):
    seeds = [recipes.derived_seed(0, f"er-seed-{i}") for i in range(3)]
    parts, ok, worst_time = [], True, 0.0
    for s in seeds:
        t0 = time.perf_counter()
        r = recipes.er_finite_n(model, s, N=2048, T=200.0)
        worst_time = max(worst_time, time.perf_counter() - t0)
        ok &= abs(r["rel_error"]) <= 0.2
        parts.append(f"{r['measured']:.4f} ({100 * r['rel_error']:+.1f}%)")
    record("AC-4", ok, f"|h| at K_c+0.2 vs {r['predicted']:.4f}: " + ", ".join(parts)
           + f"; noise floor 3/sqrt(N) = {r['noise_floor']:.4f}", worst_time, 300.0)


@pytest.mark.slow
def test_ac5_twisted_states(model):
    t0 = time.perf_counter()
    parts, ok = [], True
    for i, K in enumerate([3.5, 4.0, 5.0]):
        r = recipes.twisted_run(model, K, recipes.derived_seed(0, f"twisted-{i}"), N=4096, T=400.0)
        gap = abs(r["locked_fraction"] - r["threshold_fraction"])
        ok &= abs(r["winding"]) == 1 and abs(r["rel_error"]) <= 0.2 and gap <= 0.05
        parts.append(f"K={K:g}: q={r['winding']:+d}, |h| {r['mean_abs_h']:.3f} vs {r['predicted']:.3f} "
                     f"({100 * r['rel_error']:+.1f}%), locked {r['locked_fraction']:.3f} vs {r['threshold_fraction']:.3f}")
    record("AC-5", ok, "; ".join(parts), time.perf_counter() - t0, 600.0)


def test_ac6_landau_damping(model):
    t0 = time.perf_counter()
    d = recipes.landau_decay(model)
    dt = time.perf_counter() - t0
    record("AC-6", d["ratio"] <= 0.1 and d["monotone"],
           f"||Pz1(50)||/||Pz1(0)|| = {d['ratio']:.2e}, monotone after t=5: {d['monotone']}", dt, 120.0)


def test_ac7_branch_consistency(model):
    t0 = time.perf_counter()
    g = recipes.growth_consistency(model)
    dt = time.perf_counter() - t0
    record("AC-7", abs(g["rel_error"]) <= 0.05 and 0 < g["lam_near"] < 1e-2,
           f"fitted rate {g['rate']:.6f} vs lambda {g['lam']:.6f} ({100 * g['rel_error']:+.4f}%), "
           f"lambda(K_c(1+1e-3)) = {g['lam_near']:.3e}", dt, 120.0)


def test_ac8_spectral_oracles():
    t0 = time.perf_counter()
    sw = recipes.sw_spectrum(0.1, 0.25, 512)
    dt = time.perf_counter() - t0
    v = sw["verdict"]
    record("AC-8", sw["error"] <= 1e-3 and v["verdict"] in v["candidates"],
           f"mu_max {sw['mu_max']:.6f} vs c0 {sw['c0']:.6f} (|diff| {sw['error']:.2e}, need 1e-3); "
           f"verdict {v['verdict']}", dt, 30.0)


PROPERTY_SUITE = [
    "test_meanfield.py::test_modes_stay_in_unit_disc",
    "test_bifurcation.py::test_c_field_scale_invariant",
    "test_dynamics.py::test_rk4_fourth_order",
    "test_graphon.py::test_weight_matrix_symmetric_and_bounded",
    "test_freqdist.py::test_continuity_across_axis",
    "test_bifurcation.py::test_two_amplitude_formulas_agree",
]


def test_ac9_property_suites():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *[str(HERE / p) for p in PROPERTY_SUITE]],
                          cwd=HERE.parent, capture_output=True, text=True)
    dt = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    record("AC-9", proc.returncode == 0, f"{len(PROPERTY_SUITE)} invariant suites: {summary}", dt, 300.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
