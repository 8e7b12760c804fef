"""Acceptance criteria, one test and one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import math
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from degrobin.coefficients import CoefficientFamily, check_pointwise_inequality, gamma_condition_infimum
from degrobin.estimates import estimate_harness_energy
from degrobin.fd_solver import PowerSource, ProblemSpec, mesh, picard_solve, truncation_sweep, weak_residual
from degrobin.norms import RadialGridFunction, layer_cake_integral, lp_norm, marcinkiewicz_sup
from degrobin.radial_oracle import RadialExampleSpec, locate_existence_threshold, solve_boundary_value, u_profile
from degrobin.regimes import Regime, classify, sobolev_star, thresholds


def verdict(num, title, ok, detail):
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, detail


def best_time(fn, repeats=5):
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


LOG_SPEC = RadialExampleSpec(N=3, R=1.0, beta=1.0, theta=1.0, A=1.0, gamma=1.0)


def oracle_rel_error(spec):
    ex = RadialExampleSpec(N=spec.N, R=spec.R, beta=spec.beta, theta=spec.theta, A=spec.source.A, gamma=spec.source.gamma)
    t0 = time.perf_counter()
    rep = picard_solve(spec)
    elapsed = time.perf_counter() - t0
    u = u_profile(solve_boundary_value(ex), ex, mesh(spec))
    return float(np.max(np.abs(rep.solution.values - u)) / np.max(np.abs(u))), elapsed


def test_01_oracle_exactness():
    def run():
        form = solve_boundary_value(LOG_SPEC)
        return form, u_profile(form, LOG_SPEC, np.array([0.0, 1.0]))

    (form, (u0, uR)), elapsed = best_time(run)
    errs = (abs(form.vR - math.log(2)), abs(uR - 1.0), abs(u0 - (math.exp(math.log(2) + 0.5) - 1)))
    ok = errs[0] <= 1e-10 and errs[1] <= 1e-9 and errs[2] <= 1e-6 and elapsed < 1e-3
    verdict(1, "oracle exactness", ok, f"|vR-ln2|={errs[0]:.1e} |u(R)-1|={errs[1]:.1e} |u(0)-ref|={errs[2]:.1e} time={elapsed * 1e3:.3f} ms")


def test_02_dichotomy_threshold():
    A_star, elapsed = best_time(lambda: locate_existence_threshold(LOG_SPEC))
    target = LOG_SPEC.beta * (LOG_SPEC.N - LOG_SPEC.gamma) * LOG_SPEC.R ** (LOG_SPEC.gamma - 1)
    flips = all(not solve_boundary_value(replace(LOG_SPEC, A=a)).exists for a in (A_star, 2.0, 2.0 + 1e-9, 5.0))
    below = solve_boundary_value(replace(LOG_SPEC, A=2.0 - 1e-6)).exists
    ok = abs(A_star - target) <= 1e-9 and flips and below and elapsed < 1e-2
    verdict(2, "dichotomy threshold", ok, f"A*={A_star:.12f} target={target} nonexistence for A>=A*: {flips} time={elapsed * 1e3:.2f} ms")


def test_03_solver_vs_oracle():
    e_log, t_log = oracle_rel_error(ProblemSpec(M=4096, trunc=1e3, theta=1.0, source=PowerSource(1.0, 1.0)))
    smooth = ProblemSpec(M=4096, trunc=1e3, theta=0.5, source=PowerSource(1.0, 0.0))
    e_smooth, t_smooth = oracle_rel_error(smooth)
    Ms = (256, 512, 1024, 2048)
    errs = [oracle_rel_error(replace(smooth, M=M))[0] for M in Ms]
    slope = -float(np.polyfit(np.log(Ms), np.log(errs), 1)[0])
    ok = e_log <= 1e-2 and e_smooth <= 1e-3 and slope >= 1.8 and max(t_log, t_smooth) < 5.0
    verdict(
        3,
        "solver vs oracle",
        ok,
        f"err(theta=1,gamma=1)={e_log:.2e} err(smooth)={e_smooth:.2e} slope={slope:.3f} max solve time={max(t_log, t_smooth):.2f} s",
    )


def test_04_truncation_stabilization_vs_blowup():
    levels = [10.0, 1e2, 1e3, 1e4]
    t0 = time.perf_counter()
    good = truncation_sweep(ProblemSpec(M=256, theta=1.0, source=PowerSource(1.0, 1.0)), levels)
    bad = truncation_sweep(ProblemSpec(M=256, theta=1.0, source=PowerSource(2.0, 1.0)), levels)
    elapsed = time.perf_counter() - t0
    mg = [r.max_u for r in good]
    mb = [r.max_u for r in bad]
    spread = max(mg) - min(mg)
    increasing = all(b > a for a, b in zip(mb, mb[1:]))
    ok = spread < 1e-6 and increasing and mb[-1] / mb[0] >= 5 and elapsed < 30
    verdict(
        4,
        "truncation stabilization vs blow-up",
        ok,
        f"existence spread={spread:.1e}; A=2 max|u_n|={['%.4g' % m for m in mb]} final/first={mb[-1] / mb[0]:.1f} time={elapsed:.1f} s",
    )


def test_05_pointwise_inequality_fuzz():
    rng = np.random.default_rng(20260101)
    t0 = time.perf_counter()
    n = 10_000
    p = rng.uniform(1.0 + 1e-9, 10.0, n)
    th = rng.uniform(0.0, 1.0, n)
    th[th == 0] = 1.0
    t = np.where(rng.random(n) < 0.5, rng.uniform(0, 10, n), 10 ** rng.uniform(-10, 8, n))
    chk = check_pointwise_inequality(p, th, t)
    zero = check_pointwise_inequality(p, th, np.zeros(n))
    elapsed = time.perf_counter() - t0
    equal_at_zero = bool(np.all(zero.lhs == zero.rhs))
    ok = bool(chk.holds.all()) and equal_at_zero and elapsed < 1
    verdict(5, "pointwise inequality fuzz", ok, f"violations={int((~chk.holds).sum())}/{n} equality at t=0: {equal_at_zero} time={elapsed * 1e3:.1f} ms")


def test_06_gamma_condition():
    t0 = time.perf_counter()
    errs = {th: abs(gamma_condition_infimum(CoefficientFamily(th), 1e30) - (1 - th)) for th in (0.3, 0.5, 0.9)}
    log_inf = gamma_condition_infimum(CoefficientFamily(1.0), 1e8)
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-3 and log_inf <= 0.06 and elapsed < 1
    detail = " ".join(f"|inf-(1-{th})|={e:.1e}" for th, e in errs.items())
    verdict(6, "Gamma condition", ok, f"{detail} theta=1 inf={log_inf:.4f} time={elapsed * 1e3:.1f} ms")


def test_07_regime_classifier():
    t0 = time.perf_counter()
    rep = classify(3, 0.5, 1.4)
    ne = classify(3, 0.5, 1.3)
    table = (
        (rep.q_lower_nonenergy, rep.q_lower_energy, rep.q_bounded) == (Fraction(9, 7), Fraction(4, 3), Fraction(3, 2))
        and rep.regime is Regime.Energy
        and rep.q_double_star == 21
        and rep.summability_exponent == Fraction(21, 2)
        and rep.p_test == 3
        and rep.trace_exponent == Fraction(7, 2)
        and ne.s == Fraction(9, 5)
    )
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(1000):
        N = int(rng.integers(3, 11))
        # the energy window is empty at theta = 1
        theta = Fraction(int(rng.integers(1, 1000)), 1000)
        lo_ne, lo_e, half = thresholds(N, theta)
        x = Fraction(int(rng.integers(0, 1000)), 1000)
        q = lo_e + x * (half - lo_e)
        r = classify(N, theta, q)
        ordered = 1 < lo_ne <= lo_e <= half
        identity = r.p_test * q / (q - 1) == (r.p_test + 1 - theta) * sobolev_star(N) / 2
        bad += not (ordered and r.regime is Regime.Energy and identity)
    elapsed = time.perf_counter() - t0
    ok = table and bad == 0 and elapsed < 1
    verdict(7, "regime classifier", ok, f"table exact: {table} identity/ordering failures={bad}/1000 time={elapsed * 1e3:.0f} ms")


def _corpus():
    r = np.linspace(0, 1, 1025) ** 2
    return [
        RadialGridFunction(r, 1 - r**2, 3),
        RadialGridFunction(r, np.exp(-3 * r), 3),
        RadialGridFunction(r, np.sin(4 * np.pi * r), 3),
        RadialGridFunction(r, np.log1p(1 / (r + 1e-3)), 3),
    ]


def test_08_marcinkiewicz():
    t0 = time.perf_counter()
    r = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 4096)])
    vals = 1.0 / np.maximum(r, 1e-8)
    sup = marcinkiewicz_sup(RadialGridFunction(r, vals, 3), 3.0)
    err = abs(sup / (4 * math.pi / 3) - 1)
    lc = max(abs(layer_cake_integral(g, p) / lp_norm(g, p) ** p - 1) for g in _corpus() for p in (1.5, 2.0, 4.0))
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-2 and lc <= 1e-2 and elapsed < 1
    verdict(8, "Marcinkiewicz quasinorm", ok, f"sup t^3 mu={sup:.6f} rel err={err:.1e} layer-cake max rel err={lc:.1e} time={elapsed * 1e3:.0f} ms")


def test_09_estimate_ratio():
    t0 = time.perf_counter()
    specs = [RadialExampleSpec(N=3, theta=0.5, gamma=1.2, A=a) for a in (1.0, 10.0, 100.0, 1e3, 1e4)]
    rows = estimate_harness_energy(specs, 1.4, M=4096)
    elapsed = time.perf_counter() - t0
    growth = rows[-1]["ratio"] / rows[0]["ratio"]
    finite = all(math.isfinite(r["H1"]) for r in rows)
    ok = growth <= 10 and finite and elapsed < 60
    verdict(9, "estimate ratio boundedness", ok, f"ratio(1e4)/ratio(1)={growth:.3f} finite H1: {finite} time={elapsed:.2f} s")


def test_10_weak_residual():
    t0 = time.perf_counter()
    specs = [
        ProblemSpec(M=4096, theta=1.0, source=PowerSource(1.0, 1.0)),
        ProblemSpec(M=4096, theta=0.5, source=PowerSource(1.0, 0.0)),
        ProblemSpec(M=1024, theta=0.5, source=PowerSource(1.0, 1.5)),
        ProblemSpec(M=1024, theta=0.5, source=PowerSource(10.0, 2.3), truncate_source=True),
        ProblemSpec(M=256, theta=1.0, source=PowerSource(2.0, 1.0), trunc=1e2),
    ]
    worst = 0.0
    for spec in specs:
        rep = picard_solve(spec)
        worst = max(worst, rep.weak_residual / spec.tol)
    base = ProblemSpec(theta=0.5, source=PowerSource(1.0, 0.5), trunc=math.inf)
    ex = RadialExampleSpec(theta=0.5, A=1.0, gamma=0.5)
    form = solve_boundary_value(ex)
    Ms = (64, 128, 256, 512, 1024)
    res = [weak_residual(replace(base, M=M), u_profile(form, ex, mesh(replace(base, M=M)))) for M in Ms]
    slope = -float(np.polyfit(np.log(Ms), np.log(res), 1)[0])
    elapsed = time.perf_counter() - t0
    ok = worst <= 10 and slope >= 1.8 and elapsed < 30
    verdict(10, "weak-residual self-consistency", ok, f"max residual/tol={worst:.2f} oracle residual slope={slope:.2f} time={elapsed:.2f} s")
