"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (also
collected into the terminal summary) and then asserts at the stated
tolerance.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from landau.coefficients import (CollisionKernel, compute_coefficients_direct, compute_coefficients_fast,
                                 divergence_identity_residuals)
from landau.diagnostics import hydrodynamic_fields, schauder_exponents, time_exponent
from landau.grid import DistributionField, PhaseGrid, make_maxwellian, weighted_sup_norm
from landau.solver import SolverConfig, collision_step, run_simulation, stable_dt
from landau.verification import (GaussianTestFunction, barrier_fit, contraction_series, gbar_blowup_quadrature,
                                 gronwall_equality_branch, gronwall_threshold, holder_propagation_check,
                                 initial_matching_check, interpolation_corpus, interpolation_inequality_checks,
                                 solve_gbar, weak_form_residual)

from conftest import ACCEPTANCE_LINES, two_bumps

GAMMAS = (-3.0, -2.5, -2.0, -1.0, -0.5)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def quiet(f, config, tracker, stats):
    return {"psi": 0.0}


def test_criterion_01_kernel_oracle():
    rng = np.random.default_rng(2024)
    grid = PhaseGrid.create(16, 3.0)
    fields = rng.random((50, 16, 16, 16))
    worst = 0.0
    t0 = time.perf_counter()
    for gamma in GAMMAS:
        k = CollisionKernel(gamma)
        fa = compute_coefficients_fast(fields, grid.velocity, k)
        da = compute_coefficients_direct(fields, grid.velocity, k)
        for x, y in ((fa.a, da.a), (fa.b, da.b), (fa.c, da.c)):
            worst = max(worst, float(np.max(np.abs(x - y)) / np.max(np.abs(y))))
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-10 and elapsed <= 60.0, f"max rel err {worst:.2e} (<= 1e-10), {elapsed:.1f} s (<= 60 s)")


def test_criterion_02_divergence_identities():
    res = {}
    for n in (16, 32):
        g = PhaseGrid.create(n, 5.0)
        c = compute_coefficients_fast(make_maxwellian(g).values, g.velocity, CollisionKernel(-1.0))
        res[n] = divergence_identity_residuals(c)
    rb, rc = res[16][0] / res[32][0], res[16][1] / res[32][1]
    report(2, min(rb, rc) >= 3, f"shrink factors b {rb:.2f}, c {rc:.2f} (>= 3)")


def test_criterion_03_maxwellian_stationarity():
    q = {}
    for n in (16, 32):
        g = PhaseGrid.create(n, 5.0)
        mu = make_maxwellian(g)
        c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(-1.0))
        dt = stable_dt(c, g.velocity.h)
        f1 = collision_step(mu, c, dt, SolverConfig(gamma=-1.0, dt=dt, t_end=dt, positivity="off"))
        q[n] = float(np.max(np.abs(f1.values - mu.values)) / dt)
    report(3, q[16] / q[32] >= 3, f"|Q(mu)| {q[16]:.3e} -> {q[32]:.3e}, factor {q[16] / q[32]:.2f} (>= 3)")


def _homogeneous_series(n, steps=100):
    g = PhaseGrid.create(n, 5.0)
    f = two_bumps(g)
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.9 * stable_dt(c, g.velocity.h)
    cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=steps * dt, positivity="off")
    M, E, H = [], [], []
    for i in range(steps + 1):
        if i:
            f = collision_step(f, None, dt, cfg)
        hyd = hydrodynamic_fields(f)
        M.append(hyd.M[0])
        E.append(hyd.E[0])
        H.append(hyd.H[0])
    return np.array(M), np.array(E), np.array(H)


def test_criterion_04_conservation_and_entropy():
    M16, E16, _ = _homogeneous_series(16)
    M32, E32, H32 = _homogeneous_series(32)
    mass = max(np.max(np.abs(M16 - M16[0])) / M16[0], np.max(np.abs(M32 - M32[0])) / M32[0])
    e16 = np.max(np.abs(E16 - E16[0])) / E16[0]
    e32 = np.max(np.abs(E32 - E32[0])) / E32[0]
    dH = float(np.max(np.diff(H32)))
    ok = mass <= 1e-12 and dH <= 1e-8 and e32 <= 1e-3 and e32 < e16
    report(4, ok, f"mass drift {mass:.1e} (<= 1e-12); max entropy step {dH:.2e} (<= 1e-8, n_v=32); "
                  f"energy drift {e16:.2e} -> {e32:.2e} (<= 1e-3, shrinking)")


def test_criterion_05_barrier_bound():
    details, ok = [], True
    for gamma in (-2.0, -1.0):
        fits = {n: barrier_fit(make_maxwellian(PhaseGrid.create(n, 5.0)), gamma, 6.0) for n in (16, 32)}
        c16, c32 = fits[16]["C0"], fits[32]["C0"]
        stable = abs(c32 - c16) <= 0.2 * c16
        beta = fits[16]["beta_star"]
        finite = math.isfinite(beta) and fits[16]["residual_beta0"] < 0 < beta
        # run norm against e^{beta* t} on [0, 0.2]
        g = PhaseGrid.create(16, 5.0)
        mu = make_maxwellian(g)
        c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(gamma))
        dt = 0.9 * stable_dt(c, g.velocity.h)
        rec = run_simulation(mu, SolverConfig(gamma=gamma, dt=dt, t_end=0.2, diag_every=1), diagnostics=quiet)
        N0 = weighted_sup_norm(mu, 6.0)
        ratio = max(weighted_sup_norm(f, 6.0) / (N0 * math.exp(beta * f.time)) for f in rec.snapshots)
        ok &= stable and finite and ratio <= 1.0 and rec.times[-1] == pytest.approx(0.2)
        details.append(f"gamma={gamma:g}: beta*={beta:.3f}, C0 {c16:.3f}->{c32:.3f} "
                       f"({abs(c32 - c16) / c16:.0%} <= 20%), max norm/bound {ratio:.4f} (<= 1)")
    report(5, ok, "; ".join(details))


def test_criterion_06_gronwall():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst, all_ok = np.inf, True
    for _ in range(200):
        A, B = rng.uniform(0.1, 10.0, 2)
        t = np.linspace(0.0, 1 / (math.e * A * B), 50)
        H = gronwall_equality_branch(A, B, t)
        r = gronwall_threshold(A, B, t, H, tol=1e-9)
        all_ok &= bool(r.passed)
        worst = min(worst, float(np.min(math.e * A + 1e-9 - H)))
    elapsed = time.perf_counter() - t0
    report(6, all_ok and worst >= 0 and elapsed <= 5.0,
           f"min (eA + 1e-9 - H) = {worst:.2e} over 200 draws, {elapsed:.2f} s (<= 5 s)")


def test_criterion_07_schauder_exponents():
    s = schauder_exponents(0.5, -2.0, 30.0, 10.0)
    exact_p = Fraction(3) + Fraction(2, 3) * Fraction(1, 2) + 3 / Fraction(1, 2)
    exact_te = Fraction(1, 4) / (6 - Fraction(1, 2))
    # independent re-derivation of q(-2, 1/2, 30, 10) in exact arithmetic
    a, g, k, m = Fraction(1, 2), Fraction(-2), Fraction(30), Fraction(10)
    g2 = max(2 + g, Fraction(0))
    q = g2 - g + (1 - exact_te) * max(-g2 + g - (k - m) / 3, (2 + a / 3) * exact_p - k + m)
    alphas = np.random.default_rng(7).uniform(1e-9, 1.0, 1000)
    below = all(time_exponent(x) < x for x in alphas)
    ok = (exact_p == Fraction(28, 3) and exact_te == Fraction(1, 22)
          and abs(s.p_alpha - 28 / 3) <= 1e-12 and abs(s.time_exponent - 1 / 22) <= 1e-15
          and abs(s.q - float(q)) <= 1e-12 and abs(s.q - 2.2121) < 5e-5 and below)
    report(7, ok, f"p(1/2)={s.p_alpha!r}, theta={s.time_exponent!r}, q={s.q:.12f} vs {float(q):.12f}, "
                  f"theta<alpha on 10^3 samples: {below}")


def test_criterion_08_initial_matching():
    g = PhaseGrid.create(16, 5.0)
    mu = make_maxwellian(g)
    c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.5 * stable_dt(c, g.velocity.h)
    rec = run_simulation(mu, SolverConfig(gamma=-1.0, dt=dt, t_end=10 * dt, diag_every=1, positivity="off"),
                         diagnostics=quiet)
    r = initial_matching_check(rec, mu, v_max=2.5, n_fit=10)
    C = r.data["C"]
    report(8, bool(r.passed) and math.isfinite(C),
           f"s(t) <= C t on the first 10 diagnostic times with C = {C:.3e}, s(t1) = {r.data['s'][1]:.2e}")


def _weak_run(n):
    g = PhaseGrid.create(n, 4.0)
    f = two_bumps(g)
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.5 * stable_dt(c, g.velocity.h)
    t_cut = 0.02
    cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=1.25 * t_cut, diag_every=1, positivity="off")
    return f, run_simulation(f, cfg, diagnostics=quiet), t_cut, g.velocity.h


@pytest.mark.slow
def test_criterion_09_weak_form():
    res, mass_defect = {}, None
    for n in (12, 16, 24):
        f, rec, t_cut, h = _weak_run(n)
        tf = GaussianTestFunction(t_cut, v_center=(0.3, -0.2, 0.1), v_width=0.5)
        res[n] = (h, weak_form_residual(rec, tf, -1.0, f_in=f))
        if n == 16:
            mass_defect = weak_form_residual(rec, GaussianTestFunction(t_cut, v_width=None), -1.0, f_in=f)
    ns = sorted(res)
    orders = [math.log(res[a][1] / res[b][1]) / math.log(res[a][0] / res[b][0]) for a, b in zip(ns, ns[1:])]
    ok = mass_defect <= 1e-10 and min(orders) >= 1.0
    report(9, ok, f"v-independent residual {mass_defect:.1e} (<= 1e-10); Gaussian residuals "
                  + ", ".join(f"n={n}: {res[n][1]:.3e}" for n in ns)
                  + f"; observed orders in h (dt ~ h^2) {', '.join(f'{o:.2f}' for o in orders)} (>= 1)")


def test_criterion_10_holder_supersolution():
    a = solve_gbar(1.0, 0.5, 2.0).blowup_time
    b = gbar_blowup_quadrature(1.0, 0.5, 2.0)
    rel = abs(a - b) / b
    g = PhaseGrid.create(12, 4.0)
    v = g.velocity.v
    bump = np.sqrt(np.maximum(0.0, 1.0 - np.sum((v - np.array([0.5, 0.0, 0.0])) ** 2, axis=-1)))
    f = DistributionField(g, make_maxwellian(g).values + 0.5 * bump[None])
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.9 * stable_dt(c, g.velocity.h)
    rec = run_simulation(f, SolverConfig(gamma=-1.0, dt=dt, t_end=10 * dt, diag_every=2), diagnostics=quiet)
    chk = holder_propagation_check(rec, 0.5)
    ok = rel <= 1e-6 and bool(chk.passed) and chk.margin > 0
    report(10, ok, f"blow-up adaptive {a:.6e} vs quadrature {b:.6e} (rel {rel:.1e} <= 1e-6); "
                   f"g-sup <= G-bar with N={chk.witness['N'] if chk.passed else None}, T_H={chk.margin:.3e} "
                   f"(> 0; G-bar blows up long before the first stored step)")


@pytest.mark.slow
def test_criterion_11_uniqueness_contraction():
    g = PhaseGrid.create(12, 4.0)
    f = two_bumps(g)
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt0 = 0.9 * stable_dt(c, g.velocity.h)
    T = 40 * dt0
    runs = {}
    for m in (1, 2, 4, 8):
        cfg = SolverConfig(gamma=-1.0, dt=dt0 / m, t_end=T, diag_every=4 * m, positivity="off")
        runs[m] = run_simulation(f, cfg, diagnostics=quiet)
    C_weight, alpha = 0.05, 0.5
    _, self_W = contraction_series(runs[1], runs[1], alpha, C_weight)
    sups = {m: float(np.max(contraction_series(runs[m], runs[2 * m], alpha, C_weight)[1])) for m in (1, 2, 4)}
    C = sups[1] / dt0
    held = all(sups[m] <= C * dt0 / m for m in (2, 4))
    ok = bool(np.all(self_W == 0)) and held
    report(11, ok, f"self W == 0: {bool(np.all(self_W == 0))}; sup W for (dt, dt/2) pairs "
                   + ", ".join(f"dt0/{m}: {sups[m]:.3e}" for m in (1, 2, 4))
                   + f"; bound C dt with C = {C:.3e} fitted on the coarsest pair")


def test_criterion_12_interpolation():
    t0 = time.perf_counter()
    res = interpolation_inequality_checks(interpolation_corpus(), alpha=0.5, beta=0.5, C_interp=10.0, C_decay=4.0)
    elapsed = time.perf_counter() - t0
    failed = [r.name for r in res if not r.passed]
    worst = min(r.margin for r in res)
    report(12, len(res) == 12 and not failed and elapsed <= 30.0,
           f"{len(res) - len(failed)}/12 pass (C = 10, C = 4), min margin {worst:.3e}, {elapsed:.1f} s (<= 30 s)"
           + (f", failed {failed}" if failed else ""))


@pytest.mark.slow
def test_criterion_13_performance():
    g = PhaseGrid.create(32, 5.0)
    f = two_bumps(g)
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.9 * stable_dt(c, g.velocity.h)
    cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=1000 * dt, diag_every=100, full_diagnostics=False)
    t0 = time.perf_counter()
    rec = run_simulation(f, cfg)
    t_hom = time.perf_counter() - t0

    g1 = PhaseGrid.create(24, 5.0, dim_x=1, n_x=16, l_x=2.0)
    x = g1.space.positions()[..., 0]
    f1 = two_bumps(g1)
    f1 = f1.with_values(f1.values * (1 + 0.3 * np.cos(np.pi * x))[:, None, None, None])
    c1 = compute_coefficients_fast(f1.values, g1.velocity, CollisionKernel(-1.0))
    dt1 = 0.9 * stable_dt(c1, g1.velocity.h)
    cfg1 = SolverConfig(gamma=-1.0, dt=dt1, t_end=200 * dt1, diag_every=50, full_diagnostics=False)
    t0 = time.perf_counter()
    rec1 = run_simulation(f1, cfg1)
    t_inh = time.perf_counter() - t0
    ok = rec.steps == 1000 and rec1.steps == 200 and t_hom <= 300 and t_inh <= 600
    report(13, ok, f"n_v=32 x 1000 steps {t_hom:.0f} s (<= 300 s); dim_x=1, n_x=16, n_v=24 x 200 steps "
                   f"{t_inh:.0f} s (<= 600 s); measured on this machine's cores")
