import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from landau.coefficients import CoefficientField, CollisionKernel, compute_coefficients_fast
from landau.diagnostics import holder_seminorm
from landau.grid import DistributionField, PhaseGrid, PhasePoint, make_maxwellian
from landau.solver import SolverConfig, run_simulation, stable_dt
from landau.verification import (
    BarrierSpec, CheckResult, ComparisonWeight, GaussianTestFunction, PolyGaussian, SineMode, barrier_residual,
    boundary_dominance, contraction_series, d2v_decay_check, find_beta_star, gbar_blowup_closed_form,
    gbar_blowup_quadrature, gronwall_equality_branch, gronwall_equality_lambertw, gronwall_threshold,
    heat_kernel_surrogate, holder_propagation_check, holder_t_from_xv_check, initial_matching_check,
    interpolation_corpus, interpolation_inequality_checks, linftyk_propagation_check, linftyk_stability, log_slope,
    run_suite, solve_gbar, trajectory_K, uniqueness_contraction_check, weak_form_residual,
)

from conftest import two_bumps


def quiet(f, config, tracker, stats):
    return {"psi": 0.0}


def _stationary(f, times):
    return [f.with_values(f.values, time=t) for t in times]


# -- check records ----------------------------------------------------------------------

def test_check_result_json_schema():
    r = CheckResult("x", {"a": np.float64(1.5), "n": np.int64(3)}, np.bool_(True), np.inf, (1, 2), 7, 1.25)
    d = json.loads(r.to_json())
    assert set(d) >= {"name", "params", "pass", "margin", "witness", "seed", "runtime_ms"}
    assert d["pass"] is True and d["params"]["n"] == 3


# -- barriers -------------------------------------------------------------------------

def _fd_residual(spec, t, x, v, a, c, h=1e-4):
    """L applied to the barrier by central differences of its value."""
    val = lambda tt, vv: spec.value(np.asarray(tt), x + 0 * tt, vv)  # noqa: E731
    phi = spec.value(t, x, v)
    # (d_t + v.grad_x) phi as the derivative along the free-streaming characteristic
    dphi = (spec.value(t + h, x + h * v, v) - spec.value(t - h, x - h * v, v)) / (2 * h)
    D2 = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            ei, ej = np.eye(3)[i] * h, np.eye(3)[j] * h
            D2[i, j] = (val(t, v + ei + ej) - val(t, v + ei - ej) - val(t, v - ei + ej) + val(t, v - ei - ej)) / (4 * h * h)
    Lphi = dphi - np.sum(a * D2) - c * phi
    return -Lphi if spec.kind == "matching-lower" else Lphi


@pytest.mark.parametrize("spec", [
    BarrierSpec("decay-barrier", 1.3, k=6.0),
    BarrierSpec("matching-upper", 0.7, M=2.0, rho=0.5, eta=0.1, f0=1.0, x0=(0.2, 0.0, 0.0), v0=(0.5, -0.5, 0.0)),
    BarrierSpec("matching-lower", 0.7, M=2.0, rho=0.5, eta=0.1, f0=3.0, x0=(0.0, 0.1, 0.0), v0=(0.0, 0.3, 0.0)),
])
def test_barrier_closed_form_matches_finite_differences(spec):
    rng = np.random.default_rng(4)
    for _ in range(5):
        t = float(rng.uniform(0, 0.5))
        x, v = rng.normal(size=3), rng.normal(size=3)
        m = rng.normal(size=(3, 3))
        a = m @ m.T
        c = float(rng.uniform(0, 2))
        exact = spec.residual(t, x, v, a, c)
        assert exact == pytest.approx(_fd_residual(spec, t, x, v, a, c), rel=1e-5, abs=1e-6)


def test_barrier_validation():
    with pytest.raises(ValueError):
        BarrierSpec("other", 1.0, k=1.0)
    with pytest.raises(ValueError):
        BarrierSpec("decay-barrier", 1.0)
    with pytest.raises(ValueError):
        BarrierSpec("matching-upper", 1.0, M=1.0)


def test_barrier_zero_coefficients_residual_is_beta_phi():
    g = PhaseGrid.create(6, 2.0)
    n = 6
    c0 = CoefficientField(g.velocity, np.zeros((1, n, n, n, 3, 3)), np.zeros((1, n, n, n, 3)), np.zeros((1, n, n, n)))
    spec = BarrierSpec("decay-barrier", 2.0, k=6.0)
    r = barrier_residual(c0, spec, g, -1.0)
    assert r.passed
    np.testing.assert_allclose(r.data["residual"], 2.0 * spec.value(0.0, None, g.velocity.v)[None], rtol=1e-14)


@given(st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_barrier_residual_affine_in_beta(b1, b2):
    g = PhaseGrid.create(8, 3.0)
    c = compute_coefficients_fast(make_maxwellian(g).values, g.velocity, CollisionKernel(-1.0))
    r1 = barrier_residual(c, BarrierSpec("decay-barrier", b1, k=6.0), g).data["residual"]
    r2 = barrier_residual(c, BarrierSpec("decay-barrier", b2, k=6.0), g).data["residual"]
    phi = BarrierSpec("decay-barrier", 0.0, k=6.0).value(0.0, None, g.velocity.v)[None]
    np.testing.assert_allclose(r2 - r1, (b2 - b1) * phi, atol=1e-10 * (1 + abs(b2 - b1)))


def test_beta_star_by_bisection_maxwellian():
    g = PhaseGrid.create(16, 5.0)
    c = compute_coefficients_fast(make_maxwellian(g).values, g.velocity, CollisionKernel(-1.0))
    beta, r0 = find_beta_star(c, g, 6.0, -1.0)
    assert r0 < 0 and 0 < beta < np.inf
    assert barrier_residual(c, BarrierSpec("decay-barrier", beta, k=6.0), g).margin >= 0
    assert barrier_residual(c, BarrierSpec("decay-barrier", 0.999 * beta, k=6.0), g).margin < 0


def test_matching_barrier_boundary_dominance():
    delta, sup_f = 0.5, 2.0
    strong = BarrierSpec("matching-upper", 1.0, M=2 * sup_f / delta ** 2, rho=1.0, eta=0.05, f0=0.5)
    weak = BarrierSpec("matching-upper", 1.0, M=0.1, rho=1.0, eta=0.05, f0=0.5)
    assert boundary_dominance(strong, sup_f, delta, R_eta=1.0).passed
    assert not boundary_dominance(weak, sup_f, delta, R_eta=1.0).passed


# -- Groenwall threshold --------------------------------------------------------------

def test_gronwall_constant_passes():
    t = np.linspace(0, 1, 11)
    assert gronwall_threshold(2.0, 0.3, t, np.full_like(t, 2.0)).passed


def test_gronwall_double_root_is_e():
    H = gronwall_equality_branch(1.0, 1.0, 1 / math.e)
    assert H[0] == pytest.approx(math.e, abs=1e-7)
    assert H[0] <= math.e + 1e-9


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.0, 1.0))
def test_gronwall_branch_against_lambert_w(A, B, frac):
    t = frac / (math.e * A * B)
    assert gronwall_equality_branch(A, B, t)[0] == pytest.approx(gronwall_equality_lambertw(A, B, t)[0], rel=1e-7)


def test_gronwall_random_sweep_passes():
    rng = np.random.default_rng(0)
    for _ in range(200):
        A, B = rng.uniform(0.1, 10.0, 2)
        t = np.linspace(0.0, 1 / (math.e * A * B), 25)
        assert gronwall_threshold(A, B, t, gronwall_equality_branch(A, B, t)).passed


def test_gronwall_precondition_reported_separately():
    t = np.linspace(0, 0.1, 5)
    bad_pre = gronwall_threshold(1.0, 1.0, t, np.full_like(t, 3.0))
    assert bad_pre.passed is None and not bad_pre.data["precondition_ok"]
    # the upper branch obeys the implicit bound but exceeds eA
    H = np.array([1.0, 1e3, 1e3, 1e3, 1e3])
    fail = gronwall_threshold(1.0, 1.0, t, H)
    assert fail.data["precondition_ok"] and fail.passed is False
    with pytest.raises(ValueError):
        gronwall_equality_branch(1.0, 1.0, 1.0)


# -- supersolution -------------------------------------------------------------------

def test_gbar_blowup_three_routes():
    a = solve_gbar(1.0, 0.5, 2.0).blowup_time
    b = gbar_blowup_quadrature(1.0, 0.5, 2.0)
    c = gbar_blowup_closed_form(1.0, 0.5, 2.0)
    assert a == pytest.approx(b, rel=1e-6) and b == pytest.approx(c, rel=1e-9)


@given(st.floats(0.4, 0.95), st.floats(0.0, 5.0))
def test_gbar_monotone_and_blowup_decreasing_in_N(alpha, G0):
    times = [gbar_blowup_closed_form(N, alpha, G0) for N in (1, 2, 4, 8)]
    assert all(b < a for a, b in zip(times, times[1:]))
    T = times[0]
    sol = solve_gbar(1.0, alpha, G0, t_eval=np.linspace(0, 0.999 * T, 20))
    assert np.all(np.diff(sol.G[np.isfinite(sol.G)]) >= 0)
    assert sol.blowup_time == pytest.approx(T, rel=1e-6)


def test_holder_propagation_constant_trajectory():
    g = PhaseGrid.create(6, 2.0)
    traj = _stationary(DistributionField(g, 1.0), [0.0, 1e-90, 2e-90])
    res = holder_propagation_check(traj, 0.5)
    assert res.passed and res.witness["N"] == 1
    assert res.data["blowup_monotone"]
    assert np.all(res.data["g"] == 0)


# -- initial matching ------------------------------------------------------------------

def test_initial_matching_zero_and_scope():
    g = PhaseGrid.create(6, 2.0)
    z = DistributionField(g, 0.0)
    r = initial_matching_check(_stationary(z, [0, 0.1, 0.2]), z)
    assert r.passed and np.all(r.data["s"] == 0)
    ind = DistributionField(g, (g.velocity.speed2 < 1)[None].astype(float))
    assert initial_matching_check(_stationary(ind, [0, 0.1]), ind, continuous=False).passed is None


def test_initial_matching_maxwellian_run_linear_in_t():
    g = PhaseGrid.create(16, 5.0)
    mu = make_maxwellian(g)
    c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.5 * stable_dt(c, g.velocity.h)
    rec = run_simulation(mu, SolverConfig(gamma=-1.0, dt=dt, t_end=10 * dt, diag_every=1, positivity="off"),
                         diagnostics=quiet)
    r = initial_matching_check(rec, mu, v_max=2.5)
    assert r.passed
    s, t = r.data["s"][1:], r.data["t"][1:]
    assert np.max(s / t) <= 1.5 * np.min(s / t)


# -- weak form -----------------------------------------------------------------------

class _SumTF:
    """Sum of two Gaussian test functions sharing a time cutoff."""

    def __init__(self, p, q):
        assert p.t_cut == q.t_cut
        self.p, self.q = p, q
        self.t_cut, self.amplitude, self.x_width, self.v_width = p.t_cut, 1.0, None, 1.0
        self.chi, self.chi_dot = p.chi, p.chi_dot

    def xpart(self, X, l_x):
        return self.p.xpart(X, l_x)

    def vpart(self, V):
        a, ga = self.p.vpart(V)
        b, gb = self.q.vpart(V)
        return self.p.amplitude * a + self.q.amplitude * b, self.p.amplitude * ga + self.q.amplitude * gb

    def fits_box(self, l_v):
        return self.p.fits_box(l_v) and self.q.fits_box(l_v)


@pytest.fixture(scope="module")
def bump_run():
    g = PhaseGrid.create(10, 4.0)
    f = two_bumps(g)
    c = compute_coefficients_fast(f.values, g.velocity, CollisionKernel(-1.0))
    dt = 0.5 * stable_dt(c, g.velocity.h)
    conf = SolverConfig(gamma=-1.0, dt=dt, t_end=12 * dt, diag_every=1, positivity="off")
    return f, run_simulation(f, conf, diagnostics=quiet), dt


def test_weak_form_zero_trajectory():
    g = PhaseGrid.create(8, 4.0)
    z = DistributionField(g, 0.0)
    assert weak_form_residual(_stationary(z, [0, 0.1, 0.2]), GaussianTestFunction(0.15, v_width=0.5), -1.0) == 0.0


def test_weak_form_v_independent_phi_is_mass_defect(bump_run):
    f, rec, dt = bump_run
    tf = GaussianTestFunction(8 * dt, v_width=None)
    assert weak_form_residual(rec, tf, -1.0, f_in=f) <= 1e-10


def test_weak_form_linear_in_test_function(bump_run):
    f, rec, dt = bump_run
    p = GaussianTestFunction(8 * dt, v_center=(0.3, -0.2, 0.1), v_width=0.5, amplitude=1.5)
    q = GaussianTestFunction(8 * dt, v_center=(-0.5, 0.0, 0.2), v_width=0.5, amplitude=-0.7)
    rp, rq = (weak_form_residual(rec, tf, -1.0, signed=True) for tf in (p, q))
    rs = weak_form_residual(rec, _SumTF(p, q), -1.0, signed=True)
    assert rs == pytest.approx(rp + rq, rel=1e-10, abs=1e-15)


def test_weak_form_rejects_bad_support(bump_run):
    f, rec, dt = bump_run
    with pytest.raises(ValueError):
        weak_form_residual(rec, GaussianTestFunction(1.0, v_width=0.5), -1.0)
    with pytest.raises(ValueError):
        weak_form_residual(rec, GaussianTestFunction(5 * dt, v_center=(3.0, 0, 0), v_width=0.5), -1.0)


# -- L^{inf,k} propagation ---------------------------------------------------------------

def test_linftyk_zero_and_stationary():
    g = PhaseGrid.create(8, 3.0)
    z = linftyk_propagation_check(_stationary(DistributionField(g, 0.0), [0, 0.1]), 8.0, 1.0)
    assert z.passed and z.margin == 0.0
    mu = make_maxwellian(g)
    r = linftyk_propagation_check(_stationary(mu, [0, 0.1, 0.2]), 8.0, 1.0)
    assert r.margin == pytest.approx(0.0, abs=1e-12)


def test_linftyk_exact_growth_rate_and_K_mapping():
    g = PhaseGrid.create(6, 2.0)
    mu = make_maxwellian(g)
    rate = 0.8
    traj = [mu.with_values(mu.values * math.exp(rate * t), time=t) for t in (0.0, 0.1, 0.2, 0.4)]
    r = linftyk_propagation_check(traj, 6.0, {"Linfty_k0": 2.0, "psi_plus_Lp": 4.0})
    assert r.witness["Linfty_k0"] == pytest.approx(0.4)
    assert r.witness["psi_plus_Lp"] == pytest.approx(0.2)
    assert linftyk_stability(1.0, 1.15) and not linftyk_stability(1.0, 1.3)
    assert trajectory_K(traj, -1.0) > 0


# -- D^2_v decay ----------------------------------------------------------------------

def test_d2v_decay_stationary_slope_zero():
    mu = make_maxwellian(PhaseGrid.create(12, 4.0))
    r = d2v_decay_check(_stationary(mu, np.linspace(0, 1, 8)), 0.5, 0.0, -1.0)
    assert r.passed and r.witness["slope"] == pytest.approx(0.0, abs=1e-12)


def test_heat_kernel_surrogate_rate():
    hk = heat_kernel_surrogate()
    sl_num = log_slope(hk["t"] + 0.05, hk["numerical"])
    sl_cf = log_slope(hk["t"] + 0.05, hk["closed_form"])
    assert sl_cf == pytest.approx(-2.5, abs=0.1)
    assert sl_num == pytest.approx(sl_cf, abs=0.1)


# -- contraction ---------------------------------------------------------------------

def test_comparison_weight_integral():
    w = ComparisonWeight(0.7, 0.5)
    for t in (0.01, 0.3, 2.0):
        val, _ = integrate.quad(lambda s: float(w.r(s)), 0, t, limit=200)
        assert w.integral(t) == pytest.approx(val, rel=1e-7)


def test_contraction_self_is_zero_and_mismatch_rejected(bump_run):
    f, rec, dt = bump_run
    r = uniqueness_contraction_check(rec, rec, 0.5, 1.0)
    assert r.passed and np.all(r.data["W"] == 0)
    other = _stationary(DistributionField(PhaseGrid.create(8, 4.0), 0.0), rec.times)
    with pytest.raises(ValueError):
        contraction_series(rec, other, 0.5, 1.0)
    with pytest.raises(ValueError):
        contraction_series(rec, rec.snapshots[:-1], 0.5, 1.0)


# -- interpolation inequalities ----------------------------------------------------------

def test_interpolation_constant_function():
    r = interpolation_inequality_checks([PolyGaussian(2.0, a=0.0, name="const")])[0]
    assert r.passed and r.witness["D2_sup"] == 0 and r.witness["interp_rhs"] == 0


def test_interpolation_corpus_passes():
    res = interpolation_inequality_checks(interpolation_corpus())
    assert len(res) == 12 and all(r.passed for r in res), [r.name for r in res if not r.passed]


def test_polygaussian_hessian_against_finite_differences():
    fn = interpolation_corpus()[8]
    v = np.array([0.3, -0.2, 0.5])
    h = 1e-4
    H = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            ei, ej = np.eye(3)[i] * h, np.eye(3)[j] * h
            H[i, j] = (fn(v + ei + ej) - fn(v + ei - ej) - fn(v - ei + ej) + fn(v - ei - ej)) / (4 * h * h)
    np.testing.assert_allclose(fn.hessian(v), H, atol=1e-6)


def test_interpolation_sine_modes():
    slow = SineMode(1.0, "sin", check_center=(math.pi / 2, 0.0, 0.0))
    fast = SineMode(10.0, "sin10")
    rs, rf = interpolation_inequality_checks([slow, fast])
    assert rs.witness["D2_sup"] == pytest.approx(1.0)
    assert rs.passed and rf.passed
    assert rf.witness["D2_sup"] > 50 * rs.witness["D2_sup"]


# -- time regularity from (x, v) ---------------------------------------------------------

def test_holder_t_from_xv_time_independent():
    g = PhaseGrid.create(12, 6.0)
    mu = make_maxwellian(g)
    traj = _stationary(mu, [0.0, 0.5, 1.0])
    centers = [PhasePoint.of(1.0, (0.0, 0.0, 0.0), (s, 0.0, 0.0)) for s in (0.0, 2.0, 4.0)]
    r = holder_t_from_xv_check(traj, 0.5, centers, -1.0)
    assert r.passed and max(r.witness["ratios"]) <= 1.0
    with pytest.raises(ValueError):
        holder_t_from_xv_check(traj, 0.5, [PhasePoint.of(9.0, (0, 0, 0), (0, 0, 0))], -1.0)


# -- suites ------------------------------------------------------------------------------

def test_kernel_suite_passes():
    res = run_suite("kernel")
    assert all(r.passed for r in res)
    with pytest.raises(ValueError):
        run_suite("nope")


def test_holder_estimate_matches_propagation_g():
    g = PhaseGrid.create(8, 3.0)
    f = two_bumps(g)
    res = holder_propagation_check([f], 0.5)
    assert res.data["g"][0] == pytest.approx(holder_seminorm(f, 0.5).g_sup)
