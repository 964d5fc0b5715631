"""Executable checks of the a priori estimates on computed data.

Each check returns a :class:`CheckResult` that serialises to one JSON object
``{name, params, pass, margin, witness, seed, runtime_ms}``; richer outputs
ride along in ``data``.
"""
from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field
import numpy as np
from scipy import integrate, special

from .coefficients import (CoefficientField, CollisionKernel, compute_coefficients_direct,
                           compute_coefficients_fast, divergence_identity_residuals)
from .diagnostics import (_fields_of, d2v_weighted_sup, holder_seminorm, p_of_alpha, time_exponent)
from .grid import DistributionField, PhaseGrid, TrajectoryRecord, japanese, make_maxwellian, weighted_sup_norm


@dataclass
class CheckResult:
    name: str
    params: dict
    passed: bool | None
    margin: float
    witness: object = None
    seed: int | None = None
    runtime_ms: float = 0.0
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": _jsonable(self.params), "pass": _jsonable(self.passed),
                "margin": _jsonable(self.margin), "witness": _jsonable(self.witness), "seed": self.seed,
                "runtime_ms": round(self.runtime_ms, 3)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


class _Timer:
    def __enter__(self):
        self.t0 = _time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = 1e3 * (_time.perf_counter() - self.t0)


# -- barriers ---------------------------------------------------------------------

BARRIER_KINDS = ("decay-barrier", "matching-upper", "matching-lower")


@dataclass(frozen=True)
class BarrierSpec:
    """Closed-form barrier functions for the linear operator
    L g = d_t g + v.grad_x g - tr(a D^2_v g) - c g.

    ``decay-barrier``: e^{beta t} <v>^{-k}.
    ``matching-upper``: e^{beta t}[M(|x-x0-vt|^2 + |v-v0|^2) + eta + f0 + rho t].
    ``matching-lower``: e^{-beta t}[f0 - M(|x-x0-vt|^2 + |v-v0|^2) - eta - rho t].
    """

    kind: str
    beta: float
    k: float = 0.0
    M: float = 0.0
    rho: float = 0.0
    eta: float = 0.0
    f0: float = 0.0
    x0: tuple = (0.0, 0.0, 0.0)
    v0: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in BARRIER_KINDS:
            raise ValueError(f"kind must be one of {BARRIER_KINDS}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.kind == "decay-barrier" and not self.k > 0:
            raise ValueError("decay barrier needs k > 0")
        if self.kind != "decay-barrier" and not (self.M > 0 and self.rho > 0):
            raise ValueError("matching barriers need M > 0 and rho > 0")

    def value(self, t, x, v):
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "decay-barrier":
            return np.exp(self.beta * t) * japanese(np.sum(v * v, axis=-1)) ** (-self.k)
        q = self._quad(t, x, v)
        if self.kind == "matching-upper":
            return np.exp(self.beta * t) * (self.M * q + self.eta + self.f0 + self.rho * t)
        return np.exp(-self.beta * t) * (self.f0 - self.M * q - self.eta - self.rho * t)

    def _quad(self, t, x, v):
        x = np.asarray(x, dtype=float)
        y = x - np.asarray(self.x0) - np.asarray(t)[..., None] * v
        w = v - np.asarray(self.v0)
        return np.sum(y * y, axis=-1) + np.sum(w * w, axis=-1)

    def residual(self, t, x, v, a, c):
        """L applied to the barrier, from closed-form derivatives.

        For the lower barrier the returned value is -L h (a subsolution has
        -L h >= 0), so for every kind the requirement reads residual >= 0.
        """
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        tr_a = np.trace(a, axis1=-2, axis2=-1)
        if self.kind == "decay-barrier":
            jap2 = 1.0 + np.sum(v * v, axis=-1)
            phi = np.exp(self.beta * t) * jap2 ** (-self.k / 2)
            vav = np.einsum("...i,...ij,...j->...", v, a, v)
            # D^2 phi = phi [k(k+2) <v>^-4 v v^T - k <v>^-2 I]
            tr_ad2 = phi * (self.k * (self.k + 2) * vav / jap2 ** 2 - self.k * tr_a / jap2)
            return self.beta * phi - tr_ad2 - c * phi
        h = self.value(t, x, v)
        if self.kind == "matching-upper":
            e = np.exp(self.beta * t)
            # (d_t + v.grad_x) of |x - x0 - vt|^2 vanishes; D^2_v h = 2 M e (1 + t^2) I
            return self.beta * h + self.rho * e - 2 * self.M * e * (1 + t * t) * tr_a - c * h
        e = np.exp(-self.beta * t)
        lh = -self.beta * h - self.rho * e + 2 * self.M * e * (1 + t * t) * tr_a - c * h
        return -lh


def barrier_residual(coeff: CoefficientField, barrier: BarrierSpec, grid: PhaseGrid, gamma: float = None,
                     t: float = 0.0, mask=None) -> CheckResult:
    """Grid minimum of the barrier residual with frozen coefficients.

    ``coeff`` carries one coefficient set per x cell (or a single set,
    broadcast over x).  ``mask`` optionally restricts the cells (shape of
    the field).
    """
    with _Timer() as tm:
        X = np.broadcast_to(grid.space.positions()[..., None, None, None, :], grid.shape + (3,))
        V = np.broadcast_to(grid.velocity.v, grid.shape + (3,))
        a = np.broadcast_to(coeff.a, grid.shape + (3, 3))
        c = np.broadcast_to(coeff.c, grid.shape)
        r = barrier.residual(t, X, V, a, c)
        if mask is not None:
            r = np.where(mask, r, np.inf)
        j = int(np.argmin(r))
        rmin = float(r.flat[j])
    idx = tuple(int(i) for i in np.unravel_index(j, r.shape))
    return CheckResult("barrier_residual", {"kind": barrier.kind, "beta": barrier.beta, "k": barrier.k,
                                            "t": t, "gamma": gamma}, rmin >= 0, rmin, idx,
                       runtime_ms=tm.ms, data={"residual": r})


def coefficient_K(coeff: CoefficientField, gamma: float) -> float:
    """K = max(|a| / <v>^{(gamma+2)+}, |c|) over all cells."""
    vel = coeff.grid
    a_norm = np.linalg.norm(coeff.a, ord=2, axis=(-2, -1))
    ka = float(np.max(a_norm / vel.jap ** max(gamma + 2, 0.0)))
    return max(ka, float(np.max(np.abs(coeff.c))))


def find_beta_star(coeff: CoefficientField, grid: PhaseGrid, k: float, gamma: float = None,
                   rtol: float = 1e-10) -> tuple[float, float]:
    """Smallest beta with grid-min L(e^{beta t}<v>^{-k}) >= 0, by bisection.

    The residual is (beta - s(v)) phi with s independent of beta, so it is
    monotone in beta at every cell.  Returns (beta_star, residual at beta=0).
    """
    def rmin(beta):
        return barrier_residual(coeff, BarrierSpec("decay-barrier", beta, k=k), grid, gamma).margin

    r0 = rmin(0.0)
    if r0 >= 0:
        return 0.0, r0
    lo, hi = 0.0, 1.0
    while rmin(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 1e15:
            raise RuntimeError("no finite beta makes the barrier a supersolution")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if rmin(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi, r0


def barrier_fit(f: DistributionField, gamma: float, k: float, kernel: CollisionKernel | None = None) -> dict:
    """beta*, K and the fitted C0 = beta*/K for the coefficients of f."""
    kernel = kernel or CollisionKernel(gamma)
    coeff = compute_coefficients_fast(f.values, f.grid.velocity, kernel)
    beta, r0 = find_beta_star(coeff, f.grid, k, gamma)
    K = coefficient_K(coeff, gamma)
    return {"beta_star": beta, "K": K, "C0": beta / K if K > 0 else float("nan"), "residual_beta0": r0}


def boundary_dominance(barrier: BarrierSpec, sup_f: float, delta: float, R_eta: float,
                       n_dir: int = 400, n_t: int = 20, seed: int = 0) -> CheckResult:
    """Scan the shell |x-x0|^2 + |v-v0|^2 = delta^2 for t <= delta / (4 (R_eta + delta)).

    Passes when the upper matching barrier dominates sup f there.
    """
    rng = np.random.default_rng(seed)
    with _Timer() as tm:
        d = rng.normal(size=(n_dir, 6))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        d *= delta
        x = np.asarray(barrier.x0) + d[:, :3]
        v = np.asarray(barrier.v0) + d[:, 3:]
        t_max = delta / (4 * (R_eta + delta))
        worst = np.inf
        wit = None
        for t in np.linspace(0.0, t_max, n_t):
            h = barrier.value(np.full(n_dir, t), x, v)
            j = int(np.argmin(h))
            if h[j] - sup_f < worst:
                worst = float(h[j] - sup_f)
                wit = (float(t), x[j].tolist(), v[j].tolist())
    return CheckResult("boundary_dominance", {"delta": delta, "R_eta": R_eta, "M": barrier.M}, worst >= 0,
                       worst, wit, seed, tm.ms)


# -- Groenwall-type threshold ---------------------------------------------------

def gronwall_equality_branch(A: float, B: float, t, tol: float = 1e-15, max_iter: int = 200):
    """Smallest root of H = A exp(B t H) for t <= 1/(eAB), by fixed-point iteration.

    The iteration map is the Newton map of g(H) = H - A exp(B t H).  g is
    concave and g(A) <= 0, so the iterates started at H = A increase
    monotonically to the smallest root and never overshoot it; at the
    double root t = 1/(eAB) the convergence is linear with factor 1/2.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(A * B * t > 1 / math.e * (1 + 1e-12)):
        raise ValueError("t exceeds 1/(eAB): no real root")
    H = np.full_like(t, A)
    for _ in range(max_iter):
        e = A * np.exp(B * t * H)
        g = H - e
        dg = 1.0 - B * t * e
        step = np.where(dg > 0, -g / np.where(dg > 0, dg, 1.0), 0.0)
        Hn = H + np.maximum(step, 0.0)
        # the root sits where g' >= 0, i.e. below 1/(Bt); this only bites at round-off
        with np.errstate(divide="ignore", over="ignore"):
            Hn = np.minimum(Hn, 1.0 / (B * t))
        done = np.all(np.abs(Hn - H) <= tol * Hn)
        H = Hn
        if done:
            break
    return H


def gronwall_equality_lambertw(A: float, B: float, t):
    """Closed form of the same root: H = -W_0(-A B t) / (B t), W_0 the principal Lambert branch."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = -A * B * t
    if np.any(z < -1 / math.e * (1 + 1e-12)):
        raise ValueError("t exceeds 1/(eAB): no real root")
    H = np.full_like(t, A)
    pos = z < 0
    # W_0 is -1 at the branch point; round-off there would leave the real axis
    w = np.where(z[pos] <= -1 / math.e, -1.0, special.lambertw(np.maximum(z[pos], -1 / math.e), 0).real)
    H[pos] = -w / (B * t[pos])
    return H


def gronwall_threshold(A: float, B: float, times, H, tol: float = 1e-9) -> CheckResult:
    """Check H(t) <= eA on [0, min(T, 1/(eAB))] given H(t) <= A exp(B t H(t)).

    The precondition (monotone samples obeying the implicit bound) is
    checked first and reported separately.
    """
    with _Timer() as tm:
        times = np.asarray(times, dtype=float)
        H = np.asarray(H, dtype=float)
        pre_mono = bool(np.all(np.diff(H) >= -tol))
        slack = A * np.exp(B * times * H) - H
        pre_ok = pre_mono and bool(np.all(slack >= -tol * np.maximum(1.0, H)))
        t_star = min(float(times[-1]), 1.0 / (math.e * A * B))
        sel = times <= t_star * (1 + 1e-12)
        gap = math.e * A + tol - H[sel]
        j = int(np.argmin(gap)) if gap.size else 0
        margin = float(gap[j]) if gap.size else float("inf")
    passed = (margin >= 0) if pre_ok else None
    return CheckResult("gronwall_threshold", {"A": A, "B": B, "tol": tol}, passed, margin,
                       {"t": float(times[sel][j]) if gap.size else None, "precondition_ok": pre_ok},
                       runtime_ms=tm.ms, data={"precondition_ok": pre_ok, "t_star": t_star})


# -- initial matching -------------------------------------------------------------

def initial_matching_check(trajectory, f_in: DistributionField, v_max: float | None = None,
                           n_fit: int = 10, eps_match: float = 1e-2, continuous: bool = True) -> CheckResult:
    """s(t) = sup over the region of |f(t) - f_in| and the slope fit s <= C t.

    The assertion covers the first ``n_fit`` positive diagnostic times:
    s non-decreasing, s at the first of them <= eps_match and C finite.
    Discontinuous data are outside the claim and are reported without a
    verdict.
    """
    fields = _fields_of(trajectory)
    vel = f_in.grid.velocity
    mask = np.ones(vel.speed2.shape, bool) if v_max is None else vel.speed2 <= v_max ** 2
    with _Timer() as tm:
        t = np.array([f.time for f in fields])
        s = np.array([float(np.max(np.abs(f.values - f_in.values)[..., mask], initial=0.0)) for f in fields])
        pos = np.nonzero(t > 0)[0][:n_fit]
        C = float(np.max(s[pos] / t[pos])) if len(pos) else 0.0
        mono = bool(np.all(np.diff(s[pos]) >= -1e-14 * max(1.0, float(np.max(s)))))
        first = float(s[pos[0]]) if len(pos) else 0.0
    params = {"v_max": v_max, "n_fit": n_fit, "eps_match": eps_match}
    if not continuous:
        return CheckResult("initial_matching", params | {"claim_scope": "continuous data"}, None, C,
                           runtime_ms=tm.ms, data={"t": t, "s": s, "C": C})
    ok = math.isfinite(C) and mono and first <= eps_match
    return CheckResult("initial_matching", params, ok, eps_match - first, {"C": C, "monotone": mono},
                       runtime_ms=tm.ms, data={"t": t, "s": s, "C": C})


# -- weak formulation ---------------------------------------------------------------

@dataclass(frozen=True)
class GaussianTestFunction:
    """phi(t, x, v) = chi(t) X(x) V(v) with closed-form derivatives.

    chi(t) = cos^2(pi t / (2 t_cut)) on [0, t_cut), 0 afterwards.  X is a
    periodic bump exp(kappa (cos(2 pi (x1 - x_c)/L) - 1)) with
    kappa = (L / (2 pi x_width))^2 (constant 1 when ``x_width`` is None).
    V = exp(-|v - v_c|^2 / (2 v_width^2)) (constant 1 when ``v_width`` is None).
    """

    t_cut: float
    v_center: tuple = (0.0, 0.0, 0.0)
    v_width: float | None = 1.0
    x_center: float = 0.0
    x_width: float | None = None
    amplitude: float = 1.0

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.t_cut, np.cos(np.pi * t / (2 * self.t_cut)) ** 2, 0.0)

    def chi_dot(self, t):
        t = np.asarray(t, dtype=float)
        w = np.pi / (2 * self.t_cut)
        return np.where(t < self.t_cut, -w * np.sin(2 * w * t), 0.0)

    def xpart(self, X, l_x):
        """(value, d/dx1) of the x factor at positions X (..., 3)."""
        if self.x_width is None:
            one = np.ones(np.shape(X)[:-1])
            return one, np.zeros_like(one)
        k = 2 * np.pi / l_x
        kappa = (1.0 / (k * self.x_width)) ** 2
        arg = k * (X[..., 0] - self.x_center)
        val = np.exp(kappa * (np.cos(arg) - 1.0))
        return val, -kappa * k * np.sin(arg) * val

    def vpart(self, V):
        """(value, gradient) of the v factor."""
        if self.v_width is None:
            one = np.ones(np.shape(V)[:-1])
            return one, np.zeros(np.shape(V))
        d = V - np.asarray(self.v_center)
        val = np.exp(-np.sum(d * d, axis=-1) / (2 * self.v_width ** 2))
        return val, -d / self.v_width ** 2 * val[..., None]

    def fits_box(self, l_v: float) -> bool:
        if self.v_width is None:
            return True
        return float(np.max(np.abs(self.v_center))) + 6 * self.v_width < l_v


def weak_form_residual(trajectory, test_function: GaussianTestFunction, gamma: float,
                       f_in: DistributionField | None = None, signed: bool = False,
                       kernel: CollisionKernel | None = None) -> float:
    """Discrete defect of the weak formulation over a per-step trajectory.

    R = int f_in phi(0) + sum_n int f^n [phi(t_{n+1}) - phi(t_n)]
        + sum_n dt_n int f^n v.grad_x phi(t_{n+1})
        - sum_n dt_n int [grad_v phi(t_{n+1}) . a^n grad_v f^n + f^n b^n . grad_v phi(t_{n+1})]

    This vanishes for exact solutions.  Exact time differences of phi make
    the first two sums telescope, so for a v-independent phi the residual
    is the mass-conservation defect.  ``trajectory`` must hold every step.
    """
    fields = _fields_of(trajectory)
    grid = fields[0].grid
    vel = grid.velocity
    tf = test_function
    times = np.array([f.time for f in fields])
    if not tf.t_cut < times[-1]:
        raise ValueError("test function support must end before the final stored time")
    if not tf.fits_box(vel.l_v):
        raise ValueError("test function touches the velocity boundary")
    f0 = f_in if f_in is not None else fields[0]
    kernel = kernel or CollisionKernel(gamma)
    X = grid.space.positions()[..., None, None, None, :]
    Xval, Xd = tf.xpart(np.broadcast_to(X, grid.shape + (3,)), grid.space.l_x)
    Vval, Vgrad = tf.vpart(vel.v)
    phi_xv = tf.amplitude * Xval * Vval
    vol = grid.cell_volume
    total = float(np.sum(f0.values * tf.chi(0.0) * phi_xv) * vol)
    need_v = tf.v_width is not None
    for n in range(len(fields) - 1):
        f = fields[n]
        t0, t1 = times[n], times[n + 1]
        dt = t1 - t0
        c1 = float(tf.chi(t1))
        total += float(np.sum(f.values * (c1 - float(tf.chi(t0))) * phi_xv) * vol)
        if grid.space.dim_x and tf.x_width is not None and c1 != 0.0:
            vx = vel.v[..., 0]
            total += dt * c1 * float(np.sum(f.values * vx * tf.amplitude * Xd * Vval) * vol)
        if need_v and c1 != 0.0:
            coeff = compute_coefficients_fast(np.maximum(f.values, 0.0), vel, kernel)
            gphi = c1 * tf.amplitude * Xval[..., None] * Vgrad
            gf = np.stack(np.gradient(f.values, vel.h, axis=(-3, -2, -1)), axis=-1)
            flux = np.einsum("...ij,...j->...i", coeff.a, gf) + coeff.b * f.values[..., None]
            total -= dt * float(np.sum(gphi * flux) * vol)
    return total if signed else abs(total)


# -- L^{inf,k} propagation -----------------------------------------------------------

def trajectory_K(trajectory, gamma: float) -> float:
    """sup over stored times of max(|a|/<v>^{(gamma+2)+}, |c|)."""
    kernel = CollisionKernel(gamma)
    K = 0.0
    for f in _fields_of(trajectory):
        if np.max(np.abs(f.values)) == 0:
            continue
        coeff = compute_coefficients_fast(np.maximum(f.values, 0.0), f.grid.velocity, kernel)
        K = max(K, coefficient_K(coeff, gamma))
    return K


def linftyk_propagation_check(trajectory, k: float, K_source) -> CheckResult:
    """Smallest C with ||f(t)||_{L^{inf,k}} <= ||f_in|| e^{C K t} at all stored times.

    ``K_source`` is a number or a mapping name -> K; with a mapping every
    fitted constant is reported and ``margin`` holds the first one.
    """
    fields = _fields_of(trajectory)
    Ks = dict(K_source) if isinstance(K_source, dict) else {"K": float(K_source)}
    with _Timer() as tm:
        t = np.array([f.time for f in fields])
        N = np.array([weighted_sup_norm(f, k) for f in fields])
        N0 = N[0]
        pos = t > 0
        growth = np.log(np.maximum(N[pos], 1e-300) / N0) / t[pos] if N0 > 0 else np.zeros(0)
        rate = max(0.0, float(np.max(growth, initial=0.0)))
        C = {name: (rate / K if K > 0 else (0.0 if rate == 0 else float("inf"))) for name, K in Ks.items()}
    first = next(iter(C.values()))
    ok = all(math.isfinite(c) for c in C.values())
    return CheckResult("linftyk_propagation", {"k": k, "K": Ks}, ok, first, C, runtime_ms=tm.ms,
                       data={"t": t, "norm": N, "C": C, "rate": rate})


def linftyk_stability(C_a: float, C_b: float, rel: float = 0.2, abs_floor: float = 1e-12) -> bool:
    """Whether two fitted constants agree to +-rel (with an absolute floor for C ~ 0)."""
    return abs(C_a - C_b) <= rel * max(abs(C_a), abs(C_b)) + abs_floor


# -- Hoelder supersolution --------------------------------------------------------------

@dataclass
class HolderSupersolution:
    N: float
    alpha: float
    G0: float
    blowup_time: float
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    G: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _gbar_params(N, alpha):
    theta = time_exponent(alpha)
    P = (p_of_alpha(alpha) + 1) / 2
    return theta, P


def gbar_blowup_closed_form(N: float, alpha: float, G0: float) -> float:
    """Blow-up time of G' = N t^{-1+theta} (1+G)^P from separation of variables."""
    theta, P = _gbar_params(N, alpha)
    s_star = theta * (1 + G0) ** (1 - P) / ((P - 1) * N)
    return s_star ** (1 / theta)


def gbar_blowup_quadrature(N: float, alpha: float, G0: float) -> float:
    """Blow-up time with the separated G-integral evaluated by adaptive quadrature."""
    theta, P = _gbar_params(N, alpha)
    # substitute y = 1/(1+G) so the infinite range becomes (0, 1/(1+G0)]
    val, _ = integrate.quad(lambda y: y ** (P - 2), 0.0, 1.0 / (1 + G0), epsabs=0, epsrel=1e-13, limit=200)
    return (theta * val / N) ** (1 / theta)


def solve_gbar(N: float, alpha: float, G0: float, t_eval=None, G_big: float | None = None,
               rtol: float = 1e-13) -> HolderSupersolution:
    """Integrate the supersolution ODE with an adaptive Runge-Kutta method.

    In s = t^theta the ODE becomes autonomous, dG/ds = (N/theta)(1+G)^P,
    which removes the t^{-1+theta} singularity at t = 0.  Integration stops
    when G reaches ``G_big``; the neglected tail shortens s by a relative
    amount of order ((1+G0)/G_big)^{P-1}, while going further runs into the
    floating-point spacing of s.  The default keeps that tail near 1e-10
    (and G_big <= 1e3 (1+G0)).
    """
    theta, P = _gbar_params(N, alpha)
    if G_big is None:
        G_big = (1 + G0) * min(1e3, 10.0 ** (10.0 / (P - 1)))

    def rhs(s, G):
        return (N / theta) * (1 + G) ** P

    def hit(s, G):
        return G[0] - G_big
    hit.terminal = True
    # natural scale: the time for G to double at its initial growth rate
    scale = (1 + G0) / rhs(0.0, G0)
    sol = integrate.solve_ivp(rhs, (0.0, 10 * scale), [G0], method="DOP853", rtol=rtol, atol=0.0, events=hit,
                              dense_output=True, first_step=1e-6 * scale)
    if sol.t_events[0].size == 0:
        raise RuntimeError("supersolution did not blow up on the integration range")
    s_star = float(sol.t_events[0][0])
    T = s_star ** (1 / theta)
    out = HolderSupersolution(N, alpha, G0, T)
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        s = t_eval ** theta
        G = np.full(t_eval.shape, np.inf)
        ok = s < s_star
        if np.any(ok):
            G[ok] = sol.sol(s[ok])[0]
        out.times, out.G = t_eval, G
    return out


def holder_propagation_check(trajectory, alpha: float, m: float = 0.0, N_grid=(1, 2, 4, 8, 16, 32, 64),
                             sampler: str = "exhaustive", n_samples: int = 100_000, seed: int = 0,
                             region: dict | None = None) -> CheckResult:
    """Compare the measured g-sup with the supersolution G-bar.

    G-bar(0) = 1 + g(0) + N ||f||^2_{L^{inf,m}} over the trajectory.  For
    the smallest N in ``N_grid`` with g(t) <= G-bar(t) at every stored time
    below the blow-up time, T_H is that horizon.
    """
    fields = _fields_of(trajectory)
    with _Timer() as tm:
        t = np.array([f.time for f in fields])
        g = np.array([holder_seminorm(f, alpha, m, "euclidean", sampler, n_samples, seed, region).g_sup
                      for f in fields])
        fm = max(weighted_sup_norm(f, m) for f in fields)
        rows = []
        found = None
        for N in N_grid:
            G0 = 1 + g[0] + N * fm ** 2
            sup = solve_gbar(N, alpha, G0, t_eval=t)
            live = t < sup.blowup_time
            ok = bool(np.all(g[live] <= sup.G[live]))
            horizon = min(sup.blowup_time, float(t[-1]))
            rows.append({"N": N, "G0": G0, "blowup": sup.blowup_time, "pass": ok, "T_H": horizon})
            if ok and found is None:
                found = rows[-1]
        blow = [r["blowup"] for r in rows]
        monotone = all(b2 < b1 for b1, b2 in zip(blow, blow[1:]))
    witness = "no N <= N_max passes" if found is None else {"N": found["N"], "T_H": found["T_H"]}
    return CheckResult("holder_propagation", {"alpha": alpha, "m": m, "N_grid": list(N_grid)},
                       found is not None and found["T_H"] > 0, found["T_H"] if found else 0.0, witness, seed,
                       tm.ms, data={"t": t, "g": g, "rows": rows, "blowup_monotone": monotone})


# -- D^2_v decay ----------------------------------------------------------------------

def log_slope(t, y) -> float:
    """Least-squares slope of log y against log t."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([np.log(t), np.ones_like(t)]).T
    return float(np.linalg.lstsq(A, np.log(y), rcond=None)[0][0])


def d2v_decay_check(trajectory, alpha: float, m: float, gamma: float, skip: int = 3,
                    slack: float = 0.2) -> CheckResult:
    """Slope of log sup <v>^{m+(gamma+2)+}|D^2_v f| against log t.

    Passes when the slope is at least -1 + alpha^2/(6-alpha) - slack.
    """
    fields = [f for f in _fields_of(trajectory)][skip:]
    fields = [f for f in fields if f.time > 0]
    with _Timer() as tm:
        w = m + max(gamma + 2, 0.0)
        t = np.array([f.time for f in fields])
        y = np.array([d2v_weighted_sup(f, w) for f in fields])
        slope = log_slope(t, y)
        bound = -1 + time_exponent(alpha) - slack
    return CheckResult("d2v_decay", {"alpha": alpha, "m": m, "gamma": gamma, "skip": skip}, slope >= bound,
                       slope - bound, {"slope": slope}, runtime_ms=tm.ms, data={"t": t, "sup": y})


def heat_kernel_surrogate(n_v: int = 33, l_v: float = 3.0, tau0: float = 0.05, dt: float | None = None,
                          n_steps: int = 200) -> dict:
    """Pure diffusion with a = I, b = c = 0, from a narrow Gaussian.

    Odd ``n_v`` puts a node at the peak.  The closed form is
    f = (4 pi tau)^{-3/2} exp(-|v|^2/(4 tau)),
    tau = tau0 + t, with sup|D^2 f| = (4 pi tau)^{-3/2} / (2 tau) at v = 0.
    Returns the numerical and closed-form series on the stored times.
    """
    from .solver import divergence_operator

    grid = PhaseGrid.create(n_v, l_v)
    vel = grid.velocity
    h = vel.h
    f = (4 * np.pi * tau0) ** -1.5 * np.exp(-vel.speed2 / (4 * tau0))[None]
    a = np.broadcast_to(np.eye(3), (1,) + vel.speed2.shape + (3, 3))
    coeff = CoefficientField(vel, a, np.zeros((1,) + vel.speed2.shape + (3,)), np.zeros((1,) + vel.speed2.shape))
    if dt is None:
        dt = 0.2 * h * h / 6
    ts, num, exact = [], [], []
    t = 0.0
    for n in range(1, n_steps + 1):
        f = f + dt * divergence_operator(f, coeff, h)
        t += dt
        ts.append(t)
        num.append(d2v_weighted_sup(DistributionField(grid, f, t), 0.0))
        tau = tau0 + t
        exact.append((4 * np.pi * tau) ** -1.5 / (2 * tau))
    return {"t": np.array(ts), "numerical": np.array(num), "closed_form": np.array(exact)}


# -- uniqueness contraction -------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonWeight:
    """r(t) = C (2 + t^{-1 + alpha^2/(6-alpha)}) and its integral from 0."""

    C: float
    alpha: float

    def r(self, t):
        th = time_exponent(self.alpha)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self.C * (2 + t ** (-1 + th))

    def integral(self, t):
        th = time_exponent(self.alpha)
        t = np.asarray(t, dtype=float)
        return self.C * (2 * t + t ** th / th)


def contraction_series(traj_a, traj_b, alpha: float, C_weight: float, weight: float = 10.0) -> tuple:
    """(times, sup_{x,v} W(t)) with W = 1/2 <v>^weight w^2, w = e^{-int r}(g - f)."""
    fa, fb = _fields_of(traj_a), _fields_of(traj_b)
    if len(fa) != len(fb):
        raise ValueError("trajectories have different numbers of stored times")
    if fa[0].grid != fb[0].grid:
        raise ValueError("trajectories live on different grids")
    cw = ComparisonWeight(C_weight, alpha)
    jap = fa[0].grid.velocity.jap ** weight
    t = np.array([f.time for f in fa])
    tb = np.array([f.time for f in fb])
    if not np.allclose(t, tb, rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(t))))):
        raise ValueError("trajectories have different diagnostic times")
    W = np.empty(len(t))
    for i, (a, b) in enumerate(zip(fa, fb)):
        w = np.exp(-cw.integral(t[i])) * (b.values - a.values)
        W[i] = float(np.max(0.5 * jap * w * w))
    return t, W


def uniqueness_contraction_check(traj_a, traj_b, alpha: float, C_weight: float, weight: float = 10.0,
                                 tol: float = 0.0) -> CheckResult:
    """sup W series of two trajectories; passes when sup W <= tol everywhere."""
    with _Timer() as tm:
        t, W = contraction_series(traj_a, traj_b, alpha, C_weight, weight)
        j = int(np.argmax(W))
    return CheckResult("uniqueness_contraction", {"alpha": alpha, "C": C_weight, "weight": weight, "tol": tol},
                       bool(W[j] <= tol), float(tol - W[j]), {"t": float(t[j]), "W": float(W[j])},
                       runtime_ms=tm.ms, data={"t": t, "W": W})


# -- interpolation inequalities -------------------------------------------------------

@dataclass(frozen=True)
class PolyGaussian:
    """phi(v) = (p0 + p.(v-c) + (v-c)^T Q (v-c)) exp(-a |v-c|^2), with exact gradient and Hessian."""

    p0: float
    p: tuple = (0.0, 0.0, 0.0)
    Q: tuple = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    a: float = 1.0
    c: tuple = (0.0, 0.0, 0.0)
    name: str = ""

    def _parts(self, v):
        y = np.asarray(v, dtype=float) - np.asarray(self.c)
        p = np.asarray(self.p, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        Q = 0.5 * (Q + Q.T)
        P = self.p0 + y @ p + np.einsum("...i,ij,...j->...", y, Q, y)
        dP = p + 2 * y @ Q
        G = np.exp(-self.a * np.sum(y * y, axis=-1))
        dG = -2 * self.a * y * G[..., None]
        return y, P, dP, Q, G, dG

    def __call__(self, v):
        _, P, _, _, G, _ = self._parts(v)
        return P * G

    def hessian(self, v):
        y, P, dP, Q, G, dG = self._parts(v)
        D2G = (4 * self.a ** 2 * y[..., :, None] * y[..., None, :] - 2 * self.a * np.eye(3)) * G[..., None, None]
        return (2 * Q * G[..., None, None] + dP[..., :, None] * dG[..., None, :]
                + dG[..., :, None] * dP[..., None, :] + P[..., None, None] * D2G)


@dataclass(frozen=True)
class SineMode:
    """phi(v) = sin(omega v1), checked on balls around ``check_center``."""

    omega: float = 1.0
    name: str = ""
    check_center: tuple | None = None

    def __call__(self, v):
        return np.sin(self.omega * np.asarray(v)[..., 0])

    def hessian(self, v):
        v = np.asarray(v)
        H = np.zeros(v.shape[:-1] + (3, 3))
        H[..., 0, 0] = -self.omega ** 2 * np.sin(self.omega * v[..., 0])
        return H


def interpolation_corpus() -> list:
    """Twelve polynomial-times-Gaussian functions with closed-form Hessians."""
    Z = ((0.0, 0.0, 0.0),) * 3
    return [
        PolyGaussian(1.0, name="gauss"),
        PolyGaussian(1.0, a=0.25, name="wide-gauss"),
        PolyGaussian(1.0, a=4.0, name="narrow-gauss"),
        PolyGaussian(0.0, p=(1.0, 0.0, 0.0), name="v1-gauss"),
        PolyGaussian(0.0, p=(0.5, -1.0, 2.0), a=0.5, name="linear-gauss"),
        PolyGaussian(0.0, Q=((1.0, 0, 0), (0, 0, 0), (0, 0, 0)), name="v1sq-gauss"),
        PolyGaussian(0.0, Q=((0, 1.0, 0), (1.0, 0, 0), (0, 0, 0)), a=0.75, name="v1v2-gauss"),
        PolyGaussian(1.0, Q=((-1.0, 0, 0), (0, -1.0, 0), (0, 0, -1.0)), name="mexican-hat"),
        PolyGaussian(2.0, p=(0.0, 1.0, 0.0), Q=((0.5, 0, 0.2), (0, -0.3, 0), (0.2, 0, 1.0)), a=1.5,
                     name="mixed-quadratic"),
        PolyGaussian(1.0, c=(0.5, -0.5, 0.25), name="shifted-gauss"),
        PolyGaussian(-1.0, p=(1.0, 1.0, 1.0), Q=Z, a=2.0, c=(0.0, 0.3, 0.0), name="affine-narrow"),
        PolyGaussian(3.0, Q=((0.2, 0.1, 0.0), (0.1, 0.2, 0.1), (0.0, 0.1, 0.2)), a=0.1, name="flat-quadratic"),
    ]


def _ball_samples(center, radius, spacing):
    n = int(math.floor(radius / spacing))
    s = np.arange(-n, n + 1) * spacing
    cube = np.stack(np.meshgrid(s, s, s, indexing="ij"), -1).reshape(-1, 3)
    cube = cube[np.sum(cube ** 2, axis=1) <= radius ** 2 + 1e-12]
    return cube + np.asarray(center, dtype=float)


def pair_seminorms(P, series, chunk: int = 256) -> list[float]:
    """Exhaustive Hoelder seminorms over all pairs of the points P.

    ``series`` is a list of (values, exponent); values of shape (n,) or
    (n, ...) (non-scalar differences use the Frobenius norm).  All
    seminorms share one pass over the pair distances.
    """
    n = len(P)
    flats = [(np.asarray(v, dtype=float).reshape(n, -1), e) for v, e in series]
    best = [0.0] * len(flats)
    for i0 in range(0, n - 1, chunk):
        i1 = min(i0 + chunk, n)
        d = np.sqrt(np.sum((P[i0:i1, None, :] - P[None, i0:, :]) ** 2, axis=-1))
        # keep j > i only; the rest (self pairs and mirrored pairs) get an infinite distance
        d[np.tril_indices(i1 - i0, 0, d.shape[1])] = np.inf
        logd = np.log(d)
        for k, (vals, expo) in enumerate(flats):
            diff = vals[i0:i1, None, :] - vals[None, i0:, :]
            dn = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)) if vals.shape[1] > 1 else np.abs(diff[..., 0])
            q = dn * np.exp(-expo * logd)
            best[k] = max(best[k], float(np.max(q)))
    return best


def interpolation_inequality_checks(corpus=None, alpha: float = 0.5, beta: float = 0.5, C_interp: float = 10.0,
                                    C_decay: float = 4.0, spacing: float = 0.25, center=(0.0, 0.0, 0.0),
                                    k1: float = 4.0, k2: float = 1.0, decay_alpha: float = 0.5,
                                    decay_beta: float = 0.25) -> list:
    """Per-function checks of the two interpolation inequalities.

    Interpolation: ||D^2 phi||_{L^inf(B_1)} <= C ([phi]_{C^alpha(B_2)}
    + [phi]^{beta/(2+beta-alpha)} [D^2 phi]_{C^beta(B_2)}^{1-beta/(2+beta-alpha)}).

    Decay: [<v>^l phi]_{C^b} <= C [<v>^{k2} phi]_{C^a}^{b/a} ||phi||_{L^{inf,k1}}^{1-b/a}
    with l = k1 (1 - b/a) + k2 b/a; both seminorms use the same pair set.

    Hoelder seminorms are exhaustive over pairs of a cubic lattice of the
    given spacing inside B_2 around ``center`` (or the function's own
    ``check_center``); matrix differences use the Frobenius norm.
    """
    corpus = interpolation_corpus() if corpus is None else corpus
    results = []
    r = decay_beta / decay_alpha
    ell = k1 * (1 - r) + k2 * r
    e = beta / (2 + beta - alpha)
    for fn in corpus:
        ctr = getattr(fn, "check_center", None) or center
        with _Timer() as tm:
            P2 = _ball_samples(ctr, 2.0, spacing)
            P1 = P2[np.sum((P2 - np.asarray(ctr)) ** 2, axis=1) <= 1.0 + 1e-12]
            phi = fn(P2)
            lhs = float(np.max(np.sqrt(np.sum(fn.hessian(P1) ** 2, axis=(-2, -1)))))
            jap2 = 1.0 + np.sum(P2 ** 2, axis=1)
            s_a, s_b, lhs_d, semi = pair_seminorms(P2, [
                (phi, alpha), (fn.hessian(P2), beta),
                (jap2 ** (ell / 2) * phi, decay_beta), (jap2 ** (k2 / 2) * phi, decay_alpha)])
            rhs = C_interp * (s_a + s_a ** e * s_b ** (1 - e))
            sup_k1 = float(np.max(jap2 ** (k1 / 2) * np.abs(phi)))
            rhs_d = C_decay * semi ** r * sup_k1 ** (1 - r)
        ok_i = lhs <= rhs * (1 + 1e-12)
        ok_d = lhs_d <= rhs_d * (1 + 1e-12)
        results.append(CheckResult(
            f"interpolation:{getattr(fn, 'name', '')}",
            {"alpha": alpha, "beta": beta, "C": C_interp, "C_decay": C_decay, "spacing": spacing,
             "k1": k1, "k2": k2, "ell": ell},
            bool(ok_i and ok_d), min(rhs - lhs, rhs_d - lhs_d),
            {"D2_sup": lhs, "interp_rhs": rhs, "decay_lhs": lhs_d, "decay_rhs": rhs_d},
            runtime_ms=tm.ms, data={"interp_ok": ok_i, "decay_ok": ok_d}))
    return results


# -- time regularity from (x, v) regularity ------------------------------------------------

def _cylinder_points(fields, z0, r, space_dim):
    """Indices (n, xcell, vcell) of stored points in Q_r(z0)."""
    t0, x0, v0 = z0.t, np.asarray(z0.x), np.asarray(z0.v)
    grid = fields[0].grid
    X = grid.space.positions().reshape(-1, 3)
    V = grid.velocity.points
    out = []
    for n, f in enumerate(fields):
        dt = f.time - t0
        if not (-r * r < dt <= 1e-15):
            continue
        dv = np.linalg.norm(V - v0, axis=1)
        vin = np.nonzero(dv < r)[0]
        for xi, x in enumerate(X):
            y = x - x0 - dt * v0
            if space_dim:
                y = grid.space.wrap(y)
                y[space_dim:] = 0.0
            else:
                y = np.zeros(3)
            if np.linalg.norm(y) < r ** 3:
                for vi in vin:
                    out.append((n, xi, vi))
    return np.array(out, dtype=int).reshape(-1, 3)


def _kinetic_pairs_max(fields, idx, alpha, same_time_only, budget, rng):
    grid = fields[0].grid
    dim_x = grid.space.dim_x
    X = grid.space.positions().reshape(-1, 3)
    V = grid.velocity.points
    times = np.array([f.time for f in fields])
    vals = np.array([fields[n].values.reshape(len(X), -1)[xi, vi] for n, xi, vi in idx])
    m = len(idx)
    if m < 2:
        return 0.0
    total = m * (m - 1) // 2
    if total <= budget:
        ii, jj = np.triu_indices(m, 1)
    else:
        ii = rng.integers(0, m, budget)
        jj = rng.integers(0, m, budget)
    t1, t2 = times[idx[ii, 0]], times[idx[jj, 0]]
    keep = (ii != jj)
    if same_time_only:
        keep &= t1 == t2
    ii, jj, t1, t2 = ii[keep], jj[keep], t1[keep], t2[keep]
    if len(ii) == 0:
        return 0.0
    x1, x2 = X[idx[ii, 1]], X[idx[jj, 1]]
    v1, v2 = V[idx[ii, 2]], V[idx[jj, 2]]
    dt = t2 - t1
    dx = x2 - x1 - dt[:, None] * v1
    if dim_x:
        dx = grid.space.wrap(dx)
        dx[:, dim_x:] = 0.0
    else:
        dx = np.zeros_like(dx)
    rho = np.sqrt(np.abs(dt)) + np.linalg.norm(dx, axis=1) ** (1 / 3) + np.linalg.norm(v2 - v1, axis=1)
    diff = np.abs(vals[jj] - vals[ii])
    q = np.where(rho > 0, diff / np.where(rho > 0, rho, 1.0) ** alpha, 0.0)
    return float(np.max(q))


def holder_t_from_xv_check(trajectory, alpha: float, centers, gamma: float, C_bound: float = 10.0,
                           budget: int = 200_000, seed: int = 0) -> CheckResult:
    """Max over centers of [f]_{C^a_kin(Q_1(z0))} / (<v0>^{a(1+g/2)+}(||f||_inf + [f]_{C^a_kin,x,v}(Q_2(z0)))).

    The (x, v) seminorm uses equal-time pairs only; both use the same pair
    budget.  Cylinders are clipped to the stored window and the grid.
    """
    fields = _fields_of(trajectory)
    rng = np.random.default_rng(seed)
    ratios = []
    with _Timer() as tm:
        for z0 in centers:
            q1 = _cylinder_points(fields, z0, 1.0, fields[0].grid.space.dim_x)
            q2 = _cylinder_points(fields, z0, 2.0, fields[0].grid.space.dim_x)
            if len(q1) < 2 or len(q2) < 2:
                raise ValueError("window leaves the stored trajectory")
            num = _kinetic_pairs_max(fields, q1, alpha, False, budget, rng)
            sxv = _kinetic_pairs_max(fields, q2, alpha, True, budget, rng)
            n = fields[0].grid.velocity.n_v ** 3
            sup = max(abs(fields[a].values.reshape(-1, n)[b, c]) for a, b, c in q2)
            jv = float(japanese(float(np.dot(z0.v, z0.v))))
            den = jv ** (alpha * max(1 + gamma / 2, 0.0)) * (sup + sxv)
            ratios.append(num / den if den > 0 else 0.0)
        worst = float(max(ratios))
    return CheckResult("holder_t_from_xv", {"alpha": alpha, "gamma": gamma, "C": C_bound}, worst <= C_bound,
                       C_bound - worst, {"ratios": ratios}, seed, tm.ms, data={"ratios": ratios})


# -- suites -------------------------------------------------------------------------------

def kernel_suite(n_fields: int = 5, n_v: int = 12, seed: int = 0) -> list:
    """Oracle equivalence (FFT vs direct sum) and divergence identities."""
    out = []
    rng = np.random.default_rng(seed)
    grid = PhaseGrid.create(n_v, 3.0)
    fields = rng.random((n_fields, n_v, n_v, n_v))
    for gamma in (-3.0, -2.5, -2.0, -1.0, -0.5):
        k = CollisionKernel(gamma)
        with _Timer() as tm:
            fa = compute_coefficients_fast(fields, grid.velocity, k)
            da = compute_coefficients_direct(fields, grid.velocity, k)
            err = max(float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))
                      for x, y in ((fa.a, da.a), (fa.b, da.b), (fa.c, da.c)))
        out.append(CheckResult("kernel_oracle", {"gamma": gamma, "n_v": n_v, "fields": n_fields}, err <= 1e-10,
                               1e-10 - err, {"rel_err": err}, seed, tm.ms))
    res = {}
    with _Timer() as tm:
        for n in (16, 32):
            g = PhaseGrid.create(n, 5.0)
            c = compute_coefficients_fast(make_maxwellian(g).values, g.velocity, CollisionKernel(-1.0))
            res[n] = divergence_identity_residuals(c)
    rb, rc = res[16][0] / res[32][0], res[16][1] / res[32][1]
    out.append(CheckResult("divergence_identities", {"gamma": -1.0, "n_v": [16, 32]}, min(rb, rc) >= 3,
                           min(rb, rc) - 3, {"ratio_b": rb, "ratio_c": rc}, runtime_ms=tm.ms))
    return out


def solver_suite() -> list:
    """Maxwellian stationarity refinement and homogeneous conservation."""
    from .solver import SolverConfig, collision_operator, collision_step, stable_dt
    from .diagnostics import hydrodynamic_fields

    out = []
    with _Timer() as tm:
        q = {}
        for n in (16, 32):
            g = PhaseGrid.create(n, 5.0)
            mu = make_maxwellian(g)
            c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(-1.0))
            dt = stable_dt(c, g.velocity.h)
            cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=dt, positivity="off")
            f1 = collision_step(mu, c, dt, cfg)
            q[n] = float(np.max(np.abs(f1.values - mu.values)) / dt)
    ratio = q[16] / q[32]
    out.append(CheckResult("maxwellian_stationarity", {"gamma": -1.0, "n_v": [16, 32]}, ratio >= 3, ratio - 3,
                           {"ratio": ratio, "Q16": q[16], "Q32": q[32]}, runtime_ms=tm.ms))
    with _Timer() as tm:
        g = PhaseGrid.create(16, 5.0)
        mu = make_maxwellian(g)
        c = compute_coefficients_fast(mu.values, g.velocity, CollisionKernel(-1.0))
        dt = 0.9 * stable_dt(c, g.velocity.h)
        cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=20 * dt, positivity="off")
        f = mu
        for _ in range(20):
            f = collision_step(f, None, dt, cfg)
        m0, m1 = hydrodynamic_fields(mu).M[0], hydrodynamic_fields(f).M[0]
        drift = abs(m1 - m0) / m0
    out.append(CheckResult("mass_conservation", {"gamma": -1.0, "n_v": 16, "steps": 20}, drift <= 1e-12,
                           1e-12 - drift, {"drift": drift}, runtime_ms=tm.ms))
    return out


def estimates_suite(seed: int = 0) -> list:
    """Groenwall sweep, Schauder exponents, supersolution blow-up and interpolation corpus."""
    from .diagnostics import schauder_exponents

    out = []
    rng = np.random.default_rng(seed)
    worst = np.inf
    with _Timer() as tm:
        for _ in range(200):
            A, B = rng.uniform(0.1, 10.0, 2)
            t = np.linspace(0.0, 1 / (math.e * A * B), 25)
            H = gronwall_equality_branch(A, B, t)
            r = gronwall_threshold(A, B, t, H)
            worst = min(worst, r.margin if r.passed is not None else -np.inf)
    out.append(CheckResult("gronwall_sweep", {"draws": 200}, worst >= 0, worst, None, seed, tm.ms))
    with _Timer() as tm:
        s = schauder_exponents(0.5, -2.0, 30.0, 10.0)
        # q = 0 - (-2) + (1 - 1/22) * max(-2 - 20/3, 28*(13/6) - 20) = 2 + (21/22)(2/9)
        err = max(abs(s.p_alpha - 28 / 3), abs(s.time_exponent - 1 / 22), abs(s.q - (2 + 21 / 22 * 2 / 9)))
    out.append(CheckResult("schauder_exponents", {"alpha": 0.5, "gamma": -2.0, "k": 30, "m": 10}, err <= 1e-12,
                           1e-12 - err, {"q": s.q}, runtime_ms=tm.ms))
    with _Timer() as tm:
        a = solve_gbar(1.0, 0.5, 2.0).blowup_time
        b = gbar_blowup_quadrature(1.0, 0.5, 2.0)
        rel = abs(a - b) / b
    out.append(CheckResult("gbar_blowup", {"N": 1, "alpha": 0.5, "G0": 2}, rel <= 1e-6, 1e-6 - rel,
                           {"adaptive": a, "quadrature": b}, runtime_ms=tm.ms))
    out.extend(interpolation_inequality_checks())
    return out


SUITES = {"kernel": kernel_suite, "solver": solver_suite, "estimates": estimates_suite}


def run_suite(name: str) -> list:
    if name == "all":
        res = []
        for fn in SUITES.values():
            res.extend(fn())
        return res
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    return SUITES[name]()


__all__ = [
    "CheckResult", "BarrierSpec", "barrier_residual", "find_beta_star", "barrier_fit", "coefficient_K",
    "boundary_dominance", "gronwall_equality_branch", "gronwall_equality_lambertw", "gronwall_threshold", "initial_matching_check",
    "GaussianTestFunction", "weak_form_residual", "trajectory_K", "linftyk_propagation_check",
    "linftyk_stability", "HolderSupersolution", "gbar_blowup_closed_form", "gbar_blowup_quadrature",
    "solve_gbar", "holder_propagation_check", "log_slope", "d2v_decay_check", "heat_kernel_surrogate",
    "ComparisonWeight", "contraction_series", "uniqueness_contraction_check", "PolyGaussian", "SineMode",
    "interpolation_corpus", "interpolation_inequality_checks", "holder_t_from_xv_check", "run_suite",
]
