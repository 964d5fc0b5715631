"""Monitored functionals of a distribution field or a stored trajectory.

Everything here is a pure function of immutable snapshots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .coefficients import CoefficientField, CollisionKernel, compute_coefficients_fast, ellipticity_spectrum
from .grid import DistributionField, PhasePoint, TrajectoryRecord, japanese, weighted_sup_norm

CSV_COLUMNS = (
    "t", "mass_min_x", "mass_max_x", "energy_max_x", "entropy_max_x", "psi", "psi_tilde", "linfty_k",
    "ellipticity_min", "ellipticity_aniso_par", "ellipticity_aniso_perp", "holder_est_alpha",
    "holder_g_sup", "d2v_weighted_sup", "clamped_mass", "seed",
)

ENTROPY_FLOOR = 1e-300


# -- hydrodynamic moments -------------------------------------------------------

@dataclass
class HydroFields:
    """Mass, energy and entropy densities, one value per x cell."""

    M: np.ndarray
    E: np.ndarray
    H: np.ndarray


def hydrodynamic_fields(f: DistributionField) -> HydroFields:
    """Rectangle-rule v-moments of f per x cell.

    The entropy integrand is f log f with 0 log 0 = 0; values are floored at
    1e-300 before the logarithm.
    """
    vel = f.grid.velocity
    vol = vel.cell_volume
    u = f.values
    ax = (-3, -2, -1)
    M = np.sum(u, axis=ax) * vol
    E = np.sum(u * vel.speed2, axis=ax) * vol
    H = np.sum(u * np.log(np.maximum(u, ENTROPY_FLOOR)), axis=ax) * vol
    return HydroFields(M, E, H)


# -- continuation functionals --------------------------------------------------

def default_psi_p(gamma: float) -> float:
    """A Lebesgue exponent above 3/(3+gamma) (infinite at gamma = -3)."""
    if gamma == -3:
        return math.inf
    return 3.0 / (3.0 + gamma) + 1.0


def default_psi_ell(gamma: float) -> float:
    """A weight above 3|gamma|/(5+gamma)."""
    return 3.0 * abs(gamma) / (5.0 + gamma) + 0.5


def _check_psi_p(gamma, p):
    if gamma == -3 and not math.isinf(p):
        raise ValueError("gamma = -3 requires p = inf")
    if -3 < gamma <= -2 and not p > 3.0 / (3.0 + gamma):
        raise ValueError(f"p must exceed 3/(3+gamma) = {3 / (3 + gamma):g}")


def _vnorm(u, vel, p, k=0.0):
    """Per-x L^{p,k}_v norm of |u|."""
    g = vel.jap ** k * np.abs(u) if k else np.abs(u)
    ax = (-3, -2, -1)
    if math.isinf(p):
        return np.max(g, axis=ax)
    if p == 1:
        return np.sum(g, axis=ax) * vel.cell_volume
    return (np.sum(g ** p, axis=ax) * vel.cell_volume) ** (1.0 / p)


def psi_value(f: DistributionField, gamma: float, p_choice: float | None = None) -> float:
    """The instantaneous quantity whose running sup is Psi.

    For gamma in (-2, 0) this is sup_x ||f||_{L^{1,2}_v}; for gamma in
    [-3, -2] it is sup_x ||f||_{L^1_v} + sup_x ||f||_{L^p_v}.
    """
    vel = f.grid.velocity
    if gamma > -2:
        return float(np.max(_vnorm(f.values, vel, 1, 2.0)))
    p = default_psi_p(gamma) if p_choice is None else p_choice
    _check_psi_p(gamma, p)
    return float(np.max(_vnorm(f.values, vel, 1)) + np.max(_vnorm(f.values, vel, p)))


def psi_tilde_value(f: DistributionField, gamma: float, ell_choice: float | None = None) -> float:
    """Instantaneous quantity of the older criterion.

    For gamma in [-3, -2]: sup_x ||f||_{L^{1,ell}_v} + sup |f|.
    """
    vel = f.grid.velocity
    if gamma > -2:
        return float(np.max(_vnorm(f.values, vel, 1, 2.0)))
    ell = default_psi_ell(gamma) if ell_choice is None else ell_choice
    if not ell > 3 * abs(gamma) / (5 + gamma):
        raise ValueError(f"ell must exceed 3|gamma|/(5+gamma) = {3 * abs(gamma) / (5 + gamma):g}")
    return float(np.max(_vnorm(f.values, vel, 1, ell)) + np.max(np.abs(f.values)))


def _fields_of(trajectory) -> list:
    if isinstance(trajectory, TrajectoryRecord):
        return list(trajectory.snapshots)
    if isinstance(trajectory, DistributionField):
        return [trajectory]
    return list(trajectory)


def psi(trajectory, gamma: float, p_choice: float | None = None) -> np.ndarray:
    """Psi(t) at every stored time: running sup of :func:`psi_value`."""
    vals = [psi_value(f, gamma, p_choice) for f in _fields_of(trajectory)]
    return np.maximum.accumulate(np.asarray(vals, dtype=float)) if vals else np.zeros(0)


def psi_tilde(trajectory, gamma: float, ell_choice: float | None = None) -> np.ndarray:
    """Running sup of :func:`psi_tilde_value`."""
    vals = [psi_tilde_value(f, gamma, ell_choice) for f in _fields_of(trajectory)]
    return np.maximum.accumulate(np.asarray(vals, dtype=float)) if vals else np.zeros(0)


class PsiTracker:
    """Incremental running sups of Psi and Psi-tilde for a live run."""

    def __init__(self, gamma: float, p_choice: float | None = None, ell_choice: float | None = None):
        self.gamma = gamma
        self.p_choice = p_choice
        self.ell_choice = ell_choice
        if gamma <= -2 and p_choice is not None:
            _check_psi_p(gamma, p_choice)
        self.psi = 0.0
        self.psi_tilde = 0.0

    def update(self, f: DistributionField) -> tuple[float, float]:
        self.psi = max(self.psi, psi_value(f, self.gamma, self.p_choice))
        self.psi_tilde = max(self.psi_tilde, psi_tilde_value(f, self.gamma, self.ell_choice))
        return self.psi, self.psi_tilde


# -- Hoelder estimates -----------------------------------------------------------

@dataclass
class HolderEstimate:
    """Sampled Hoelder quotient maximum.

    ``seminorm_value`` is a lower bound for the seminorm over the sampled
    region; ``g_sup`` is the squared Euclidean equal-time quotient maximum
    restricted to |chi|, |nu| <= 1.
    """

    alpha: float
    weight_m: float
    seminorm_value: float
    metric: str
    sample_count: int
    region: dict
    g_sup: float = 0.0
    witness: tuple | None = None
    seed: int | None = None


def _window_arrays(window):
    fields = _fields_of(window)
    if not fields:
        raise ValueError("empty window")
    grid = fields[0].grid
    times = np.array([f.time for f in fields], dtype=float)
    vals = np.stack([f.values for f in fields])
    return grid, times, vals


def _offsets(grid, times, max_sep, metric, time_pairs):
    """Integer offsets (dt, dx..., dv1, dv2, dv3) with |chi|, |nu| <= max_sep."""
    h = grid.velocity.h
    rv = int(math.floor(max_sep / h + 1e-12))
    rv = min(rv, grid.velocity.n_v - 1)
    dim_x = grid.space.dim_x
    rx = 0
    if dim_x:
        rx = min(int(math.floor(max_sep / grid.space.dx + 1e-12)), grid.space.n_x // 2)
    rng_v = np.arange(-rv, rv + 1)
    dv = np.stack(np.meshgrid(rng_v, rng_v, rng_v, indexing="ij"), -1).reshape(-1, 3)
    dv = dv[np.sum((dv * h) ** 2, axis=1) <= max_sep ** 2 + 1e-12]
    if dim_x:
        rng_x = np.arange(-rx, rx + 1)
        dx = np.stack(np.meshgrid(*([rng_x] * dim_x), indexing="ij"), -1).reshape(-1, dim_x)
        dx = dx[np.sum((dx * grid.space.dx) ** 2, axis=1) <= max_sep ** 2 + 1e-12]
    else:
        dx = np.zeros((1, 0), dtype=int)
    nt = len(times)
    dts = np.arange(-(nt - 1), nt) if (metric == "kinetic" and time_pairs) else np.array([0])
    out = []
    for a in dts:
        for b in dx:
            for c in dv:
                out.append(np.concatenate([[a], b, c]))
    off = np.array(out, dtype=int)
    nonzero = np.any(off != 0, axis=1)
    return off[nonzero]


def _shift_pair(vals, off, dim_x, nt):
    """Views (A, B) with B[z] = vals[z + off] where z + off is in range.

    x offsets wrap; t and v offsets do not.  Returns the index slices of the
    base points as well.
    """
    ndim = vals.ndim
    base = [slice(None)] * ndim
    other = [slice(None)] * ndim
    # time axis 0, x axes 1..dim_x (or the single dummy axis), v axes last three
    a = off[0]
    base[0] = slice(max(0, -a), nt - max(0, a))
    other[0] = slice(max(0, a), nt - max(0, -a))
    shifted = vals
    for d in range(dim_x):
        s = off[1 + d]
        if s:
            shifted = np.roll(shifted, -s, axis=1 + d)
    n = vals.shape[-1]
    for d in range(3):
        s = off[1 + dim_x + d]
        ax = ndim - 3 + d
        base[ax] = slice(max(0, -s), n - max(0, s))
        other[ax] = slice(max(0, s), n - max(0, -s))
    return vals[tuple(base)], shifted[tuple(other)], tuple(base)


def _region_mask(grid, region):
    vel = grid.velocity
    mask = np.ones(vel.speed2.shape, dtype=bool)
    if region and region.get("v_max") is not None:
        mask &= vel.speed2 <= region["v_max"] ** 2 + 1e-12
    return mask


def holder_seminorm(window, alpha: float, weight_m: float = 0.0, metric: str = "euclidean",
                    sampler: str = "exhaustive", n_samples: int = 100_000, seed: int = 0,
                    region: dict | None = None, max_sep: float = 1.0,
                    weight_inside: bool = False) -> HolderEstimate:
    """Maximum of <v>^m |f(z) - f(z')| / dist(z, z')^alpha over sampled pairs.

    Parameters
    ----------
    window : DistributionField, sequence of fields, or TrajectoryRecord
        Time-indexed snapshots on one grid.
    metric : {"euclidean", "kinetic"}
        Euclidean distance in (x, v) at equal times, or the kinetic distance
        rho, which also pairs different stored times.
    sampler : {"exhaustive", "random"}
        All pairs with |chi|, |nu| <= max_sep, or ``n_samples`` of them drawn
        with a seeded generator.
    region : dict, optional
        ``{"v_max": R}`` keeps both points in |v| <= R.
    weight_inside : bool
        Use |<v>^m f(z) - <v'>^m f(z')| (seminorm of the weighted function)
        instead of the weight at the base point.

    Notes
    -----
    Physical coordinates that the field does not depend on are dropped: in
    homogeneous mode the x displacement is ignored, and with dim_x = 1 only
    its first component enters rho.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if metric not in ("euclidean", "kinetic"):
        raise ValueError("metric must be 'euclidean' or 'kinetic'")
    grid, times, vals = _window_arrays(window)
    vel = grid.velocity
    dim_x = grid.space.dim_x
    nt = len(times)
    offs = _offsets(grid, times, max_sep, metric, time_pairs=True)
    if len(offs) == 0:
        raise ValueError("empty sample set")
    mask = _region_mask(grid, region)
    wgt = vel.jap ** weight_m
    if weight_inside:
        vals = vals * wgt
    h = vel.h
    dxs = grid.space.dx
    vgrid = vel.v
    rng = np.random.default_rng(seed)
    if sampler == "random":
        total_points = vals.size
        n_samples = int(n_samples)
        pick = rng.integers(0, len(offs), size=n_samples)
        base_flat = rng.integers(0, total_points, size=n_samples)
        return _holder_random(vals, times, grid, offs, pick, base_flat, alpha, weight_m, wgt, weight_inside,
                              metric, mask, region, seed)
    if sampler != "exhaustive":
        raise ValueError("sampler must be 'exhaustive' or 'random'")
    best, gbest, count, witness = 0.0, 0.0, 0, None
    for off in offs:
        A, B, bidx = _shift_pair(vals, off, dim_x, nt)
        if A.size == 0:
            continue
        vsl = bidx[-3:]
        dv = float(np.sqrt(np.sum((off[-3:] * h) ** 2)))
        dx = off[1:1 + dim_x] * dxs
        vo = tuple(slice(max(0, s), vel.n_v - max(0, -s)) for s in off[-3:])
        ok = mask[vsl] & mask[vo]
        if not np.any(ok):
            continue
        diff = np.abs(B - A)
        if not weight_inside:
            diff = diff * wgt[vsl]
        if off[0] == 0:
            dxn = float(np.sqrt(np.sum(dx ** 2)))
            q = diff / (dxn ** 2 + dv ** 2) ** (alpha / 2)
            gbest = max(gbest, float(np.max(np.where(ok, q, 0.0))) ** 2)
            if metric == "kinetic":
                q = diff / (dxn ** (1 / 3) + dv) ** alpha
        else:
            ti = np.arange(nt)[bidx[0]]
            tdiff = times[ti + off[0]] - times[ti]
            vb = vgrid[vsl]
            lead = (len(ti),) + (1,) * max(dim_x, 1)
            if dim_x:
                # x displacement minus (t' - t) v over the x components the field depends on
                comp = dx - tdiff[:, None, None, None, None] * vb[None, ..., :dim_x]
                comp = comp - grid.space.l_x * np.round(comp / grid.space.l_x)
                xpart = np.sqrt(np.sum(comp ** 2, axis=-1)) ** (1 / 3)
                xpart = xpart.reshape(lead + vb.shape[:-1])
            else:
                xpart = 0.0
            rho = np.sqrt(np.abs(tdiff)).reshape(lead + (1, 1, 1)) + xpart + dv
            q = diff / rho ** alpha
        q = np.where(ok, q, 0.0)
        count += int(np.count_nonzero(np.broadcast_to(ok, q.shape)))
        j = int(np.argmax(q))
        if q.flat[j] > best:
            best = float(q.flat[j])
            witness = (tuple(int(i) for i in off), tuple(int(i) for i in np.unravel_index(j, q.shape)))
    if count == 0:
        raise ValueError("empty sample set")
    return HolderEstimate(alpha, weight_m, best, metric, count, dict(region or {}), gbest, witness, None)


def _holder_random(vals, times, grid, offs, pick, base_flat, alpha, weight_m, wgt, weight_inside, metric,
                   mask, region, seed):
    vel = grid.velocity
    dim_x = grid.space.dim_x
    shape = vals.shape
    idx = np.array(np.unravel_index(base_flat, shape)).T  # (S, ndim)
    off = offs[pick]
    # time, x axes (1..dim_x or the dummy axis), v axes
    other = idx.copy()
    other[:, 0] += off[:, 0]
    for d in range(dim_x):
        other[:, 1 + d] = (other[:, 1 + d] + off[:, 1 + d]) % shape[1 + d]
    other[:, -3:] += off[:, -3:]
    n = vel.n_v
    ok = (other[:, 0] >= 0) & (other[:, 0] < len(times)) & np.all((other[:, -3:] >= 0) & (other[:, -3:] < n), axis=1)
    idx, other, off = idx[ok], other[ok], off[ok]
    vb, vo = tuple(idx[:, -3:].T), tuple(other[:, -3:].T)
    ok = mask[vb] & mask[vo]
    idx, other, off = idx[ok], other[ok], off[ok]
    if len(idx) == 0:
        raise ValueError("empty sample set")
    A = vals[tuple(idx.T)]
    B = vals[tuple(other.T)]
    vb = tuple(idx[:, -3:].T)
    diff = np.abs(B - A)
    if not weight_inside:
        diff = diff * wgt[vb]
    h = vel.h
    dv = off[:, -3:] * h
    dx = off[:, 1:1 + dim_x] * grid.space.dx
    tdiff = times[other[:, 0]] - times[idx[:, 0]]
    v = vel.v[vb]
    eq_t = tdiff == 0
    d2 = np.sum(dx ** 2, axis=1) + np.sum(dv ** 2, axis=1)
    q_euc = diff / np.where(d2 > 0, d2, 1.0) ** (alpha / 2)
    gvals = np.where(eq_t & (d2 > 0), q_euc, 0.0) ** 2
    if metric == "euclidean":
        q = np.where(eq_t & (d2 > 0), q_euc, 0.0)
    else:
        comp = dx - tdiff[:, None] * v[:, :dim_x] if dim_x else np.zeros((len(idx), 0))
        if dim_x:
            comp = comp - grid.space.l_x * np.round(comp / grid.space.l_x)
        rho = np.sqrt(np.abs(tdiff)) + np.linalg.norm(comp, axis=1) ** (1 / 3) + np.linalg.norm(dv, axis=1)
        q = np.where(rho > 0, diff / np.where(rho > 0, rho, 1.0) ** alpha, 0.0)
    j = int(np.argmax(q))
    witness = (tuple(int(i) for i in idx[j]), tuple(int(i) for i in other[j]))
    return HolderEstimate(alpha, weight_m, float(q[j]), metric, len(idx),
                          dict(region or {}), float(np.max(gvals, initial=0.0)), witness, seed)


# -- Schauder exponents -----------------------------------------------------------

def p_of_alpha(alpha: float) -> float:
    return 3.0 + 2.0 * alpha / 3.0 + 3.0 / alpha


def time_exponent(alpha: float) -> float:
    """alpha^2 / (6 - alpha); t^{-1 + this} is integrable at 0."""
    return alpha * alpha / (6.0 - alpha)


def q_exponent(gamma: float, alpha: float, k: float, m: float) -> float:
    """Velocity-weight loss q(gamma, alpha, k, m) of the weighted Schauder bound."""
    g2 = max(2.0 + gamma, 0.0)
    inner = max(-g2 + gamma - (k - m) / 3.0, (2.0 + alpha / 3.0) * p_of_alpha(alpha) - k + m)
    return g2 - gamma + (1.0 - time_exponent(alpha)) * inner


def q_prime_exponent(gamma: float, alpha: float, k: float, m: float) -> float:
    s = alpha * max(1.0 + gamma / 2.0, 0.0)
    return q_exponent(gamma, alpha, k, m - s) + s


@dataclass(frozen=True)
class SchauderExponents:
    alpha: float
    gamma: float
    k: float
    m: float
    p_alpha: float
    q: float
    q_prime: float
    time_exponent: float
    q_prime_in_range: bool


def schauder_exponents(alpha: float, gamma: float, k: float, m: float) -> SchauderExponents:
    """Exponents p(alpha), q, q' and alpha^2/(6-alpha).

    Requires m in (max{3, 5 + gamma + alpha/3}, k].  ``q_prime_in_range``
    records whether m also clears the stricter bound under which q' is used.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    lo = max(3.0, 5.0 + gamma + alpha / 3.0)
    if not (lo < m <= k):
        raise ValueError(f"m must lie in ({lo:g}, {k:g}]")
    s = alpha * max(1.0 + gamma / 2.0, 0.0)
    return SchauderExponents(alpha, gamma, k, m, p_of_alpha(alpha), q_exponent(gamma, alpha, k, m),
                             q_prime_exponent(gamma, alpha, k, m), time_exponent(alpha), m > lo + s)


# -- kinetic change of variables -------------------------------------------------

@dataclass(frozen=True)
class KineticTransform:
    """z -> S_{z0}(delta_{r1} z) = (t0 + r1^2 t, x0 + r1^3 S x + r1^2 t v0, v0 + r1 S v)."""

    z0: PhasePoint
    gamma: float
    S: np.ndarray
    r1: float

    @property
    def S_inv(self) -> np.ndarray:
        return np.linalg.inv(self.S)

    def apply(self, t, x, v):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        r = self.r1
        v0 = np.asarray(self.z0.v)
        T = self.z0.t + r * r * t
        X = np.asarray(self.z0.x) + r ** 3 * x @ self.S.T + (r * r * t)[..., None] * v0
        V = v0 + r * v @ self.S.T
        return T, X, V

    def inverse(self, T, X, V):
        T = np.asarray(T, dtype=float)
        r = self.r1
        v0 = np.asarray(self.z0.v)
        t = (T - self.z0.t) / (r * r)
        Si = self.S_inv
        x = (np.asarray(X, dtype=float) - np.asarray(self.z0.x) - (r * r * t)[..., None] * v0) @ Si.T / r ** 3
        v = (np.asarray(V, dtype=float) - v0) @ Si.T / r
        return t, x, v


def build_kinetic_transform(z0: PhasePoint, gamma: float) -> KineticTransform:
    if not z0.t > 0:
        raise ValueError("the transform needs t0 > 0")
    v0 = np.asarray(z0.v, dtype=float)
    jv = float(japanese(np.dot(v0, v0)))
    nv = np.linalg.norm(v0)
    P = np.outer(v0, v0) / nv ** 2 if nv > 0 else np.zeros((3, 3))
    S = jv ** (1 + gamma / 2) * (np.eye(3) - P) + jv ** (gamma / 2) * P
    r1 = jv ** (-max(1 + gamma / 2, 0.0)) * min(1.0, math.sqrt(z0.t / 2))
    return KineticTransform(z0, gamma, S, r1)


def q1_sample_points(n_t: int = 3, n_s: int = 3):
    """Regular sample of Q_1 = (-1, 0] x B_1 x B_1 (the ball points of a cube lattice)."""
    ts = np.linspace(-1.0, 0.0, n_t + 1)[1:]
    s = np.linspace(-1.0, 1.0, n_s) / math.sqrt(3.0) if n_s > 1 else np.zeros(1)
    cube = np.stack(np.meshgrid(s, s, s, indexing="ij"), -1).reshape(-1, 3)
    T, X, V = [], [], []
    for t in ts:
        for x in cube:
            for v in cube:
                T.append(t)
                X.append(x)
                V.append(v)
    return np.array(T), np.array(X), np.array(V)


def _snapshot_interp(grid, values, X, V):
    """Multilinear interpolation of one snapshot at physical points (periodic x, zero outside v box)."""
    dim_x = grid.space.dim_x
    vel = grid.velocity
    u = values
    coords = []
    if dim_x:
        pad = [(1, 1)] * dim_x + [(0, 0)] * 3
        u = np.pad(u, pad, mode="wrap")
        dx = grid.space.dx
        for d in range(dim_x):
            xi = np.mod(X[..., d], grid.space.l_x) / dx - 0.5
            coords.append(xi + 1.0)
    else:
        u = u[0]
    for d in range(3):
        coords.append((V[..., d] + vel.l_v) / vel.h - 0.5)
    return ndimage.map_coordinates(u, np.array(coords), order=1, mode="constant", cval=0.0)


def interpolate_window(window, T, X, V) -> np.ndarray:
    """Trilinear-in-(x, v), linear-in-t values of a stored window at (T, X, V)."""
    grid, times, vals = _window_arrays(window)
    T = np.asarray(T, dtype=float)
    tol = 1e-12 * max(1.0, abs(times[-1]))
    if np.any(T < times[0] - tol) or np.any(T > times[-1] + tol):
        raise ValueError("window too small: requested times leave the stored snapshots")
    vmax = grid.velocity.l_v - grid.velocity.h / 2
    if np.any(np.abs(V) > vmax + 1e-12):
        raise ValueError("window too small: requested velocities leave the velocity box")
    out = np.empty(T.shape)
    if len(times) == 1:
        return _snapshot_interp(grid, vals[0], X, V)
    j = np.clip(np.searchsorted(times, T, side="right") - 1, 0, len(times) - 2)
    for i in np.unique(j):
        sel = j == i
        w = (T[sel] - times[i]) / (times[i + 1] - times[i])
        w = np.clip(w, 0.0, 1.0)
        a = _snapshot_interp(grid, vals[i], X[sel], V[sel])
        b = _snapshot_interp(grid, vals[i + 1], X[sel], V[sel])
        out[sel] = (1 - w) * a + w * b
    return out


def transform_field(window, transform: KineticTransform, points=None):
    """f_{z0}(z) = f(S_{z0}(delta_{r1} z)) at sample points z of Q_1.

    Returns (points, values); ``points`` defaults to :func:`q1_sample_points`.
    """
    if points is None:
        points = q1_sample_points()
    t, x, v = points
    T, X, V = transform.apply(t, x, v)
    return points, interpolate_window(window, T, X, V)


def transform_coefficients(a, b, c, transform: KineticTransform):
    """(A, B, C) = (S^-1 a S^-1, r1 S^-1 b, r1^2 c), broadcasting over leading axes."""
    Si = transform.S_inv
    A = np.einsum("ij,...jk,kl->...il", Si, np.asarray(a), Si)
    B = transform.r1 * np.asarray(b) @ Si.T
    C = transform.r1 ** 2 * np.asarray(c)
    return A, B, C


# -- lower-bound envelope -------------------------------------------------------

@dataclass
class EnvelopeFit:
    c1: float
    residual: float
    binding_index: tuple | None
    binding_speed: float


def lower_bound_envelope_fit(f: DistributionField, gamma: float, tol: float = 1e-12) -> EnvelopeFit:
    """Largest c1 with c1 exp(-|v|^{2-gamma}/c1) <= f on cells with |v| <= l_v/2.

    c exp(-s/c) is increasing in c, so the admissible set is an interval
    [0, c1] and bisection applies.  Returns c1 = 0 when f vanishes somewhere
    in the region.
    """
    vel = f.grid.velocity
    region = vel.speed2 <= (vel.l_v / 2) ** 2
    vals = f.values[..., region]
    s = np.broadcast_to(np.sqrt(vel.speed2[region]) ** (2 - gamma), vals.shape)
    if vals.size == 0 or np.min(vals) <= 0:
        return EnvelopeFit(0.0, 0.0, None, float("nan"))

    def ok(c):
        return bool(np.all(c * np.exp(-s / c) <= vals))

    lo, hi = 0.0, float(np.max(vals))
    while ok(hi):
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    c1 = lo
    gap = vals - c1 * np.exp(-s / c1)
    j = int(np.argmin(gap))
    jj = np.unravel_index(j, gap.shape)
    return EnvelopeFit(c1, float(gap.flat[j]), tuple(int(i) for i in jj), float(s.flat[j] ** (1 / (2 - gamma))))


# -- second velocity derivatives ---------------------------------------------------

def d2v_hessian_interior(u: np.ndarray, h: float) -> np.ndarray:
    """Central second differences on interior cells, shape (..., n-2, n-2, n-2, 3, 3)."""
    n = u.shape[-1]
    c = (Ellipsis, slice(1, n - 1), slice(1, n - 1), slice(1, n - 1))

    def sh(d):
        return (Ellipsis,) + tuple(slice(1 + o, n - 1 + o) for o in d)

    H = np.empty(u[c].shape + (3, 3))
    for i in range(3):
        e = [0, 0, 0]
        e[i] = 1
        m = [-x for x in e]
        H[..., i, i] = (u[sh(e)] - 2 * u[c] + u[sh(m)]) / h ** 2
        for j in range(i + 1, 3):
            pp = [0, 0, 0]
            pp[i] += 1
            pp[j] += 1
            pm = [0, 0, 0]
            pm[i] += 1
            pm[j] -= 1
            mp = [-x for x in pm]
            mm = [-x for x in pp]
            H[..., i, j] = H[..., j, i] = (u[sh(pp)] - u[sh(pm)] - u[sh(mp)] + u[sh(mm)]) / (4 * h ** 2)
    return H


def d2v_weighted_sup(f: DistributionField, weight: float = 0.0) -> float:
    """sup over interior cells of <v>^weight * max_ij |D^2_v f|_ij."""
    vel = f.grid.velocity
    if vel.n_v < 8:
        raise ValueError("need n_v >= 8")
    H = d2v_hessian_interior(f.values, vel.h)
    n = vel.n_v
    jap = vel.jap[1:n - 1, 1:n - 1, 1:n - 1]
    return float(np.max(jap ** weight * np.max(np.abs(H), axis=(-2, -1))))


# -- diagnostics rows ------------------------------------------------------------

def ellipticity_summary(coeff: CoefficientField, gamma: float, v_max: float | None = None) -> tuple:
    """(min eigenvalue, min lam_par/<v>^gamma, min lam_perp/<v>^{gamma+2}) over |v| <= v_max."""
    vel = coeff.grid
    spec = ellipticity_spectrum(coeff)
    mask = np.ones(vel.speed2.shape, bool) if v_max is None else vel.speed2 <= v_max ** 2
    jap = vel.jap
    par = (spec.lam_par / jap ** gamma)[..., mask]
    perp = (spec.lam_perp / jap ** (gamma + 2))[..., mask]
    return float(np.min(spec.lam_min[..., mask])), float(np.min(par)), float(np.min(perp))


def diagnostics_row(f: DistributionField, config, tracker: PsiTracker | None = None,
                    stats: dict | None = None) -> dict:
    """One CSV row of monitored quantities for a snapshot."""
    gamma = config.gamma
    hyd = hydrodynamic_fields(f)
    if tracker is None:
        tracker = PsiTracker(gamma, getattr(config, "psi_p", None))
    ps, pst = tracker.update(f)
    row = {
        "t": float(f.time),
        "mass_min_x": float(np.min(hyd.M)),
        "mass_max_x": float(np.max(hyd.M)),
        "energy_max_x": float(np.max(hyd.E)),
        "entropy_max_x": float(np.max(hyd.H)),
        "psi": ps,
        "psi_tilde": pst,
        "linfty_k": weighted_sup_norm(f, config.k_decay),
        "clamped_mass": float((stats or {}).get("clamped_mass", 0.0)),
        "seed": int(config.seed),
    }
    nan = float("nan")
    if getattr(config, "full_diagnostics", True) and np.max(np.abs(f.values)) > 0:
        vel = f.grid.velocity
        coeff = compute_coefficients_fast(np.maximum(f.values, 0.0), vel, CollisionKernel(gamma))
        row["ellipticity_min"], row["ellipticity_aniso_par"], row["ellipticity_aniso_perp"] = \
            ellipticity_summary(coeff, gamma, vel.l_v / 2)
        est = holder_seminorm(f, config.holder_alpha, metric="euclidean", sampler="random",
                              n_samples=config.holder_samples, seed=config.seed,
                              max_sep=min(1.0, vel.l_v))
        row["holder_est_alpha"] = est.seminorm_value
        row["holder_g_sup"] = est.g_sup
        row["d2v_weighted_sup"] = d2v_weighted_sup(f, config.d2v_weight) if vel.n_v >= 8 else nan
    else:
        zero = 0.0 if np.max(np.abs(f.values)) == 0 else nan
        for key in ("ellipticity_min", "ellipticity_aniso_par", "ellipticity_aniso_perp",
                    "holder_est_alpha", "holder_g_sup", "d2v_weighted_sup"):
            row[key] = zero
    return {k: row[k] for k in CSV_COLUMNS}


__all__ = [
    "CSV_COLUMNS", "HydroFields", "hydrodynamic_fields", "psi", "psi_tilde", "psi_value", "psi_tilde_value",
    "PsiTracker", "HolderEstimate", "holder_seminorm", "SchauderExponents", "schauder_exponents",
    "p_of_alpha", "q_exponent", "q_prime_exponent", "time_exponent", "KineticTransform",
    "build_kinetic_transform", "transform_field", "transform_coefficients", "interpolate_window",
    "q1_sample_points", "EnvelopeFit", "lower_bound_envelope_fit", "d2v_weighted_sup", "diagnostics_row",
    "ellipticity_summary",
]
