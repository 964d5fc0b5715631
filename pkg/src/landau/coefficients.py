"""Nonlocal Landau coefficients a, b, c as velocity convolutions.

    a(v) = a_const * sum_w (I - w^ w^) |w|^(g+2) f(v - w) h^3
    b(v) = b_const * sum_w |w|^g w f(v - w) h^3
    c(v) = c_const * sum_w |w|^g f(v - w) h^3        (c = 8 pi f when g = -3)

The singular cell w = 0 contributes the exact cell average of the kernel.
Two evaluation paths are provided: dense pair summation (the oracle) and
zero-padded FFT convolution (the fast path).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import fft as sfft
from scipy.special import roots_legendre

from .grid import PhaseGrid, VelocityGrid, _HEADER, _read_header

COEFF_MAGIC = b"LNDC0001"
# upper-triangle order of the 6 independent entries of a
_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def fft_workers() -> int:
    return int(os.environ.get("LANDAU_THREADS", "0")) or (os.cpu_count() or 1)


@dataclass(frozen=True)
class CollisionKernel:
    gamma: float
    a_const: float = 1.0
    b_const: float = 2.0
    c_const: float | None = None

    def __post_init__(self):
        if not -3.0 <= self.gamma < 0.0:
            raise ValueError(f"gamma must lie in [-3, 0), got {self.gamma}")
        if self.c_const is None:
            c = 8.0 * np.pi if self.coulomb else 2.0 * (self.gamma + 3.0)
            object.__setattr__(self, "c_const", c)
        if not (self.a_const > 0 and self.c_const > 0):
            raise ValueError("a_const and c_const must be positive")

    @property
    def coulomb(self) -> bool:
        return self.gamma == -3.0


@dataclass
class CoefficientField:
    """Coefficients on a velocity grid; leading axes index x cells.

    a has shape ``batch + (n, n, n, 3, 3)``, b ``batch + (n, n, n, 3)`` and c
    ``batch + (n, n, n)``.
    """

    grid: VelocityGrid
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    origin: tuple = (0.0, None)

    @property
    def batch_shape(self) -> tuple:
        return self.c.shape[:-3]

    def __getitem__(self, idx) -> "CoefficientField":
        return CoefficientField(self.grid, self.a[idx], self.b[idx], self.c[idx], self.origin)


@lru_cache(maxsize=64)
def cube_average_power(s: float, order: int = 64) -> float:
    """Average of |u|^s over the unit cube [-1/2, 1/2]^3, for s > -3.

    The cube splits into six pyramids with apex at the origin; on each the
    radial integral is exact and the remaining face integral is smooth.
    """
    if s <= -3:
        raise ValueError("|u|^s is not integrable at the origin for s <= -3")
    y, wy = roots_legendre(order)
    face = np.sum(wy[:, None] * wy[None, :] * (1.0 + y[:, None] ** 2 + y[None, :] ** 2) ** (s / 2))
    return float(6.0 * 0.5 ** (s + 3) / (s + 3) * face)


def _kernel_values(w: np.ndarray, kernel: CollisionKernel, h: float):
    """Kernel components at displacements w (..., 3).

    Returns (A6, B3, C) with shapes (..., 6), (..., 3), (...).  C is None for
    the Coulomb case.  Zero displacements take the cell average.
    """
    g = kernel.gamma
    r2 = np.sum(w * w, axis=-1)
    zero = r2 == 0.0
    r = np.sqrt(np.where(zero, 1.0, r2))
    pg = r ** g
    A = np.empty(w.shape[:-1] + (6,))
    for n, (i, j) in enumerate(_PAIRS):
        # (delta_ij |w|^2 - w_i w_j) |w|^g
        A[..., n] = -w[..., i] * w[..., j]
        if i == j:
            A[..., n] += r2
        A[..., n] *= kernel.a_const * pg
    B = kernel.b_const * pg[..., None] * w
    C = None if kernel.coulomb else kernel.c_const * pg
    if np.any(zero):
        avg_a = (2.0 / 3.0) * cube_average_power(g + 2) * h ** (g + 2)
        for n, (i, j) in enumerate(_PAIRS):
            A[zero, n] = kernel.a_const * avg_a if i == j else 0.0
        B[zero] = 0.0
        if C is not None:
            C[zero] = kernel.c_const * cube_average_power(g) * h ** g
    return A, B, C


def _check_field(f: np.ndarray, grid: VelocityGrid, neg_rtol: float):
    f = np.asarray(f, dtype=float)
    n = grid.n_v
    if f.shape[-3:] != (n, n, n):
        raise ValueError(f"field shape {f.shape} does not end in {(n, n, n)}")
    top = np.max(np.abs(f)) if f.size else 0.0
    if np.min(f) < -neg_rtol * top:
        raise ValueError("coefficients require a nonnegative field")
    return f


def _assemble(grid, A6, B3, C, f, kernel, batch):
    n = grid.n_v
    a = np.empty(batch + (n, n, n, 3, 3))
    for m, (i, j) in enumerate(_PAIRS):
        a[..., i, j] = A6[..., m]
        a[..., j, i] = A6[..., m]
    c = kernel.c_const * f if kernel.coulomb else C
    return a, B3, c


def compute_coefficients_direct(f_slice, grid: VelocityGrid, kernel: CollisionKernel,
                                block: int = 256, neg_rtol: float = 1e-8) -> CoefficientField:
    """Coefficients by dense pair summation, O(n_v^6).

    ``f_slice`` may carry leading batch axes; the kernel block for each group
    of target cells is evaluated once and applied to every field in the batch.
    The kernel depends on a pair only through its integer cell offset, so it
    is tabulated once on the (2 n_v - 1)^3 offsets and gathered per pair.
    """
    f = _check_field(f_slice, grid, neg_rtol)
    n = grid.n_v
    batch = f.shape[:-3]
    F = f.reshape(-1, n ** 3)
    N = n ** 3
    vol = grid.cell_volume
    m = 2 * n - 1
    offs = np.arange(-(n - 1), n) * grid.h
    w = np.stack(np.meshgrid(offs, offs, offs, indexing="ij"), axis=-1)
    TA, TB, TC = _kernel_values(w, kernel, grid.h)
    TA, TB = TA.reshape(-1, 6), TB.reshape(-1, 3)
    TC = None if TC is None else TC.reshape(-1)
    ijk = np.indices((n, n, n)).reshape(3, -1).T
    A6 = np.empty((F.shape[0], N, 6))
    B3 = np.empty((F.shape[0], N, 3))
    C = None if kernel.coulomb else np.empty((F.shape[0], N))
    for start in range(0, N, block):
        tgt = ijk[start:start + block]
        t = tgt.shape[0]
        # layout (source, target, component) so each contraction is one GEMM
        o = tgt[None, :, :] - ijk[:, None, :] + (n - 1)
        flat = (o[..., 0] * m + o[..., 1]) * m + o[..., 2]
        Ak, Bk = TA[flat], TB[flat]
        Ck = None if TC is None else TC[flat]
        A6[:, start:start + t] = (F @ Ak.reshape(N, -1)).reshape(-1, t, 6) * vol
        B3[:, start:start + t] = (F @ Bk.reshape(N, -1)).reshape(-1, t, 3) * vol
        if C is not None:
            C[:, start:start + t] = F @ Ck * vol
    shape = batch + (n, n, n)
    A6 = A6.reshape(shape + (6,))
    B3 = B3.reshape(shape + (3,))
    C = None if C is None else C.reshape(shape)
    a, b, c = _assemble(grid, A6, B3, C, f, kernel, batch)
    return CoefficientField(grid, a, b, c)


@lru_cache(maxsize=16)
def _kernel_spectra(n: int, l_v: float, kernel: CollisionKernel):
    """rFFT of the 10 kernel components on the zero-padded 2n grid."""
    grid = VelocityGrid(n, l_v)
    h = grid.h
    m = np.arange(2 * n)
    offs = np.where(m < n, m, m - 2 * n).astype(float) * h
    w = np.stack(np.meshgrid(offs, offs, offs, indexing="ij"), axis=-1)
    A, B, C = _kernel_values(w, kernel, h)
    comps = [A[..., k] for k in range(6)] + [B[..., k] for k in range(3)]
    if C is not None:
        comps.append(C)
    table = np.stack(comps)
    # offset +-n never occurs between two cells of the box
    table[:, n, :, :] = 0.0
    table[:, :, n, :] = 0.0
    table[:, :, :, n] = 0.0
    spec = sfft.rfftn(table, axes=(-3, -2, -1), workers=fft_workers())
    spec.flags.writeable = False
    return spec


def compute_coefficients_fast(f_slice, grid: VelocityGrid, kernel: CollisionKernel,
                              neg_rtol: float = 1e-8) -> CoefficientField:
    """Coefficients by zero-padded FFT convolution, O(n_v^3 log n_v)."""
    f = _check_field(f_slice, grid, neg_rtol)
    n = grid.n_v
    batch = f.shape[:-3]
    spec = _kernel_spectra(n, float(grid.l_v), kernel)
    s = (2 * n,) * 3
    fh = sfft.rfftn(f, s=s, axes=(-3, -2, -1), workers=fft_workers())
    prod = fh[..., None, :, :, :] * spec
    conv = sfft.irfftn(prod, s=s, axes=(-3, -2, -1), workers=fft_workers())[..., :n, :n, :n]
    conv *= grid.cell_volume
    conv = np.moveaxis(conv, -4, -1)
    C = None if kernel.coulomb else conv[..., 9]
    a, b, c = _assemble(grid, conv[..., :6], np.ascontiguousarray(conv[..., 6:9]), C, f, kernel, batch)
    return CoefficientField(grid, a, b, c)


def compute_coefficients(f, kernel: CollisionKernel, method: str = "fast") -> CoefficientField:
    """Coefficients for every x slice of a DistributionField."""
    fn = compute_coefficients_fast if method == "fast" else compute_coefficients_direct
    cf = fn(f.values, f.grid.velocity, kernel)
    cf.origin = (f.time, "all")
    return cf


def coefficients_at(f_slice, grid: VelocityGrid, kernel: CollisionKernel, points) -> tuple:
    """Direct-sum coefficients at arbitrary velocities (off-grid allowed).

    Returns (a, b, c) with shapes (P, 3, 3), (P, 3), (P,).  In the Coulomb case
    c is interpolated from f with nearest-cell lookup (zero outside the box).
    """
    f = _check_field(f_slice, grid, 1e-8).reshape(-1)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = pts[:, None, :] - grid.points[None, :, :]
    A, B, C = _kernel_values(w, kernel, grid.h)
    vol = grid.cell_volume
    A6 = np.einsum("s,psk->pk", f, A) * vol
    a = np.empty((pts.shape[0], 3, 3))
    for m, (i, j) in enumerate(_PAIRS):
        a[:, i, j] = a[:, j, i] = A6[:, m]
    b = np.einsum("s,psk->pk", f, B) * vol
    if C is not None:
        c = C @ f * vol
    else:
        idx = np.floor((pts + grid.l_v) / grid.h).astype(int)
        inside = np.all((idx >= 0) & (idx < grid.n_v), axis=1)
        fv = f.reshape((grid.n_v,) * 3)
        c = np.zeros(pts.shape[0])
        ii = idx[inside]
        c[inside] = kernel.c_const * fv[ii[:, 0], ii[:, 1], ii[:, 2]]
    return a, b, c


# -- identities, bounds and spectra ------------------------------------------

def _central_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2.0 * h)


def _interior(u: np.ndarray, layer: int, ndim_tail: int = 0):
    sl = (Ellipsis,) + (slice(layer, -layer),) * 3 + (slice(None),) * ndim_tail
    return u[sl]


def divergence_identity_residuals(coeff: CoefficientField, layer: int = 2) -> tuple[float, float]:
    """Interior max-norms of b_i + sum_j d_j a_ij and c - sum_i d_i b_i.

    The cells within ``layer`` of the box boundary are excluded.  The second
    residual is reported as NaN for gamma = -3, where c is local.
    """
    if coeff.grid.n_v < 8:
        raise ValueError("divergence residuals need n_v >= 8")
    h = coeff.grid.h
    nb = len(coeff.batch_shape)
    div_a = np.zeros_like(coeff.b)
    for i in range(3):
        for j in range(3):
            div_a[..., i] += _central_diff(coeff.a[..., i, j], nb + j, h)
    div_b = sum(_central_diff(coeff.b[..., i], nb + i, h) for i in range(3))
    res_b = float(np.max(np.abs(_interior(coeff.b + div_a, layer, 1)), initial=0.0))
    res_c = float(np.max(np.abs(_interior(coeff.c - div_b, layer)), initial=0.0))
    return res_b, res_c


def divergence_residuals_for(coeff: CoefficientField, kernel: CollisionKernel, layer: int = 2):
    res_b, res_c = divergence_identity_residuals(coeff, layer)
    return res_b, (float("nan") if kernel.coulomb else res_c)


def aniso_exponents(gamma: float) -> tuple[float, float]:
    """(ell, p) used for the anisotropic bound report."""
    return 3 * abs(gamma) / (5 + gamma) + 0.5, 3 / (5 + gamma) + 0.5


def _perp_unit(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit v-hat and a fixed unit vector orthogonal to v, per cell."""
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    vhat = np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), np.array([1.0, 0.0, 0.0]))
    ref = np.zeros_like(vhat)
    least = np.argmin(np.abs(vhat), axis=-1)
    np.put_along_axis(ref, least[..., None], 1.0, axis=-1)
    e = np.cross(vhat, ref)
    e /= np.linalg.norm(e, axis=-1, keepdims=True)
    return vhat, e


def coefficient_bound_report(coeff: CoefficientField, f_slice, k: float, gamma: float) -> dict:
    """Maximum ratios of the coefficients against their decay bounds.

    Ratios are |a| / (<v>^{(g+2)+} N), |b| / (<v>^{(g+1)+} N) and c / N with
    N = ||f||_{L^{inf,k}_v} (plain sup norm for c when g = -3), plus the
    anisotropic ratios e.a.e / (<v>^g M) for e parallel to v and
    / (<v>^{g+2} M) for e orthogonal to v, where M is the L^1-based norm of the
    anisotropic bound.
    """
    if not k > gamma + 5:
        raise ValueError(f"need k > gamma + 5 = {gamma + 5}")
    grid = coeff.grid
    f = np.asarray(f_slice, dtype=float)
    jap = grid.jap
    vol = grid.cell_volume
    vaxes = (-3, -2, -1)
    n_k = np.max(jap ** k * np.abs(f), axis=vaxes)
    n_inf = np.max(np.abs(f), axis=vaxes)
    ell, p = aniso_exponents(gamma)
    if gamma <= -2:
        m_aniso = np.sum(jap ** ell * np.abs(f), axis=vaxes) * vol \
            + (np.sum(np.abs(f) ** p, axis=vaxes) * vol) ** (1 / p)
    else:
        m_aniso = np.sum(jap ** 2 * np.abs(f), axis=vaxes) * vol

    def ratio(num, den):
        den = np.asarray(den)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        return float(np.max(r, initial=0.0))

    nk = n_k[..., None, None, None]
    a_norm = np.linalg.norm(coeff.a, ord=2, axis=(-2, -1))
    b_norm = np.linalg.norm(coeff.b, axis=-1)
    vhat, e = _perp_unit(grid.v)
    a_par = np.einsum("...i,...ij,...j->...", vhat, coeff.a, vhat)
    a_perp = np.einsum("...i,...ij,...j->...", e, coeff.a, e)
    c_den = (n_inf if gamma == -3 else n_k)[..., None, None, None]
    ma = m_aniso[..., None, None, None]
    return {
        "a": ratio(a_norm, jap ** max(gamma + 2, 0) * nk),
        "b": ratio(b_norm, jap ** max(gamma + 1, 0) * nk),
        "c": ratio(np.abs(coeff.c), c_den * np.ones_like(jap)),
        "aniso_parallel": ratio(a_par, jap ** gamma * ma),
        "aniso_perp": ratio(a_perp, jap ** (gamma + 2) * ma),
        "ell": ell,
        "p": p,
    }


@dataclass
class EllipticitySpectrum:
    lam_min: np.ndarray
    lam_max: np.ndarray
    lam_par: np.ndarray
    lam_perp: np.ndarray
    psd_violation: np.ndarray

    @property
    def psd_ok(self) -> bool:
        return not bool(np.any(self.psd_violation))


def ellipticity_spectrum(coeff: CoefficientField, tol: float = 1e-12) -> EllipticitySpectrum:
    """Eigenvalues of a per cell and Rayleigh quotients along v-hat and v-perp.

    ``psd_violation`` marks cells with lambda_min < -tol * max|a|.
    """
    lam = np.linalg.eigvalsh(coeff.a)
    vhat, e = _perp_unit(coeff.grid.v)
    par = np.einsum("...i,...ij,...j->...", vhat, coeff.a, vhat)
    perp = np.einsum("...i,...ij,...j->...", e, coeff.a, e)
    scale = max(float(np.max(np.abs(lam), initial=0.0)), np.finfo(float).tiny)
    return EllipticitySpectrum(lam[..., 0], lam[..., -1], par, perp, lam[..., 0] < -tol * scale)


# -- binary dump ---------------------------------------------------------------

def save_coefficients(coeff: CoefficientField, grid: PhaseGrid, path, time: float = 0.0) -> None:
    """Write a, b, c in the LNDC0001 container.

    Payload: per x cell, 10 components (a11 a12 a13 a22 a23 a33 b1 b2 b3 c),
    each an (n_v, n_v, n_v) block, little-endian float64.
    """
    n = grid.velocity.n_v
    comps = [coeff.a[..., i, j] for i, j in _PAIRS] + [coeff.b[..., k] for k in range(3)] + [coeff.c]
    data = np.stack([np.broadcast_to(c, grid.shape).reshape(-1, n, n, n) for c in comps], axis=1)
    header = _HEADER.pack(float(time), grid.space.dim_x, grid.space.n_x, float(grid.space.l_x),
                          n, float(grid.velocity.l_v))
    Path(path).write_bytes(COEFF_MAGIC + header + np.ascontiguousarray(data, dtype="<f8").tobytes())


def load_coefficients(path) -> tuple[CoefficientField, PhaseGrid, float]:
    buf = Path(path).read_bytes()
    grid, time, off = _read_header(buf, COEFF_MAGIC)
    n = grid.velocity.n_v
    data = np.frombuffer(buf, dtype="<f8", offset=off).reshape(grid.space.shape + (10, n, n, n))
    a = np.empty(grid.shape + (3, 3))
    for m, (i, j) in enumerate(_PAIRS):
        a[..., i, j] = a[..., j, i] = data[..., m, :, :, :]
    b = np.moveaxis(data[..., 6:9, :, :, :], -4, -1).copy()
    c = data[..., 9, :, :, :].copy()
    return CoefficientField(grid.velocity, a, b, c, (time, "all")), grid, time

