"""Phase-space grids, distribution fields and weighted norms.

Velocity space is a truncated cube ``[-l_v, l_v]^3`` with cell-centered nodes,
``v_i = -l_v + (i + 1/2) h_v``.  Physical space is a periodic torus of dimension
0 (spatially homogeneous), 1 (x varies along the first axis only) or 3.

Field values are stored with shape ``x_shape + (n_v, n_v, n_v)`` where
``x_shape`` is ``(1,)``, ``(n_x,)`` or ``(n_x, n_x, n_x)``.
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

SNAPSHOT_MAGIC = b"LNDF0001"
_HEADER = struct.Struct("<dqqdqd")


def japanese(v2):
    """Return <v> = sqrt(1 + |v|^2) given |v|^2."""
    return np.sqrt(1.0 + v2)


@dataclass(frozen=True)
class VelocityGrid:
    n_v: int
    l_v: float

    def __post_init__(self):
        if int(self.n_v) != self.n_v or self.n_v < 4:
            raise ValueError(f"n_v must be an integer >= 4, got {self.n_v}")
        if not self.l_v > 0:
            raise ValueError(f"l_v must be positive, got {self.l_v}")

    @property
    def h(self) -> float:
        return 2.0 * self.l_v / self.n_v

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.l_v + (np.arange(self.n_v) + 0.5) * self.h

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.nodes, self.nodes, self.nodes, indexing="ij"))

    @cached_property
    def v(self) -> np.ndarray:
        """Velocity vectors, shape (n_v, n_v, n_v, 3)."""
        return np.stack(self.mesh, axis=-1)

    @cached_property
    def points(self) -> np.ndarray:
        """Flattened velocity nodes, shape (n_v**3, 3)."""
        return self.v.reshape(-1, 3)

    @cached_property
    def speed2(self) -> np.ndarray:
        return np.sum(self.v ** 2, axis=-1)

    @cached_property
    def jap(self) -> np.ndarray:
        """<v> at every velocity cell."""
        return japanese(self.speed2)

    def index_of(self, v) -> tuple[int, int, int]:
        """Index of the cell containing velocity ``v``."""
        idx = np.floor((np.asarray(v, dtype=float) + self.l_v) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.n_v):
            raise ValueError(f"velocity {v} is outside the box")
        return tuple(int(i) for i in idx)


@dataclass(frozen=True)
class SpatialGrid:
    dim_x: int = 0
    n_x: int = 1
    l_x: float = 1.0

    def __post_init__(self):
        if self.dim_x not in (0, 1, 3):
            raise ValueError(f"dim_x must be 0, 1 or 3, got {self.dim_x}")
        if self.dim_x > 0 and self.n_x < 1:
            raise ValueError("n_x must be positive")
        if not self.l_x > 0:
            raise ValueError("l_x must be positive")
        if self.dim_x == 0 and self.n_x != 1:
            # homogeneous mode has a single x cell
            object.__setattr__(self, "n_x", 1)

    @property
    def dx(self) -> float:
        return self.l_x / self.n_x

    @property
    def shape(self) -> tuple[int, ...]:
        if self.dim_x == 0:
            return (1,)
        return (self.n_x,) * self.dim_x

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.dim_x if self.dim_x else 1.0

    @cached_property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_x) + 0.5) * self.dx

    def positions(self) -> np.ndarray:
        """Cell-center positions as 3-vectors, shape ``shape + (3,)``."""
        out = np.zeros(self.shape + (3,))
        if self.dim_x == 1:
            out[:, 0] = self.nodes
        elif self.dim_x == 3:
            out[...] = np.stack(np.meshgrid(self.nodes, self.nodes, self.nodes, indexing="ij"), axis=-1)
        return out

    def wrap(self, dx):
        """Minimal-image representative of a displacement on the torus."""
        dx = np.asarray(dx, dtype=float)
        if self.dim_x == 0:
            return dx
        out = dx.copy()
        k = self.dim_x
        out[..., :k] = dx[..., :k] - self.l_x * np.round(dx[..., :k] / self.l_x)
        return out


@dataclass(frozen=True)
class PhaseGrid:
    space: SpatialGrid
    velocity: VelocityGrid

    @classmethod
    def create(cls, n_v, l_v, dim_x=0, n_x=1, l_x=1.0) -> "PhaseGrid":
        return cls(SpatialGrid(dim_x, n_x if dim_x else 1, l_x), VelocityGrid(n_v, l_v))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.space.shape + (self.velocity.n_v,) * 3

    @property
    def cell_volume(self) -> float:
        return self.space.cell_volume * self.velocity.cell_volume


class PhasePoint(NamedTuple):
    t: float
    x: np.ndarray
    v: np.ndarray

    @classmethod
    def of(cls, t, x=(0.0, 0.0, 0.0), v=(0.0, 0.0, 0.0)) -> "PhasePoint":
        x = np.broadcast_to(np.asarray(x, dtype=float), (3,)).copy()
        v = np.asarray(v, dtype=float)
        if v.ndim == 0:
            v = np.array([float(v), 0.0, 0.0])
        p = cls(float(t), x, v)
        if not (np.isfinite(p.t) and np.all(np.isfinite(p.x)) and np.all(np.isfinite(p.v))):
            raise ValueError("phase point coordinates must be finite")
        return p


@dataclass(frozen=True)
class WellDistributedParams:
    R: float
    delta: float
    r: float

    def __post_init__(self):
        if not (self.R > 0 and self.delta > 0 and self.r > 0):
            raise ValueError("R, delta and r must all be positive")


@dataclass
class DistributionField:
    """Snapshot of f(t, x, v) on a phase grid."""

    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            try:
                values = np.broadcast_to(values, self.grid.shape).copy()
            except ValueError:
                raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}") from None
        if not np.all(np.isfinite(values)):
            raise ValueError("distribution values must be finite")
        self.values = values

    @property
    def slices(self) -> np.ndarray:
        """Values reshaped to (n_xcells, n_v, n_v, n_v)."""
        n = self.grid.velocity.n_v
        return self.values.reshape(-1, n, n, n)

    def min_ratio(self) -> float:
        """min(f) / sup|f|, zero for the zero field."""
        top = np.max(np.abs(self.values))
        return float(np.min(self.values) / top) if top > 0 else 0.0

    def is_nonnegative(self, rtol: float = 0.0) -> bool:
        return self.min_ratio() >= -rtol

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_volume)

    def with_values(self, values, time=None) -> "DistributionField":
        return DistributionField(self.grid, values, self.time if time is None else time)


def make_maxwellian(grid: PhaseGrid, c1: float = 1.0, c2: float = 1.0, time: float = 0.0) -> DistributionField:
    """Global Maxwellian c1 exp(-c2 |v|^2), constant in x."""
    if not (c1 > 0 and c2 > 0):
        raise ValueError("Maxwellian parameters c1, c2 must be positive")
    mu = c1 * np.exp(-c2 * grid.velocity.speed2)
    return DistributionField(grid, np.broadcast_to(mu, grid.shape).copy(), time)


def weighted_sup_norm(f: DistributionField, k: float) -> float:
    """max over all cells of <v>^k |f|."""
    if not np.isfinite(k):
        raise ValueError("weight exponent must be finite")
    return float(np.max(f.grid.velocity.jap ** k * np.abs(f.values)))


def weighted_lp_norm(f: DistributionField, p: float, k: float = 0.0, over: str = "global"):
    """Discrete L^{p,k} norm with rectangle-rule quadrature.

    Parameters
    ----------
    p : float
        Exponent in [1, inf].
    k : float
        Polynomial weight <v>^k.
    over : {"global", "slice"}
        ``"slice"`` returns the v-only norm at each x cell, shaped like the
        spatial grid.
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if over not in ("global", "slice"):
        raise ValueError("over must be 'global' or 'slice'")
    g = f.grid.velocity.jap ** k * np.abs(f.values)
    vaxes = (-3, -2, -1)
    if over == "slice":
        if np.isinf(p):
            return np.max(g, axis=vaxes)
        return (np.sum(g ** p, axis=vaxes) * f.grid.velocity.cell_volume) ** (1.0 / p)
    if np.isinf(p):
        return float(np.max(g))
    return float((np.sum(g ** p) * f.grid.cell_volume) ** (1.0 / p))


def kinetic_distance(z: PhasePoint, z_prime: PhasePoint, space: SpatialGrid | None = None) -> float:
    """rho(z, z') = |t'-t|^(1/2) + |x'-x-(t'-t)v|^(1/3) + |v'-v|.

    With ``space`` given, the x-difference is wrapped to its minimal image.
    """
    dt = z_prime.t - z.t
    dx = np.asarray(z_prime.x) - np.asarray(z.x) - dt * np.asarray(z.v)
    if space is not None:
        dx = space.wrap(dx)
    dv = np.asarray(z_prime.v) - np.asarray(z.v)
    return float(abs(dt) ** 0.5 + np.linalg.norm(dx) ** (1.0 / 3.0) + np.linalg.norm(dv))


def kinetic_distance_array(t, x, v, t2, x2, v2, space: SpatialGrid | None = None):
    """Vectorised kinetic distance over broadcastable coordinate arrays."""
    dt = np.asarray(t2) - np.asarray(t)
    dx = np.asarray(x2) - np.asarray(x) - dt[..., None] * np.asarray(v)
    if space is not None:
        dx = space.wrap(dx)
    dv = np.asarray(v2) - np.asarray(v)
    return np.sqrt(np.abs(dt)) + np.linalg.norm(dx, axis=-1) ** (1.0 / 3.0) + np.linalg.norm(dv, axis=-1)


class WellDistributedResult(NamedTuple):
    ok: bool
    witnesses: list
    failing_x: tuple | None


def _ball_footprint(grid: PhaseGrid, r: float) -> np.ndarray:
    h = grid.velocity.h
    nv = int(np.floor(r / h))
    offs_v = np.arange(-nv, nv + 1) * h
    dims = [offs_v] * 3
    if grid.space.dim_x:
        nx = min(int(np.floor(r / grid.space.dx)), grid.space.n_x // 2)
        offs_x = np.arange(-nx, nx + 1) * grid.space.dx
        dims = [offs_x] * grid.space.dim_x + dims
    mesh = np.meshgrid(*dims, indexing="ij")
    d2 = sum(m ** 2 for m in mesh)
    return d2 < r ** 2


def well_distributed_check(f: DistributionField, params: WellDistributedParams) -> WellDistributedResult:
    """Discrete test of the well-distributedness condition.

    For every x cell, look for a center (x_m, v_m) with torus distance
    |x - x_m| <= R and |v_m| <= R such that f >= delta on every cell whose
    center lies in the open (x, v)-ball of radius r about (x_m, v_m).  Cells
    outside the velocity box count as f = 0.
    """
    grid = f.grid
    if params.r < 2 * grid.velocity.h:
        raise ValueError(f"ball radius {params.r} is below 2 h_v = {2 * grid.velocity.h}")
    if grid.space.dim_x and params.R >= grid.space.l_x / 2:
        warnings.warn("R >= L/2: the spatial search covers the whole torus", stacklevel=2)

    bad = f.values < params.delta
    dim_x = grid.space.dim_x
    bad_core = (bad[0] if dim_x == 0 else bad).astype(np.uint8)
    foot = _ball_footprint(grid, params.r)
    # periodic in x, "bad" (f = 0) beyond the velocity box
    pads = [(k // 2, k // 2) for k in foot.shape]
    nx_ax = 0 if dim_x == 0 else dim_x
    padded = np.pad(bad_core, pads[:nx_ax] + [(0, 0)] * 3, mode="wrap") if nx_ax else bad_core
    padded = np.pad(padded, [(0, 0)] * nx_ax + pads[nx_ax:], mode="constant", constant_values=1)
    covered = ndimage.maximum_filter(padded, footprint=foot, mode="constant", cval=1)
    covered_bad = covered[tuple(slice(a, a + n) for (a, _), n in zip(pads, bad_core.shape))]
    valid = covered_bad == 0
    if dim_x == 0:
        valid = valid[None]

    vmask = grid.velocity.speed2 <= params.R ** 2
    valid = valid & vmask
    pos = grid.space.positions().reshape(-1, 3)
    valid_flat = valid.reshape(pos.shape[0], -1)
    any_v = valid_flat.any(axis=1)

    witnesses = []
    vpts = grid.velocity.points
    for i in range(pos.shape[0]):
        d = np.linalg.norm(grid.space.wrap(pos - pos[i]), axis=-1)
        cand = np.nonzero((d <= params.R) & any_v)[0]
        if cand.size == 0:
            failing = np.unravel_index(i, grid.space.shape)
            return WellDistributedResult(False, witnesses, tuple(int(j) for j in failing))
        m = cand[np.argmin(d[cand])]
        vi = np.nonzero(valid_flat[m])[0]
        vbest = vi[np.argmin(np.sum(vpts[vi] ** 2, axis=-1))]
        witnesses.append((pos[m].copy(), vpts[vbest].copy()))
    return WellDistributedResult(True, witnesses, None)


# -- binary snapshots ---------------------------------------------------------

def _header(grid: PhaseGrid, time: float) -> bytes:
    return _HEADER.pack(float(time), grid.space.dim_x, grid.space.n_x, float(grid.space.l_x),
                        grid.velocity.n_v, float(grid.velocity.l_v))


def _read_header(buf: bytes, magic: bytes):
    if buf[:8] != magic:
        raise ValueError(f"bad magic {buf[:8]!r}, expected {magic!r}")
    time, dim_x, n_x, l_x, n_v, l_v = _HEADER.unpack_from(buf, 8)
    grid = PhaseGrid(SpatialGrid(int(dim_x), int(n_x), l_x), VelocityGrid(int(n_v), l_v))
    return grid, time, 8 + _HEADER.size


def save_snapshot(f: DistributionField, path) -> None:
    data = SNAPSHOT_MAGIC + _header(f.grid, f.time) + np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    Path(path).write_bytes(data)


def load_snapshot(path) -> DistributionField:
    buf = Path(path).read_bytes()
    grid, time, off = _read_header(buf, SNAPSHOT_MAGIC)
    values = np.frombuffer(buf, dtype="<f8", offset=off)
    if values.size != int(np.prod(grid.shape)):
        raise ValueError("snapshot payload size does not match its header")
    return DistributionField(grid, values.reshape(grid.shape).copy(), time)


@dataclass
class TrajectoryRecord:
    """Snapshots and diagnostics rows of one run."""

    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    status: str = "completed"
    steps: int = 0
    wall_time: float = 0.0

    def append(self, f: DistributionField) -> None:
        if self.times and not f.time > self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        self.times.append(float(f.time))
        self.snapshots.append(f)

    @property
    def grid(self) -> PhaseGrid:
        return self.snapshots[0].grid

    def __len__(self):
        return len(self.snapshots)

    @classmethod
    def from_fields(cls, fields: Sequence[DistributionField]) -> "TrajectoryRecord":
        rec = cls()
        for f in fields:
            rec.append(f)
        return rec
