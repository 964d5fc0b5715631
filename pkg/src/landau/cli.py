"""Command line front end: ``landau run|diagnose|verify|compare``.

Exit codes: 0 success, 1 a verification check failed, 2 configuration
error, 3 continuation-criterion abort, 4 numerical instability.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
import time as _time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS, PsiTracker, diagnostics_row
from .grid import (DistributionField, PhaseGrid, TrajectoryRecord, load_snapshot, make_maxwellian,
                   save_snapshot)
from .solver import ConfigError, InstabilityError, SolverConfig, run_simulation

log = logging.getLogger("landau")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ABORT, EXIT_INSTABILITY = 0, 1, 2, 3, 4
SUITE_NAMES = ("kernel", "solver", "estimates", "all")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; only ``gamma`` and ``t_end`` lack defaults."""

    gamma: float
    t_end: float
    dt: float = 1e-3
    splitting: str = "strang"
    collision_form: str = "divergence"
    collision_integrator: str = "explicit-euler"
    k_decay: float = 8.0
    psi_threshold: float = 1e6
    mollify_eps: float = 0.0
    positivity: str = "clamp"
    diag_every: int = 10
    auto_halve: bool = False
    interpolation: str = "cubic"
    psi_p: float | None = None
    holder_alpha: float = 0.5
    holder_samples: int = 2000
    d2v_weight: float = 0.0
    full_diagnostics: bool = True
    flux_order: int = 4
    n_v: int = 16
    l_v: float = 5.0
    dim_x: int = 0
    n_x: int = 1
    l_x: float = 1.0
    initial: str = "maxwellian"
    c1: float = 1.0
    c2: float = 1.0
    bumps: str = "1.0 -1.0 0.0 0.0 0.6; 1.0 1.0 0.0 0.0 0.6"
    x_modulation: float = 0.0
    suite: str = "all"
    output_dir: str = "landau_out"
    compare_weight_C: float = 1.0
    seed: int = 0

    def solver_config(self) -> SolverConfig:
        names = {f.name for f in fields(SolverConfig)}
        return SolverConfig(**{k: v for k, v in dataclasses.asdict(self).items() if k in names})

    def grid(self) -> PhaseGrid:
        return PhaseGrid.create(self.n_v, self.l_v, self.dim_x, self.n_x, self.l_x)


_REQUIRED = ("gamma", "t_end")


def _coerce(name: str, typ: str, raw: str):
    raw = raw.strip()
    if "None" in typ and raw.lower() in ("none", ""):
        return None
    if typ.startswith("bool"):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if typ.startswith("int"):
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{name}: expected an integer, got {raw!r}") from None
    if typ.startswith("float"):
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"{name}: expected a number, got {raw!r}") from None
    return raw


def _bump_list(text: str):
    out = []
    for part in text.split(";"):
        if not part.strip():
            continue
        nums = [float(s) for s in part.replace(",", " ").split()]
        if len(nums) != 5:
            raise ValueError("each bump is 'amplitude v1 v2 v3 width'")
        if nums[0] < 0 or nums[4] <= 0:
            raise ValueError("bump amplitudes must be >= 0 and widths > 0")
        out.append(nums)
    if not out:
        raise ValueError("bumps is empty")
    return out


def parse_config(text: str, env: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines ('#' starts a comment) into a validated RunConfig.

    Every violation is collected; a ConfigError carrying the list in
    ``.violations`` is raised when there are any.  LANDAU_SEED in ``env``
    (default ``os.environ``) overrides the seed.
    """
    env = os.environ if env is None else env
    types = {f.name: str(f.type) for f in fields(RunConfig)}
    values: dict = {}
    errs: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"line {lineno}: expected 'key = value'")
            continue
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            errs.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errs.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            values[key] = _coerce(key, types[key], raw)
        except ValueError as e:
            errs.append(f"line {lineno}: {e}")
    if env.get("LANDAU_SEED"):
        try:
            values["seed"] = int(env["LANDAU_SEED"])
        except ValueError:
            errs.append(f"LANDAU_SEED must be an integer, got {env['LANDAU_SEED']!r}")
    for key in _REQUIRED:
        if key not in values:
            errs.append(f"missing required key {key!r}")
    if all(k in values for k in _REQUIRED):
        cfg = RunConfig(**values)
        errs.extend(_violations(cfg))
        if not errs:
            return cfg
    err = ConfigError("; ".join(errs))
    err.violations = errs
    raise err


def _violations(cfg: RunConfig) -> list[str]:
    errs = []
    names = {f.name for f in fields(SolverConfig)}
    probe = {k: v for k, v in dataclasses.asdict(cfg).items() if k in names}
    # SolverConfig validates in __post_init__; bypass it to collect the list
    sc = object.__new__(SolverConfig)
    for k, v in probe.items():
        object.__setattr__(sc, k, v)
    errs.extend(sc.violations())
    if cfg.n_v < 4:
        errs.append("n_v must be >= 4")
    if not cfg.l_v > 0:
        errs.append("l_v must be positive")
    if cfg.dim_x not in (0, 1, 3):
        errs.append("dim_x must be 0, 1 or 3")
    if cfg.n_x < 1:
        errs.append("n_x must be >= 1")
    if not cfg.l_x > 0:
        errs.append("l_x must be positive")
    if cfg.holder_samples < 1:
        errs.append("holder_samples must be >= 1")
    if cfg.suite not in SUITE_NAMES:
        errs.append(f"suite must be one of {SUITE_NAMES}")
    if cfg.initial == "maxwellian":
        if not (cfg.c1 > 0 and cfg.c2 > 0):
            errs.append("maxwellian needs c1 > 0 and c2 > 0")
    elif cfg.initial == "bump_sum":
        try:
            _bump_list(cfg.bumps)
        except ValueError as e:
            errs.append(f"bumps: {e}")
    elif cfg.initial.startswith("file:"):
        if not Path(cfg.initial[5:]).is_file():
            errs.append(f"initial data file {cfg.initial[5:]!r} does not exist")
    else:
        errs.append("initial must be 'maxwellian', 'bump_sum' or 'file:<path>'")
    if not -1.0 < cfg.x_modulation < 1.0:
        errs.append("x_modulation must lie in (-1, 1)")
    return errs


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def initial_data(cfg: RunConfig) -> DistributionField:
    """Build f_in from the configured selector."""
    if cfg.initial.startswith("file:"):
        f = load_snapshot(cfg.initial[5:])
        return f.with_values(f.values, 0.0)
    grid = cfg.grid()
    if cfg.initial == "maxwellian":
        f = make_maxwellian(grid, cfg.c1, cfg.c2)
        vals = f.values
    else:
        v = grid.velocity.v
        vals = np.zeros(grid.velocity.speed2.shape)
        for amp, v1, v2, v3, w in _bump_list(cfg.bumps):
            d2 = np.sum((v - np.array([v1, v2, v3])) ** 2, axis=-1)
            vals = vals + amp * np.exp(-d2 / (2 * w * w))
        vals = np.broadcast_to(vals, grid.shape)
    if cfg.x_modulation and grid.space.dim_x:
        x1 = grid.space.positions()[..., 0]
        mod = 1.0 + cfg.x_modulation * np.cos(2 * np.pi * x1 / grid.space.l_x)
        vals = vals * mod[(...,) + (None,) * 3]
    return DistributionField(grid, np.array(vals, dtype=float), 0.0)


# -- outputs ---------------------------------------------------------------------

def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([repr(float(row[c])) if c != "seed" else int(row[c]) for c in CSV_COLUMNS])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _finite_max(values) -> float | None:
    vals = [v for v in values if math.isfinite(v)]
    return max(vals) if vals else None


def _snapshot_dir(out: Path) -> Path:
    return out / "snapshots"


def load_trajectory(directory) -> TrajectoryRecord:
    """Snapshots of a run directory in time order."""
    d = Path(directory)
    snap = _snapshot_dir(d) if _snapshot_dir(d).is_dir() else d
    paths = sorted(snap.glob("*.lndf"))
    if not paths:
        raise FileNotFoundError(f"no snapshots in {snap}")
    fs = sorted((load_snapshot(p) for p in paths), key=lambda f: f.time)
    return TrajectoryRecord.from_fields(fs)


# -- commands ---------------------------------------------------------------------

def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    snap = _snapshot_dir(out)
    snap.mkdir(parents=True, exist_ok=True)
    for old in snap.glob("*.lndf"):
        old.unlink()
    rec = TrajectoryRecord()
    status, err = "completed", None
    t0 = _time.perf_counter()
    try:
        run_simulation(initial_data(cfg), cfg.solver_config(), record=rec)
        status = rec.status
    except InstabilityError as e:
        status, err = "instability", str(e)
    wall = _time.perf_counter() - t0
    for i, f in enumerate(rec.snapshots):
        save_snapshot(f, snap / f"snap_{i:05d}.lndf")
    write_csv(rec.rows, out / "diagnostics.csv")
    summary = {
        "final_time": rec.times[-1] if rec.times else 0.0,
        "status": status,
        "steps": rec.steps,
        "peak_psi": _finite_max(r["psi"] for r in rec.rows),
        "peak_linfty_k": _finite_max(r["linfty_k"] for r in rec.rows),
        "wall_time": wall,
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
    }
    if err:
        summary["error"] = err
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: summary[k] for k in ("status", "final_time", "steps", "peak_psi", "wall_time")}))
    return {"completed": EXIT_OK, "continuation-abort": EXIT_ABORT}.get(status, EXIT_INSTABILITY)


def cmd_diagnose(cfg: RunConfig, snapshots) -> int:
    fs = sorted((load_snapshot(p) for p in snapshots), key=lambda f: f.time)
    sc = cfg.solver_config()
    tracker = PsiTracker(sc.gamma, sc.psi_p)
    rows = [diagnostics_row(f, sc, tracker) for f in fs]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(rows, out / "diagnose.csv")
    print(out / "diagnose.csv")
    return EXIT_OK


def trajectory_checks(cfg: RunConfig, rec: TrajectoryRecord) -> list:
    from .verification import initial_matching_check, linftyk_propagation_check, trajectory_K

    fs = rec.snapshots
    res = [initial_matching_check(rec, fs[0], v_max=cfg.l_v / 2)]
    res.append(linftyk_propagation_check(rec, cfg.k_decay, trajectory_K(rec, cfg.gamma)))
    return res


def cmd_verify(cfg: RunConfig, suite: str | None = None) -> int:
    from .verification import run_suite

    suite = suite or cfg.suite
    results = run_suite(suite)
    out = Path(cfg.output_dir)
    if _snapshot_dir(out).is_dir() and any(_snapshot_dir(out).glob("*.lndf")):
        results.extend(trajectory_checks(cfg, load_trajectory(out)))
    report = [r.to_dict() for r in results]
    for r in results:
        print(r.to_json())
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    failed = [r for r in results if r.passed is False]
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_compare(dir_a, dir_b, cfg: RunConfig) -> int:
    from .verification import uniqueness_contraction_check

    a, b = load_trajectory(dir_a), load_trajectory(dir_b)
    res = uniqueness_contraction_check(a, b, cfg.holder_alpha, cfg.compare_weight_C)
    d = res.to_dict()
    d["series"] = {"t": res.data["t"].tolist(), "sup_W": res.data["W"].tolist()}
    print(json.dumps(d, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landau", description="Landau equation simulator and estimate checks")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="integrate and write snapshots, diagnostics.csv, summary.json")
    r.add_argument("config")
    d = sub.add_parser("diagnose", help="diagnostics CSV for existing snapshots")
    d.add_argument("config")
    d.add_argument("snapshots", nargs="+")
    v = sub.add_parser("verify", help="run verification suites and print one JSON object per check")
    v.add_argument("config")
    v.add_argument("--suite", choices=SUITE_NAMES, default=None)
    c = sub.add_parser("compare", help="weighted contraction metric between two runs")
    c.add_argument("dir_a")
    c.add_argument("dir_b")
    c.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        for msg in getattr(e, "violations", [str(e)]):
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "diagnose":
        return cmd_diagnose(cfg, args.snapshots)
    if args.command == "verify":
        return cmd_verify(cfg, args.suite)
    return cmd_compare(args.dir_a, args.dir_b, cfg)


if __name__ == "__main__":
    sys.exit(main())
