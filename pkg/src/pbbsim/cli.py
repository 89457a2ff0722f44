"""Command-line entry points.

Usage::

    pbbsim <command> [--config FILE] [--set section.key=value ...] [-o DIR]

Commands write CSV files into ``run.output_dir`` and print one JSON status
line on stdout.  On failure a single JSON line ``{"error": ...}`` goes to
stderr and the exit status is nonzero (2 for configuration errors, 3 for
failed trajectories, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bright import ansatz_eigenvalues, ansatz_mutual_information, ansatz_pseudospin, build
from .classical import (
    intuitive_photon_number,
    neoclassical_roots,
    semiclassical_roots,
    trace_boundary,
    fold_drives,
)
from .config import ConfigError, RunConfig, apply_overrides, emit_config, load_config
from .mcwf import EnsembleError, run_ensemble
from .model import SystemParams
from .records import read_table, read_trajectory, write_table, write_trajectory
from .telegraph import (
    SegmentationSettings,
    classical_reference_levels,
    quantile_reference_levels,
    summarize,
)

DEFAULT_N_BRIGHT_GRID = tuple([0.0] + list(np.round(np.logspace(-1, math.log10(300), 61), 12)))

ROOT_COLUMNS = ["theory", "delta", "eta", "root", "class", "residual", "empty_cavity"]
BOUNDARY_COLUMNS = ["theory", "gamma", "gamma_c", "g", "delta", "bistable", "eta_lower", "eta_upper"]
KEY_COLUMNS = ["g", "kappa", "gamma", "delta", "eta", "base_seed", "n_trajectories", "n_max"]
BRIGHT_COLUMNS = [
    "source",
    "n_bright",
    "pseudospin",
    "mutual_information",
    "lambda1",
    "lambda2",
    "c0_sq",
    "coherence",
    "model_pseudospin",
    "model_mutual_information",
]


class CommandError(RuntimeError):
    pass


def _segmentation(cfg: RunConfig) -> SegmentationSettings:
    a = cfg.analysis
    return SegmentationSettings(a.enter_bright, a.enter_dim, a.smoothing, a.min_dwell)


def _write(cfg: RunConfig, name: str, header, rows, command: str) -> Path:
    path = Path(cfg.run.output_dir) / name
    return write_table(path, header, rows, emit_config(cfg.resolve()), {"command": command})


# ---------------------------------------------------------------------------
# classical-roots


def classical_root_rows(cfg: RunConfig) -> list[list]:
    rows = []
    for delta in cfg.sweep.delta:
        for eta in cfg.sweep.eta:
            p = cfg.params.replace(delta=delta, eta=eta)
            sets = [semiclassical_roots(p), neoclassical_roots(p)]
            if delta > 0:
                sets.append(intuitive_photon_number(p))
            for rs in sets:
                for r in rs.roots:
                    rows.append([rs.theory, delta, eta, r.n, r.kind, r.residual, p.empty_cavity_photons])
    return rows


def cmd_classical_roots(cfg: RunConfig) -> list[Path]:
    return [_write(cfg, "classical_roots.csv", ROOT_COLUMNS, classical_root_rows(cfg), "classical-roots")]


# ---------------------------------------------------------------------------
# boundary


def boundary_rows(cfg: RunConfig) -> list[list]:
    deltas = sorted(cfg.sweep.delta)
    if not deltas:
        raise ConfigError("sweep.delta", "boundary tracing needs at least one detuning")
    p, c = cfg.params, cfg.classical
    rows = []

    def emit(theory, gamma, curve):
        found = {pt.delta: pt for pt in curve.points}
        for d in deltas:
            pt = found.get(d)
            lo, hi = (pt.eta_lower, pt.eta_upper) if pt else (math.nan, math.nan)
            rows.append([theory, gamma, curve.gamma_c, p.g, d, pt is not None, lo, hi])

    neo = trace_boundary("neoclassical", 0.0, 0.0, deltas, g=p.g, kappa=p.kappa, tol=c.boundary_tol, max_iter=c.boundary_max_iter)
    for gamma in cfg.sweep.gamma:
        semi = trace_boundary(
            "semiclassical", gamma, p.gamma_c, deltas, g=p.g, kappa=p.kappa, tol=c.boundary_tol, max_iter=c.boundary_max_iter
        )
        emit("semiclassical", gamma, semi)
        emit("neoclassical", gamma, neo)
    return rows


def cmd_boundary(cfg: RunConfig) -> list[Path]:
    return [_write(cfg, "boundary.csv", BOUNDARY_COLUMNS, boundary_rows(cfg), "boundary")]


# ---------------------------------------------------------------------------
# ensemble and analysis


def _levels(cfg: RunConfig, records) -> tuple[float, float]:
    if cfg.analysis.levels == "classical":
        return classical_reference_levels(records[0].params)
    return quantile_reference_levels(records)


def _summary_row(cfg: RunConfig, params: SystemParams, records, n_max: int) -> dict:
    n_dim, n_bright = _levels(cfg, records)
    summary = summarize(records, n_dim, n_bright, _segmentation(cfg), with_mutual_information=cfg.analysis.mutual_information)
    row = {
        "g": params.g,
        "kappa": params.kappa,
        "gamma": params.gamma,
        "delta": params.delta,
        "eta": params.eta,
        "base_seed": min(r.seed for r in records),
        "n_trajectories": len(records),
        "n_max": n_max,
    }
    row.update(summary.row())
    return row


def _summary_header(row: dict) -> list[str]:
    return KEY_COLUMNS + [k for k in row if k not in KEY_COLUMNS]


def _trajectory_dir(cfg: RunConfig, params: SystemParams) -> Path:
    return Path(cfg.run.output_dir) / "trajectories" / f"delta_{params.delta:g}_eta_{params.eta:g}_gamma_{params.gamma:g}"


def run_point(cfg: RunConfig, eta: float) -> tuple[RunConfig, dict]:
    """Run and summarize one ensemble at drive ``eta``; returns the resolved config and summary row."""
    point = cfg.with_params(eta=eta).resolve()
    t = point.trajectory
    if point.analysis.mutual_information and not t.snapshot_every:
        raise ConfigError("trajectory.snapshot_every", "must be > 0 when analysis.mutual_information is true")
    try:
        records = run_ensemble(
            point.params,
            t.n_trajectories,
            t.t_final,
            t.dt_out,
            t.base_seed,
            point.run.threads,
            n_max=t.n_max,
            method=t.method,
            jump_tol=t.jump_tol,
            snapshot_every=t.snapshot_every,
        )
    except ValueError as exc:
        raise ConfigError("trajectory", str(exc)) from None
    if t.write_records:
        directory = _trajectory_dir(point, point.params)
        text = emit_config(point)
        for rec in records:
            write_trajectory(directory, rec, text)
    return point, _summary_row(point, point.params, records, t.n_max)


def _initial_drives(cfg: RunConfig) -> tuple[float, float]:
    if len(cfg.sweep.eta) >= 2:
        return cfg.sweep.eta[0], cfg.sweep.eta[1]
    folds = fold_drives("neoclassical", cfg.params.replace(eta=0.0))
    if len(folds) < 2:
        raise ConfigError("sweep.eta", "give two starting drives; no neoclassical bistable window here")
    lo, hi = folds[0], folds[-1]
    return lo + 0.4 * (hi - lo), lo + 0.7 * (hi - lo)


def half_filling_search(cfg: RunConfig, evaluate=None) -> list[dict]:
    """Secant search in eta for filling factor 0.5 within ``analysis.half_filling_tol``.

    Steps that would leave a known sign-change bracket fall back to its
    midpoint.  Returns one summary row per evaluated drive.
    """
    evaluate = evaluate or (lambda eta: run_point(cfg, eta)[1])
    tol = cfg.analysis.half_filling_tol
    e0, e1 = _initial_drives(cfg)
    rows: list[dict] = []

    def f(eta):
        row = evaluate(eta)
        row["search_step"] = len(rows)
        rows.append(row)
        return row["filling_factor"] - 0.5

    f0, f1 = f(e0), f(e1)
    below = [e for e, fe in ((e0, f0), (e1, f1)) if fe < 0]
    above = [e for e, fe in ((e0, f0), (e1, f1)) if fe > 0]
    for _ in range(cfg.analysis.half_filling_max_iter):
        if abs(f1) <= tol:
            break
        e2 = e1 - f1 * (e1 - e0) / (f1 - f0) if f1 != f0 else math.nan
        # the filling factor grows with the drive
        if below and above and max(below) < min(above):
            a, b = max(below), min(above)
            if not a < e2 < b:
                e2 = 0.5 * (a + b)
        elif not math.isfinite(e2) or e2 <= 0:
            e2 = e1 * (1.25 if f1 < 0 else 0.8)
        e0, f0 = e1, f1
        e1, f1 = e2, f(e2)
        (below if f1 < 0 else above).append(e1)
    converged = abs(f1) <= tol
    for row in rows:
        row["half_filling_converged"] = converged
    return rows


def cmd_ensemble(cfg: RunConfig) -> list[Path]:
    if cfg.params.gamma_c != 0:
        raise ConfigError("params.gamma_c", "trajectories require gamma_c = 0")
    if cfg.analysis.half_filling:
        rows = half_filling_search(cfg)
    else:
        rows = [run_point(cfg, eta)[1] for eta in (cfg.sweep.eta or (cfg.params.eta,))]
    header = _summary_header(rows[0])
    for extra in ("search_step", "half_filling_converged"):
        if extra in rows[-1] and extra not in header:
            header.append(extra)
    return [_write(cfg, "ensemble_summary.csv", header, rows, "ensemble")]


def cmd_analyze(cfg: RunConfig, input_dir: str | None = None) -> list[Path]:
    root = Path(input_dir) if input_dir else Path(cfg.run.output_dir) / "trajectories"
    files = sorted(p for p in root.rglob("traj_*.csv") if not p.name.endswith(".jumps.csv"))
    if not files:
        raise ConfigError("input", f"no trajectory files under {root}")
    if cfg.analysis.mutual_information:
        raise ConfigError("analysis.mutual_information", "state snapshots are not stored in trajectory files")
    groups: dict[Path, list] = {}
    for path in files:
        groups.setdefault(path.parent, []).append(read_trajectory(path))
    rows = []
    for directory in sorted(groups):
        records = sorted(groups[directory], key=lambda r: r.seed)
        params = records[0].params
        if any(r.params != params for r in records):
            raise CommandError(f"{directory}: trajectories with different parameters")
        rows.append(_summary_row(cfg, params, records, records[0].n_max))
    return [_write(cfg, "analysis.csv", _summary_header(rows[0]), rows, "analyze")]


# ---------------------------------------------------------------------------
# bright-state model


def bright_model_rows(cfg: RunConfig, overlays=()) -> list[list]:
    grid = cfg.sweep.n_bright or DEFAULT_N_BRIGHT_GRID
    if any(n < 0 for n in grid):
        raise ConfigError("sweep.n_bright", "photon numbers must be >= 0")
    rows = []
    for n in sorted(grid):
        a = build(n)
        s, mi = ansatz_pseudospin(a), ansatz_mutual_information(a)
        l1, l2 = ansatz_eigenvalues(a)
        rows.append(["model", n, s, mi, l1, l2, a.c0_sq, a.coherence, s, mi])
    for path in overlays:
        _, _, table = read_table(path)
        for r in table:
            n = float(r["n_bright"])
            if not math.isfinite(n):
                continue
            a = build(n)
            mi = r.get("mutual_info_bright") or "nan"
            rows.append(
                ["trajectory", n, float(r["pseudospin_bright"]), float(mi), math.nan, math.nan, math.nan, math.nan,
                 ansatz_pseudospin(a), ansatz_mutual_information(a)]
            )
    return rows


def cmd_bright_model(cfg: RunConfig, overlays=()) -> list[Path]:
    return [_write(cfg, "bright_model.csv", BRIGHT_COLUMNS, bright_model_rows(cfg, overlays), "bright-model")]


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(2, {"error": "usage", "message": message})


def _fail(code: int, payload: dict):
    print(json.dumps(payload), file=sys.stderr)
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbbsim", description="Photon-blockade breakdown simulations.")
    parser.add_argument("--version", action="version", version=f"pbbsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [
        ("classical-roots", "steady-state photon numbers of the classical theories"),
        ("boundary", "edges of the bistable region versus detuning"),
        ("ensemble", "quantum-jump ensembles and telegraph statistics"),
        ("analyze", "telegraph statistics from stored trajectory files"),
        ("bright-model", "pseudospin and mutual information of the bright-state model"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="config file (section.key = value lines)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
        p.add_argument("-o", "--output-dir", help="shorthand for --set run.output_dir=...")
        if name == "analyze":
            p.add_argument("--input", help="directory searched for traj_*.csv (default: <output_dir>/trajectories)")
        if name == "bright-model":
            p.add_argument("--overlay", action="append", default=[], help="summary CSV whose bright-state points are added")
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = list(args.set)
    if args.output_dir:
        overrides.append(f"run.output_dir={json.dumps(args.output_dir)}")
    return apply_overrides(cfg, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "classical-roots":
            outputs = cmd_classical_roots(cfg)
        elif args.command == "boundary":
            outputs = cmd_boundary(cfg)
        elif args.command == "ensemble":
            outputs = cmd_ensemble(cfg)
        elif args.command == "analyze":
            outputs = cmd_analyze(cfg, args.input)
        else:
            outputs = cmd_bright_model(cfg, args.overlay)
    except ConfigError as exc:
        _fail(2, {"error": "config", "field": exc.field, "message": exc.message})
    except EnsembleError as exc:
        failures = {str(i): f"{type(e).__name__}: {e}" for i, e in sorted(exc.failures.items())}
        _fail(3, {"error": "trajectory", "failures": failures})
    except (CommandError, ValueError, RuntimeError, OSError) as exc:
        _fail(1, {"error": type(exc).__name__, "message": str(exc)})
    print(json.dumps({"status": "ok", "command": args.command, "outputs": [str(p) for p in outputs]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
