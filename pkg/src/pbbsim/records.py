"""CSV persistence for tables and trajectory records.

Every file starts with ``#`` metadata lines: the code version, free-form
``# key = value`` entries, and the fully resolved run configuration as
``# config: section.key = value`` lines.  One header row follows, then
the data.  Floats are written with 17 significant digits so that reading
a file back reproduces the stored values exactly.

A trajectory is stored as two files sharing a stem: ``<stem>.csv`` with
one row per output sample (columns of ``TrajectoryRecord.columns``) and
``<stem>.jumps.csv`` with ``t,channel`` rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .mcwf import TrajectoryRecord
from .model import SystemParams

__all__ = [
    "format_value",
    "write_table",
    "read_table",
    "write_trajectory",
    "read_trajectory",
    "trajectory_paths",
]

_TRAJ_COLUMNS = ("t", "n_mean", "a_re", "a_im", "sigma_re", "sigma_im", "sigma_z", "photon_variance", "norm_sq")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _meta_lines(config_text: str | None, meta: dict | None) -> list[str]:
    lines = [f"# pbbsim version = {__version__}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {json.dumps(value) if not isinstance(value, str) else value}")
    if config_text:
        lines += [f"# config: {line}" for line in config_text.splitlines() if line.strip()]
    return lines


def write_table(path, header, rows, config_text: str | None = None, meta: dict | None = None) -> Path:
    """Write a CSV table with metadata lines; rows are sequences or dicts keyed by header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for line in _meta_lines(config_text, meta):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(h) for h in header]
        writer.writerow([format_value(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _split_meta(text: str) -> tuple[dict, list[str], list[str]]:
    meta: dict = {}
    config_lines: list[str] = []
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            content = line[1:].strip()
            if content.startswith("config:"):
                config_lines.append(content[len("config:") :].strip())
            elif "=" in content:
                key, value = (s.strip() for s in content.split("=", 1))
                meta[key] = value
        elif line.strip():
            body.append(line)
    return meta, config_lines, body


def read_table(path) -> tuple[dict, str, list[dict]]:
    """Return (metadata, config text, rows as dicts of strings)."""
    meta, config_lines, body = _split_meta(Path(path).read_text(encoding="utf-8"))
    if not body:
        raise ValueError(f"{path}: missing header row")
    reader = csv.DictReader(body)
    rows = list(reader)
    config_text = "\n".join(config_lines) + ("\n" if config_lines else "")
    return meta, config_text, rows


def trajectory_paths(directory, seed: int) -> tuple[Path, Path]:
    stem = Path(directory) / f"traj_{seed:06d}"
    return stem.with_suffix(".csv"), Path(str(stem) + ".jumps.csv")


def write_trajectory(directory, record: TrajectoryRecord, config_text: str | None = None) -> tuple[Path, Path]:
    samples_path, jumps_path = trajectory_paths(directory, record.seed)
    samples_path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "kind": "trajectory",
        "seed": record.seed,
        "n_max": record.n_max,
        "params": {f: getattr(record.params, f) for f in ("g", "kappa", "gamma", "gamma_c", "delta", "eta")},
        "settings": record.settings,
    }
    cols = record.columns()
    data = np.column_stack([cols[c] for c in _TRAJ_COLUMNS])
    buf = io.StringIO()
    for line in _meta_lines(config_text, meta):
        buf.write(line + "\n")
    buf.write(",".join(_TRAJ_COLUMNS) + "\n")
    np.savetxt(buf, data, fmt="%.17g", delimiter=",")
    samples_path.write_text(buf.getvalue(), encoding="utf-8")

    jbuf = io.StringIO()
    for line in _meta_lines(None, {"kind": "jumps", "seed": record.seed}):
        jbuf.write(line + "\n")
    jbuf.write("t,channel\n")
    for t, c in zip(record.jump_times, record.jump_channels):
        jbuf.write(f"{float(t)!r},{int(c)}\n")
    jumps_path.write_text(jbuf.getvalue(), encoding="utf-8")
    return samples_path, jumps_path


def read_trajectory(samples_path) -> TrajectoryRecord:
    """Inverse of ``write_trajectory`` (state snapshots are not persisted)."""
    samples_path = Path(samples_path)
    meta, _, body = _split_meta(samples_path.read_text(encoding="utf-8"))
    if meta.get("kind") != "trajectory":
        raise ValueError(f"{samples_path}: not a trajectory file")
    header = body[0].split(",")
    if tuple(header) != _TRAJ_COLUMNS:
        raise ValueError(f"{samples_path}: unexpected columns {header}")
    data = np.loadtxt(body[1:], delimiter=",", ndmin=2) if len(body) > 1 else np.empty((0, len(header)))
    col = {name: data[:, i] for i, name in enumerate(header)}
    seed = int(json.loads(meta["seed"]))
    jumps_path = trajectory_paths(samples_path.parent, seed)[1]
    _, _, jbody = _split_meta(jumps_path.read_text(encoding="utf-8"))
    jt = np.array([float(line.split(",")[0]) for line in jbody[1:]])
    jc = np.array([int(line.split(",")[1]) for line in jbody[1:]], dtype=np.int8)
    return TrajectoryRecord(
        seed=seed,
        params=SystemParams(**json.loads(meta["params"])),
        n_max=int(json.loads(meta["n_max"])),
        t=col["t"],
        n_mean=col["n_mean"],
        a_mean=col["a_re"] + 1j * col["a_im"],
        sigma_mean=col["sigma_re"] + 1j * col["sigma_im"],
        sigma_z_mean=col["sigma_z"],
        photon_variance=col["photon_variance"],
        norm_sq=col["norm_sq"],
        jump_times=jt,
        jump_channels=jc,
        settings=json.loads(meta.get("settings", "{}")),
    )
