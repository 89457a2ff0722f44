"""Run configuration: flat ``section.key = value`` text with JSON values.

Example::

    # comments start with '#'
    params.g = 100.0
    params.delta = 50.0
    sweep.eta = [12.0, 14.0, 16.0]
    trajectory.n_max = null     # resolved automatically

Every field has a default; ``resolve`` fills the automatic ones so that
outputs never carry implicit values.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields

from .model import SystemParams, default_n_max

__all__ = [
    "ConfigError",
    "TrajectorySettings",
    "AnalysisSettings",
    "ClassicalSettings",
    "SweepSettings",
    "RunSettings",
    "RunConfig",
    "parse_config",
    "emit_config",
    "load_config",
    "apply_overrides",
    "auto_n_max",
]

THREADS_ENV = "PBBSIM_THREADS"


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass(frozen=True)
class TrajectorySettings:
    t_final: float = 2000.0
    dt_out: float = 0.1
    n_trajectories: int = 32
    base_seed: int = 0
    n_max: int | None = None
    method: str = "expm"
    jump_tol: float = 1e-3
    snapshot_every: int = 0
    write_records: bool = True


@dataclass(frozen=True)
class AnalysisSettings:
    enter_bright: float = 0.75
    enter_dim: float = 0.25
    smoothing: float = 1.0
    min_dwell: float = 5.0
    levels: str = "quantile"
    mutual_information: bool = False
    half_filling: bool = False
    half_filling_tol: float = 0.05
    half_filling_max_iter: int = 8


@dataclass(frozen=True)
class ClassicalSettings:
    boundary_tol: float = 1e-3
    boundary_max_iter: int = 60


@dataclass(frozen=True)
class SweepSettings:
    delta: tuple = (2.0, 10.0, 25.0, 50.0)
    eta: tuple = ()
    gamma: tuple = (0.0,)
    n_bright: tuple = ()


@dataclass(frozen=True)
class RunSettings:
    output_dir: str = "out"
    threads: int | None = None


DEFAULT_PARAMS = SystemParams(g=100.0, kappa=1.0, gamma=0.0, gamma_c=0.0, delta=50.0, eta=14.0)


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams = DEFAULT_PARAMS
    trajectory: TrajectorySettings = field(default_factory=TrajectorySettings)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    classical: ClassicalSettings = field(default_factory=ClassicalSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    run: RunSettings = field(default_factory=RunSettings)

    def with_params(self, **changes) -> RunConfig:
        return dataclasses.replace(self, params=self.params.replace(**changes))

    def resolve(self) -> RunConfig:
        """Fill automatic values.

        ``trajectory.n_max`` defaults to ``auto_n_max``; ``run.threads``
        comes from $PBBSIM_THREADS when set, else the config, else the
        machine's CPU count.
        """
        import os

        traj = self.trajectory
        if traj.n_max is None:
            traj = dataclasses.replace(traj, n_max=auto_n_max(self.params))
        run = self.run
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(THREADS_ENV, f"expected an integer, got {env!r}") from None
            if threads < 1:
                raise ConfigError(THREADS_ENV, "must be >= 1")
            run = dataclasses.replace(run, threads=threads)
        elif run.threads is None:
            run = dataclasses.replace(run, threads=os.cpu_count() or 1)
        return dataclasses.replace(self, trajectory=traj, run=run)


def auto_n_max(params: SystemParams) -> int:
    """Default truncation, widened to cover the neoclassical bright state when it is larger."""
    from .classical import neoclassical_roots

    n_max = default_n_max(params)
    if params.g > 0 and params.eta > 0:
        bright = neoclassical_roots(params).bright
        if bright is not None:
            nb = bright.n
            n_max = max(n_max, math.ceil(nb + 6 * math.sqrt(nb)) + 30)
    return n_max


_SECTIONS = ("params", "trajectory", "analysis", "classical", "sweep", "run")


def _coerce(name: str, value, default, annotation: str):
    if isinstance(default, tuple):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(name, f"expected a list of numbers, got {value!r}")
        return tuple(float(v) for v in value)
    if value is None:
        if "None" in annotation:
            return None
        raise ConfigError(name, "may not be null")
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected true/false, got {value!r}")
        return value
    if "int" in annotation and "float" not in annotation:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    return value


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``section.key = value`` lines on top of ``base`` (defaults if omitted)."""
    cfg = base or RunConfig()
    updates: dict[str, dict] = {s: {} for s in _SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'section.key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        _assign(updates, key, value)
    return _apply(cfg, updates)


def _strip_comment(line: str) -> str:
    in_str = escaped = False
    for i, ch in enumerate(line):
        if in_str and escaped:
            escaped = False
        elif in_str and ch == "\\":
            escaped = True
        elif ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


def _assign(updates: dict, key: str, value_text: str) -> None:
    if "." not in key:
        raise ConfigError(key, "keys must look like section.name")
    section, name = key.split(".", 1)
    if section not in updates:
        raise ConfigError(key, f"unknown section {section!r}")
    try:
        value = json.loads(value_text)
    except json.JSONDecodeError:
        raise ConfigError(key, f"cannot parse value {value_text!r} (use JSON syntax)") from None
    updates[section][name] = value


def _apply(cfg: RunConfig, updates: dict) -> RunConfig:
    out = {}
    for section in _SECTIONS:
        current = getattr(cfg, section)
        known = {f.name: f for f in fields(current)}
        changes = {}
        for name, value in updates[section].items():
            full = f"{section}.{name}"
            if name not in known:
                raise ConfigError(full, "unknown key")
            changes[name] = _coerce(full, value, getattr(current, name), str(known[name].type))
        if changes:
            try:
                current = dataclasses.replace(current, **changes)
            except ValueError as exc:
                raise ConfigError(f"{section}.{next(iter(changes))}", str(exc)) from None
        out[section] = current
    try:
        from .telegraph import SegmentationSettings

        a = out["analysis"]
        SegmentationSettings(a.enter_bright, a.enter_dim, a.smoothing, a.min_dwell)
    except ValueError as exc:
        raise ConfigError("analysis", str(exc)) from None
    if out["analysis"].levels not in ("quantile", "classical"):
        raise ConfigError("analysis.levels", "must be 'quantile' or 'classical'")
    if out["trajectory"].method not in ("expm", "rk"):
        raise ConfigError("trajectory.method", "must be 'expm' or 'rk'")
    if out["run"].threads is not None and out["run"].threads < 1:
        raise ConfigError("run.threads", "must be >= 1")
    if out["trajectory"].n_max is not None and out["trajectory"].n_max < 1:
        raise ConfigError("trajectory.n_max", "must be >= 1")
    if out["trajectory"].n_trajectories < 1:
        raise ConfigError("trajectory.n_trajectories", "must be >= 1")
    for name in ("t_final", "dt_out", "jump_tol"):
        if getattr(out["trajectory"], name) <= 0:
            raise ConfigError(f"trajectory.{name}", "must be > 0")
    return RunConfig(**out)


def apply_overrides(cfg: RunConfig, assignments: list[str]) -> RunConfig:
    """Apply ``section.key=value`` strings (command-line ``--set``)."""
    updates: dict[str, dict] = {s: {} for s in _SECTIONS}
    for item in assignments:
        if "=" not in item:
            raise ConfigError(item, "expected section.key=value")
        key, value = item.split("=", 1)
        _assign(updates, key.strip(), value.strip())
    return _apply(cfg, updates)


def _format(value) -> str:
    if isinstance(value, tuple):
        value = list(value)
    return json.dumps(value)


def emit_config(cfg: RunConfig) -> str:
    lines = []
    for section in _SECTIONS:
        obj = getattr(cfg, section)
        for f in fields(obj):
            lines.append(f"{section}.{f.name} = {_format(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
