"""Experiment configuration files and presets.

A config is a YAML mapping.  Every key is optional except ``preset``, which
names the profile supplying the defaults::

    preset: fredholm          # fredholm | tomo | tomo-scaled | schlieren
    problem: {n: 300}         # problem parameters
    noise: {model: uniform_sup, levels: [0.5, 0.1]}
    trials: 10
    seed: 0
    fixed_noise: false
    solver: {tau: 1.2}        # applied to every solver entry
    solvers:                  # replaces the preset's list
      - {name: sgd, mode: sgd, beta_cap: 0.0}
      - {name: shb, mode: shb, upsilon0: 1.0e-6, upsilon1: 1.0e-5}
    solve: {level: 0.05, solver: shb, trace: true}

Unknown keys anywhere are rejected.  Overrides ``KEY=VALUE`` use dotted
paths (``noise.levels=[0.1]``, ``problem.grid_n=64``); a bare solver field
such as ``tau=1.5`` means ``solver.tau``.  Values are parsed as YAML.
"""
from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..harness import (ExperimentSpec, FredholmProblem, SchlierenProblem, SolverEntry,
                       TomoProblem)
from ..operators import NoiseModel
from ..solver import Mode, SolverConfig

__all__ = ["PRESETS", "RunConfig", "parse_config", "load_config", "preset_config"]

_SOLVER_FIELDS = {f.name for f in dataclasses.fields(SolverConfig)}
_TOP_KEYS = {"preset", "problem", "noise", "trials", "seed", "fixed_noise", "solver",
             "solvers", "solve"}
_PROBLEMS = {"fredholm": FredholmProblem, "tomo": TomoProblem, "schlieren": SchlierenProblem}


def _shb_variants(pairs, mode, sgd_mode, **common):
    out = [{"name": "sgd", "mode": sgd_mode, "beta_cap": 0.0, **common}]
    for u0, u1 in pairs:
        out.append({"name": f"shb_{u0:.0e}_{u1:.0e}", "mode": mode,
                    "upsilon0": u0, "upsilon1": u1, **common})
    return out


PRESETS: dict[str, dict] = {
    "fredholm": {
        "problem_kind": "fredholm",
        "problem": {"n": 300},
        "noise": {"model": "uniform_sup", "levels": [0.5, 0.1, 0.05, 0.01]},
        "trials": 100,
        "solver": {"mu0": 0.7, "mu1": 1e4, "tau": 1.2, "beta_cap": 0.99},
        "solvers": _shb_variants([(1e-5, 1e-4), (1e-5, 1e-5), (1e-6, 1e-5)], "shb", "sgd"),
        "solve": {"level": 0.05, "solver": "shb_1e-06_1e-05"},
    },
    "tomo": {
        "problem_kind": "tomo",
        "problem": {"grid_n": 128, "n_angles": 45, "n_rays": 360},
        "noise": {"model": "gaussian_absolute", "levels": [0.5, 0.1, 0.05]},
        "trials": 100,
        "solver": {"mu0": 1.0, "mu1": 1e4, "tau": 2.0, "beta_cap": 0.99, "batch": 1800},
        "solvers": _shb_variants([(1e-6, 1e-5), (1e-6, 1e-6), (1e-7, 1e-6)],
                                 "minibatch", "minibatch_sgd"),
        "solve": {"level": 0.1, "solver": "shb_1e-07_1e-06"},
    },
    "tomo-scaled": {
        "problem_kind": "tomo",
        "problem": {"grid_n": 64, "n_angles": 15, "n_rays": 90},
        "noise": {"model": "gaussian_absolute", "levels": [0.05]},
        "trials": 5,
        "solver": {"mu0": 1.0, "mu1": 1e4, "tau": 2.0, "beta_cap": 0.99, "batch": 150},
        "solvers": _shb_variants([(1e-7, 1e-6)], "minibatch", "minibatch_sgd"),
        "solve": {"level": 0.05, "solver": "shb_1e-07_1e-06"},
    },
    "schlieren": {
        "problem_kind": "schlieren",
        "problem": {"grid_n": 110, "n_dirs": 60, "eta": 0.01, "lam": 1.0},
        "noise": {"model": "gaussian_relative_block",
                  "levels": [0.05, 0.02, 0.01, 0.005, 0.002]},
        "trials": 100,
        "solver": {"mu0": 0.9, "mu1": 1e4, "tau": 1.5, "eta": 0.01, "beta_cap": 0.99,
                   "xi0": 0.05},
        "solvers": _shb_variants([(1e-4, 1e-3), (1e-4, 1e-4), (1e-5, 1e-4)], "shb", "sgd"),
        "solve": {"level": 0.005, "solver": "shb_1e-05_1e-04"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    """A parsed config: the sweep plus the single-run selection for ``solve``."""

    preset: str
    spec: ExperimentSpec
    solve_level: float
    solve_solver: str
    solve_trace: bool = True

    def solver(self, name: str | None = None) -> SolverEntry:
        name = name or self.solve_solver
        for s in self.spec.solvers:
            if s.name == name:
                return s
        raise ConfigError(f"solve.solver: unknown solver {name!r}")


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{where + '.' if where else ''}{k}: unknown key")


def _set_path(doc: dict, key: str, value) -> None:
    parts = key.split(".")
    if len(parts) == 1 and parts[0] not in _TOP_KEYS:
        if parts[0] not in _SOLVER_FIELDS:
            raise ConfigError(f"{key}: unknown key")
        parts = ["solver", parts[0]]
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{key}: cannot set a field inside a non-mapping")
    node[parts[-1]] = value


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"{item}: override must look like KEY=VALUE")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from e
    return key, value


def _typed(value, typ, key):
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key}: expected an integer")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string")
        return value
    return value


_SOLVER_TYPES = {"mu0": float, "mu1": float, "tau": float, "upsilon0": float,
                 "upsilon1": float, "beta_cap": float, "eta": float, "r": float,
                 "batch": int, "sampling": str, "max_iters": int, "seed": int, "xi0": float}


def _solver_cfg(fields: dict, where: str, seed: int) -> SolverConfig:
    kw = {}
    for k, v in fields.items():
        if k not in _SOLVER_FIELDS:
            raise ConfigError(f"{where}.{k}: unknown key")
        if k == "max_iters" and v is None:
            kw[k] = None
            continue
        kw[k] = _typed(v, _SOLVER_TYPES[k], f"{where}.{k}")
    kw.setdefault("seed", seed)
    try:
        return SolverConfig(**kw)
    except ValueError as e:
        raise ConfigError(f"{where}.sampling: {e}") from None


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r} (choose from {sorted(PRESETS)})")
    doc = copy.deepcopy(PRESETS[name])
    doc.pop("problem_kind")
    doc["preset"] = name
    return doc


def parse_config(doc: dict, overrides=()) -> RunConfig:
    """Validate a config mapping (after applying ``KEY=VALUE`` overrides)."""
    doc = copy.deepcopy(doc) if doc else {}
    _check_keys(doc, _TOP_KEYS, "")
    for item in overrides:
        key, value = _parse_override(item)
        _set_path(doc, key, value)
        _check_keys(doc, _TOP_KEYS, "")
    if "preset" not in doc:
        raise ConfigError("preset: missing (one of %s)" % ", ".join(sorted(PRESETS)))
    name = _typed(doc["preset"], str, "preset")
    base = PRESETS.get(name)
    if base is None:
        raise ConfigError(f"preset: unknown preset {name!r} (choose from {sorted(PRESETS)})")
    kind = base["problem_kind"]
    cls = _PROBLEMS[kind]

    prob = dict(base["problem"])
    p_over = doc.get("problem", {}) or {}
    _check_keys(p_over, {f.name for f in dataclasses.fields(cls)}, "problem")
    prob.update(p_over)
    ptypes = {f.name: f.type for f in dataclasses.fields(cls)}
    tmap = {"int": int, "float": float, "bool": bool}
    prob = {k: _typed(v, tmap.get(str(ptypes[k]), float), f"problem.{k}") for k, v in prob.items()}
    problem = cls(**prob)

    noise = dict(base["noise"])
    n_over = doc.get("noise", {}) or {}
    _check_keys(n_over, {"model", "levels"}, "noise")
    noise.update(n_over)
    try:
        model = NoiseModel(_typed(noise["model"], str, "noise.model"))
    except ValueError:
        raise ConfigError(f"noise.model: unknown model {noise['model']!r}") from None
    levels = noise["levels"]
    if not isinstance(levels, list):
        levels = [levels]
    levels = tuple(_typed(v, float, "noise.levels") for v in levels)

    trials = _typed(doc.get("trials", base["trials"]), int, "trials")
    seed = _typed(doc.get("seed", 0), int, "seed")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed: need an unsigned 64-bit value")
    fixed = _typed(doc.get("fixed_noise", False), bool, "fixed_noise")

    common = dict(base["solver"])
    s_over = doc.get("solver", {}) or {}
    _check_keys(s_over, _SOLVER_FIELDS, "solver")
    common.update(s_over)
    entries_src = doc.get("solvers", base["solvers"])
    if not isinstance(entries_src, list) or not entries_src:
        raise ConfigError("solvers: expected a nonempty list")
    entries = []
    for k, e in enumerate(entries_src):
        _check_keys(e, _SOLVER_FIELDS | {"name", "mode"}, f"solvers[{k}]")
        e = dict(e)
        name_k = _typed(e.pop("name", f"solver{k}"), str, f"solvers[{k}].name")
        try:
            mode = Mode(_typed(e.pop("mode", "shb"), str, f"solvers.{name_k}.mode"))
        except ValueError:
            raise ConfigError(f"solvers.{name_k}.mode: unknown mode") from None
        fields = {**common, **e}
        if not mode.batched:
            fields["batch"] = 1
        if mode in (Mode.SGD, Mode.MINIBATCH_SGD):
            fields["beta_cap"] = 0.0
        entries.append(SolverEntry(name_k, mode, _solver_cfg(fields, f"solvers.{name_k}", seed)))

    spec = ExperimentSpec(problem, model, levels, tuple(entries), trials, seed, fixed)
    spec.validate()

    solve = dict(base["solve"])
    v_over = doc.get("solve", {}) or {}
    _check_keys(v_over, {"level", "solver", "trace"}, "solve")
    solve.update(v_over)
    rc = RunConfig(name, spec, _typed(solve["level"], float, "solve.level"),
                   _typed(solve["solver"], str, "solve.solver"),
                   _typed(solve.get("trace", True), bool, "solve.trace"))
    rc.solver()
    if not rc.solve_level >= 0:
        raise ConfigError("solve.level: must be nonnegative")
    return rc


def load_config(path: str | Path | None, overrides=(), preset: str | None = None) -> RunConfig:
    """Read a YAML config file (or start from `preset`) and parse it."""
    doc: dict = {}
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text()) or {}
        except FileNotFoundError:
            raise ConfigError(f"config: file not found: {path}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"config: cannot parse {path}: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be a mapping")
    if preset is not None:
        if "preset" in doc and doc["preset"] != preset:
            raise ConfigError(f"preset: command line says {preset!r}, file says {doc['preset']!r}")
        doc["preset"] = preset
    return parse_config(doc, overrides)
