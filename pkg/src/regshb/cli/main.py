"""``regshb`` command line: solve | bench | check | export-problem."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InputError
from ..harness import build, discrepancy_check, make_data, monte_carlo, relative_error
from ..harness.experiment import default_workers
from ..harness.report import write_csv, write_json
from ..operators.export import write_array, write_matrix
from ..operators.system import MatrixSystem
from ..solver import run, solver_stream
from .checks import run_checks
from .config import PRESETS, load_config

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("preset", nargs="?", choices=sorted(PRESETS),
                        help="named profile (may also come from --config)")
    common.add_argument("--config", help="YAML experiment file")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (repeatable)")
    common.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--workers", type=int,
                        help="worker processes (default: $REG_SHB_WORKERS or CPU count)")

    p = argparse.ArgumentParser(prog="regshb", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="one run: trace and reconstruction")
    s.add_argument("--noise", type=float, help="noise level for this run")
    s.add_argument("--solver", help="solver entry name")
    s.add_argument("--trial", type=int, default=0, help="trial index selecting the streams")
    sub.add_parser("bench", parents=[common], help="Monte-Carlo sweep, CSV/JSON tables")
    c = sub.add_parser("check", help="run the self-test suites")
    c.add_argument("--out", help="write check.json here")
    c.add_argument("names", nargs="*", help="subset of checks")
    sub.add_parser("export-problem", parents=[common], help="write phantom and system binaries")
    return p


def _load(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.config is None and args.preset is None:
        raise ConfigError("preset: give a preset name or --config")
    return load_config(args.config, overrides, args.preset)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1) + "\n")


def cmd_solve(args) -> int:
    rc = _load(args)
    spec = rc.spec
    entry = rc.solver(args.solver)
    level = rc.solve_level if args.noise is None else args.noise
    if level < 0:
        raise ConfigError("noise: must be nonnegative")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    system, truth = make_data(spec.problem, spec.noise_model, level, spec.base_seed, 0, args.trial)
    rec = run(system, spec.problem.penalty(), entry.cfg, entry.mode,
              rng=solver_stream(spec.base_seed, 0, args.trial, 1), trace=rc.solve_trace)
    if rc.solve_trace:
        rec.write_jsonl(out / "trace.jsonl")
        rec.write_binary(out / "trace.bin")
    shape = system.domain_shape
    write_array(out / "reconstruction", np.reshape(rec.final_x, shape))
    ok, ratio = (discrepancy_check(system, rec.final_x, entry.cfg.tau)
                 if rec.stop_reason == "stopping_rule" else (None, None))
    _dump(out / "record.json", {
        "preset": rc.preset, "solver": entry.name, "mode": entry.mode.value,
        "level": level, "seed": spec.base_seed, "trial": args.trial,
        "config": {k: (v.value if hasattr(v, "value") else v)
                   for k, v in vars(entry.cfg).items()},
        "n_delta": rec.n_delta, "iterations": rec.iterations,
        "stop_reason": rec.stop_reason, "safeguard_hit": rec.safeguard_hit,
        "error": relative_error(rec.final_x, truth.x_dagger),
        "discrepancy_ok": ok, "max_residual_ratio": ratio,
    })
    _dump(out / "timing.json", {"wall_time": rec.wall_time})
    print(f"{entry.name}: {rec.stop_reason} after {rec.iterations} iterations, "
          f"error {relative_error(rec.final_x, truth.x_dagger):.4e}")
    return 0


def cmd_bench(args) -> int:
    rc = _load(args)
    workers = args.workers if args.workers is not None else default_workers()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = monte_carlo(rc.spec, workers=max(1, workers))
    write_csv(out / "results.csv", rc.spec, cells)
    write_json(out / "results.json", rc.spec, cells)
    for c in cells:
        print(f"{c.solver:>18} level={c.level:<8g} iter={c.stats.mean_iter:<12.1f} "
              f"error={c.stats.mean_sq_rel_error:.4e} safeguard={c.stats.safeguard_hits}")
    return 0


def cmd_check(args) -> int:
    results = run_checks(args.names or None)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    passed = sum(ok for _, ok, _ in results)
    print(f"{passed}/{len(results)} checks passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _dump(out / "check.json", [{"name": n, "passed": ok, "detail": d}
                                    for n, ok, d in results])
    return 0 if results and passed == len(results) else 1


def cmd_export(args) -> int:
    rc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = rc.spec.problem
    system, truth = build(problem)
    write_array(out / "x_dagger", np.reshape(truth.x_dagger, system.domain_shape))
    if isinstance(system, MatrixSystem):
        write_matrix(out / "matrix", system.matrix)
        write_array(out / "clean_data", np.asarray(truth.clean_data))
    else:
        import scipy.sparse as sp
        write_matrix(out / "radon", sp.vstack(system.radon, format="csr"))
        write_array(out / "clean_data", np.stack(truth.clean_data))
    print(f"exported {problem.kind} problem to {out}")
    return 0


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "check": cmd_check,
            "export-problem": cmd_export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InputError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
