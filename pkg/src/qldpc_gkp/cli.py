"""Command-line front end: ``build``, ``validate`` and ``run``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .detector_model import build_circuit_check_matrix
from .experiment import ConfigError, ExperimentConfig, format_csv, run_experiment, write_results
from .io import FormatError, load_bundle, write_groups, write_matrix


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qldpc-gkp", description="Circuit-level GKP soft-information decoding experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build the circuit-level check matrix of a code bundle")
    b.add_argument("bundle", help="bundle.json, its directory, or a built-in code name")
    b.add_argument("--schedule", help="schedule name inside the bundle (default: first)")
    b.add_argument("--rounds", type=int, default=3)
    b.add_argument("--out", help="directory for hcirc.txt, data_effects.txt and groups.tsv")

    v = sub.add_parser("validate", help="check a code bundle and its schedules")
    v.add_argument("bundle")

    r = sub.add_parser("run", help="run a Monte Carlo experiment from a JSON config")
    r.add_argument("--config", required=True, help="JSON experiment config")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out", help="results CSV path (manifest goes next to it)")
    return p


def cmd_build(args) -> int:
    bundle = load_bundle(args.bundle)
    if args.rounds < 1:
        raise ConfigError("rounds must be at least 1")
    t0 = time.perf_counter()
    ccm = build_circuit_check_matrix(bundle.code, bundle.schedule(args.schedule), args.rounds)
    elapsed = time.perf_counter() - t0
    rows, cols = ccm.matrix.shape
    print(f"code {bundle.name}: n={bundle.code.n} k={bundle.code.k}")
    print(f"H_circ: {rows} rows x {cols} columns ({ccm.n_locations} fault locations, {elapsed:.2f}s)")
    for label, count in ccm.mechanism_counts().items():
        print(f"  {label:<12} {count}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_matrix(out / "hcirc.txt", ccm.matrix)
        write_matrix(out / "data_effects.txt", ccm.data_effects)
        write_groups(out / "groups.tsv", ccm)
        print(f"wrote {out}/hcirc.txt, data_effects.txt, groups.tsv")
    return 0


def cmd_validate(args) -> int:
    bundle = load_bundle(args.bundle)
    code = bundle.code
    print(f"{bundle.name}: [[{code.n}, {code.k}, {code.d if code.d is not None else '?'}]] "
          f"H_X {code.h_x.shape[0]}x{code.n}, H_Z {code.h_z.shape[0]}x{code.n}: ok")
    for name, per_basis in bundle.schedules.items():
        depths = ", ".join(f"{b} depth {s.depth}" for b, s in per_basis.items() if s is not None)
        print(f"  schedule {name}: {depths}")
    return 0


def load_config(args) -> ExperimentConfig:
    path = Path(args.config)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    for key in ("seed", "workers", "out"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    # relative bundle paths are taken relative to the config file
    code = data.get("code")
    if isinstance(code, str) and not Path(code).is_absolute() and (path.parent / code).exists():
        data["code"] = str(path.parent / code)
    return ExperimentConfig.from_dict(data)


def cmd_run(args) -> int:
    config = load_config(args)
    load_bundle(config.code)
    started = time.time()

    def flush(results):
        write_results(config, results, started, complete=False)

    try:
        results = run_experiment(config, on_point=flush)
    except KeyboardInterrupt:
        print("interrupted; completed points were written to", config.out, file=sys.stderr)
        return 130
    out, manifest = write_results(config, results, started, complete=True)
    sys.stdout.write(format_csv(results))
    print(f"wrote {out} and {manifest}", file=sys.stderr)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"build": cmd_build, "validate": cmd_validate, "run": cmd_run}[args.command]
    try:
        return handler(args)
    except (FileNotFoundError, FormatError, ConfigError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1
