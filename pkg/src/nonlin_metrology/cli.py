"""Command-line front end.

    python -m nonlin_metrology heatmap --out heatmap.csv
    python -m nonlin_metrology critical-phase --z 1,2,3 --k 1,2 --epsilon 0.01
    python -m nonlin_metrology fidelity --g power:2 --k 1 --phi pi/4 --state 0,2
    python -m nonlin_metrology verify [--full]

Exit status: 0 on success, 1 when ``verify`` finds a violated check, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .exceptions import DomainError, PrecisionError, SupportError
from .generators import parse_generator
from .hilbert import SpectrumSet, superposition
from .metrics import average_fidelity, emergent_fidelity
from .sweeps import (
    CRITICAL_PHASE,
    HEATMAP,
    LINDBLAD,
    QFI_CURVES,
    ConfigError,
    SweepConfig,
    emit,
    parse_number,
    run,
)
from .sweeps import parse_config as _parse_config

USAGE_ERROR = 2
CHECK_FAILED = 1

# flag name -> config key, per sweep
_SWEEP_FLAGS = {
    HEATMAP: ("z", "k", "phi", "dim", "epsilon"),
    CRITICAL_PHASE: ("z", "k", "epsilon", "dim", "samples"),
    QFI_CURVES: ("z", "k", "m", "n"),
    LINDBLAD: ("z", "phi", "kappa", "t", "cutoff"),
}


def parse_config(path_or_flags, experiment: str | None = None) -> SweepConfig:
    """Config from a JSON file path, JSON text or a mapping of flag values.

    A mapping may carry ``config`` (a file path) whose contents are overridden
    by the remaining non-empty entries.
    """
    if isinstance(path_or_flags, dict):
        flags = {k: v for k, v in path_or_flags.items() if v is not None}
        base = {}
        if "config" in flags:
            with open(flags.pop("config")) as fh:
                base = json.load(fh)
            if not isinstance(base, dict):
                raise ConfigError("config", "JSON config must be an object")
        merged = {**base, **flags}
        return _parse_config(merged, experiment)
    return _parse_config(path_or_flags, experiment)


def _add_sweep(sub, name, help_text):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", help="JSON config file; flags override its entries")
    for flag in _SWEEP_FLAGS[name]:
        p.add_argument(f"--{flag}", dest=flag, help="comma list, start:stop:step range or pi literal")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="output_path", help="CSV output path")
    p.add_argument("--json", dest="json_path", help="optional JSON mirror of the table")
    p.add_argument("--threads", type=int, help="worker threads (default: NONLIN_THREADS or cpu count)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlin-metrology", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sweep(sub, HEATMAP, "Haar-averaged fidelity over (z, k) and its contour")
    _add_sweep(sub, CRITICAL_PHASE, "overlap at the critical-phase bound over Haar states")
    _add_sweep(sub, QFI_CURVES, "nuisance-parameter QFI for a two-point probe")
    _add_sweep(sub, LINDBLAD, "recovered fidelity under photon loss")

    fid = sub.add_parser("fidelity", help="emergent-error fidelity of one state")
    fid.add_argument("--g", required=True, help="linear:1, power:2.5, kerr, plateau:4:2 or table:0,1,4")
    fid.add_argument("--k", required=True, type=int)
    fid.add_argument("--phi", required=True)
    fid.add_argument("--state", required=True, help="labels for an equal superposition, e.g. 0,2")
    fid.add_argument("--space", help="e.g. bosonic:30, rotor:5, spin:8 (default: smallest bosonic space)")
    fid.add_argument("--average", type=int, metavar="DIM", help="print the Haar average over DIM levels instead")

    ver = sub.add_parser("verify", help="randomized identity suite")
    ver.add_argument("--full", action="store_true", help="acceptance-size run")
    ver.add_argument("--seed", type=int, default=1)
    return parser


def _run_sweep(args) -> int:
    flags = {key: getattr(args, key) for key in _SWEEP_FLAGS[args.command]}
    flags.update(config=args.config, seed=args.seed, output_path=args.output_path)
    config = parse_config(flags, args.command)
    print(f"{config.experiment}: {config.size} grid points")
    start = time.perf_counter()
    result = run(config, args.threads)
    table = result.table if hasattr(result, "contour") else result
    out = config.output_path
    if out:
        table.to_csv(out)
        if hasattr(result, "contour"):
            root, ext = os.path.splitext(out)
            result.contour.to_csv(f"{root}_contour{ext or '.csv'}")
    if args.json_path:
        table.to_json(args.json_path)
    where = f" -> {out}" if out else ""
    print(f"{config.experiment}: {len(table)} rows in {time.perf_counter() - start:.2f} s{where}")
    if not out:
        sys.stdout.write(table.to_csv_string())
    return 0


def _run_fidelity(args) -> int:
    g = parse_generator(args.g)
    phi = parse_number(args.phi)
    if args.average is not None:
        print(f"{average_fidelity(g, args.k, phi, args.average):.12f}")
        return 0
    labels = [int(v) for v in args.state.split(",") if v.strip()]
    if not labels:
        raise ConfigError("state", "need at least one label")
    space = SpectrumSet.parse(args.space) if args.space else SpectrumSet.bosonic(max(labels) + max(args.k, 0))
    psi = superposition(space, labels)
    print(f"{emergent_fidelity(g, args.k, phi, psi):.12f}")
    return 0


def _run_verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(full=args.full, seed=args.seed)
    return 0 if all(c.passed for c in checks) else CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "fidelity":
            return _run_fidelity(args)
        if args.command == "verify":
            return _run_verify(args)
        return _run_sweep(args)
    except (ConfigError, DomainError, SupportError, PrecisionError, ValueError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


__all__ = ["main", "parse_config", "emit", "build_parser"]
