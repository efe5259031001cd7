"""Declarative parameter grids, result tables and the four experiment runners."""

from __future__ import annotations

import ast
import json
import math
import operator
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import __version__
from .generators import PowerLaw
from .hilbert import SpectrumSet, superposition
from .lindblad import build_binomial_code, recovered_fidelity_curve
from .metrics import (
    EPSILON_CAP,
    critical_phase_bound,
    haar_states_surviving_shift,
    overlap_before_after,
)
from .qfi import qfi_nuisance

HEATMAP = "heatmap"
CRITICAL_PHASE = "critical-phase"
QFI_CURVES = "qfi"
LINDBLAD = "lindblad"
VERIFY = "verify"
EXPERIMENTS = (HEATMAP, CRITICAL_PHASE, QFI_CURVES, LINDBLAD, VERIFY)
ALIASES = {
    "FidelityHeatmap": HEATMAP,
    "CriticalPhase": CRITICAL_PHASE,
    "QfiCurves": QFI_CURVES,
    "LindbladCurves": LINDBLAD,
    "Verify": VERIFY,
}


class ConfigError(ValueError):
    """A sweep configuration names an unknown key or an out-of-range value."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


# -- number parsing -----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_number(text) -> float:
    """Float from a literal such as ``0.25``, ``pi/2000`` or ``-3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            value = walk(node.operand)
            return -value if isinstance(node.op, ast.USub) else value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        raise ValueError(f"not a number: {text!r}")

    try:
        return walk(ast.parse(str(text).strip(), mode="eval"))
    except SyntaxError as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def parse_grid(text) -> list:
    """Comma list (``1,2,3``) or inclusive range (``start:stop:step``) of numbers."""
    if isinstance(text, (list, tuple)):
        return [parse_number(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if text.count(":") == 2:
        start, stop, step = (parse_number(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError(f"range step must be positive in {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [parse_number(v) for v in text.split(",") if v.strip()]


# -- configuration ------------------------------------------------------------


def _heatmap_defaults():
    return {
        "grids": {
            "z": parse_grid("1:3:0.02"),
            "k": parse_grid("-10:10:0.1"),
            "phi": [math.pi / 2000],
            "dim": [201],
            "epsilon": [0.1],
        },
        "options": {},
    }


def _critical_defaults():
    return {
        "grids": {"z": [1.0, 1.5, 2.0, 3.0], "k": [1, 2, 3], "epsilon": [0.01], "dim": [101]},
        "options": {"samples": 100},
    }


def _qfi_defaults():
    return {
        "grids": {"z": parse_grid("1:3:0.25"), "k": [0, 1, 2, 3, 4, 5]},
        "options": {"m": 10, "n": 50},
    }


def _lindblad_defaults():
    return {
        "grids": {
            "z": [1.0, 2.0, 3.0, 4.0],
            "phi": [float(v) for v in np.logspace(-5, math.log10(2.0), 31)],
            "kappa": [0.01],
        },
        "options": {"t": 1.0, "cutoff": 30, "phi_cap": {"3": 0.5, "4": 0.05}},
    }


def _verify_defaults():
    return {"grids": {}, "options": {"full": False}}


DEFAULTS: dict = {
    HEATMAP: _heatmap_defaults,
    CRITICAL_PHASE: _critical_defaults,
    QFI_CURVES: _qfi_defaults,
    LINDBLAD: _lindblad_defaults,
    VERIFY: _verify_defaults,
}

_INTEGER_GRIDS = {"dim", "k_int"}


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    grids: dict
    seed: int = 0
    output_path: str = ""
    options: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(np.prod([len(v) for v in self.grids.values()])) if self.grids else 0

    def grid(self, name) -> list:
        return list(self.grids[name])

    def scalar(self, name):
        values = self.grids[name]
        if len(values) != 1:
            raise ConfigError(name, f"expected a single value, got {len(values)}")
        return values[0]


def emit(config: SweepConfig) -> dict:
    return {
        "experiment": config.experiment,
        "grids": {k: list(v) for k, v in config.grids.items()},
        "seed": config.seed,
        "output_path": config.output_path,
        "options": dict(config.options),
    }


def _validate(experiment: str, grids: dict, options: dict):
    for name, values in grids.items():
        if not values:
            raise ConfigError(name, "grid is empty")
    if "epsilon" in grids:
        for eps in grids["epsilon"]:
            cap = EPSILON_CAP if experiment == CRITICAL_PHASE else 1.0
            if not 0 < eps <= cap:
                raise ConfigError("epsilon", f"{eps} outside (0, {cap}]")
    if "z" in grids and min(grids["z"]) < 1:
        raise ConfigError("z", "power-law exponents must be >= 1")
    if "dim" in grids:
        for d in grids["dim"]:
            if d != int(d) or d < 2:
                raise ConfigError("dim", f"dimension must be an integer >= 2, got {d}")
    if experiment == CRITICAL_PHASE:
        for k in grids["k"]:
            if k != int(k):
                raise ConfigError("k", f"shift must be an integer, got {k}")
        if options["samples"] < 100:
            raise ConfigError("samples", "need at least 100 Haar samples per cell")
    if experiment == QFI_CURVES:
        if not 0 <= options["m"] < options["n"]:
            raise ConfigError("m", "need 0 <= m < n")
    if experiment == LINDBLAD:
        if options["cutoff"] < 24:
            raise ConfigError("cutoff", "binomial code needs cutoff >= 24")
        if any(kappa < 0 for kappa in grids["kappa"]):
            raise ConfigError("kappa", "loss rate must be >= 0")


def parse_config(data, experiment: str | None = None) -> SweepConfig:
    """Validated :class:`SweepConfig` from a mapping, JSON text or a JSON file path.

    Unknown keys are rejected; anything missing falls back to the experiment's
    defaults.
    """
    if isinstance(data, (str, os.PathLike)):
        text = str(data)
        if os.path.exists(text):
            with open(text) as fh:
                text = fh.read()
        data = json.loads(text) if text.strip() else {}
    data = dict(data or {})
    experiment = data.pop("experiment", experiment)
    experiment = ALIASES.get(experiment, experiment)
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}, got {experiment!r}")
    defaults = DEFAULTS[experiment]()
    grids = dict(defaults["grids"])
    options = dict(defaults["options"])

    for key in list(data):
        if key not in {"grids", "seed", "output_path", "options"} | set(grids) | set(options):
            raise ConfigError(key, f"unknown key for {experiment}")

    flat_grids = {k: data.pop(k) for k in list(data) if k in grids}
    flat_options = {k: data.pop(k) for k in list(data) if k in options}
    for key, value in {**dict(data.get("grids") or {}), **flat_grids}.items():
        if key not in grids:
            raise ConfigError(key, f"unknown grid for {experiment}")
        try:
            values = parse_grid(value)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from exc
        grids[key] = [int(v) for v in values] if key in _INTEGER_GRIDS else values
    for key, value in {**dict(data.get("options") or {}), **flat_options}.items():
        if key not in options:
            raise ConfigError(key, f"unknown option for {experiment}")
        default = options[key]
        try:
            if isinstance(default, bool):
                options[key] = value if isinstance(value, bool) else str(value).lower() in {"1", "true", "yes"}
            elif isinstance(default, int):
                options[key] = int(parse_number(value))
            elif isinstance(default, float):
                options[key] = parse_number(value)
            elif isinstance(default, dict):
                options[key] = {str(k): parse_number(v) for k, v in dict(value).items()}
            else:
                options[key] = value
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, str(exc)) from exc
    if "dim" in grids:
        grids["dim"] = [int(v) for v in grids["dim"]]
    try:
        seed = int(data.get("seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError("seed", str(exc)) from exc
    _validate(experiment, grids, options)
    return SweepConfig(experiment, grids, seed, str(data.get("output_path", "")), options)


# -- result tables ------------------------------------------------------------


class ResultTable:
    """Named equal-length columns plus a metadata echo."""

    def __init__(self, columns: dict, metadata: dict | None = None):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns: {({k: len(v) for k, v in columns.items()})}")
        self.columns = {k: list(v) for k, v in columns.items()}
        self.metadata = dict(metadata or {})

    def __len__(self):
        return len(next(iter(self.columns.values()), []))

    @property
    def names(self) -> list:
        return list(self.columns)

    def column(self, name) -> np.ndarray:
        return np.asarray(self.columns[name], dtype=float)

    def rows(self):
        return [dict(zip(self.columns, values)) for values in zip(*self.columns.values())]

    def select(self, **equal) -> "ResultTable":
        keep = [i for i in range(len(self)) if all(self.columns[k][i] == v for k, v in equal.items())]
        return ResultTable({k: [v[i] for i in keep] for k, v in self.columns.items()}, self.metadata)

    @staticmethod
    def concat(tables: Sequence["ResultTable"], metadata=None) -> "ResultTable":
        names = tables[0].names
        return ResultTable({n: [v for t in tables for v in t.columns[n]] for n in names}, metadata)

    def _stamped_metadata(self):
        meta = {"version": __version__, **self.metadata}
        meta.setdefault("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S"))
        return meta

    def to_csv_string(self) -> str:
        lines = ["# " + json.dumps(self._stamped_metadata(), sort_keys=True, default=_jsonable)]
        lines.append(",".join(self.names))
        for values in zip(*self.columns.values()):
            lines.append(",".join(_fmt(v) for v in values))
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv_string())

    def to_json(self, path=None) -> str:
        text = json.dumps(
            {"metadata": self._stamped_metadata(), "columns": self.columns}, default=_jsonable, indent=1
        )
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def read_csv(cls, path) -> "ResultTable":
        with open(path) as fh:
            lines = fh.read().splitlines()
        meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
        body = lines[1:] if meta else lines
        names = body[0].split(",")
        cols = {n: [] for n in names}
        for line in body[1:]:
            for n, v in zip(names, line.split(",")):
                cols[n].append(float(v) if v else math.nan)
        return cls(cols, meta)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return repr(float(value))


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _threads(threads=None) -> int:
    if threads:
        return threads
    value = os.environ.get("NONLIN_THREADS")
    return max(1, int(value)) if value else min(8, os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence, threads=None) -> list:
    """Ordered map over independent cells."""
    workers = _threads(threads)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _meta(config: SweepConfig, **extra) -> dict:
    return {"config": emit(config), **extra}


# -- experiments --------------------------------------------------------------


class HeatmapResult(NamedTuple):
    table: ResultTable
    contour: ResultTable


def heatmap_row(z: float, ks: np.ndarray, phi: float, dim: int) -> np.ndarray:
    """Haar-averaged fidelity for g = n**z over an array of real shifts."""
    g = PowerLaw(z)
    if g.is_linear:
        return np.ones(len(ks))
    n = np.arange(dim, dtype=float)
    ks = np.asarray(ks, dtype=float)
    diffs = g(n[None, :] + np.abs(ks)[:, None]) - g(n)[None, :]
    trace = np.exp(-1j * phi * np.sign(ks)[:, None] * diffs).sum(axis=1)
    return np.minimum((dim + np.abs(trace) ** 2) / (dim * (dim + 1)), 1.0)


def level_crossings(ks: np.ndarray, values: np.ndarray, level: float) -> tuple:
    """First crossing below ``level`` walking outward from k = 0 on each side (nan if none)."""
    ks = np.asarray(ks, float)
    values = np.asarray(values, float)
    order = np.argsort(ks)
    ks, values = ks[order], values[order]

    def walk(idx):
        for a, b in zip(idx[:-1], idx[1:]):
            if values[a] >= level > values[b]:
                return float(ks[a] + (level - values[a]) * (ks[b] - ks[a]) / (values[b] - values[a]))
        return math.nan

    zero = int(np.argmin(np.abs(ks)))
    upper = walk(list(range(zero, len(ks))))
    lower = walk(list(range(zero, -1, -1)))
    return lower, upper


def run_fidelity_heatmap(config: SweepConfig, threads=None) -> HeatmapResult:
    zs = config.grid("z")
    ks = np.asarray(config.grid("k"), float)
    phi = config.scalar("phi")
    dim = int(config.scalar("dim"))
    level = 1 - config.scalar("epsilon")
    rows = parallel_map(lambda z: heatmap_row(z, ks, phi, dim), zs, threads)
    table = ResultTable(
        {
            "z": [z for z in zs for _ in ks],
            "k": [float(k) for _ in zs for k in ks],
            "avg_fidelity": [float(v) for row in rows for v in row],
        },
        _meta(config),
    )
    crossings = [level_crossings(ks, row, level) for row in rows]
    contour = ResultTable(
        {"z": zs, "k_lower": [c[0] for c in crossings], "k_upper": [c[1] for c in crossings]},
        _meta(config, level=level),
    )
    return HeatmapResult(table, contour)


def _critical_cell(args):
    index, z, k, eps, dim, samples, seed = args
    g = PowerLaw(z)
    space = SpectrumSet.bosonic(dim - 1)
    report = critical_phase_bound(g, int(k), eps, space.top)
    states = haar_states_surviving_shift(space, int(k), samples, np.random.default_rng([seed, index]))
    worst = min(overlap_before_after(g, int(k), report.bound_phi, psi) for psi in states)
    threshold = 1 - eps - 10 * eps**2
    return z, k, eps, dim, report.bound_phi, worst, worst >= threshold


def run_critical_phase(config: SweepConfig, threads=None) -> ResultTable:
    samples = config.options["samples"]
    cells = []
    for z in config.grid("z"):
        for k in config.grid("k"):
            for eps in config.grid("epsilon"):
                for dim in config.grid("dim"):
                    cells.append((len(cells), z, int(k), eps, int(dim), samples, config.seed))
    out = parallel_map(_critical_cell, cells, threads)
    names = ["z", "k", "epsilon", "dim", "bound_phi", "min_fidelity_at_bound", "pass"]
    return ResultTable({n: [row[i] for row in out] for i, n in enumerate(names)}, _meta(config))


QFI_NOTE = (
    "effective_J_matrix is the Schur complement of the covariance QFI matrix; on any two-point "
    "state with non-constant shift difference it is exactly 0. printed_closed_form is the printed "
    "M-N expression, reported for comparison only."
)


def run_qfi_curves(config: SweepConfig, threads=None) -> ResultTable:
    m, n = config.options["m"], config.options["n"]
    ks = [int(k) for k in config.grid("k")]
    if m + min(ks) < 0:
        raise ConfigError("k", f"shift {min(ks)} pushes |{m}> out of the space")
    space = SpectrumSet.bosonic(n + max(0, max(ks)))
    psi = superposition(space, [m, n])
    cells = [(z, k) for z in config.grid("z") for k in ks]

    def cell(args):
        z, k = args
        res = qfi_nuisance(PowerLaw(z), k, psi)
        return (z, k, res.matrix.i_phiphi, res.matrix.i_thetatheta, res.matrix.i_phitheta, res.effective,
                math.nan if res.printed_closed_form is None else res.printed_closed_form)

    out = parallel_map(cell, cells, threads)
    names = ["z", "k", "i_phiphi", "i_thetatheta", "i_phitheta", "effective_J_matrix", "printed_closed_form"]
    return ResultTable({name: [row[i] for row in out] for i, name in enumerate(names)},
                       _meta(config, note=QFI_NOTE))


def fidelity_onset(phis, fidelities, level: float = 0.95) -> float:
    """Smallest phase where the curve first drops below ``level`` (log-linear interpolation)."""
    phis = np.asarray(phis, float)
    fids = np.asarray(fidelities, float)
    order = np.argsort(phis)
    phis, fids = phis[order], fids[order]
    for i in range(1, len(phis)):
        if fids[i - 1] >= level > fids[i]:
            lo, hi = math.log(phis[i - 1]), math.log(phis[i])
            frac = (fids[i - 1] - level) / (fids[i - 1] - fids[i])
            return math.exp(lo + frac * (hi - lo))
    return math.inf


def run_lindblad_curves(config: SweepConfig, threads=None) -> ResultTable:
    t = config.options["t"]
    caps = config.options.get("phi_cap", {})
    space = SpectrumSet.bosonic(config.options["cutoff"])
    code = build_binomial_code(space)
    tables = []
    onsets = {}
    for kappa in config.grid("kappa"):
        for z in config.grid("z"):
            cap = caps.get(str(int(z)) if float(z).is_integer() else str(z), math.inf)
            phis = [p for p in config.grid("phi") if p <= cap]
            table = recovered_fidelity_curve(PowerLaw(z), [p / t for p in phis], kappa, t, code, threads=threads)
            tables.append(table)
            onsets[f"z={z:g},kappa={kappa:g}"] = fidelity_onset(table.column("phi"), table.column("fidelity_recovered"))
    return ResultTable.concat(tables, _meta(config, onset_phi_at_0_95=onsets))


def run(config: SweepConfig, threads=None):
    runners = {
        HEATMAP: run_fidelity_heatmap,
        CRITICAL_PHASE: run_critical_phase,
        QFI_CURVES: run_qfi_curves,
        LINDBLAD: run_lindblad_curves,
    }
    if config.experiment not in runners:
        raise ConfigError("experiment", f"{config.experiment} is not a sweep")
    return runners[config.experiment](config, threads)
