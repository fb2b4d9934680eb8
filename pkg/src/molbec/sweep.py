"""Deterministic parameter sweeps and their CSV persistence.

A sweep evaluates one registered target on the Cartesian product of one or
two linear axes. Rows come back ordered by axis indices (last axis fastest)
whatever the worker count, and failures are kept as rows with an error tag.
"""
from __future__ import annotations

import itertools
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .bethe import SexticPotential, critical_point_analysis, potential_threshold_mu, threshold_correction
from .exceptions import MolbecError
from .model import ModelParams, Sector, SemiclassicalCouplings
from .observables import expectation_nc, expectation_z, ground_overlap
from .semiclassical import PHI0, PHIPI, ZBOUNDARY, classical_energy, region_classify
from .spectral import build_tridiagonal, lowest_state

__all__ = [
    "Axis",
    "SweepSpec",
    "SweepResult",
    "SweepFormatError",
    "TARGETS",
    "run_sweep",
    "persist",
    "load",
    "dumps",
    "loads",
    "format_float",
]

_VERSION = "0.1.0"
_COUPLING_KEYS = ("u_aa", "u_bb", "u_cc", "u_ab", "u_ac", "u_bc", "mu_a", "mu_b", "mu_c")


class SweepFormatError(MolbecError, ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Target:
    func: Callable[[dict], tuple]
    required: tuple
    optional: tuple
    outputs: tuple  # (name, type) pairs; type in {"float", "int", "str"}


def _as_int(values: dict, key: str, default=None) -> int:
    v = values.get(key, default)
    if v is None:
        raise KeyError(key)
    if float(v) != int(v):
        raise ValueError(f"{key} must be an integer, got {v}")
    return int(v)


def model_from_values(values: dict) -> tuple[ModelParams, Sector]:
    """ModelParams and Sector from flat values; alpha and lam, when present,
    set mu_c and u_cc through mu_c = -alpha Omega sqrt(2N) and
    u_cc = 4 Omega lam / sqrt(2N)."""
    n = _as_int(values, "n")
    j = _as_int(values, "j", 0)
    omega = float(values.get("omega", 1.0))
    kw = {key: float(values[key]) for key in _COUPLING_KEYS if key in values}
    root = math.sqrt(2.0 * n) if n > 0 else float("nan")
    if "alpha" in values:
        kw["mu_c"] = -float(values["alpha"]) * omega * root
    if "lam" in values:
        kw["u_cc"] = 4.0 * omega * float(values["lam"]) / root
    return ModelParams(omega=omega, **kw), Sector(n, j)


def _region(v):
    c = SemiclassicalCouplings(float(v["lam"]), float(v["alpha"]), 0.0)
    r = region_classify(c, float(v["k"]), _as_int(v, "grid", 10_000))
    return (
        r.label or "",
        r.counts[PHI0],
        r.counts[PHIPI],
        r.counts.get(ZBOUNDARY, 0),
        int(r.ambiguous),
    )


def _ground(v):
    params, sector = model_from_values(v)
    op = build_tridiagonal(params, sector)
    e0, state = lowest_state(op)
    gap = 0.0
    if op.dim > 1:
        w = eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True, select="i", select_range=(0, 1))
        gap = float(w[1] - w[0])
    nc = expectation_nc(state)
    return e0, gap, expectation_z(state), nc, 2.0 * nc / sector.n_total


def _fidelity(v):
    fixed = {k: x for k, x in v.items() if k != "alpha"}
    params_at = lambda a: model_from_values({**fixed, "alpha": a})[0]
    _, sector = model_from_values(v)
    w = ground_overlap(params_at, sector, float(v["alpha"]), float(v["delta"]))
    if math.isnan(w):
        raise MolbecError("degenerate ground state at a sampled coupling")
    return (w,)


def _energy(v):
    c = SemiclassicalCouplings(float(v["lam"]), float(v["alpha"]), float(v.get("beta", 0.0)))
    return (classical_energy(float(v["z"]), float(v["theta"]), c, float(v["k"])),)


def _potential(v):
    n, j = _as_int(v, "n"), _as_int(v, "j", 0)
    omega = float(v.get("omega", 1.0))
    mu = -float(v["alpha"]) * omega * math.sqrt(2.0 * n)
    rep = critical_point_analysis(SexticPotential.no_scattering(mu, omega, n, j))
    kinds = [p.kind for p in rep.points]
    return kinds.count("minimum"), kinds.count("maximum"), int(rep.bifurcation)


def _threshold(v):
    n = _as_int(v, "n")
    omega = float(v.get("omega", 1.0))
    mu = threshold_correction(n, omega)
    return mu, -mu / (omega * math.sqrt(2.0 * n)), potential_threshold_mu(n, omega)


_MODEL_OPTIONAL = ("j", "omega", "alpha", "lam") + _COUPLING_KEYS

TARGETS: dict[str, Target] = {
    "region": Target(
        _region,
        ("alpha", "lam", "k"),
        ("grid",),
        (("label", "str"), ("n_phi0", "int"), ("n_phipi", "int"), ("n_boundary", "int"), ("ambiguous", "int")),
    ),
    "ground": Target(
        _ground,
        ("n",),
        _MODEL_OPTIONAL,
        (("e0", "float"), ("gap", "float"), ("z", "float"), ("nc", "float"), ("two_nc_over_n", "float")),
    ),
    "fidelity": Target(_fidelity, ("n", "alpha", "delta"), _MODEL_OPTIONAL, (("w", "float"),)),
    "energy": Target(_energy, ("z", "theta", "alpha", "lam", "k"), ("beta",), (("energy", "float"),)),
    "potential": Target(
        _potential,
        ("n", "alpha"),
        ("j", "omega"),
        (("n_minima", "int"), ("n_maxima", "int"), ("bifurcation", "int")),
    ),
    "threshold": Target(
        _threshold, ("n",), ("omega",), (("mu_star", "float"), ("alpha_star", "float"), ("mu_exact", "float"))
    ),
}


@dataclass(frozen=True)
class SweepSpec:
    target: str
    fixed: dict = field(default_factory=dict)
    axes: tuple = ()
    out: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "fixed", {k: float(v) for k, v in self.fixed.items()})
        self.validate()

    def validate(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown sweep target {self.target!r}; choose from {sorted(TARGETS)}")
        t = TARGETS[self.target]
        known = set(t.required) | set(t.optional)
        if not 1 <= len(self.axes) <= 2:
            raise ValueError(f"a sweep needs one or two axes, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names {names}")
        for a in self.axes:
            if a.name not in known:
                raise ValueError(f"axis {a.name!r} is not a parameter of {self.target!r}")
            if a.name in self.fixed:
                raise ValueError(f"{a.name!r} is both fixed and swept")
            if int(a.count) != a.count or a.count < 1:
                raise ValueError(f"axis {a.name!r}: count must be a positive integer")
            if not (math.isfinite(a.start) and math.isfinite(a.stop)) or a.stop < a.start:
                raise ValueError(f"axis {a.name!r}: need finite start <= stop")
        for key, value in self.fixed.items():
            if key not in known:
                raise ValueError(f"fixed parameter {key!r} is not used by {self.target!r}")
            if not math.isfinite(value):
                raise ValueError(f"fixed parameter {key!r} must be finite")
        missing = set(t.required) - set(self.fixed) - set(names)
        if missing:
            raise ValueError(f"target {self.target!r} is missing {sorted(missing)}")


@dataclass(eq=False)
class SweepResult:
    columns: tuple
    types: tuple
    rows: list
    axes: tuple
    metadata: list = field(default_factory=list)  # ordered (key, value) pairs
    wall_time: float = 0.0  # informational; never persisted

    def __post_init__(self):
        if len(self.columns) != len(self.types):
            raise ValueError("columns and types differ in length")
        if len(self.axes) > len(self.columns) or tuple(self.columns[: len(self.axes)]) != tuple(self.axes):
            raise ValueError("axis columns must lead the column list")

    @property
    def failed(self) -> int:
        if "error" not in self.columns:
            return 0
        i = self.columns.index("error")
        return sum(1 for r in self.rows if r[i])

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def __eq__(self, other):
        if not isinstance(other, SweepResult):
            return NotImplemented
        return dumps(self) == dumps(other)


def _clean(text: str) -> str:
    return " ".join(str(text).replace(",", ";").split())


def _run_cell(target: str, values: dict) -> tuple:
    t = TARGETS[target]
    try:
        out = tuple(t.func(values))
        return out + ("",)
    except Exception as exc:  # recorded per cell, never dropped
        blank = tuple(float("nan") if typ == "float" else None for _, typ in t.outputs)
        return blank + (_clean(f"{type(exc).__name__}: {exc}"),)


def _cell_values(spec: SweepSpec):
    grids = [a.values() for a in spec.axes]
    for combo in itertools.product(*grids):
        v = dict(spec.fixed)
        v.update({a.name: float(x) for a, x in zip(spec.axes, combo)})
        yield tuple(float(x) for x in combo), v


def default_workers() -> int:
    env = os.environ.get("MOLBEC_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("MOLBEC_WORKERS must be a positive integer")
        return n
    return 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    spec.validate()
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("worker budget must be positive")
    t = TARGETS[spec.target]
    cells = list(_cell_values(spec))
    start = time.perf_counter()
    if workers == 1 or len(cells) == 1:
        outs = [_run_cell(spec.target, v) for _, v in cells]
    else:
        chunk = max(1, len(cells) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_cell, [spec.target] * len(cells), [v for _, v in cells], chunksize=chunk))
    rows = [axis_vals + out for (axis_vals, _), out in zip(cells, outs)]
    names = tuple(a.name for a in spec.axes)
    columns = names + tuple(n for n, _ in t.outputs) + ("error",)
    types = ("float",) * len(names) + tuple(typ for _, typ in t.outputs) + ("str",)
    meta = [("target", spec.target)]
    meta += [(f"fixed.{k}", format_float(v)) for k, v in sorted(spec.fixed.items())]
    meta += [
        (f"axis.{i}", f"{a.name}:{format_float(a.start)}:{format_float(a.stop)}:{a.count}")
        for i, a in enumerate(spec.axes)
    ]
    meta.append(("version", _VERSION))
    return SweepResult(columns, types, rows, names, meta, time.perf_counter() - start)


# --- persistence --------------------------------------------------------------


def _fmt(value, typ: str) -> str:
    if value is None:
        return ""
    if typ == "float":
        return format_float(value)
    if typ == "int":
        return str(int(value))
    return str(value)


def dumps(result: SweepResult) -> str:
    lines = [f"# {k} = {v}" for k, v in result.metadata]
    lines.append(f"# axes = {':'.join(result.axes)}")
    lines.append(f"# types = {','.join(result.types)}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt(v, t) for v, t in zip(row, result.types)))
    return "\n".join(lines) + "\n"


def persist(result: SweepResult, path) -> None:
    text = dumps(result)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse(cell: str, typ: str, lineno: int, col: str):
    try:
        if typ == "float":
            return float(cell)
        if typ == "int":
            return None if cell == "" else int(cell)
        if typ == "str":
            return cell
    except ValueError:
        raise SweepFormatError(lineno, f"column {col!r}: cannot parse {cell!r} as {typ}") from None
    raise SweepFormatError(lineno, f"unknown column type {typ!r}")


def loads(text: str) -> SweepResult:
    meta = []
    axes = types = None
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if header is None and line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if not sep:
                raise SweepFormatError(lineno, "metadata line must read '# key = value'")
            key, value = key.strip(), value.strip()
            if key == "axes":
                axes = tuple(value.split(":")) if value else ()
            elif key == "types":
                types = tuple(value.split(","))
                bad = [t for t in types if t not in ("float", "int", "str")]
                if bad:
                    raise SweepFormatError(lineno, f"unknown column types {bad}")
            else:
                meta.append((key, value))
            continue
        if header is None:
            if types is None or axes is None:
                raise SweepFormatError(lineno, "header reached before '# axes' and '# types' lines")
            header = tuple(line.split(","))
            if len(header) != len(types):
                raise SweepFormatError(lineno, f"{len(header)} columns but {len(types)} types")
            if header[: len(axes)] != axes:
                raise SweepFormatError(lineno, "header does not start with the axis columns")
            continue
        if line == "":
            raise SweepFormatError(lineno, "blank line inside the data block")
        cells = line.split(",")
        if len(cells) != len(header):
            raise SweepFormatError(lineno, f"expected {len(header)} fields, found {len(cells)}")
        rows.append(tuple(_parse(c, t, lineno, h) for c, t, h in zip(cells, types, header)))
    if header is None:
        raise SweepFormatError(max(1, len(text.splitlines())), "no header row")
    return SweepResult(header, types, rows, axes, meta)


def load(path) -> SweepResult:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
