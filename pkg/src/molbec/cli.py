"""Command-line front end: ``molbec <subcommand> [flags]``.

Every subcommand writes one CSV table (``--out``, default stdout) and, with
``--svg``, a plot next to it. Exit status: 0 success, 1 usage or invalid
input, 2 numerical failure (including sweeps with failed cells).
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bethe import (
    SexticPotential,
    bethe_roots,
    coefficients_from_state,
    critical_point_analysis,
    potential_a0,
    potential_general,
    potential_threshold_mu,
    threshold_correction,
)
from .exceptions import MolbecError
from .model import ModelParams, Sector, SemiclassicalCouplings, abc_coefficients
from .observables import fidelity_curve, z_trace
from .semiclassical import boundary_curves, fixed_points, level_curve_grid, region_classify
from .spectral import basis_state, build_tridiagonal, eigendecompose
from .sweep import TARGETS, Axis, SweepResult, SweepSpec, default_workers, format_float, persist, run_sweep
from .svg import render_svg

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

COUPLINGS = ("u_aa", "u_bb", "u_cc", "u_ab", "u_ac", "u_bc", "mu_a", "mu_b", "mu_c")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let negative ranges such as -2:2:41 through as values
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d)[\d.eE+:-]*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Range(tuple):
    """(start, stop, count) parsed from ``start:stop:count`` or a single number."""

    @property
    def axis_values(self) -> np.ndarray:
        start, stop, count = self
        return np.array([start]) if count == 1 else np.linspace(start, stop, count)


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return x


def _count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return n


def _nonneg_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text!r}")
    return n


def _range(text: str) -> Range:
    parts = text.split(":")
    if len(parts) == 1:
        x = _finite(parts[0])
        return Range((x, x, 1))
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    start, stop, count = _finite(parts[0]), _finite(parts[1]), _count(parts[2])
    if stop < start:
        raise argparse.ArgumentTypeError(f"stop must not be below start in {text!r}")
    if count == 1 and stop != start:
        raise argparse.ArgumentTypeError(f"count 1 needs start == stop in {text!r}")
    return Range((start, stop, count))


def _assignment(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


# --- parser -------------------------------------------------------------------


def _common(p):
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout, the default)")
    p.add_argument("--svg", action="store_true", help="also write an SVG plot next to --out")
    p.add_argument("--config", help="flat 'key = value' file; command-line flags take precedence")


def _workers(p):
    p.add_argument(
        "--workers",
        type=_count,
        default=None,
        help="worker processes (default: $MOLBEC_WORKERS or 1)",
    )


def _model(p, alpha_range=False):
    p.add_argument("--n", type=_nonneg_int, required=False, help="total atom number N")
    p.add_argument("--j", type=_nonneg_int, default=0, help="atomic imbalance J (default 0)")
    p.add_argument("--omega", type=_finite, default=1.0, help="interconversion amplitude (default 1)")
    for name in COUPLINGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=_finite, default=None, help=f"{name} (default 0)")
    p.add_argument(
        "--alpha",
        type=_range if alpha_range else _finite,
        default=None,
        help="sets mu_c = -alpha*omega*sqrt(2N)" + (" (value or start:stop:count)" if alpha_range else ""),
    )
    p.add_argument("--lambda", dest="lam", type=_finite, default=None, help="sets u_cc = 4*omega*lambda/sqrt(2N)")


def _classical(p):
    p.add_argument("--k", type=_finite, default=0.0, help="fractional imbalance J/N in [0, 1) (default 0)")
    p.add_argument("--lambda", dest="lam", type=_finite, required=False, help="semi-classical lambda")
    p.add_argument("--alpha", type=_finite, required=False, help="semi-classical alpha")
    p.add_argument("--beta", type=_finite, default=0.0, help="constant energy shift beta (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="molbec", description="Three-mode atom-molecule condensate numerics.")
    parser.add_argument("--version", action="version", version=f"molbec {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("fixed-points", help="classical fixed points with their character")
    _common(p)
    _classical(p)
    p.add_argument("--grid", type=_count, default=10_000, help="bracketing grid size (default 10000)")

    p = sub.add_parser("phase-diagram", help="region labels over an (alpha, lambda) grid")
    _common(p)
    _workers(p)
    p.add_argument("--k", type=_finite, default=0.0, help="fractional imbalance (default 0)")
    p.add_argument("--alpha", type=_range, default=_range("-4:4:81"), help="alpha range (default -4:4:81)")
    p.add_argument("--lambda", dest="lam", type=_range, default=_range("-2:4:61"), help="lambda range (default -2:4:61)")
    p.add_argument("--grid", type=_count, default=2000, help="bracketing grid size per cell (default 2000)")
    p.add_argument("--boundaries", action="store_true", help="emit the boundary curves instead of region labels")

    p = sub.add_parser("level-curves", help="classical energy on a (z, theta) grid")
    _common(p)
    _classical(p)
    p.add_argument("--z", type=_range, default=None, help="z range (default 2k-1:1:101)")
    p.add_argument("--theta", type=_range, default=_range(f"{-math.pi!r}:{math.pi!r}:121"), help="theta range (default -pi:pi:121)")

    p = sub.add_parser("spectrum", help="sector eigenvalues (optionally eigenvectors)")
    _common(p)
    _model(p)
    p.add_argument("--vectors", action="store_true", help="dump eigenvector amplitudes (index, j, amplitude)")

    p = sub.add_parser("bethe", help="Bethe roots of the lowest levels")
    _common(p)
    _model(p)
    p.add_argument("--levels", type=_count, default=None, help="number of lowest levels (default all)")

    p = sub.add_parser("potential", help="Schrodinger potential samples or its stationary points")
    _common(p)
    _model(p)
    p.add_argument("--x", type=_range, default=_range("0.05:10:400"), help="x range (default 0.05:10:400)")
    p.add_argument("--critical", action="store_true", help="stationary points of the A = 0 sextic potential")

    p = sub.add_parser("threshold", help="threshold coupling with its leading finite-N correction")
    _common(p)
    p.add_argument("--n", type=_nonneg_int, required=False, help="total atom number N")
    p.add_argument("--omega", type=_finite, default=1.0, help="interconversion amplitude (default 1)")

    p = sub.add_parser("expectation", help="ground-state <z>, <N_c> versus alpha")
    _common(p)
    _workers(p)
    _model(p, alpha_range=True)

    p = sub.add_parser("dynamics", help="<z(t)> by exact spectral evolution")
    _common(p)
    _model(p)
    p.add_argument("--t", type=_range, default=_range("0:50:2000"), help="time grid (default 0:50:2000)")
    p.add_argument("--initial", type=_nonneg_int, default=None, help="initial basis index j (default m)")

    p = sub.add_parser("fidelity", help="ground-state overlap curve and its local minima")
    _common(p)
    _model(p, alpha_range=True)
    p.add_argument("--delta", type=_finite, default=0.01, help="relative half-width Delta (default 0.01)")
    p.add_argument("--no-refine", action="store_true", help="skip golden-section refinement of minima")

    p = sub.add_parser("sweep", help="generic one- or two-axis sweep of a registered target")
    _common(p)
    _workers(p)
    p.add_argument("--target", choices=sorted(TARGETS), required=False, help="quantity to evaluate")
    p.add_argument("--fixed", type=_assignment, action="append", default=[], help="fixed parameter key=value (repeatable)")
    p.add_argument("--axis", type=_assignment, action="append", default=[], help="swept axis name=start:stop:count (repeatable, at most 2)")
    return parser


# --- config overlay -------------------------------------------------------------


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, sub, path):
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        sub.error(f"cannot read config {path!r}: {exc.strerror}")
    by_dest = {}
    for action in sub._actions:
        if action.dest in ("help", "config"):
            continue
        by_dest[action.dest] = action
        for opt in action.option_strings:
            by_dest[opt.lstrip("-").replace("-", "_")] = action
    defaults = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            sub.error(f"config line {lineno}: expected 'key = value'")
        action = by_dest.get(key)
        if action is None:
            sub.error(f"config line {lineno}: unknown key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                sub.error(f"config line {lineno}: {key} expects true or false")
            defaults[action.dest] = value.lower() in ("true", "1", "yes")
        elif isinstance(action, argparse._AppendAction):
            try:
                item = action.type(value) if action.type else value
            except argparse.ArgumentTypeError as exc:
                sub.error(f"config line {lineno}: {key}: {exc}")
            defaults.setdefault(action.dest, []).append(item)
        else:
            defaults[action.dest] = value  # converted by argparse like a flag value
    sub.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = _subparser(parser, args.command)
        _apply_config(parser, sub, args.config)
        args = parser.parse_args(argv)
        # appended flags replace, not extend, the config list
        for dest in ("fixed", "axis"):
            if hasattr(args, dest):
                cli_items = build_parser().parse_args(argv)
                if getattr(cli_items, dest):
                    setattr(args, dest, getattr(cli_items, dest))
    return parser, args


# --- helpers --------------------------------------------------------------------


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            flag = "--lambda" if name == "lam" else "--" + name.replace("_", "-")
            raise UsageError(f"{flag} is required")


def _model_from_args(args, alpha=None) -> tuple[ModelParams, Sector]:
    _need(args, "n")
    sector = Sector(args.n, args.j)
    if args.n == 0 and (args.alpha is not None or args.lam is not None):
        raise UsageError("--alpha and --lambda need N > 0")
    kw = {name: getattr(args, name) or 0.0 for name in COUPLINGS}
    root = math.sqrt(2.0 * args.n) if args.n else 0.0
    a = args.alpha if alpha is None else alpha
    if a is not None:
        if args.mu_c is not None:
            raise UsageError("give either --alpha or --mu-c, not both")
        kw["mu_c"] = -a * args.omega * root
    if args.lam is not None:
        if args.u_cc is not None:
            raise UsageError("give either --lambda or --u-cc, not both")
        kw["u_cc"] = 4.0 * args.omega * args.lam / root
    return ModelParams(omega=args.omega, **kw), sector


def _table(columns, types, rows, axes, meta=()):
    return SweepResult(tuple(columns), tuple(types), list(rows), tuple(axes), list(meta))


def _meta(args, keys):
    out = [("command", args.command)]
    for key in keys:
        value = getattr(args, key, None)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ":".join(format_float(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = format_float(value)
        out.append((key, str(value)))
    return out


_MODEL_KEYS = ("n", "j", "omega") + COUPLINGS + ("alpha", "lam")


# --- subcommands ------------------------------------------------------------------


def cmd_fixed_points(args):
    _need(args, "lam", "alpha")
    c = SemiclassicalCouplings(args.lam, args.alpha, args.beta)
    pts = fixed_points(c, args.k, n_grid=args.grid)
    region = region_classify(c, args.k, args.grid)
    rows = [(i, p.z, p.theta, p.branch, p.character) for i, p in enumerate(pts)]
    meta = _meta(args, ("k", "lam", "alpha", "beta", "grid"))
    meta += [("region", region.label or "unclassified"), ("ambiguous", str(int(region.ambiguous)))]
    return _table(
        ("index", "z", "theta", "branch", "character"),
        ("int", "float", "float", "str", "str"),
        rows,
        ("index",),
        meta,
    ), "z"


def cmd_phase_diagram(args):
    if args.boundaries:
        z_lo = 2.0 * args.k - 1.0
        z0 = np.linspace(z_lo, 1.0, 2003)[1:-1]
        a_lo, a_hi = args.alpha[0], args.alpha[1]
        rows = []
        idx = 0
        for ci, curve in enumerate(boundary_curves(args.k, z0, (a_lo, a_hi), args.alpha[2])):
            z = curve.z0 if curve.z0 is not None else np.full(len(curve.alpha), np.nan)
            for zz, a, lam in zip(z, curve.alpha, curve.lam):
                rows.append((idx, ci, float(zz), float(a), float(lam), curve.branch_sign, curve.source))
                idx += 1
        return _table(
            ("index", "curve", "z0", "alpha", "lambda", "sign", "source"),
            ("int", "int", "float", "float", "float", "int", "str"),
            rows,
            ("index",),
            _meta(args, ("k",)),
        ), "lambda"
    spec = SweepSpec(
        "region",
        {"k": args.k, "grid": args.grid},
        (Axis("alpha", *args.alpha), Axis("lam", *args.lam)),
    )
    return run_sweep(spec, args.workers), "n_phi0"


def cmd_level_curves(args):
    _need(args, "lam", "alpha")
    z_rng = args.z or Range((2.0 * args.k - 1.0, 1.0, 101))
    z, theta = z_rng.axis_values, args.theta.axis_values
    grid = level_curve_grid(SemiclassicalCouplings(args.lam, args.alpha, args.beta), args.k, z, theta)
    rows = [(float(zz), float(tt), float(grid[i, jj])) for i, zz in enumerate(z) for jj, tt in enumerate(theta)]
    return _table(
        ("z", "theta", "energy"),
        ("float",) * 3,
        rows,
        ("z", "theta"),
        _meta(args, ("k", "lam", "alpha", "beta")),
    ), "energy"


def cmd_spectrum(args):
    params, sector = _model_from_args(args)
    d = eigendecompose(build_tridiagonal(params, sector))
    meta = _meta(args, _MODEL_KEYS)
    if args.vectors:
        rows = [
            (i, j, float(d.eigenvectors[j, i]))
            for i in range(d.dim)
            for j in range(d.dim)
        ]
        return _table(("index", "j", "amplitude"), ("int", "int", "float"), rows, ("index", "j"), meta), "amplitude"
    rows = [(i, float(e)) for i, e in enumerate(d.eigenvalues)]
    return _table(("index", "energy"), ("int", "float"), rows, ("index",), meta), "energy"


def cmd_bethe(args):
    params, sector = _model_from_args(args)
    d = eigendecompose(build_tridiagonal(params, sector))
    levels = d.dim if args.levels is None else min(args.levels, d.dim)
    rows = []
    for i in range(levels):
        rho = coefficients_from_state(d.eigenvectors[:, i], sector)
        br = bethe_roots(params, sector, float(d.eigenvalues[i]), coefficients=rho)
        for q, u in enumerate(br.roots):
            rows.append((i, q, br.energy, float(u.real), float(u.imag), br.max_residual))
    return _table(
        ("level", "root", "energy", "re", "im", "residual"),
        ("int", "int", "float", "float", "float", "float"),
        rows,
        ("level", "root"),
        _meta(args, _MODEL_KEYS),
    ), "re"


def cmd_potential(args):
    params, sector = _model_from_args(args)
    abc = abc_coefficients(params, sector)
    meta = _meta(args, _MODEL_KEYS) + [
        ("a_coef", format_float(abc.a_coef)),
        ("b_coef", format_float(abc.b_coef)),
        ("c_coef", format_float(abc.c_coef)),
    ]
    if args.critical:
        if abc.a_coef != 0.0:
            raise UsageError("--critical needs A = 0 (a sextic potential)")
        pot = SexticPotential.from_a0(abc.b_coef, abc.c_coef, params.omega, sector.n_total, sector.j_imbalance)
        rep = critical_point_analysis(pot)
        rows = [(i, p.x, p.value, p.kind) for i, p in enumerate(rep.points)]
        meta += [("bifurcation", str(int(rep.bifurcation)))]
        if rep.critical_quadratic is not None:
            meta.append(("critical_quadratic", format_float(rep.critical_quadratic)))
        return _table(
            ("index", "x", "value", "kind"), ("int", "float", "float", "str"), rows, ("index",), meta
        ), "x"
    x = args.x.axis_values
    if abc.a_coef == 0.0:
        v = potential_a0(x, abc.b_coef, abc.c_coef, params.omega, sector.n_total, sector.j_imbalance)
    else:
        v = potential_general(x, abc, params.omega, sector)
    rows = [(float(a), float(b)) for a, b in zip(x, v)]
    return _table(("x", "potential"), ("float", "float"), rows, ("x",), meta), "potential"


def cmd_threshold(args):
    _need(args, "n")
    mu = threshold_correction(args.n, args.omega)
    alpha = -mu / (args.omega * math.sqrt(2.0 * args.n))
    exact = potential_threshold_mu(args.n, args.omega)
    return _table(
        ("n", "mu_star", "alpha_star", "mu_exact"),
        ("int", "float", "float", "float"),
        [(args.n, mu, alpha, exact)],
        ("n",),
        _meta(args, ("n", "omega")),
    ), "mu_star"


def cmd_expectation(args):
    _model_from_args(args, alpha=0.0 if args.alpha is not None else None)  # validation only
    fixed = {"n": args.n, "j": args.j, "omega": args.omega}
    fixed.update({k: getattr(args, k) for k in COUPLINGS if getattr(args, k) is not None})
    if args.lam is not None:
        fixed["lam"] = args.lam
    if args.alpha is not None:
        axis = Axis("alpha", *args.alpha)
    else:
        mu = fixed.pop("mu_c", 0.0)
        axis = Axis("mu_c", mu, mu, 1)
    result = run_sweep(SweepSpec("ground", fixed, (axis,)), args.workers)
    return result, "z"


def cmd_dynamics(args):
    params, sector = _model_from_args(args)
    j0 = sector.m if args.initial is None else args.initial
    d = eigendecompose(build_tridiagonal(params, sector))
    trace = z_trace(d, basis_state(sector, j0), args.t.axis_values)
    rows = [(float(t), float(z)) for t, z in zip(trace.times, trace.values)]
    meta = _meta(args, _MODEL_KEYS) + [("initial", str(j0)), ("peak_to_peak", format_float(trace.peak_to_peak))]
    return _table(("t", "z"), ("float", "float"), rows, ("t",), meta), "z"


def cmd_fidelity(args):
    _need(args, "alpha")
    _, sector = _model_from_args(args, alpha=0.0)
    params_at = lambda a: _model_from_args(args, alpha=a)[0]
    curve = fidelity_curve(params_at, sector, args.alpha.axis_values, args.delta, refine=not args.no_refine)
    rows = [(float(a), float(w), int(dg)) for a, w, dg in zip(curve.couplings, curve.overlaps, curve.degenerate)]
    meta = _meta(args, _MODEL_KEYS + ("delta",))
    for i, m in enumerate(curve.minima):
        meta.append((f"minimum.{i}", f"{format_float(m.coupling)}:{format_float(m.overlap)}:{int(m.refined)}"))
    return _table(("alpha", "w", "degenerate"), ("float", "float", "int"), rows, ("alpha",), meta), "w"


def cmd_sweep(args):
    _need(args, "target")
    fixed = {}
    for key, value in args.fixed:
        try:
            fixed[key] = _finite(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--fixed {key}: {exc}") from None
    axes = []
    for name, value in args.axis:
        try:
            start, stop, count = _range(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--axis {name}: {exc}") from None
        axes.append(Axis(name, start, stop, count))
    try:
        spec = SweepSpec(args.target, fixed, tuple(axes), args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_sweep(spec, args.workers)
    return result, None


COMMANDS = {
    "fixed-points": cmd_fixed_points,
    "phase-diagram": cmd_phase_diagram,
    "level-curves": cmd_level_curves,
    "spectrum": cmd_spectrum,
    "bethe": cmd_bethe,
    "potential": cmd_potential,
    "threshold": cmd_threshold,
    "expectation": cmd_expectation,
    "dynamics": cmd_dynamics,
    "fidelity": cmd_fidelity,
    "sweep": cmd_sweep,
}


def dispatch(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, args = parse_args(argv)
    sub = _subparser(parser, args.command)
    if getattr(args, "workers", "absent") is None:
        try:
            args.workers = default_workers()
        except ValueError as exc:
            sub.error(str(exc))
    if args.svg and args.out == "-":
        sub.error("--svg needs --out to name a file")
    try:
        result, value = COMMANDS[args.command](args)
    except UsageError as exc:
        sub.error(str(exc))
    except MolbecError as exc:
        if isinstance(exc, ValueError):
            sub.error(str(exc))
        print(f"molbec {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    persist(result, args.out)
    if args.svg:
        try:
            render_svg(result, Path(args.out).with_suffix(".svg"), value, title=args.command)
        except MolbecError as exc:
            print(f"molbec {args.command}: no plot written: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
    if result.failed:
        print(f"molbec {args.command}: {result.failed} cell(s) failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())
