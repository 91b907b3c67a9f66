"""Command-line entry point: ``greenwalk <subcommand> ...``.

Output is JSON (sorted keys) on stdout unless a file is given; grids are
written as CSV with a geometry header so gnuplot and friends can read them.

Exit codes: 0 success, 1 identity not verified, 2 bad parameters or domain,
3 simulation failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import closed_form as cf
from . import heat_kernel as hk
from .complex_geometry import (
    Disk,
    DiskAutomorphism,
    Exp,
    ExitTime,
    Mobius,
    MobiusTransform,
    Power,
    PuncturedDisk,
    RightHalfPlane,
    Strip,
    TanQuarterStrip,
    UpperHalfPlane,
    WindingTime,
)
from .errors import NonConverged, OutsideDomain, ParameterError, SimulationError
from .identities import PARAMETERS, IdentityCase, verify
from .mc_engine import GridSpec, MCConfig, format_grid_csv, occupation_density
from .pushforward import PushforwardProblem, pushforward_greens, pushforward_terms
from .series import SeriesTruncation

EXIT_OK = 0
EXIT_NOT_VERIFIED = 1
EXIT_PARAMETER = 2
EXIT_SIMULATION = 3
EXIT_USAGE = 64

SEED_ENV = "GREENWALK_SEED"

DOMAINS = ("half-plane", "right-half-plane", "disk", "strip", "punctured-disk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

def parse_complex(text: str) -> complex:
    """Accepts Python syntax and the ``i`` suffix: 2, -1, 0.5+2i, i, -3j."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        vals = []
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def parse_grid(text: str) -> tuple[float, float, float, float]:
    return tuple(_floats(text, 4, "--grid xmin,xmax,ymin,ymax"))


def parse_shape(text: str) -> tuple[int, int]:
    nx, ny = _floats(text, 2, "--shape nx,ny")
    if nx != int(nx) or ny != int(ny) or nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("--shape needs two positive integers")
    return int(nx), int(ny)


def parse_stopping(text: str) -> int:
    kind, _, n = text.partition(":")
    if kind != "winding" or not n.isdigit() or int(n) < 1:
        raise argparse.ArgumentTypeError("--stopping takes winding:N with N >= 1")
    return int(n)


def parse_map(text: str):
    name, _, arg = text.partition(":")
    try:
        if name == "power":
            return Power(int(arg))
        if name == "exp" and not arg:
            return Exp()
        if name == "tan-quarter-strip" and not arg:
            return TanQuarterStrip()
        if name == "disk-automorphism":
            return DiskAutomorphism(parse_complex(arg))
        if name == "mobius":
            a, b, c, d = (parse_complex(p) for p in arg.split(","))
            return Mobius(MobiusTransform(a, b, c, d))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad map {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(
        f"unknown map {text!r}; use power:K, exp, tan-quarter-strip, disk-automorphism:A or mobius:A,B,C,D")


# ---------------------------------------------------------------------------
# shared option groups
# ---------------------------------------------------------------------------

def _add_domain(p: argparse.ArgumentParser, allow_winding: bool = True) -> None:
    g = p.add_argument_group("domain / stopping rule")
    g.add_argument("--domain", choices=DOMAINS, help="stop on exiting this domain")
    if allow_winding:
        g.add_argument("--stopping", type=parse_stopping, metavar="winding:N",
                       help="stop when the argument first reaches ±2πN")
    g.add_argument("--center", type=parse_complex, default=0j, help="disk centre (default 0)")
    g.add_argument("--radius", type=float, default=1.0, help="disk radius (default 1)")
    g.add_argument("--half-width", type=float, default=1.0, help="strip half-width (default 1)")
    g.add_argument("--vertical", action="store_true",
                   help="use the strip {|Re z| < h} instead of {|Im z| < h}")


def _domain(args):
    name = args.domain
    if name == "half-plane":
        return UpperHalfPlane()
    if name == "right-half-plane":
        return RightHalfPlane()
    if name == "disk":
        return Disk(args.center, args.radius)
    if name == "strip":
        return Strip(args.half_width, args.vertical)
    if name == "punctured-disk":
        return PuncturedDisk()
    raise UsageError("give --domain")


def _rule(args):
    winding = getattr(args, "stopping", None)
    if winding is not None and args.domain is not None:
        raise UsageError("--domain and --stopping are mutually exclusive")
    if winding is not None:
        return WindingTime(winding)
    if args.domain is None:
        raise UsageError("give --domain or --stopping winding:N")
    return ExitTime(_domain(args))


def _source(args, rule) -> complex:
    if args.source is not None:
        return args.source
    if isinstance(rule, WindingTime):
        return 1 + 0j
    raise UsageError("give --source")


def _xy(z: complex) -> list[float]:
    return [z.real, z.imag]


def _clean(v):
    """NaN and infinities become null so the JSON stays standard."""
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, list):
        return [_clean(x) for x in v]
    return v


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _provenance(rule) -> str:
    if isinstance(rule, WindingTime):
        return "winding: sum of right-half-plane terms over the 4n-th-root preimages"
    dom = rule.domain
    return {
        UpperHalfPlane: "half-plane: reflection in the real axis",
        RightHalfPlane: "right half-plane: reflection in the imaginary axis",
        Disk: "disk: automorphism moving the source to 0",
        Strip: "strip: image series over the reflection lattice",
        PuncturedDisk: "punctured disk: disk formula (the puncture is polar)",
    }[type(dom)]


def run_exact(args) -> int:
    rule = _rule(args)
    source = _source(args, rule)
    if isinstance(rule, WindingTime):
        if source != 1:
            raise ParameterError("the winding closed form is available for source 1 only")
        evaluate = lambda w: cf.greens_winding(rule.n, w)  # noqa: E731
    else:
        dom = rule.domain
        if not dom.contains(source):
            raise OutsideDomain(f"source {source} is outside the domain")
        trunc = SeriesTruncation(args.N)
        evaluate = lambda w: cf.exit_time_greens(dom, source, w, trunc)  # noqa: E731
    results = []
    for w in args.target:
        g = evaluate(w)
        if g.kind is cf.GreensKind.SINGULAR_AT_SOURCE:
            raise ParameterError(f"SingularAtSource: target {w} equals the source")
        results.append({"target": _xy(w), "kind": g.kind.value, "value": g.value})
    out = {"config": _echo(args, source=_xy(source), rule=repr(rule)),
           "provenance": _provenance(rule), "results": results}
    _emit(_dump(out), args.output)
    return EXIT_OK


def _mc_config(args) -> MCConfig:
    return MCConfig(n_paths=args.paths, dt=args.dt, seed=args.seed, workers=args.workers,
                    angular_cap=args.angular_cap, bridge_correction=not args.no_bridge,
                    step_growth=args.step_growth, max_steps=args.max_steps)


def _closed_grid(rule, source: complex, spec: GridSpec) -> Optional[np.ndarray]:
    f = cf.closed_form_for(rule, source)
    if f is None:
        return None
    out = np.full((spec.ny, spec.nx), math.nan)
    for iy, row in enumerate(spec.centers()):
        for ix, w in enumerate(row):
            w = complex(w)
            try:
                if isinstance(rule, ExitTime) and not rule.domain.contains(w):
                    out[iy, ix] = 0.0
                    continue
                g = f(w)
            except (ParameterError, NonConverged):
                continue
            if g.is_finite:
                out[iy, ix] = g.value
    return out


def _interior(rule, source: complex, spec: GridSpec) -> np.ndarray:
    """Cells lying wholly inside the domain and clear of the source (and origin)."""
    corners = [spec.centers() + complex(sx * spec.dx, sy * spec.dy) / 2
               for sx in (-1, 1) for sy in (-1, 1)]
    ok = np.ones((spec.ny, spec.nx), dtype=bool)
    for c in corners:
        if isinstance(rule, ExitTime):
            ok &= np.vectorize(rule.domain.contains)(c)
    specials = [source, 0j] if isinstance(rule, WindingTime) else [source]
    for z in specials:
        ix = math.floor((z.real - spec.x0) / spec.dx)
        iy = math.floor((z.imag - spec.y0) / spec.dy)
        ok[max(iy - 1, 0):iy + 2, max(ix - 1, 0):ix + 2] = False
    return ok


def run_mc(args) -> int:
    rule = _rule(args)
    source = _source(args, rule)
    cfg = _mc_config(args)
    xmin, xmax, ymin, ymax = args.grid
    spec = GridSpec.square(xmin, xmax, ymin, ymax, *args.shape)
    grid = occupation_density(source, rule, spec, cfg)
    comparison = _closed_grid(rule, source, spec)
    summary = grid.summary()
    summary["config"] = {**_echo(args, source=_xy(source)), **grid.config}
    if comparison is not None:
        dens, err = grid.densities(), grid.stderr()
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(dens - comparison) / comparison
        reliable = np.isfinite(rel) & (comparison > 0) & (err < 0.05 * dens) & _interior(rule, source, spec)
        summary["closedForm"] = _clean(comparison.tolist())
        summary["relError"] = _clean(rel.tolist())
        summary["maxRelErrorReliable"] = float(rel[reliable].max()) if reliable.any() else None
    if args.csv:
        _emit(grid.to_csv(), args.csv)
    if args.stderr_csv:
        _emit(format_grid_csv(spec, grid.stderr()), args.stderr_csv)
    _emit(_dump(summary), args.json)
    return EXIT_OK


def run_heatmap(args) -> int:
    rule = _rule(args)
    source = _source(args, rule)
    xmin, xmax, ymin, ymax = args.grid
    spec = GridSpec.square(xmin, xmax, ymin, ymax, *args.shape)
    values = _closed_grid(rule, source, spec)
    if values is None:
        raise ParameterError("no closed form for this stopping rule and source")
    _emit(format_grid_csv(spec, values), args.output)
    return EXIT_OK


def run_identity(args) -> int:
    params = {p: getattr(args, p) for p in PARAMETERS[args.name] if getattr(args, p) is not None}
    case = IdentityCase(args.name, params, SeriesTruncation(args.N, args.tail_tolerance))
    report = verify(case)
    out = report.to_dict()
    out["config"] = _echo(args)
    _emit(_dump(out), args.output)
    return EXIT_OK if report.passed else EXIT_NOT_VERIFIED


def run_pushforward(args) -> int:
    dom = _domain(args)
    fmap = args.map
    problem = PushforwardProblem(fmap, lambda z, w: cf.exit_time_greens(dom, z, w), args.source, dom)
    results = []
    for w in args.target:
        terms = pushforward_terms(problem, w, not args.no_multiplicity)
        value = pushforward_greens(problem, w, not args.no_multiplicity)
        results.append({"target": _xy(w), "value": value.value,
                        "preimages": [{"point": _xy(z), "multiplicity": m, "term": t} for z, m, t in terms]})
    out = {"config": _echo(args, map=repr(fmap), sourceImage=_xy(problem.source_image)),
           "results": results}
    _emit(_dump(out), args.output)
    return EXIT_OK


def run_kernel(args) -> int:
    name = args.kernel.replace("-", "_")
    z, w = args.source, args.target
    out = {"config": _echo(args)}
    if args.time is not None:
        rho = hk.rho_half_plane if name == "half_plane" else hk.rho_strip
        out["density"] = rho(args.time, z, w)
    else:
        out["integral"] = hk.integrate_kernel(name, z, w).value
        if name == "half_plane":
            out["closedForm"] = cf.greens_half_plane(z, w).value
        else:
            out["closedForm"] = cf.greens_strip(z, w).value
    _emit(_dump(out), args.output)
    return EXIT_OK


def _echo(args, **extra) -> dict:
    skip = {"func", "output", "csv", "json", "stderr_csv"}
    d = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, complex):
            v = _xy(v)
        elif isinstance(v, list) and v and isinstance(v[0], complex):
            v = [_xy(x) for x in v]
        elif isinstance(v, tuple):
            v = list(v)
        elif not isinstance(v, (int, float, str, bool, type(None), list)):
            v = repr(v)
        d[k] = v
    d.update(extra)
    return d


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greenwalk", description=(
        "Green's functions of planar Brownian motion: closed forms, Monte Carlo occupation "
        "densities, conformal pushforwards and product identities."),
        epilog="Values starting with '-' that are not plain numbers need the --flag=value form, "
               "e.g. --grid=-3,3,-3,3 or --target=-1+2i.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", required=True)

    p = sub.add_parser("exact", help="closed-form Green's function values")
    _add_domain(p)
    p.add_argument("--source", type=parse_complex, help="source point z (default 1 for winding)")
    p.add_argument("--target", type=parse_complex, action="append", required=True,
                   help="evaluation point w; repeat for several")
    p.add_argument("--N", type=int, default=10_000, help="strip series truncation (default 10000)")
    p.add_argument("--output", "-o", help="write JSON here instead of stdout")
    p.set_defaults(func=run_exact)

    p = sub.add_parser("mc", help="Monte Carlo occupation density on a grid")
    _add_domain(p)
    p.add_argument("--source", type=parse_complex, help="start point (default 1 for winding)")
    p.add_argument("--grid", type=parse_grid, required=True, metavar="xmin,xmax,ymin,ymax")
    p.add_argument("--shape", type=parse_shape, required=True, metavar="nx,ny")
    _add_mc(p)
    p.add_argument("--csv", help="write the density heatmap CSV here")
    p.add_argument("--stderr-csv", help="write the per-cell standard error CSV here")
    p.add_argument("--json", help="write the JSON summary here instead of stdout")
    p.set_defaults(func=run_mc)

    p = sub.add_parser("heatmap", help="closed-form Green's function sampled at grid cell centres (CSV)")
    _add_domain(p)
    p.add_argument("--source", type=parse_complex, help="source point (default 1 for winding)")
    p.add_argument("--grid", type=parse_grid, required=True, metavar="xmin,xmax,ymin,ymax")
    p.add_argument("--shape", type=parse_shape, required=True, metavar="nx,ny")
    p.add_argument("--output", "-o", help="write CSV here instead of stdout")
    p.set_defaults(func=run_heatmap)

    p = sub.add_parser("identity", help="verify an infinite-product identity")
    p.add_argument("name", choices=sorted(PARAMETERS))
    for name in ("a", "b", "c"):
        p.add_argument(f"--{name}", type=float, help=f"parameter {name}")
    p.add_argument("--N", type=int, default=10_000, help="pairs ±1..±N (default 10000)")
    p.add_argument("--tail-tolerance", type=float, default=1e-2,
                   help="give up if the relative tail bound exceeds this (default 1e-2)")
    p.add_argument("--output", "-o", help="write JSON here instead of stdout")
    p.set_defaults(func=run_identity)

    p = sub.add_parser("pushforward", help="Green's function of the image process f(B)")
    p.add_argument("--map", type=parse_map, required=True,
                   help="power:K, exp, tan-quarter-strip, disk-automorphism:A, mobius:A,B,C,D")
    _add_domain(p, allow_winding=False)
    p.add_argument("--source", type=parse_complex, required=True, help="source z in the base domain")
    p.add_argument("--target", type=parse_complex, action="append", required=True,
                   help="image point w; repeat for several")
    p.add_argument("--no-multiplicity", action="store_true",
                   help="diagnostic: drop the multiplicity weights")
    p.add_argument("--output", "-o", help="write JSON here instead of stdout")
    p.set_defaults(func=run_pushforward)

    p = sub.add_parser("kernel", help="killed heat kernel, or its time integral")
    p.add_argument("--kernel", choices=("half-plane", "strip"), required=True)
    p.add_argument("--source", type=parse_complex, required=True)
    p.add_argument("--target", type=parse_complex, required=True)
    p.add_argument("--time", type=float, help="evaluate ρ_t at this time instead of integrating")
    p.add_argument("--output", "-o", help="write JSON here instead of stdout")
    p.set_defaults(func=run_kernel)
    return parser


def _add_mc(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--paths", type=int, default=10_000, help="number of paths (default 10000)")
    g.add_argument("--dt", type=float, default=1e-4, help="base time step (default 1e-4)")
    g.add_argument("--seed", type=int, default=None,
                   help=f"64-bit seed (default ${SEED_ENV} if set, else 0)")
    g.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: available CPUs)")
    g.add_argument("--angular-cap", type=float, default=math.pi / 4,
                   help="largest argument increment per winding step (default π/4)")
    g.add_argument("--no-bridge", action="store_true", help="turn off the bridge crossing correction")
    g.add_argument("--step-growth", type=float, default=0.2,
                   help="step growth factor away from boundary and grid (0 = fixed dt; default 0.2)")
    g.add_argument("--max-steps", type=int, default=10**8, help="per-path step limit")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env, 0) if env else 0
        except ValueError:
            parser.error(f"{SEED_ENV} must be an integer, got {env!r}")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except SimulationError as exc:
        print(f"greenwalk: simulation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except NonConverged as exc:
        print(f"greenwalk: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_VERIFIED
    except (ParameterError, ValueError) as exc:
        print(f"greenwalk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
