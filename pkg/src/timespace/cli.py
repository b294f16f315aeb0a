"""Command-line interface.

Exit codes: 0 success, 1 input or math error, 2 the spacetime is not
time-orientable (``orient`` only).
"""
from __future__ import annotations

import argparse
import enum
import json
import math
import pathlib
import sys
from typing import Sequence

import numpy as np

from . import bilinear, covariant, dsl, separation, spacetime, time_bundle
from .errors import TimespaceError

EXIT_OK, EXIT_ERROR, EXIT_NOT_ORIENTABLE = 0, 1, 2


# ---------------------------------------------------------------- json rendering

def _plain(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list)) for x in obj):
            return "[" + ", ".join(_encode(x, indent, level) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(x, indent, level + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def to_json(obj, indent: int = 2) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


# ---------------------------------------------------------------- argument helpers

def resolve_spec_path(path: str) -> pathlib.Path:
    """The path itself, or a bundled fixture of that name when the path does not exist."""
    p = pathlib.Path(path)
    if not p.exists():
        bundled = spacetime.fixture_path(p.name)
        if bundled.exists():
            return bundled
    return p


def _eval_const(text: str, spec: spacetime.SpacetimeSpec, what: str) -> float:
    try:
        return dsl.evaluate(dsl.parse(text.strip()), spec.params)
    except TimespaceError as exc:
        raise TimespaceError(f"{what}: {exc}") from None


def parse_point(text: str, spec: spacetime.SpacetimeSpec) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 4:
        raise TimespaceError(f"--point needs 4 comma-separated values, got {text!r}")
    return np.array([_eval_const(s, spec, "--point") for s in parts])


def parse_exprs(text: str, count: int, flag: str) -> list:
    parts = text.split(",")
    if len(parts) != count:
        raise TimespaceError(f"{flag} needs {count} comma-separated expressions, got {text!r}")
    try:
        return [dsl.parse(s) for s in parts]
    except TimespaceError as exc:
        raise TimespaceError(f"{flag}: {exc}") from None


def parse_grid(text: str, spec: spacetime.SpacetimeSpec) -> dict:
    grid = {}
    for item in text.split(","):
        try:
            name, rng = item.split("=")
            lo, hi, n = rng.split(":")
        except ValueError:
            raise TimespaceError(f"--grid entries look like coord=lo:hi:n, got {item!r}") from None
        name = name.strip()
        try:
            count = int(n)
        except ValueError:
            raise TimespaceError(f"--grid: point count must be an integer, got {n!r}") from None
        grid[name] = (_eval_const(lo, spec, "--grid"), _eval_const(hi, spec, "--grid"), count)
    return grid


# ---------------------------------------------------------------- commands

def cmd_validate(args, spec):
    rep = spacetime.validate(spec, samples=args.samples, seed=args.seed)
    results = {
        "samples": rep.samples,
        "seed": rep.seed,
        "n_violations": len(rep.violations),
        "violations": [{"kind": v.kind, "point": v.point, "detail": v.detail}
                       for v in rep.violations],
    }
    lines = [f"{rep.samples} samples, {len(rep.violations)} violation(s)"]
    lines += [f"  {v.kind} at {v.point}: {v.detail}" for v in rep.violations[:10]]
    if len(rep.violations) > 10:
        lines.append(f"  ... {len(rep.violations) - 10} more")
    return results, [], (EXIT_OK if rep.ok else EXIT_ERROR), lines


def cmd_split(args, spec):
    p = parse_point(args.point, spec)
    g = spacetime.g_at(spec, p)
    h = spacetime.h_at(spec, p)
    line = separation.timelike_from_riemann(g, h, tol=args.tol)
    cls = bilinear.classify(g, line.direction)
    warnings = []
    if line.low_confidence:
        warnings.append(f"low confidence: eigenvalue gap {line.gap:.3g} is tiny relative to the spectrum")
    results = {
        "point": p,
        "eigenvalue": line.eigenvalue,
        "direction": line.direction,
        "gap": line.gap,
        "low_confidence": line.low_confidence,
        "causal_class": cls,
        "g": g,
        "h": h,
    }
    lines = [f"point:       {tuple(p.tolist())}",
             f"eigenvalue:  {line.eigenvalue:.17g}",
             f"direction:   {tuple(line.direction.tolist())}",
             f"gap:         {line.gap:.17g}",
             f"causal class of direction: {cls.value}"]
    return results, warnings, EXIT_OK, lines


def cmd_orient(args, spec):
    v = time_bundle.orientability(spec, n_samples=args.samples)
    results = {
        "verdict": v.verdict,
        "loops": [{"loop": r.loop, "holonomy": r.holonomy, "samples_used": r.samples_used,
                   "min_alignment": r.min_alignment} for r in v.holonomies],
    }
    lines = [f"loop {r.loop}: holonomy {r.holonomy:+d} ({r.samples_used} samples, "
             f"min alignment {r.min_alignment:.4f})" for r in v.holonomies]
    if not v.holonomies:
        lines.append("no loops declared")
    lines.append(f"verdict: {v.verdict.value}")
    code = EXIT_NOT_ORIENTABLE if v.verdict is time_bundle.Verdict.NOT_ORIENTABLE else EXIT_OK
    return results, list(v.warnings), code, lines


def cmd_section(args, spec):
    section = time_bundle.PartialSection(dsl.parse(args.multiplier))
    grid = parse_grid(args.grid, spec)
    base = parse_point(args.point, spec) if args.point else None
    kw = {} if args.tol is None else {"zero_tol": args.tol}
    rep = time_bundle.evaluate_section(spec, section, grid, base=base, **kw)
    regions = [{"n_points": z.n_points, "center": z.center, "lower": z.lower, "upper": z.upper}
               for z in rep.zero_regions]
    samples = [{"point": rep.points[n], "multiplier": rep.multipliers[n], "value": rep.values[n],
                "zero": bool(rep.zero_mask[n])}
               for n in np.flatnonzero(rep.valid)]
    results = {
        "multiplier": str(section.multiplier),
        "grid": {c: {"lo": lo, "hi": hi, "n": n} for c, (lo, hi, n) in grid.items()},
        "n_points": int(len(rep.points)),
        "n_zero_points": int(rep.zero_mask.sum()),
        "zero_regions": regions,
        "discontinuities": [list(pair) for pair in rep.discontinuities],
        "samples": samples,
    }
    lines = [f"multiplier {section.multiplier} on {len(rep.points)} grid points",
             f"{len(regions)} zero region(s) (past and future indistinguishable):"]
    lines += [f"  near {z['center']} ({z['n_points']} point(s))" for z in regions]
    return results, list(rep.warnings), EXIT_OK, lines


def cmd_derive(args, spec):
    p = parse_point(args.point, spec)
    F = covariant.VectorField(tuple(parse_exprs(args.field, 4, "--field")))
    F.check(spec)
    if args.mode == "time":
        m = dsl.parse(args.multiplier)
        s = covariant.time_section_at(spec, m, p)
        section_desc = {"multiplier": str(m)}
    else:
        if not args.coeffs:
            raise TimespaceError("--mode space requires --coeffs c1,c2,c3")
        coeffs = parse_exprs(args.coeffs, 3, "--coeffs")
        s = covariant.space_section_at(spec, coeffs, p)
        section_desc = {"coeffs": [str(c) for c in coeffs],
                        "frame": covariant.space_frame_at(spec, p)}
    d = covariant.covariant_derivative(spec, s, F, p)
    warnings = []
    if not np.any(s):
        warnings.append("section vanishes at this point: no differentiation direction")
    results = {"point": p, "mode": args.mode, **section_desc, "section": s,
               "field": [str(c) for c in F.components], "derivative": d}
    lines = [f"{args.mode} differentiation at {tuple(p.tolist())}",
             f"section s(p): {tuple(s.tolist())}",
             f"nabla_s F:    {tuple(d.tolist())}"]
    if args.verbose:
        gamma = covariant.christoffel_at(spec, p)
        results["christoffel"] = gamma
        lines += _gamma_lines(spec, gamma)
    return results, warnings, EXIT_OK, lines


def _gamma_lines(spec, gamma):
    out = ["Christoffel symbols (nonzero, nu <= rho):"]
    c = spec.coords
    for m in range(4):
        for n in range(4):
            for r in range(n, 4):
                if gamma[m, n, r] != 0.0:
                    out.append(f"  Gamma^{c[m]}_{{{c[n]} {c[r]}}} = {gamma[m, n, r]:.17g}")
    return out


def cmd_christoffel(args, spec):
    p = parse_point(args.point, spec)
    gamma = covariant.christoffel_at(spec, p)
    entries = [{"mu": m, "nu": n, "rho": r, "value": gamma[m, n, r]}
               for m in range(4) for n in range(4) for r in range(n, 4) if gamma[m, n, r] != 0.0]
    results = {"point": p, "coords": list(spec.coords), "gamma": gamma, "nonzero": entries}
    return results, [], EXIT_OK, _gamma_lines(spec, gamma)


COMMANDS = {
    "validate": cmd_validate,
    "split": cmd_split,
    "orient": cmd_orient,
    "section": cmd_section,
    "derive": cmd_derive,
    "christoffel": cmd_christoffel,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="spacetime TOML file (or the name of a bundled fixture)")
    common.add_argument("--output", choices=["text", "json"], default="text")
    common.add_argument("--tol", type=float, default=None, help="override the command's tolerance")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="timespace",
                                     description="Time/space separation of Lorentzian spacetimes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check signatures of g and h over the box")
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("split", parents=[common], help="time line at a point")
    p.add_argument("--point", required=True, help='"c0,c1,c2,c3"')

    p = sub.add_parser("orient", parents=[common], help="holonomy of the time line on declared loops")
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("section", parents=[common], help="evaluate a partial time orientation")
    p.add_argument("--multiplier", required=True)
    p.add_argument("--grid", required=True, help='"coord=lo:hi:n,..."')
    p.add_argument("--point", default=None, help="values of the coordinates not in the grid")

    p = sub.add_parser("derive", parents=[common], help="time or space differentiation of a field")
    p.add_argument("--mode", choices=["time", "space"], default="time")
    p.add_argument("--multiplier", default="1")
    p.add_argument("--coeffs", default=None)
    p.add_argument("--field", required=True, help='"F0,F1,F2,F3"')
    p.add_argument("--point", required=True)
    p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("christoffel", parents=[common], help="dump Christoffel symbols at a point")
    p.add_argument("--point", required=True)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    report = {"command": argv, "spec": None}
    try:
        spec = spacetime.load_spec(resolve_spec_path(args.spec))
        report["spec"] = spec.name
        results, warnings, code, lines = COMMANDS[args.command](args, spec)
    except (TimespaceError, ValueError) as exc:
        kind = type(exc).__name__
        print(f"error: {kind}: {exc}", file=stderr)
        report.update(results=None, warnings=[], error={"type": kind, "message": str(exc)},
                      exit_status=EXIT_ERROR)
        if args.output == "json":
            print(to_json(report), file=stdout)
        return EXIT_ERROR

    report.update(results=results, warnings=warnings, exit_status=code)
    if args.output == "json":
        for w in warnings:
            print(f"warning: {w}", file=stderr)
        print(to_json(report), file=stdout)
    else:
        print(f"{args.command}: {report['spec']}", file=stdout)
        for line in lines:
            print(line, file=stdout)
        for w in warnings:
            print(f"warning: {w}", file=stdout)
    return code


def main(argv: Sequence[str] | None = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
