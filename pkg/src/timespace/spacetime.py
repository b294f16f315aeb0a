"""Spacetime specifications: one coordinate chart, optional periodic coordinates.

A spec holds the Lorentzian metric ``g`` and a Riemannian metric ``h`` as
4x4 matrices of expressions, plus named closed curves used for holonomy
probes.  Specs are loaded from TOML files::

    name = "cone_cylinder"
    coords = ["t", "x", "theta", "z"]
    periodic = { theta = 6.283185307179586 }
    params = {}
    box = { t = [-1, 1], x = [-1, 1], theta = [0, 6.283185307179586], z = [-1, 1] }
    exclude = []

    [metric]
    g00 = "-cos(theta)"
    g01 = "-sin(theta)"
    g11 = "cos(theta)"
    g22 = "1"
    g33 = "1"

    [[loop]]
    name = "theta"
    param = "s"
    curve = ["0", "0", "2*pi*s", "0"]
"""
from __future__ import annotations

import math
import pathlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bilinear, dsl
from .errors import (AsymmetricMetric, ExcludedPoint, ExprError, LoopNotClosed,
                     MathDomain, NotRiemannian, ParseError, SpecError,
                     UnknownCoordinate, WrongSignature)

FIXTURE_DIR = pathlib.Path(__file__).parent / "fixtures"
CLOSURE_TOL = 1e-12
_COMPONENT_RE = re.compile(r"^([gh])([0-3])([0-3])$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


@dataclass(frozen=True, eq=False)
class LoopCurve:
    """A closed curve ``s -> x(s)``, ``s`` in [0, 1]."""

    name: str
    param: str
    components: tuple  # 4 Expr
    param_values: Mapping[str, float] = field(default_factory=dict)

    @cached_property
    def _compiled(self):
        return [dsl.compile_expr(c, [self.param], self.param_values) for c in self.components]

    def points(self, s) -> np.ndarray:
        """Coordinates at the parameter values ``s``; shape ``(len(s), 4)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([f(s) for f in self._compiled], axis=-1)

    def reversed(self) -> "LoopCurve":
        flipped = tuple(_substitute(c, self.param, dsl.Sub(dsl.ONE, dsl.Var(self.param)))
                        for c in self.components)
        return LoopCurve(self.name + "~", self.param, flipped, self.param_values)

    def repeated(self, times: int) -> "LoopCurve":
        """The loop traversed ``times`` times; valid when the curve is periodic in s."""
        scaled = tuple(_substitute(c, self.param, dsl.Mul(dsl.Num(float(times)), dsl.Var(self.param)))
                       for c in self.components)
        return LoopCurve(f"{self.name}x{times}", self.param, scaled, self.param_values)


def _substitute(e: dsl.Expr, name: str, repl: dsl.Expr) -> dsl.Expr:
    if isinstance(e, dsl.Var):
        return repl if e.name == name else e
    if isinstance(e, dsl.Num):
        return e
    if isinstance(e, dsl.Neg):
        return dsl.Neg(_substitute(e.arg, name, repl))
    if isinstance(e, dsl.Func):
        return dsl.Func(e.name, _substitute(e.arg, name, repl))
    if isinstance(e, dsl.Pow):
        return dsl.Pow(_substitute(e.base, name, repl), e.exponent)
    return type(e)(_substitute(e.left, name, repl), _substitute(e.right, name, repl))


def _identity_exprs():
    return tuple(tuple(dsl.ONE if i == j else dsl.ZERO for j in range(4)) for i in range(4))


@dataclass(frozen=True, eq=False)
class SpacetimeSpec:
    name: str
    coords: tuple
    params: Mapping[str, float]
    g_components: tuple  # 4x4 Expr, symmetric by construction
    h_components: tuple = field(default_factory=_identity_exprs)
    loops: tuple = ()
    exclusions: tuple = ()
    periodic: Mapping[str, float] = field(default_factory=dict)
    box: Mapping[str, tuple] = field(default_factory=dict)

    # compiled evaluators -------------------------------------------------

    def _compile(self, e):
        return dsl.compile_expr(e, self.coords, self.params)

    @cached_property
    def _g_fns(self):
        return [[self._compile(self.g_components[i][j]) for j in range(4)] for i in range(4)]

    @cached_property
    def _h_fns(self):
        return [[self._compile(self.h_components[i][j]) for j in range(4)] for i in range(4)]

    @cached_property
    def g_partials(self):
        """``g_partials[k][i][j]`` is the expression for d_k g_ij."""
        return tuple(
            tuple(tuple(dsl.differentiate(self.g_components[i][j], self.coords[k])
                        for j in range(4)) for i in range(4))
            for k in range(4))

    @cached_property
    def _dg_fns(self):
        return [[[self._compile(self.g_partials[k][i][j]) for j in range(4)]
                 for i in range(4)] for k in range(4)]

    @cached_property
    def _excl_fns(self):
        return [self._compile(e) for e in self.exclusions]

    @staticmethod
    def _assemble(fns, pts):
        cols = [pts[:, k] for k in range(4)]
        out = np.empty((pts.shape[0], 4, 4))
        for i in range(4):
            for j in range(i, 4):
                out[:, i, j] = fns[i][j](*cols)
                out[:, j, i] = out[:, i, j]
        return out

    # batch evaluation ----------------------------------------------------

    def excluded_mask(self, points) -> np.ndarray:
        """True where a point violates an exclusion predicate (or cannot evaluate it)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.zeros(pts.shape[0], dtype=bool)
        for fn in self._excl_fns:
            try:
                vals = fn(*(pts[:, k] for k in range(4)))
                mask |= ~(vals > 0.0)
            except MathDomain:
                for n, p in enumerate(pts):
                    if not mask[n]:
                        try:
                            mask[n] = not fn(*p) > 0.0
                        except MathDomain:
                            mask[n] = True
        return mask

    def check_points(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != 4 or not np.all(np.isfinite(pts)):
            raise SpecError("points must be finite 4-vectors")
        bad = self.excluded_mask(pts)
        if np.any(bad):
            p = pts[np.argmax(bad)]
            raise ExcludedPoint(f"point {tuple(float(x) for x in p)} is in an excluded region")
        return pts

    def g_field(self, points, check: bool = True) -> np.ndarray:
        pts = self.check_points(points)
        g = self._assemble(self._g_fns, pts)
        if check:
            _require_signature(g, pts, bilinear.LORENTZIAN, WrongSignature, "g")
        return g

    def h_field(self, points, check: bool = True) -> np.ndarray:
        pts = self.check_points(points)
        h = self._assemble(self._h_fns, pts)
        if check:
            _require_signature(h, pts, bilinear.RIEMANNIAN, NotRiemannian, "h")
        return h

    def dg_field(self, points) -> np.ndarray:
        """Partials ``d_k g_ij`` with shape ``(n, 4, 4, 4)`` indexed ``[n, k, i, j]``."""
        pts = self.check_points(points)
        return np.stack([self._assemble(self._dg_fns[k], pts) for k in range(4)], axis=1)

    def binding(self, p) -> dict:
        b = dict(self.params)
        b.update(zip(self.coords, (float(x) for x in p)))
        return b


def batch_signatures(forms, tol_rel: float = bilinear.SIGNATURE_REL_TOL) -> np.ndarray:
    """Signatures of a stack of forms, shape ``(n, 3)``."""
    w, _ = bilinear.jacobi_eigen(forms)
    tol = tol_rel * np.max(np.abs(forms), axis=(-2, -1))[..., None]
    neg = np.sum(w < -tol, axis=-1)
    pos = np.sum(w > tol, axis=-1)
    return np.stack([neg, 4 - neg - pos, pos], axis=-1)


def _require_signature(forms, pts, expected, exc, label):
    sigs = batch_signatures(forms)
    ok = np.all(sigs == np.array(expected), axis=-1)
    if not np.all(ok):
        n = int(np.argmin(ok))
        sig = bilinear.Signature(*(int(x) for x in sigs[n]))
        p = tuple(float(x) for x in pts[n])
        raise exc(f"{label} has signature {tuple(sig)} at {p}, expected {tuple(expected)}",
                  signature=sig, point=p)


def as_point(spec: SpacetimeSpec, p) -> np.ndarray:
    return spec.check_points(bilinear.as_vec(p))[0]


def g_at(spec: SpacetimeSpec, p) -> np.ndarray:
    """Numeric Lorentzian form at ``p``; raises unless its signature is (1, 0, 3)."""
    return spec.g_field(as_point(spec, p))[0]


def h_at(spec: SpacetimeSpec, p) -> np.ndarray:
    """Numeric Riemannian form at ``p``; raises unless positive definite."""
    return spec.h_field(as_point(spec, p))[0]


def dg_at(spec: SpacetimeSpec, p) -> np.ndarray:
    return spec.dg_field(as_point(spec, p))[0]


# ---------------------------------------------------------------- validation

@dataclass
class Violation:
    kind: str
    point: tuple
    detail: str
    signature: tuple | None = None


@dataclass
class ValidationReport:
    spec_name: str
    samples: int
    seed: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def sample_points(spec: SpacetimeSpec, samples: int, seed: int = 0,
                  max_rounds: int = 100) -> np.ndarray:
    """Scrambled Halton points in the box that satisfy every exclusion."""
    if set(spec.box) != set(spec.coords):
        raise SpecError("a sampling box is required for every coordinate")
    lo = np.array([spec.box[c][0] for c in spec.coords], dtype=float)
    hi = np.array([spec.box[c][1] for c in spec.coords], dtype=float)
    sampler = qmc.Halton(d=4, scramble=True, seed=seed)
    kept = []
    count = 0
    for _ in range(max_rounds):
        need = samples - count
        if need <= 0:
            break
        pts = qmc.scale(sampler.random(max(need, 16)), lo, hi)
        pts = pts[~spec.excluded_mask(pts)]
        kept.append(pts[:need])
        count += len(kept[-1])
    if count < samples:
        raise SpecError("could not find enough sample points outside the exclusions")
    return np.concatenate(kept, axis=0)


def validate(spec: SpacetimeSpec, samples: int = 1000, seed: int = 0) -> ValidationReport:
    """Check signatures of g and h at quasi-random points of the box."""
    pts = sample_points(spec, samples, seed)
    violations = []
    for label, fns, expected, kind in (("g", spec._g_fns, bilinear.LORENTZIAN, "WrongSignature"),
                                       ("h", spec._h_fns, bilinear.RIEMANNIAN, "NotRiemannian")):
        try:
            forms = spec._assemble(fns, pts)
            good = np.ones(len(pts), dtype=bool)
        except MathDomain:
            forms = np.empty((len(pts), 4, 4))
            good = np.ones(len(pts), dtype=bool)
            for n, p in enumerate(pts):
                try:
                    forms[n] = spec._assemble(fns, p[None, :])[0]
                except MathDomain as exc:
                    good[n] = False
                    violations.append(Violation("MathDomain", tuple(map(float, p)), f"{label}: {exc}"))
        sigs = np.zeros((len(pts), 3), dtype=int)
        sigs[good] = batch_signatures(forms[good])
        for n in np.flatnonzero(good & ~np.all(sigs == np.array(expected), axis=-1)):
            sig = tuple(int(x) for x in sigs[n])
            violations.append(Violation(kind, tuple(map(float, pts[n])),
                                        f"{label} signature {sig}, expected {tuple(expected)}", sig))
    return ValidationReport(spec.name, samples, seed, violations)


# ---------------------------------------------------------------- loading

def _parse_expr(text, where: str) -> dsl.Expr:
    if isinstance(text, bool) or not isinstance(text, (str, int, float)):
        raise ParseError(f"{where}: expected an expression string or number")
    if not isinstance(text, str):
        return dsl.const(float(text))
    try:
        return dsl.parse(text)
    except ExprError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _check_vars(e: dsl.Expr, allowed, where: str):
    unknown = dsl.free_variables(e) - set(allowed)
    if unknown:
        raise UnknownCoordinate(f"{where}: unknown name(s) {sorted(unknown)}")


def _component_matrix(table, letter: str, allowed, required_diagonal: bool):
    if not isinstance(table, dict):
        raise ParseError(f"[{'metric' if letter == 'g' else 'riemann'}] must be a table")
    given = {}
    for key, value in table.items():
        m = _COMPONENT_RE.match(key)
        if not m or m.group(1) != letter:
            raise ParseError(f"unknown metric key {key!r}")
        i, j = int(m.group(2)), int(m.group(3))
        e = _parse_expr(value, key)
        _check_vars(e, allowed, key)
        given[(i, j)] = e
    out = [[dsl.ZERO] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i, 4):
            upper, lower = given.get((i, j)), given.get((j, i))
            if upper is not None and lower is not None and upper != lower:
                raise AsymmetricMetric(
                    f"{letter}{i}{j} = {upper} but {letter}{j}{i} = {lower}")
            e = upper if upper is not None else lower
            if e is None:
                if i == j and required_diagonal:
                    raise ParseError(f"missing diagonal component {letter}{i}{i}")
                e = dsl.ONE if i == j else dsl.ZERO
            out[i][j] = out[j][i] = e
    return tuple(tuple(row) for row in out)


def _closure_check(loop: LoopCurve, coords, periodic):
    ends = loop.points([0.0, 1.0])
    for k, c in enumerate(coords):
        d = float(ends[1, k] - ends[0, k])
        tol = CLOSURE_TOL * max(1.0, abs(d))
        if c in periodic:
            period = periodic[c]
            if abs(d - round(d / period) * period) > tol:
                raise LoopNotClosed(f"loop {loop.name!r}: coordinate {c} changes by {d}, "
                                    f"not a multiple of its period {period}")
        elif abs(d) > tol:
            raise LoopNotClosed(f"loop {loop.name!r}: coordinate {c} does not close ({d})")


def spec_from_dict(data: Mapping, default_name: str = "spacetime") -> SpacetimeSpec:
    known = {"name", "coords", "periodic", "params", "box", "exclude", "metric", "riemann", "loop"}
    extra = set(data) - known
    if extra:
        raise ParseError(f"unknown top-level key(s) {sorted(extra)}")
    name = data.get("name", default_name)
    coords = data.get("coords")
    if not isinstance(coords, list) or len(coords) != 4 or len(set(coords)) != 4:
        raise ParseError("coords must be an array of 4 distinct names")
    params = data.get("params", {})
    reserved = set(dsl.CONSTANTS) | set(dsl.FUNCTIONS)
    for n in list(coords) + list(params):
        if not isinstance(n, str) or not _IDENT_RE.match(n) or n in reserved:
            raise ParseError(f"invalid or reserved name {n!r}")
    if set(coords) & set(params):
        raise ParseError("a name cannot be both a coordinate and a parameter")
    try:
        params = {k: float(v) for k, v in params.items()}
    except (TypeError, ValueError):
        raise ParseError("params must map names to numbers") from None
    allowed = set(coords) | set(params)

    periodic = {}
    for c, period in data.get("periodic", {}).items():
        if c not in coords:
            raise UnknownCoordinate(f"periodic: {c!r} is not a coordinate")
        if not isinstance(period, (int, float)) or not period > 0:
            raise ParseError(f"periodic: period of {c!r} must be positive")
        periodic[c] = float(period)

    box = {}
    for c, rng in data.get("box", {}).items():
        if c not in coords:
            raise UnknownCoordinate(f"box: {c!r} is not a coordinate")
        if not isinstance(rng, list) or len(rng) != 2 or not float(rng[0]) < float(rng[1]):
            raise ParseError(f"box: range of {c!r} must be [lo, hi] with lo < hi")
        box[c] = (float(rng[0]), float(rng[1]))

    exclusions = []
    for n, src in enumerate(data.get("exclude", [])):
        e = _parse_expr(src, f"exclude[{n}]")
        _check_vars(e, allowed, f"exclude[{n}]")
        exclusions.append(e)

    if "metric" not in data:
        raise ParseError("missing [metric] table")
    g = _component_matrix(data["metric"], "g", allowed, required_diagonal=True)
    h = (_component_matrix(data["riemann"], "h", allowed, required_diagonal=True)
         if "riemann" in data else _identity_exprs())

    loops = []
    for n, item in enumerate(data.get("loop", [])):
        where = f"loop[{n}]"
        try:
            lname, param, curve = item["name"], item["param"], item["curve"]
        except (KeyError, TypeError):
            raise ParseError(f"{where}: needs name, param and curve") from None
        if not isinstance(curve, list) or len(curve) != 4:
            raise ParseError(f"{where}: curve must have 4 components")
        if param in allowed or not _IDENT_RE.match(str(param)):
            raise ParseError(f"{where}: invalid loop parameter name {param!r}")
        comps = []
        for k, src in enumerate(curve):
            e = _parse_expr(src, f"{where}.curve[{k}]")
            _check_vars(e, set(params) | {param}, f"{where}.curve[{k}]")
            comps.append(e)
        loop = LoopCurve(str(lname), str(param), tuple(comps), dict(params))
        try:
            _closure_check(loop, coords, periodic)
        except MathDomain as exc:
            raise ParseError(f"{where}: {exc}") from None
        loops.append(loop)

    return SpacetimeSpec(name=str(name), coords=tuple(coords), params=params,
                         g_components=g, h_components=h, loops=tuple(loops),
                         exclusions=tuple(exclusions), periodic=periodic, box=box)


def loads_spec(text: str, default_name: str = "spacetime") -> SpacetimeSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"TOML error: {exc}") from None
    return spec_from_dict(data, default_name)


def fixture_path(name: str) -> pathlib.Path:
    """Path of a bundled fixture, e.g. ``fixture_path("minkowski.toml")``."""
    return FIXTURE_DIR / name


def load_spec(path) -> SpacetimeSpec:
    path = pathlib.Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    try:
        return loads_spec(text, default_name=path.stem)
    except SpecError as exc:
        raise type(exc)(f"{path}: {exc}") from None
