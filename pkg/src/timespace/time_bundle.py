"""The time line field over a spacetime: transport, holonomy, orientability, sections."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import dsl, separation, spacetime
from .errors import MathDomain, ResolutionExceeded, SpecError
from .spacetime import LoopCurve, SpacetimeSpec

ALIGNMENT_THRESHOLD = 0.1
MAX_SAMPLES = 2 ** 14
MIN_SAMPLES = 8
ZERO_TOL = 1e-9

ORIENTABILITY_CAVEAT = ("time-orientable on the tested loops only; a global conclusion "
                        "requires the loops to generate H1(M; Z/2)")


def line_at(spec: SpacetimeSpec, p) -> separation.TimeLine:
    """Canonical time line at ``p`` from the spec's g and h."""
    return separation.timelike_from_riemann(spacetime.g_at(spec, p), spacetime.h_at(spec, p))


def lines_at(spec: SpacetimeSpec, points):
    """Batch version of :func:`line_at`: ``(directions, eigenvalues, gaps, h)``."""
    g = spec.g_field(points)
    h = spec.h_field(points)
    d, lam, gap = separation.time_lines(g, h)
    return d, lam, gap, h


def _inner(h_a, h_b, x, y):
    """Normalized inner product of x and y under the average of two h's."""
    H = 0.5 * (h_a + h_b)
    xy = np.einsum("...i,...ij,...j->...", x, H, y)
    xx = np.einsum("...i,...ij,...j->...", x, H, x)
    yy = np.einsum("...i,...ij,...j->...", y, H, y)
    return xy / np.sqrt(xx * yy)


@dataclass
class LineFieldSample:
    point: np.ndarray
    line: separation.TimeLine
    local_sign: int


@dataclass
class Transport:
    """Time line sampled along a curve with a continuously chosen sign."""

    params: np.ndarray
    points: np.ndarray
    directions: np.ndarray      # canonical representatives
    eigenvalues: np.ndarray
    gaps: np.ndarray
    h: np.ndarray
    local_signs: np.ndarray     # +1/-1 flip applied at each step, first entry +1
    alignments: np.ndarray      # |inner| between consecutive samples

    @property
    def n_samples(self) -> int:
        return len(self.params) - 1

    @property
    def transported(self) -> np.ndarray:
        return self.directions * np.cumprod(self.local_signs)[:, None]

    @property
    def samples(self) -> list:
        return [LineFieldSample(self.points[i],
                                separation.TimeLine(self.directions[i], float(self.eigenvalues[i]),
                                                    float(self.gaps[i])),
                                int(self.local_signs[i]))
                for i in range(len(self.params))]


def transport_line(spec: SpacetimeSpec, curve: LoopCurve, n_samples: int = 64,
                   alignment_threshold: float = ALIGNMENT_THRESHOLD,
                   max_samples: int = MAX_SAMPLES) -> Transport:
    """Follow the time line along ``curve``, flipping the representative to stay continuous.

    Sampling is doubled until consecutive lines are aligned better than
    ``alignment_threshold``; beyond ``max_samples`` a ``ResolutionExceeded``
    is raised.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")
    n = n_samples
    while True:
        s = np.linspace(0.0, 1.0, n + 1)
        pts = curve.points(s)
        d, lam, gap, h = lines_at(spec, pts)
        inner = _inner(h[:-1], h[1:], d[:-1], d[1:])
        align = np.abs(inner)
        if np.all(align >= alignment_threshold):
            signs = np.concatenate([[1], np.where(inner < 0, -1, 1)]).astype(int)
            return Transport(s, pts, d, lam, gap, h, signs, align)
        n *= 2
        if n > max_samples:
            raise ResolutionExceeded(
                f"loop {curve.name!r}: time line not resolved with {max_samples} samples "
                f"(min alignment {float(align.min()):.3g})")


@dataclass(frozen=True)
class HolonomyResult:
    loop: str
    holonomy: int
    samples_used: int
    min_alignment: float


def holonomy(spec: SpacetimeSpec, loop: LoopCurve, n_samples: int = 64) -> HolonomyResult:
    """Z/2 holonomy of the time line around a closed loop (+1 trivial, -1 not)."""
    tr = transport_line(spec, loop, n_samples)
    rep = tr.transported
    closing = float(_inner(tr.h[-1], tr.h[0], rep[-1], rep[0]))
    min_align = float(min(tr.alignments.min(), abs(closing)))
    if abs(closing) < ALIGNMENT_THRESHOLD:
        raise ResolutionExceeded(f"loop {loop.name!r}: time line at the end does not match "
                                 f"the start (alignment {closing:.3g}); is the loop closed?")
    return HolonomyResult(loop.name, 1 if closing > 0 else -1, tr.n_samples, min_align)


class Verdict(enum.Enum):
    ORIENTABLE_ON_TESTED_LOOPS = "orientable-on-tested-loops"
    NOT_ORIENTABLE = "not-orientable"


@dataclass
class OrientabilityVerdict:
    holonomies: list
    verdict: Verdict
    warnings: list = field(default_factory=list)


def orientability(spec: SpacetimeSpec, n_samples: int = 64) -> OrientabilityVerdict:
    results = [holonomy(spec, loop, n_samples) for loop in spec.loops]
    if any(r.holonomy == -1 for r in results):
        return OrientabilityVerdict(results, Verdict.NOT_ORIENTABLE)
    return OrientabilityVerdict(results, Verdict.ORIENTABLE_ON_TESTED_LOOPS, [ORIENTABILITY_CAVEAT])


# ---------------------------------------------------------------- partial sections

@dataclass(frozen=True)
class PartialSection:
    """A section ``p -> multiplier(p) * (canonical time direction at p)``."""

    multiplier: dsl.Expr

    @classmethod
    def from_source(cls, source: str) -> "PartialSection":
        return cls(dsl.parse(source))


@dataclass
class ZeroRegion:
    n_points: int
    center: tuple            # grid point with the smallest |multiplier|
    lower: tuple             # coordinate-wise bounds of the region
    upper: tuple


@dataclass
class SectionReport:
    axes: dict
    points: np.ndarray
    valid: np.ndarray
    multipliers: np.ndarray
    values: np.ndarray
    zero_mask: np.ndarray
    zero_regions: list
    discontinuities: list
    warnings: list


def grid_axes(spec: SpacetimeSpec, grid: dict) -> tuple[dict, dict]:
    """Axis values per gridded coordinate and whether each axis wraps around.

    A periodic coordinate whose range spans exactly one period is sampled
    without its endpoint and treated as a circle.
    """
    axes, wraps = {}, {}
    for c, (lo, hi, n) in grid.items():
        if c not in spec.coords:
            raise SpecError(f"grid: {c!r} is not a coordinate")
        n = int(n)
        if n < 1 or not hi > lo:
            raise SpecError(f"grid: bad range for {c!r}")
        period = spec.periodic.get(c)
        wrap = period is not None and abs((hi - lo) - period) <= 1e-12 * period
        axes[c] = np.linspace(lo, hi, n, endpoint=not wrap)
        wraps[c] = wrap
    return axes, wraps


def _default_base(spec: SpacetimeSpec) -> np.ndarray:
    return np.array([0.5 * sum(spec.box[c]) if c in spec.box else 0.0 for c in spec.coords])


def _union_wrapped(labels, axis):
    """Merge labels that touch across the wrapped faces of ``axis``."""
    first = np.take(labels, 0, axis=axis).ravel()
    last = np.take(labels, -1, axis=axis).ravel()
    parent = {}

    def find(a):
        while parent.get(a, a) != a:
            a = parent[a]
        return a

    for a, b in zip(first, last):
        if a and b:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    if parent:
        flat = labels.ravel()
        for n, lab in enumerate(flat):
            if lab:
                flat[n] = find(lab)


def evaluate_section(spec: SpacetimeSpec, section: PartialSection, grid: dict,
                     base=None, zero_tol: float = ZERO_TOL) -> SectionReport:
    """Evaluate a partial time orientation on a grid and locate its zeros.

    ``grid`` maps coordinate names to ``(lo, hi, n)``; coordinates not in the
    grid are held at ``base`` (default: centre of the spec's box).  Zeros are
    grid points with ``|multiplier| <= zero_tol * max|multiplier|`` together
    with the nearer end of every sign change of the multiplier between
    neighbours.
    """
    axes, wraps = grid_axes(spec, grid)
    base = _default_base(spec) if base is None else np.asarray(base, dtype=float)
    names = list(axes)
    mesh = np.meshgrid(*(axes[c] for c in names), indexing="ij")
    shape = mesh[0].shape if names else ()
    pts = np.broadcast_to(base, shape + (4,)).copy()
    for c, m in zip(names, mesh):
        pts[..., spec.coords.index(c)] = m
    flat = pts.reshape(-1, 4)
    warnings = []

    valid = ~spec.excluded_mask(flat)
    fn = dsl.compile_expr(section.multiplier, spec.coords, spec.params)
    mult = np.full(len(flat), np.nan)
    for n in np.flatnonzero(valid):
        try:
            mult[n] = float(fn(*flat[n]))
        except MathDomain:
            valid[n] = False
    if not np.all(valid):
        warnings.append(f"{int(np.sum(~valid))} grid point(s) excluded or not evaluable")

    dirs = np.full((len(flat), 4), np.nan)
    hs = np.full((len(flat), 4, 4), np.nan)
    if np.any(valid):
        d, _, _, h = lines_at(spec, flat[valid])
        dirs[valid] = d
        hs[valid] = h
    values = mult[:, None] * dirs

    scale = float(np.nanmax(np.abs(mult))) if np.any(valid) else 0.0
    tol = zero_tol * scale
    zero = valid & (np.abs(np.nan_to_num(mult, nan=np.inf)) <= tol)

    grid_mult = mult.reshape(shape)
    grid_valid = valid.reshape(shape)
    grid_zero = zero.reshape(shape).copy()
    grid_dirs = dirs.reshape(shape + (4,))
    grid_h = hs.reshape(shape + (4, 4))
    discontinuities = []
    for ax, c in enumerate(names):
        n_ax = shape[ax]
        pairs = [(i, i + 1) for i in range(n_ax - 1)]
        if wraps[c] and n_ax > 1:
            pairs.append((n_ax - 1, 0))
        for i, j in pairs:
            a = np.take(grid_mult, i, axis=ax)
            b = np.take(grid_mult, j, axis=ax)
            ok = np.take(grid_valid, i, axis=ax) & np.take(grid_valid, j, axis=ax)
            za = np.take(grid_zero, i, axis=ax)
            zb = np.take(grid_zero, j, axis=ax)
            # compare signs, not products: a * b can underflow to zero
            sa, sb = np.sign(a), np.sign(b)
            change = ok & ~za & ~zb & (sa * sb < 0)
            pick_a = change & (np.abs(a) <= np.abs(b))
            pick_b = change & ~pick_a
            idx_a = [slice(None)] * len(shape)
            idx_a[ax] = i
            idx_b = [slice(None)] * len(shape)
            idx_b[ax] = j
            grid_zero[tuple(idx_a)] |= pick_a
            grid_zero[tuple(idx_b)] |= pick_b

            da = np.take(grid_dirs, i, axis=ax)
            db = np.take(grid_dirs, j, axis=ax)
            ha = np.take(grid_h, i, axis=ax)
            hb = np.take(grid_h, j, axis=ax)
            with np.errstate(invalid="ignore"):
                flip = ok & (_inner(ha, hb, da, db) < 0) & (sa * sb > 0)
            hits = list(zip(*np.nonzero(flip))) if flip.ndim else ([()] if flip else [])
            for k in hits:
                ia = list(k)
                ia.insert(ax, i)
                ib = list(k)
                ib.insert(ax, j)
                discontinuities.append((tuple(map(float, pts[tuple(ia)])),
                                        tuple(map(float, pts[tuple(ib)]))))
    if discontinuities:
        warnings.append(f"section is discontinuous across {len(discontinuities)} grid edge(s): "
                        "the multiplier keeps its sign where the canonical direction flips")

    regions = []
    if names and np.any(grid_zero):
        labels, count = ndimage.label(grid_zero)
        for ax, c in enumerate(names):
            if wraps[c] and shape[ax] > 1:
                _union_wrapped(labels, ax)
        abs_mult = np.abs(np.nan_to_num(grid_mult, nan=np.inf))
        for lab in np.unique(labels[labels > 0]):
            where = labels == lab
            members = pts[where]
            best = np.argmin(np.where(where, abs_mult, np.inf))
            regions.append(ZeroRegion(int(where.sum()),
                                      tuple(map(float, pts.reshape(-1, 4)[best])),
                                      tuple(map(float, members.min(axis=0))),
                                      tuple(map(float, members.max(axis=0)))))
    elif not names and np.any(zero):
        p = tuple(map(float, flat[0]))
        regions.append(ZeroRegion(1, p, p, p))

    return SectionReport(axes, flat, valid, mult, values, grid_zero.reshape(-1),
                         regions, discontinuities, warnings)
