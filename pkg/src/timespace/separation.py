"""Time/space separation at a point.

Going one way, a timelike vector ``v`` yields a Riemannian form: split any
``u = a v + w`` with ``w`` g-orthogonal to ``v`` and set
``h(u, u) = -a**2 g(v, v) + g(w, w)``.  Going the other way, a Riemannian
form ``h`` turns ``g`` into a self-adjoint map; its single negative
eigendirection is the time line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bilinear
from .bilinear import CausalClass
from .errors import EigencountViolation, NotRiemannian, NotTimelike, WrongSignature

GAP_REL_TOL = 1e-8
NEG_EIG_REL_TOL = 1e-10


@dataclass(frozen=True)
class TimeLine:
    """h-unit timelike direction, defined up to sign, with its eigenvalue."""

    direction: np.ndarray
    eigenvalue: float
    gap: float
    low_confidence: bool = False


def _require(form, expected, exc, label):
    sig = bilinear.signature(form)
    if sig != expected:
        raise exc(f"{label} has signature {tuple(sig)}, expected {tuple(expected)}", signature=sig)


def riemann_from_timelike(g, v) -> np.ndarray:
    """Riemannian form induced by the timelike vector ``v``.

    Polarizing the split ``u = a v + w`` gives the closed form
    ``h = g - 2 (g v)(g v)^T / g(v, v)``; ``h`` depends only on the line of ``v``.
    """
    g = bilinear.as_form(g)
    v = bilinear.as_vec(v)
    _require(g, bilinear.LORENTZIAN, WrongSignature, "g")
    if bilinear.classify(g, v) is not CausalClass.TIMELIKE:
        raise NotTimelike("vector is not timelike under g")
    # rescale to a canonical representative of the line so cv and v round alike
    v = v / v[np.argmax(np.abs(v))]
    gv = g @ v
    h = g - (2.0 / float(v @ gv)) * np.outer(gv, gv)
    return 0.5 * (h + h.T)


def canonical_sign(x: np.ndarray) -> np.ndarray:
    """Flip so the largest-magnitude component is positive (per row for stacks)."""
    idx = np.argmax(np.abs(x), axis=-1)
    lead = np.take_along_axis(x, idx[..., None], axis=-1)
    return np.where(lead < 0, -x, x)


def generalized_eigen(g, h):
    """Solve ``g x = lam h x`` for stacks of forms via Cholesky reduction.

    Returns ascending eigenvalues ``(..., 4)`` and h-orthonormal eigenvectors
    as columns ``(..., 4, 4)``.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise NotRiemannian("h is not positive definite") from None
    batch = g.shape[:-2]
    Linv = np.linalg.inv(chol.reshape(-1, 4, 4))
    reduced = Linv @ g.reshape(-1, 4, 4) @ np.swapaxes(Linv, -1, -2)
    w, Y = bilinear.jacobi_eigen(reduced)
    X = np.swapaxes(Linv, -1, -2) @ Y
    return w.reshape(batch + (4,)), X.reshape(batch + (4, 4))


def time_lines(g, h, tol: float | None = None):
    """Batch time lines for stacks of (g, h) pairs already known to be valid.

    Returns ``(directions, eigenvalues, gaps)``; raises ``EigencountViolation``
    if any pair does not have exactly one negative eigenvalue.
    """
    w, X = generalized_eigen(g, h)
    if tol is None:
        tol = NEG_EIG_REL_TOL * np.max(np.abs(g), axis=(-2, -1))
    n_neg = np.sum(w < -np.asarray(tol)[..., None], axis=-1)
    if np.any(n_neg != 1):
        bad = np.unique(n_neg[n_neg != 1])
        raise EigencountViolation(f"expected one negative eigenvalue, found {bad.tolist()}")
    directions = canonical_sign(X[..., :, 0])
    return directions, w[..., 0], w[..., 1] - w[..., 0]


def timelike_from_riemann(g, h, tol: float | None = None) -> TimeLine:
    """Time line of ``g`` under the identification of vectors and covectors by ``h``."""
    g = bilinear.as_form(g)
    h = bilinear.as_form(h)
    _require(g, bilinear.LORENTZIAN, WrongSignature, "g")
    _require(h, bilinear.RIEMANNIAN, NotRiemannian, "h")
    w, X = generalized_eigen(g, h)
    if tol is None:
        tol = NEG_EIG_REL_TOL * float(np.max(np.abs(g)))
    n_neg = int(np.sum(w < -tol))
    if n_neg != 1:
        raise EigencountViolation(f"expected one negative eigenvalue, found {n_neg}: {w}")
    gap = float(w[1] - w[0])
    low = gap < GAP_REL_TOL * float(np.max(np.abs(w)))
    return TimeLine(canonical_sign(X[:, 0]), float(w[0]), gap, bool(low))


def line_angle(x, v) -> float:
    """Angle in [0, pi/2] between the lines spanned by ``x`` and ``v``."""
    x = np.asarray(x, float) / np.linalg.norm(x)
    v = np.asarray(v, float) / np.linalg.norm(v)
    c = float(x @ v)
    s = float(np.linalg.norm(x - c * v))
    return float(np.arctan2(s, abs(c)))


@dataclass(frozen=True)
class RoundTrip:
    h: np.ndarray
    line: TimeLine
    angle: float
    eigenvalue_residual: float

    @property
    def ok(self) -> bool:
        return self.angle < 1e-8 and self.eigenvalue_residual < 1e-8


def roundtrip_check(g, v) -> RoundTrip:
    """Build h from ``v`` then recover the time line; it must be span(v) with eigenvalue -1."""
    h = riemann_from_timelike(g, v)
    line = timelike_from_riemann(g, h)
    return RoundTrip(h, line, line_angle(line.direction, v), abs(line.eigenvalue + 1.0))
