"""Symmetric bilinear forms on a 4-dimensional tangent space.

Forms and vectors are plain numpy arrays of shape ``(4, 4)`` and ``(4,)``.
``jacobi_eigen`` additionally accepts stacks ``(..., 4, 4)`` so that line
fields along a curve can be solved in one call.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateForm, NoConvergence, NotTimelike, NullVector,
                     TimespaceError, ZeroVector)

DIM = 4
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
CLASSIFY_REL_TOL = 1e-9
DEGENERATE_REL_TOL = 1e-12
SIGNATURE_REL_TOL = 1e-10


class Signature(NamedTuple):
    n_negative: int
    n_zero: int
    n_positive: int


LORENTZIAN = Signature(1, 0, 3)
RIEMANNIAN = Signature(0, 0, 4)


class CausalClass(enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


def as_form(entries) -> np.ndarray:
    """Validate and return a 4x4 symmetric float matrix."""
    f = np.asarray(entries, dtype=float)
    if f.shape != (DIM, DIM):
        raise TimespaceError(f"form must be 4x4, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise TimespaceError("form has non-finite entries")
    if not np.array_equal(f, f.T):
        raise TimespaceError("form is not symmetric")
    return f


def as_vec(components) -> np.ndarray:
    v = np.asarray(components, dtype=float)
    if v.shape != (DIM,):
        raise TimespaceError(f"vector must have 4 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise TimespaceError("vector has non-finite components")
    return v


def evaluate_form(f, u, v) -> float:
    """Return ``u^T f v``."""
    return float(np.asarray(u, float) @ np.asarray(f, float) @ np.asarray(v, float))


def _rotate(a, vecs, p, q, skip_tiny):
    apq = a[:, p, q]
    app = a[:, p, p]
    aqq = a[:, q, q]
    if skip_tiny:
        # Numerical Recipes: drop an off-diagonal entry that no longer affects the diagonal
        small = 100.0 * np.abs(apq)
        tiny = (app + small == app) & (aqq + small == aqq)
        a[tiny, p, q] = 0.0
        a[tiny, q, p] = 0.0
        apq = a[:, p, q]
    active = apq != 0.0
    if not np.any(active):
        return
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(active, (aqq - app) / (2.0 * apq), 0.0)
    sgn = np.where(theta >= 0.0, 1.0, -1.0)
    t = np.where(active, sgn / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    cc = c[:, None]
    ss = s[:, None]
    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = cc * col_p - ss * col_q
    a[:, :, q] = ss * col_p + cc * col_q
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = cc * row_p - ss * row_q
    a[:, q, :] = ss * row_p + cc * row_q
    a[active, p, q] = 0.0
    a[active, q, p] = 0.0

    vp = vecs[:, :, p].copy()
    vq = vecs[:, :, q].copy()
    vecs[:, :, p] = cc * vp - ss * vq
    vecs[:, :, q] = ss * vp + cc * vq


def _jacobi_single(a, tol, max_sweeps):
    """Same iteration as the batched path for one matrix, with scalar rotation angles."""
    vecs = np.eye(DIM)
    scale = float(np.linalg.norm(a))
    offmask = ~np.eye(DIM, dtype=bool)
    for sweep in range(max_sweeps + 1):
        if math.sqrt(float(np.sum(a[offmask] ** 2))) <= tol * scale:
            return a, vecs
        if sweep == max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p in range(DIM - 1):
            for q in range(p + 1, DIM):
                apq, app, aqq = float(a[p, q]), float(a[p, p]), float(a[q, q])
                if sweep >= 4:
                    small = 100.0 * abs(apq)
                    if app + small == app and aqq + small == aqq:
                        a[p, q] = a[q, p] = 0.0
                        continue
                if apq == 0.0:
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                G = np.eye(DIM)
                G[p, p] = G[q, q] = c
                G[p, q] = s
                G[q, p] = -s
                a = G.T @ a @ G
                a[p, q] = a[q, p] = 0.0
                vecs = vecs @ G
    return a, vecs


def jacobi_eigen(f, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigen-decomposition of symmetric 4x4 matrices.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns, so that ``f = Q diag(w) Q^T``.  A stack of
    matrices with shape ``(..., 4, 4)`` is processed in a vectorized way.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[-2:] != (DIM, DIM):
        raise TimespaceError(f"expected (..., 4, 4) input, got {f.shape}")
    batch_shape = f.shape[:-2]
    a = f.reshape(-1, DIM, DIM).copy()
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    n = a.shape[0]
    if n == 1:
        a1, v1 = _jacobi_single(a[0], tol, max_sweeps)
        a, vecs = a1[None], v1[None]
    else:
        a, vecs = _jacobi_batch(a, tol, max_sweeps)
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    return w.reshape(batch_shape + (DIM,)), vecs.reshape(batch_shape + (DIM, DIM))


def _jacobi_batch(a, tol, max_sweeps):
    n = a.shape[0]
    vecs = np.broadcast_to(np.eye(DIM), (n, DIM, DIM)).copy()
    scale = np.linalg.norm(a, axis=(1, 2))
    offmask = ~np.eye(DIM, dtype=bool)

    for sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum(a[:, offmask] ** 2, axis=1))
        if np.all(off <= tol * scale):
            break
        if sweep == max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p in range(DIM - 1):
            for q in range(p + 1, DIM):
                _rotate(a, vecs, p, q, skip_tiny=sweep >= 4)
    return a, vecs


def signature(f, tol: float | None = None) -> Signature:
    """Count eigenvalues below ``-tol``, within ``[-tol, tol]`` and above ``tol``.

    Without ``tol`` the threshold is ``1e-10`` times the largest entry.
    """
    if tol is None:
        tol = SIGNATURE_REL_TOL * max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    if tol <= 0:
        raise ValueError("tol must be positive")
    w, _ = jacobi_eigen(f)
    neg = int(np.sum(w < -tol))
    pos = int(np.sum(w > tol))
    return Signature(neg, DIM - neg - pos, pos)


def default_tol(g, v) -> float:
    g = np.asarray(g, float)
    v = np.asarray(v, float)
    return CLASSIFY_REL_TOL * float(np.max(np.abs(g))) * float(v @ v)


def classify(g, v, tol: float | None = None) -> CausalClass:
    v = np.asarray(v, float)
    if not np.any(v):
        raise ZeroVector("cannot classify the zero vector")
    if tol is None:
        tol = default_tol(g, v)
    q = evaluate_form(g, v, v)
    if q < -tol:
        return CausalClass.TIMELIKE
    if q > tol:
        return CausalClass.SPACELIKE
    return CausalClass.NULL


def in_null_cone(g, v, tol: float | None = None) -> bool:
    """``g(v, v) = 0`` up to tolerance."""
    return classify(g, v, tol) is CausalClass.NULL


def in_light_cone(g, v, tol: float | None = None) -> bool:
    """``g(v, v) >= 0`` up to tolerance.

    The predicate is kept exactly as that set is usually written; under the
    (-,+,+,+) convention it holds for null and spacelike vectors.
    """
    return classify(g, v, tol) is not CausalClass.TIMELIKE


def _check_nondegenerate(g):
    scale = float(np.max(np.abs(g)))
    if scale == 0.0 or abs(np.linalg.det(g)) <= DEGENERATE_REL_TOL * scale**DIM:
        raise DegenerateForm("form is degenerate")


def orthogonal_complement(g, v) -> np.ndarray:
    """Basis of ``{w : g(v, w) = 0}`` as the rows of a 3x4 array.

    Seeds are the standard basis vectors with the one carrying v's largest
    component dropped; each seed is projected along v onto the complement.
    """
    g = as_form(g)
    v = as_vec(v)
    _check_nondegenerate(g)
    if classify(g, v) is CausalClass.NULL:
        raise NullVector("a null vector lies in its own orthogonal complement")
    gv = g @ v
    gvv = float(v @ gv)
    drop = int(np.argmax(np.abs(v)))
    basis = []
    for i in range(DIM):
        if i == drop:
            continue
        e = np.zeros(DIM)
        e[i] = 1.0
        basis.append(e - (gv[i] / gvv) * v)
    return np.array(basis)


@dataclass(frozen=True)
class Restriction:
    gram: np.ndarray
    positive_definite: bool
    basis: np.ndarray
    min_eigenvalue: float


def restrict_to_complement(g, v) -> Restriction:
    """Gram matrix of ``g`` on the orthogonal complement of a timelike ``v``."""
    g = as_form(g)
    if classify(g, v) is not CausalClass.TIMELIKE:
        raise NotTimelike("vector is not timelike")
    basis = orthogonal_complement(g, v)
    gram = basis @ g @ basis.T
    gram = 0.5 * (gram + gram.T)
    w = np.linalg.eigvalsh(gram)
    return Restriction(gram, bool(w[0] > 0.0), basis, float(w[0]))


def gram_schmidt(g, vectors) -> np.ndarray:
    """Orthonormalize rows of ``vectors`` under a form positive on their span."""
    out = []
    for w in np.asarray(vectors, float):
        w = w.copy()
        for e in out:
            w = w - (e @ g @ w) * e
        norm2 = float(w @ g @ w)
        if norm2 <= 0.0:
            raise DegenerateForm("form is not positive on the span")
        out.append(w / np.sqrt(norm2))
    return np.array(out)
