"""Levi-Civita connection and time/space differentiation of vector fields."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bilinear, dsl, spacetime
from .errors import DegenerateMetric, DegenerateForm
from .spacetime import SpacetimeSpec, _check_vars
from .time_bundle import line_at


@dataclass(frozen=True)
class VectorField:
    """Contravariant components ``F^mu`` as expressions in the coordinates."""

    components: tuple

    @classmethod
    def parse(cls, sources: Sequence[str]) -> "VectorField":
        if len(sources) != 4:
            raise ValueError("a vector field needs 4 components")
        return cls(tuple(s if isinstance(s, dsl.Expr) else dsl.parse(str(s)) for s in sources))

    def check(self, spec: SpacetimeSpec):
        for k, e in enumerate(self.components):
            _check_vars(e, set(spec.coords) | set(spec.params), f"component {k}")

    def at(self, spec: SpacetimeSpec, p) -> np.ndarray:
        b = spec.binding(p)
        return np.array([dsl.evaluate(e, b) for e in self.components])

    def jacobian(self, spec: SpacetimeSpec, p) -> np.ndarray:
        """``J[mu, nu] = d_nu F^mu`` from symbolic partials."""
        b = spec.binding(p)
        return np.array([[dsl.evaluate(dsl.differentiate(e, c), b) for c in spec.coords]
                         for e in self.components])


def christoffel_at(spec: SpacetimeSpec, p) -> np.ndarray:
    """``gamma[mu, nu, rho]`` of the Levi-Civita connection at ``p``."""
    g = spacetime.g_at(spec, p)
    scale = float(np.max(np.abs(g)))
    if abs(np.linalg.det(g)) <= 1e-12 * scale ** 4:
        raise DegenerateMetric("metric is not invertible at this point")
    ginv = np.linalg.inv(g)
    dg = spacetime.dg_at(spec, p)  # dg[k, i, j] = d_k g_ij
    # lowered[s, n, r] = d_n g_sr + d_r g_sn - d_s g_nr
    lowered = (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    return 0.5 * np.einsum("ms,snr->mnr", ginv, lowered)


def _vector_at(spec, s, p):
    if isinstance(s, VectorField):
        return s.at(spec, p)
    return bilinear.as_vec(s)


def covariant_derivative(spec: SpacetimeSpec, s, F: VectorField, p) -> np.ndarray:
    """``(nabla_s F)^mu = s^nu (d_nu F^mu + Gamma^mu_{nu rho} F^rho)`` at ``p``.

    ``s`` is either a :class:`VectorField` or the numeric vector ``s(p)``.
    """
    p = spacetime.as_point(spec, p)
    sv = _vector_at(spec, s, p)
    gamma = christoffel_at(spec, p)
    return F.jacobian(spec, p) @ sv + np.einsum("mnr,n,r->m", gamma, sv, F.at(spec, p))


def directional_derivative(spec: SpacetimeSpec, s, f: dsl.Expr, p) -> float:
    """``s(f)`` for a scalar expression ``f``."""
    p = spacetime.as_point(spec, p)
    sv = _vector_at(spec, s, p)
    b = spec.binding(p)
    grad = np.array([dsl.evaluate(dsl.differentiate(f, c), b) for c in spec.coords])
    return float(grad @ sv)


def time_section_at(spec: SpacetimeSpec, multiplier: dsl.Expr, p) -> np.ndarray:
    p = spacetime.as_point(spec, p)
    m = dsl.evaluate(multiplier, spec.binding(p))
    return m * line_at(spec, p).direction


def time_derivative(spec: SpacetimeSpec, multiplier: dsl.Expr, F: VectorField, p) -> np.ndarray:
    """Differentiate ``F`` along the time section ``multiplier * (time direction)``."""
    return covariant_derivative(spec, time_section_at(spec, multiplier, p), F, p)


def space_frame_at(spec: SpacetimeSpec, p) -> np.ndarray:
    """g-orthonormal frame (rows) of the g-orthogonal complement of the time line."""
    g = spacetime.g_at(spec, p)
    v = line_at(spec, p).direction
    try:
        return bilinear.gram_schmidt(g, bilinear.orthogonal_complement(g, v))
    except DegenerateForm as exc:
        raise DegenerateMetric(str(exc)) from None


def space_section_at(spec: SpacetimeSpec, coeffs: Sequence[dsl.Expr], p) -> np.ndarray:
    if len(coeffs) != 3:
        raise ValueError("a space section needs 3 coefficients")
    p = spacetime.as_point(spec, p)
    b = spec.binding(p)
    c = np.array([dsl.evaluate(e, b) for e in coeffs])
    return c @ space_frame_at(spec, p)


def space_derivative(spec: SpacetimeSpec, coeffs: Sequence[dsl.Expr], F: VectorField, p) -> np.ndarray:
    """Differentiate ``F`` along ``sum_i coeffs[i] * frame[i]`` of the space bundle."""
    return covariant_derivative(spec, space_section_at(spec, coeffs, p), F, p)


def metric_compatibility_residual(spec: SpacetimeSpec, p, probes: int = 50, seed: int = 0) -> float:
    """Largest ``|X(g(Y,Z)) - g(nabla_X Y, Z) - g(Y, nabla_X Z)|`` over random constant fields."""
    p = spacetime.as_point(spec, p)
    g = spacetime.g_at(spec, p)
    dg = spacetime.dg_at(spec, p)
    gamma = christoffel_at(spec, p)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        X, Y, Z = rng.standard_normal((3, 4))
        lhs = np.einsum("k,kij,i,j->", X, dg, Y, Z)
        nab_y = np.einsum("mnr,n,r->m", gamma, X, Y)
        nab_z = np.einsum("mnr,n,r->m", gamma, X, Z)
        worst = max(worst, abs(lhs - nab_y @ g @ Z - Y @ g @ nab_z))
    return float(worst)
