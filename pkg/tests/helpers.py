"""Random instance generators and independent oracles shared by the tests."""
import math

import numpy as np

from timespace import dsl
from timespace.errors import ExprError

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


def random_lorentzian(rng, max_cond=1e2):
    """g = P^T diag(-a, b, c, d) P with a well-conditioned random P."""
    while True:
        P = rng.standard_normal((4, 4))
        if np.linalg.cond(P) < max_cond:
            break
    D = np.diag(rng.uniform(0.5, 2.0, 4) * np.array([-1.0, 1.0, 1.0, 1.0]))
    g = P.T @ D @ P
    return 0.5 * (g + g.T)


def random_spd(rng, max_cond=1e2):
    while True:
        A = rng.standard_normal((4, 4))
        h = A @ A.T + 0.1 * np.eye(4)
        if np.linalg.cond(h) < max_cond:
            return 0.5 * (h + h.T)


def random_timelike(rng, g):
    """Rejection sample a vector with g(v, v) clearly negative.

    Sampling happens in the eigenframe of g rescaled to diag(-1, 1, 1, 1),
    where the cone has a fixed opening, so acceptance stays reasonable.
    """
    w, Q = np.linalg.eigh(g)
    scale = 1.0 / np.sqrt(np.abs(w))
    while True:
        z = rng.standard_normal(4)
        q = np.sign(w) @ (z * z)
        if q < -0.05 * (z @ z):
            return Q @ (z * scale)


def decompose(g, v, u):
    """Brute-force split u = lam*v + w with g(v, w) = 0 by solving the 1-d equation."""
    lam = (v @ g @ u) / (v @ g @ v)
    return lam, u - lam * v


def riemann_bruteforce(g, v):
    """h_ij from the quadratic formula applied basis vector by basis vector."""
    basis = np.eye(4)
    parts = [decompose(g, v, basis[i]) for i in range(4)]
    h = np.empty((4, 4))
    for i, (li, wi) in enumerate(parts):
        for j, (lj, wj) in enumerate(parts):
            h[i, j] = -li * lj * (v @ g @ v) + wi @ g @ wj
    return h


def central_difference(e, var, binding, step=1e-6):
    b_plus = dict(binding)
    b_minus = dict(binding)
    b_plus[var] += step
    b_minus[var] -= step
    return (dsl.evaluate(e, b_plus) - dsl.evaluate(e, b_minus)) / (2 * step)


VARS = ("x", "y", "z")
FD_TOL = 1e-5


def random_ast(rng, depth=3):
    """Random expression tree over x, y, z with nonnegative literals."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return dsl.Num(float(round(rng.uniform(0.1, 3.0), 2)))
        return dsl.Var(VARS[rng.integers(3)])
    kind = rng.integers(7)
    if kind == 0:
        return dsl.Neg(random_ast(rng, depth - 1))
    if kind <= 4:
        cls = (dsl.Add, dsl.Sub, dsl.Mul, dsl.Div)[kind - 1]
        return cls(random_ast(rng, depth - 1), random_ast(rng, depth - 1))
    if kind == 5:
        return dsl.Pow(random_ast(rng, depth - 1), int(rng.integers(-2, 4)))
    name = dsl.FUNCTIONS[rng.integers(len(dsl.FUNCTIONS))]
    return dsl.Func(name, random_ast(rng, depth - 1))


def dsl_corpus(n, seed=0):
    """n (expr, var, binding, finite_difference) tuples away from singularities.

    A point is kept only if the function is evaluable, moderate in size, and
    the finite-difference oracle is stable (steps 1e-6 and 1e-4 agree), which
    screens out the neighbourhood of poles and kinks without consulting the
    symbolic derivative.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        e = random_ast(rng, depth=int(rng.integers(1, 5)))
        var = VARS[rng.integers(3)]
        b = {v: float(rng.uniform(0.3, 2.0)) for v in VARS}
        try:
            value = dsl.evaluate(e, b)
            fd = central_difference(e, var, b)
            fd_coarse = central_difference(e, var, b, step=1e-4)
        except ExprError:
            continue
        if abs(value) > 1e4 or abs(fd) > 1e4:
            continue
        if abs(fd - fd_coarse) > 1e-3 * (1 + abs(fd)):
            continue
        out.append((e, var, b, fd))
    return out


def rotation_block(theta):
    """g(theta) = R(theta/2) diag(-1, 1) R(theta/2)^T, padded with diag(1, 1)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    R = np.array([[c, -s], [s, c]])
    g = np.eye(4)
    g[:2, :2] = R @ np.diag([-1.0, 1.0]) @ R.T
    return g
