import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from timespace import bilinear
from timespace.bilinear import CausalClass, Signature
from timespace.errors import NotTimelike, NullVector, ZeroVector

from helpers import ETA, random_lorentzian, random_timelike

BLOCK = np.array([[0.0, -1.0, 0, 0], [-1.0, 0.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]])


def char_poly_roots_2x2(a, b, d):
    """Roots of det([[a, b], [b, d]] - t I) = t^2 - (a + d) t + (ad - b^2)."""
    tr, det = a + d, a * d - b * b
    disc = np.sqrt(tr * tr - 4 * det)
    return sorted([(tr - disc) / 2, (tr + disc) / 2])


def test_evaluate_form():
    assert bilinear.evaluate_form(ETA, [1, 0, 0, 0], [1, 0, 0, 0]) == -1
    assert bilinear.evaluate_form(ETA, [1, 0, 0, 0], [0, 1, 0, 0]) == 0
    assert bilinear.evaluate_form(ETA, [2, 1, 0, 0], [2, 1, 0, 0]) == -3


@pytest.mark.parametrize("form, expected", [
    (ETA, Signature(1, 0, 3)),
    (np.eye(4), Signature(0, 0, 4)),
    (BLOCK, Signature(1, 0, 3)),
    (np.diag([-1.0, 0.0, 1.0, 1.0]), Signature(1, 1, 2)),
])
def test_signature(form, expected):
    assert bilinear.signature(form, tol=1e-12) == expected


def test_signature_requires_positive_tol():
    with pytest.raises(ValueError):
        bilinear.signature(ETA, tol=0.0)


@pytest.mark.parametrize("v, expected", [
    ([1, 0, 0, 0], CausalClass.TIMELIKE),
    ([1, 1, 0, 0], CausalClass.NULL),
    ([0, 1, 0, 0], CausalClass.SPACELIKE),
])
def test_classify(v, expected):
    assert bilinear.classify(ETA, v) is expected


def test_classify_zero_vector():
    with pytest.raises(ZeroVector):
        bilinear.classify(ETA, [0, 0, 0, 0])


def test_cone_predicates_as_written():
    assert bilinear.in_null_cone(ETA, [1, 1, 0, 0])
    assert bilinear.in_light_cone(ETA, [0, 1, 0, 0])
    assert bilinear.in_light_cone(ETA, [1, 1, 0, 0])
    assert not bilinear.in_light_cone(ETA, [1, 0, 0, 0])


def test_orthogonal_complement_rest_frame():
    basis = bilinear.orthogonal_complement(ETA, [1, 0, 0, 0])
    np.testing.assert_allclose(basis, np.eye(4)[1:])


def _same_span(a, b):
    return np.linalg.matrix_rank(np.vstack([a, b]), tol=1e-9) == np.linalg.matrix_rank(a, tol=1e-9)


def test_orthogonal_complement_moving_vector():
    v = np.array([2.0, 1, 0, 0])
    basis = bilinear.orthogonal_complement(ETA, v)
    # -2 w0 + w1 = 0 solved by hand
    expected = np.array([[1.0, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert _same_span(basis, expected)
    np.testing.assert_allclose(basis @ ETA @ v, 0, atol=1e-12)


def test_orthogonal_complement_null():
    with pytest.raises(NullVector):
        bilinear.orthogonal_complement(ETA, [1, 1, 0, 0])


def test_restrict_rest_frame():
    r = bilinear.restrict_to_complement(ETA, [1, 0, 0, 0])
    np.testing.assert_allclose(r.gram, np.eye(3))
    assert r.positive_definite


def test_restrict_moving_vector():
    r = bilinear.restrict_to_complement(ETA, [2.0, 1, 0, 0])
    assert r.positive_definite
    # first basis vector is c * (1, 2, 0, 0); g((1,2,0,0), (1,2,0,0)) = 3
    c = r.basis[0][0]
    np.testing.assert_allclose(r.basis[0], c * np.array([1.0, 2, 0, 0]))
    np.testing.assert_allclose(r.gram[0, 0] / c**2, 3.0)
    np.testing.assert_allclose(r.gram[1:, 1:], np.eye(2))
    np.testing.assert_allclose(r.gram[0, 1:], 0, atol=1e-15)


def test_restrict_requires_timelike():
    with pytest.raises(NotTimelike):
        bilinear.restrict_to_complement(ETA, [0, 1, 0, 0])


def test_jacobi_examples():
    w, _ = bilinear.jacobi_eigen(ETA)
    np.testing.assert_allclose(w, [-1, 1, 1, 1])
    w, _ = bilinear.jacobi_eigen(BLOCK)
    oracle = char_poly_roots_2x2(0.0, -1.0, 0.0) + [1.0, 1.0]
    np.testing.assert_allclose(w, sorted(oracle), atol=1e-14)


def test_jacobi_reconstruction(rng):
    for _ in range(200):
        A = rng.standard_normal((4, 4))
        f = A + A.T
        w, Q = bilinear.jacobi_eigen(f)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(Q @ np.diag(w) @ Q.T - f)) < 1e-10
        assert np.max(np.abs(Q.T @ Q - np.eye(4))) < 1e-12
        assert abs(w.sum() - np.trace(f)) < 1e-10


def test_jacobi_batch_matches_single(rng):
    stack = np.array([random_lorentzian(rng) for _ in range(20)])
    wb, Qb = bilinear.jacobi_eigen(stack)
    for f, w, Q in zip(stack, wb, Qb):
        ws, _ = bilinear.jacobi_eigen(f)
        np.testing.assert_allclose(w, ws, atol=1e-12)
        np.testing.assert_allclose(f @ Q, Q * w, atol=1e-10 * np.abs(f).max())


def test_jacobi_against_numpy(rng):
    for _ in range(50):
        A = rng.standard_normal((4, 4))
        f = A + A.T
        np.testing.assert_allclose(bilinear.jacobi_eigen(f)[0], np.linalg.eigvalsh(f), atol=1e-12)


symmetric = arrays(np.float64, (4, 4), elements=st.floats(-10, 10)).map(lambda a: a + a.T)


@settings(max_examples=200, deadline=None)
@given(symmetric, st.integers(0, 2**32 - 1))
def test_sylvester_invariance(f, seed):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((4, 4)) + 3 * np.eye(4)
    w = np.linalg.eigvalsh(f)
    tol = 1e-9 * max(1.0, np.abs(f).max())
    # congruence moves a nonzero eigenvalue by at most cond(P)^2; skip forms
    # where that could carry it across the threshold
    band = 10 * tol * np.linalg.cond(P) ** 2
    if np.any((np.abs(w) > 0) & (np.abs(w) < band)):
        return
    g = P.T @ f @ P
    g = 0.5 * (g + g.T)
    tol_g = tol * np.linalg.norm(P, 2) ** 2
    assert bilinear.signature(g, tol=tol_g) == bilinear.signature(f, tol=tol)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 4, elements=st.floats(-5, 5)),
       st.floats(-100, 100).filter(lambda c: abs(c) > 1e-3))
def test_classify_scale_covariant(v, c):
    if np.linalg.norm(v) < 1e-3:
        return
    assert bilinear.classify(ETA, c * v) is bilinear.classify(ETA, v)


def test_complement_positive_definite_property(rng):
    for _ in range(1000):
        g = random_lorentzian(rng)
        v = random_timelike(rng, g)
        r = bilinear.restrict_to_complement(g, v)
        assert r.positive_definite
        assert np.linalg.eigvalsh(r.gram)[0] > 0


def test_complement_orthogonality_and_rank(rng):
    for _ in range(300):
        g = random_lorentzian(rng)
        v = rng.standard_normal(4)
        if bilinear.classify(g, v) is CausalClass.NULL:
            continue
        basis = bilinear.orthogonal_complement(g, v)
        assert np.linalg.matrix_rank(basis) == 3
        for w in basis:
            assert abs(w @ g @ v) < 1e-9 * np.linalg.norm(v) * np.linalg.norm(w) * np.abs(g).max()
