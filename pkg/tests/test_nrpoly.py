import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GAU_WU, J4, complex_matrices, random_strict_upper, strict_upper
from nrflat.nrpoly import (
    EXPONENTS,
    NotNilpotentError,
    TernaryQuartic,
    gradient,
    hessian_uv,
    nr_poly_general,
    nr_poly_nilpotent,
)


def det_oracle(a, u, v, w):
    """Direct determinant of the pencil, independent of the interpolation."""
    h = (a + a.conj().T) / 2
    k = (a - a.conj().T) / 2j
    return np.linalg.det(u * h + v * k + w * np.eye(a.shape[0])).real


def test_exponent_order():
    assert EXPONENTS[0] == (4, 0, 0)
    assert EXPONENTS[-1] == (0, 0, 4)
    assert len(EXPONENTS) == 15
    assert all(sum(e) == 4 for e in EXPONENTS)
    assert EXPONENTS == tuple(sorted(EXPONENTS, reverse=True))


@settings(max_examples=25)
@given(complex_matrices())
def test_general_matches_determinant(a):
    p = nr_poly_general(a)
    rng = np.random.default_rng(0)
    scale = (1 + np.abs(a).sum()) ** 4
    for u, v, w in rng.uniform(-1, 1, size=(200, 3)):
        assert abs(p(u, v, w) - det_oracle(a, u, v, w)) <= 1e-9 * scale
    assert p.coefficient(0, 0, 4) == pytest.approx(1.0)


def test_j4_coefficients():
    # det(uH + vK + wI) for the 4x4 Jordan block: the pencil's characteristic
    # polynomial has eigenvalues cos(j pi / 5) |(u, v)|, which gives
    # w^4 - 3/4 (u^2 + v^2) w^2 + 1/16 (u^2 + v^2)^2.
    p = nr_poly_general(J4)
    want = TernaryQuartic.from_terms({
        (4, 0, 0): 1 / 16, (2, 2, 0): 1 / 8, (0, 4, 0): 1 / 16,
        (2, 0, 2): -3 / 4, (0, 2, 2): -3 / 4, (0, 0, 4): 1.0,
    })
    assert np.allclose(p.coeffs, want.coeffs, atol=1e-14)
    c = nr_poly_nilpotent(J4)
    assert np.allclose(c.as_tuple(), (1 / 16, 0, 0, 1 / 16, -3 / 4, 0), atol=1e-15)


def test_closed_form_on_gau_wu():
    c = nr_poly_nilpotent(GAU_WU)
    assert np.max(np.abs(c.expand().coeffs - nr_poly_general(GAU_WU).coeffs)) <= 1e-12
    assert c.c5 == pytest.approx(-11 / 4)


@given(strict_upper())
def test_closed_form_equals_interpolation(a):
    c = nr_poly_nilpotent(a).expand()
    p = nr_poly_general(a)
    scale = max(1.0, np.abs(p.coeffs).max())
    assert np.max(np.abs(c.coeffs - p.coeffs)) <= 1e-9 * scale


def test_closed_form_after_unitary_similarity(rng):
    for _ in range(20):
        a = random_strict_upper(rng)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        b = q @ a @ q.conj().T
        diff = nr_poly_nilpotent(b).expand().coeffs - nr_poly_general(b).coeffs
        assert np.max(np.abs(diff)) <= 1e-9


def test_closed_form_rejects_non_nilpotent():
    with pytest.raises(NotNilpotentError):
        nr_poly_nilpotent(np.eye(4))
    with pytest.raises(ValueError):
        nr_poly_nilpotent(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        nr_poly_general(np.zeros((3, 3)))


def test_rotation_covariance(rng):
    a = random_strict_upper(rng)
    p = nr_poly_general(a)
    for phi in (0.3, 1.0, -2.2, math.pi):
        direct = nr_poly_general(np.exp(1j * phi) * a)
        assert np.allclose(p.rotated(phi).coeffs, direct.coeffs, atol=1e-12)


def test_evaluation_broadcasts():
    p = nr_poly_general(GAU_WU)
    u = np.linspace(-1, 1, 5)
    vals = p(u, 0.3, 1.0)
    assert vals.shape == (5,)
    assert vals[2] == pytest.approx(p(0.0, 0.3, 1.0))
    assert isinstance(p(0.1, 0.2, 0.3), float)


def test_derivatives_against_finite_differences(rng):
    step = 1e-5
    for _ in range(200):
        p = TernaryQuartic(rng.normal(size=15))
        x = rng.uniform(-2, 2, size=3)
        g = np.array(gradient(p, *x))
        h = p.hessian(*x)
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            fd = (p(*(x + e)) - p(*(x - e))) / (2 * step)
            assert fd == pytest.approx(g[i], rel=1e-6, abs=1e-6)
            fdg = (np.array(p.gradient(*(x + e))) - np.array(p.gradient(*(x - e)))) / (2 * step)
            assert np.allclose(fdg, h[i], rtol=1e-6, atol=1e-6)
        a11, a12, a22 = hessian_uv(p, *x)
        assert (a11, a12, a22) == pytest.approx((h[0, 0], h[0, 1], h[1, 1]))


def test_euler_identity(rng):
    # Homogeneous of degree 4: u p_u + v p_v + w p_w = 4 p.
    p = TernaryQuartic(rng.normal(size=15))
    x = rng.normal(size=(3, 50))
    g = p.gradient(*x)
    assert np.allclose(sum(xi * gi for xi, gi in zip(x, g)), 4 * p(*x))


def test_affine_jet_matches_partials(rng):
    p = TernaryQuartic(rng.normal(size=15))
    u, v = rng.normal(size=(2, 40))
    jet = p.affine_jet(u, v)
    want = np.stack([p(u, v, 1.0), *p.gradient(u, v, 1.0), *p.hessian_uv(u, v, 1.0)], axis=1)
    assert np.allclose(jet, want, atol=1e-12)


def test_gamma_polynomial():
    p = nr_poly_general(GAU_WU)
    u0, v0 = 0.4, -0.7
    coeffs = p.gamma_polynomial(u0, v0)
    for g in (-1.0, 0.5, 2.0):
        assert np.polyval(coeffs, g) == pytest.approx(p(u0, v0, g), abs=1e-12)


def test_json_round_trip():
    p = nr_poly_general(GAU_WU)
    doc = p.to_json()
    assert doc["degree"] == 4
    assert len(doc["coeffs"]) == 15
    assert TernaryQuartic.from_json(doc) == p
    with pytest.raises(ValueError):
        TernaryQuartic.from_json({"degree": 3, "coeffs": []})
    with pytest.raises(ValueError):
        TernaryQuartic.from_json({"degree": 4, "coeffs": [{"i": 5, "j": 0, "k": 0, "c": 1}]})


def test_coefficients_are_read_only():
    p = TernaryQuartic(np.zeros(15))
    with pytest.raises(ValueError):
        p.coeffs[0] = 1
    with pytest.raises(ValueError):
        TernaryQuartic(np.zeros(14))


@settings(max_examples=30)
@given(st.floats(0.1, 5))
def test_scaling(c):
    # p_{cA}(u, v, w) = p_A(c u, c v, w).
    p = nr_poly_general(GAU_WU)
    q = nr_poly_general(c * GAU_WU)
    assert q(0.3, -0.2, 0.7) == pytest.approx(p(0.3 * c, -0.2 * c, 0.7), rel=1e-9, abs=1e-9)
