import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GAU_WU, J4
from nrflat.family import build_M
from nrflat.flatdetect import find_singularities_of
from nrflat.nrpoly import (
    NilpotentCoefficients,
    TernaryQuartic,
    nr_poly_general,
    nr_poly_nilpotent,
)
from nrflat.singularity import (
    check_coefficient_consistency,
    default_radius,
    find_real_singularities,
    singularity_system,
)

# sqrt(0.55) to 21 digits, from mpmath.
U_GAU_WU = 0.741619848709566294871


def test_gau_wu_singularities():
    sings = find_singularities_of(GAU_WU)
    assert len(sings) == 2
    got = sorted((s.u0, s.v0) for s in sings)
    assert got[0] == pytest.approx((-U_GAU_WU, -0.5), abs=1e-12)
    assert got[1] == pytest.approx((U_GAU_WU, -0.5), abs=1e-12)
    for s in sings:
        assert s.grad_residual <= 1e-10
        assert s.distance_to_origin_of_line == pytest.approx(math.sqrt(5) / 2, abs=1e-12)
        assert not s.hessian_degenerate


def test_maximal_member_has_a_third_singularity():
    # At y = ymax the curve acquires a real singular point on the u axis,
    # in addition to the two that carry the flats.
    sings = find_singularities_of(build_M(1.0, 2 * math.pi / 3))
    pts = sorted((round(s.u0, 9), round(s.v0, 9)) for s in sings)
    want = sorted([(math.sqrt(3) / 2, 0.5), (math.sqrt(3) / 2, -0.5), (math.sqrt(3), 0.0)])
    assert np.allclose(pts, want, atol=1e-9)


def test_jordan_block_has_none():
    assert find_singularities_of(J4) == []


def test_results_sorted_and_deduplicated():
    sings = find_singularities_of(build_M(1.0, 2 * math.pi / 3), grid_n=96)
    keys = [(round(s.line_angle, 9), math.hypot(s.u0, s.v0)) for s in sings]
    assert keys == sorted(keys)
    for i, s in enumerate(sings):
        for t in sings[i + 1:]:
            assert math.hypot(s.u0 - t.u0, s.v0 - t.v0) > 1e-6


def test_grid_size_does_not_change_result():
    p = nr_poly_general(GAU_WU)
    a = find_real_singularities(p, 4.0, grid_n=32)
    b = find_real_singularities(p, 4.0, grid_n=80)
    assert [(round(s.u0, 9), round(s.v0, 9)) for s in a] == \
        [(round(s.u0, 9), round(s.v0, 9)) for s in b]


def test_known_polynomial():
    # p = (w^2 - u^2)(w^2 - v^2): lines x = +/-1 and y = +/-1, a square
    # whose corners are the singular points (+/-1, +/-1).
    p = TernaryQuartic.from_terms({
        (0, 0, 4): 1, (2, 0, 2): -1, (0, 2, 2): -1, (2, 2, 0): 1,
    })
    sings = find_real_singularities(p, 3.0)
    pts = sorted((round(s.u0, 9), round(s.v0, 9)) for s in sings)
    assert pts == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_input_validation():
    p = nr_poly_general(GAU_WU)
    with pytest.raises(ValueError):
        find_real_singularities(p, 0.0)
    with pytest.raises(ValueError):
        find_real_singularities(p, 1.0, grid_n=4)
    with pytest.raises(ValueError):
        find_real_singularities(p, 1.0, tol=0)
    with pytest.raises(ValueError):
        check_coefficient_consistency((0,) * 6, 0.0, 0.0)


def test_coefficient_consistency_gau_wu():
    c = nr_poly_nilpotent(GAU_WU)
    assert c.as_tuple() == pytest.approx((25 / 16, 0, 0, 9 / 16, -11 / 4, -1), abs=1e-12)
    for u0 in (U_GAU_WU, -U_GAU_WU):
        assert check_coefficient_consistency(c, u0, -0.5)
    assert not check_coefficient_consistency(c, 0.3, 0.2)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_singularity_system_matches_gradient(u, v):
    # Each row of the system is linear in c; compare with the gradient of the
    # expanded polynomial for a fixed coefficient vector.
    c = np.array([0.7, -0.2, 0.4, 1.1, -1.3, 0.5])
    p = NilpotentCoefficients(*c).expand()
    m, rhs = singularity_system(u, v)
    want = np.array(p.gradient(u, v, 1.0))
    # rhs moves the w^4 contribution (p_w gets 4 from w^4) to the right.
    assert np.allclose(m @ c - rhs, want, atol=1e-9)


def test_default_radius():
    assert default_radius([0.5, 1.0, 2.0]) == pytest.approx(4.0)
    assert default_radius([0.0, 0.0]) == 1.0
    # A support value at the origin is clamped to a fraction of the scale.
    assert default_radius([0.0, 1.0]) == pytest.approx(2000.0)
