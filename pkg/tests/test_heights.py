import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from sintegral.curve import RationalPoint, add, linear_combination, scalar_mul, validate_curve
from sintegral.errors import NotIndependent
from sintegral.heights import (archimedean_local_height, c2_closed_form, canonical_height,
                               count_eigenvalues_below, height_difference_c2, least_eigenvalue,
                               naive_height, non_archimedean_height, regulator_and_lambda)

from conftest import RANK4_BASIS_XY

W = validate_curve(-172, 505)
WB = [RationalPoint.from_xy(x, y) for x, y in RANK4_BASIS_XY]
SM = validate_curve(-3024, 46224)
SB = [RationalPoint.from_xy(12, 108), RationalPoint.from_xy(48, 108)]

coeffs = st.lists(st.integers(-2, 2), min_size=4, max_size=4).filter(any)


def h(P, C=W):
    return canonical_height(P, C, 30)


@settings(max_examples=1000, deadline=None)
@given(coeffs, coeffs)
def test_parallelogram_law(n, m):
    P, Q = linear_combination(n, WB, W), linear_combination(m, WB, W)
    S, D = add(P, Q, W), add(P, -Q, W)
    lhs = (h(S) if not S.is_identity else 0) + (h(D) if not D.is_identity else 0)
    assert abs(lhs - 2 * h(P) - 2 * h(Q)) < 1e-6


@settings(max_examples=200, deadline=None)
@given(coeffs, st.integers(2, 5))
def test_quadratic_scaling(n, k):
    P = linear_combination(n, WB, W)
    assert abs(h(scalar_mul(k, P, W)) - k * k * h(P)) < 1e-8


@pytest.mark.parametrize("P", [RationalPoint.from_xy(12, 108), RationalPoint.from_xy(48, 108),
                               RationalPoint.from_xy(-60, 108)])
def test_doubling_on_non_minimal_model(P):
    assert abs(h(scalar_mul(2, P, SM), SM) - 4 * h(P, SM)) < 1e-15


def test_heights_independent_of_model_scaling():
    # y^2 = x^3 + a u^4 x + b u^6 is isomorphic to W; hhat must agree
    u = 3
    C2 = validate_curve(-172 * u ** 4, 505 * u ** 6)
    for P in WB:
        Q = RationalPoint.from_xy(P.x * u * u, P.y * u ** 3)
        assert abs(h(P) - h(Q, C2)) < 1e-20


def test_local_decomposition_sums():
    P = linear_combination([1, -1, 2, 0], WB, W)
    with mpmath.workdps(40):
        total = archimedean_local_height(P, W, 30) + sum(
            mpmath.mpf(v.numerator) / v.denominator * mpmath.log(p) for p, v in non_archimedean_height(P, W))
        assert abs(total - h(P)) < 1e-20


def test_rank4_regulator_and_lambda():
    reg = regulator_and_lambda(WB, W)
    assert abs(reg.lam - mpmath.mpf("0.7467531")) < 1e-6
    assert abs(reg.regulator - mpmath.mpf("2.79532")) < 1e-4
    with mpmath.workdps(40):
        assert abs(reg.lam_half * 2 - reg.lam) < 1e-30


def test_rank2_regulator():
    reg = regulator_and_lambda(SB, SM)
    assert abs(reg.regulator - mpmath.mpf("0.152460177943144")) < 1e-12


def test_lambda_is_a_lower_bound():
    reg = regulator_and_lambda(WB, W)
    with mpmath.workdps(40):
        ev = min(mpmath.eigsy(reg.matrix)[0])
    assert reg.lam <= ev < reg.lam + mpmath.mpf(10) ** -30
    assert count_eigenvalues_below(reg.matrix, reg.lam) == 0


def test_dependent_basis_rejected():
    with pytest.raises(NotIndependent):
        regulator_and_lambda([WB[0], scalar_mul(2, WB[0], W)], W)
    with pytest.raises(NotIndependent):
        regulator_and_lambda([WB[0], WB[0]], W)


def test_c2_value():
    assert abs(c2_closed_form(W) - mpmath.mpf("1.81")) < 0.01
    assert abs(height_difference_c2(W) - c2_closed_form(W)) < 1e-20


def test_height_difference_bound_holds():
    c2 = c2_closed_form(W)
    worst = mpmath.inf
    for n1 in range(-2, 3):
        for n2 in range(-2, 3):
            for n3 in range(-2, 3):
                for n4 in range(-2, 3):
                    if n1 == n2 == n3 == n4 == 0:
                        continue
                    P = linear_combination([n1, n2, n3, n4], WB, W)
                    worst = min(worst, naive_height(P) - h(P))
    assert worst >= -c2


def test_least_eigenvalue_of_diagonal():
    M = mpmath.diag([3, 1, 2])
    lam = least_eigenvalue(M, 30)
    with mpmath.workdps(40):
        assert 1 - mpmath.mpf(10) ** -29 < lam <= 1
