import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sintegral.curve import (Curve, PlaceSet, RationalPoint, add, count_points_mod_q,
                             has_good_reduction, linear_combination, local_minimal_model,
                             long_to_short, minimal_point_count, multiplier_m, reduce_point,
                             add_mod_q, scalar_mul, torsion_subgroup, validate_curve)
from sintegral.errors import BadReduction, DegenerateCurve, EvenCharacteristic

from conftest import RANK2_LONG, RANK4_BASIS_XY

W = validate_curve(-172, 505)
WB = [RationalPoint.from_xy(x, y) for x, y in RANK4_BASIS_XY]
O = RationalPoint.identity()

coeffs = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


def pt(n):
    return linear_combination(n, WB, W)


def test_identity_encoding():
    assert O.is_identity
    assert (O.xi, O.eta, O.zeta) == (0, 1, 0)


def test_degenerate_curve_rejected():
    with pytest.raises(DegenerateCurve):
        validate_curve(-3, 2)


def test_from_xy_normalises():
    P = RationalPoint.from_xy(Fraction(-128, 9), Fraction(233, 27))
    assert (P.xi, P.eta, P.zeta) == (-128, 233, 3)
    assert W.contains(P)


@settings(max_examples=1000, deadline=None)
@given(coeffs, coeffs)
def test_addition_commutes(n, m):
    P, Q = pt(n), pt(m)
    assert add(P, Q, W) == add(Q, P, W)


@settings(max_examples=1000, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_addition_associates(n, m, k):
    P, Q, R = pt(n), pt(m), pt(k)
    assert add(add(P, Q, W), R, W) == add(P, add(Q, R, W), W)


@settings(max_examples=1000, deadline=None)
@given(coeffs)
def test_inverse_and_identity(n):
    P = pt(n)
    assert add(P, O, W) == P
    assert add(P, -P, W).is_identity
    assert W.contains(P)


@settings(max_examples=300, deadline=None)
@given(coeffs, st.integers(-6, 6), st.integers(-6, 6))
def test_scalar_mul_is_linear(n, a, b):
    P = pt(n)
    assert scalar_mul(a + b, P, W) == add(scalar_mul(a, P, W), scalar_mul(b, P, W), W)


curves = st.tuples(st.integers(-500, 500), st.integers(-500, 500)).filter(
    lambda ab: 4 * ab[0] ** 3 + 27 * ab[1] ** 2 != 0)
odd_primes = st.sampled_from(list(sympy.primerange(3, 400)))


@settings(max_examples=1000, deadline=None)
@given(curves, odd_primes)
def test_hasse_bound(ab, q):
    C = Curve(*ab)
    if C.discriminant % q == 0:
        return
    N = count_points_mod_q(C, q)
    assert abs(q + 1 - N) <= 2 * math.isqrt(q) + 1
    assert (q + 1 - N) ** 2 <= 4 * q


def test_point_count_against_brute_force():
    for q in (3, 5, 7, 11, 13):
        if W.discriminant % q == 0:
            continue
        brute = 1 + sum(1 for x in range(q) for y in range(q)
                        if (y * y - x ** 3 + 172 * x - 505) % q == 0)
        assert count_points_mod_q(W, q) == brute


def test_reduction_is_a_homomorphism():
    q = 11
    for n in ([1, 0, 0, 0], [1, -1, 2, 0], [0, 2, 1, -1]):
        for m in ([0, 1, 0, 0], [2, 0, 0, 1]):
            P, Q = pt(n), pt(m)
            lhs = reduce_point(add(P, Q, W), q)
            rhs = add_mod_q(reduce_point(P, q), reduce_point(Q, q), W, q)
            assert lhs == rhs


def test_rank4_multipliers():
    assert {q: multiplier_m(W, q, 1) for q in (3, 5, 7)} == {3: 7, 5: 10, 7: 12}


@pytest.mark.parametrize("q", [3, 5, 7])
def test_multiplier_lands_in_kernel(q):
    m = multiplier_m(W, q, 1)
    for P in WB:
        Q = scalar_mul(m, P, W)
        assert Q.zeta % q == 0


def test_bad_reduction_and_even_characteristic():
    assert not has_good_reduction(W, 13)
    with pytest.raises(BadReduction):
        multiplier_m(W, 13, 1)
    with pytest.raises(EvenCharacteristic):
        minimal_point_count(W, 2)


def test_non_minimal_short_model_has_good_reduction_at_3():
    C, _ = long_to_short(*RANK2_LONG)
    assert (C.a, C.b) == (-3024, 46224)
    assert C.discriminant % 3 == 0
    assert has_good_reduction(C, 3) and has_good_reduction(C, 5)
    model, change = local_minimal_model(C.ainvs, 3)
    assert change.u % 3 == 0


@pytest.mark.parametrize("ab,g", [((-1, 0), 4), ((0, 1), 6), ((-43, 166), 7), ((-172, 505), 1),
                                  ((0, -432), 3), ((-3024, 46224), 1)])
def test_torsion_orders(ab, g):
    T = torsion_subgroup(validate_curve(*ab))
    assert T.g == g
    assert len(T.torsion_points) == g
    C = validate_curve(*ab)
    for P in T.torsion_points:
        assert scalar_mul(g, P, C).is_identity


def test_long_to_short_round_trip():
    C, cmap = long_to_short(*RANK2_LONG)
    for x, y in [(0, 0), (1, 0), (-1, 1), (188, 2584), (Fraction(-1364, 729), Fraction(9269, 19683))]:
        assert cmap.on_long_curve(Fraction(x), Fraction(y))
        P = cmap.forward(RationalPoint.from_xy(x, y))
        assert C.contains(P)
        assert cmap.backward(P) == (Fraction(x), Fraction(y))


def test_placeset():
    S = PlaceSet((3, 5, 7))
    assert S.s == 4 and S.Q == 7
    assert 5 in S and 11 not in S
    with pytest.raises(ValueError):
        PlaceSet((5, 3))
