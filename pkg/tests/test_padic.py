from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from sintegral.curve import RationalPoint, add, linear_combination, scalar_mul, validate_curve
from sintegral.errors import DivisionByIndistinguishableZero, EvenCharacteristic, NotInKernel
from sintegral.padic import (PadicNumber, PadicPoint, build_formal_series, formal_w,
                             padic_elliptic_log, padic_point_add, padic_scalar_mul,
                             points_log_norm_check, truncation_ok)

from conftest import RANK4_BASIS_XY

W = validate_curve(-172, 505)
WB = [RationalPoint.from_xy(x, y) for x, y in RANK4_BASIS_XY]
M_Q = {3: 7, 5: 10, 7: 12}

primes = st.sampled_from([3, 5, 7, 11, 101])


@st.composite
def rationals(draw, q):
    num = draw(st.integers(-10 ** 30, 10 ** 30))
    den = draw(st.integers(1, 10 ** 12))
    shift = draw(st.integers(-4, 6))
    return Fraction(num, den) * Fraction(q) ** shift


@st.composite
def padic_pairs(draw):
    q = draw(primes)
    x, y = draw(rationals(q)), draw(rationals(q))
    kx, ky = draw(st.integers(1, 40)), draw(st.integers(1, 40))
    return q, x, y, kx, ky


def _agrees(res: PadicNumber, exact: Fraction) -> bool:
    ref = PadicNumber.from_rational(exact, res.q, abs_prec=res.abs_prec)
    return res.equals(ref)


@settings(max_examples=1000, deadline=None)
@given(padic_pairs())
def test_ring_laws_against_exact_rationals(data):
    q, x, y, kx, ky = data
    X = PadicNumber.from_rational(x, q, rel_prec=kx)
    Y = PadicNumber.from_rational(y, q, rel_prec=ky)
    assert _agrees(X + Y, x + y)
    assert _agrees(X - Y, x - y)
    assert _agrees(X * Y, x * y)
    if y != 0:
        assert _agrees(X / Y, x / y)
    assert (X + Y).equals(Y + X) and (X * Y).equals(Y * X)


@settings(max_examples=1000, deadline=None)
@given(padic_pairs(), st.integers(-5, 5))
def test_distributivity_and_powers(data, e):
    q, x, y, kx, ky = data
    assume(x != 0)
    X = PadicNumber.from_rational(x, q, rel_prec=kx)
    Y = PadicNumber.from_rational(y, q, rel_prec=ky)
    lhs, rhs = X * (X + Y), X * X + X * Y
    p = min(lhs.abs_prec, rhs.abs_prec)
    assert lhs.equals(rhs, p)
    assert _agrees(X ** e, x ** e)


def test_valuation_and_digits():
    X = PadicNumber.from_rational(Fraction(45, 7), 3, rel_prec=10)
    assert X.val == 2 and X.rel_prec == 10 and X.abs_prec == 12
    assert X.digits(4)[:2] == [0, 0]
    assert X.residue(12) * 7 % 3 ** 12 == 45


def test_division_by_indistinguishable_zero():
    Z = PadicNumber.from_rational(3 ** 12, 3, abs_prec=10)
    assert Z.is_zero
    with pytest.raises(DivisionByIndistinguishableZero):
        PadicNumber.from_rational(1, 3, rel_prec=5) / Z


# ---------------------------------------------------------------------------
# formal group


def _conv(a, b, D):
    out = [0] * (D + 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(0, D + 1 - i):
            if b[j]:
                out[i + j] += x * b[j]
    return out


@pytest.mark.parametrize("ainvs", [(0, 0, 0, -172, 505), (0, 1, 1, -2, 0), (1, -1, 1, -3, 7)])
def test_formal_w_identity_to_degree_210(ainvs):
    D = 210
    a1, a2, a3, a4, a6 = ainvs
    w = formal_w(ainvs, D)
    w2 = _conv(w, w, D)
    w3 = _conv(w2, w, D)
    rhs = [0] * (D + 1)
    rhs[3] += 1
    for n in range(D + 1):
        if n >= 1:
            rhs[n] += a1 * w[n - 1] + a4 * w2[n - 1]
        if n >= 2:
            rhs[n] += a2 * w[n - 2]
        rhs[n] += a3 * w2[n] + a6 * w3[n]
    assert w == rhs


def test_formal_series_integrality_of_d():
    fs = build_formal_series((0, 0, 0, -172, 505), 60)
    n = len(fs.omega_coeffs)
    assert n >= 50
    assert all(Fraction(fs.d(i)).denominator == 1 for i in range(1, n + 1))
    assert all(fs.psi_terms[i] == Fraction(fs.d(i), i) for i in range(1, min(n, fs.t) + 1))


# ---------------------------------------------------------------------------
# logarithm


@pytest.mark.parametrize("q", [3, 5, 7])
def test_log_valuation_matches_parameter(q):
    for P in WB:
        Q = scalar_mul(M_Q[q], P, W)
        L = padic_elliptic_log(Q, q, 60, W)
        assert points_log_norm_check(Q, L, q)


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.lists(st.integers(-3, 3), min_size=4, max_size=4),
       st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_log_is_additive(q, n, k):
    mP = [scalar_mul(M_Q[q], P, W) for P in WB]
    A, B = linear_combination(n, mP, W), linear_combination(k, mP, W)
    S = add(A, B, W)
    prec = 25
    logs = {}
    for name, P in (("A", A), ("B", B), ("S", S)):
        logs[name] = padic_elliptic_log(P, q, prec, W, t=40)
    assert (logs["A"] + logs["B"]).equals(logs["S"], prec)


def test_log_of_linear_combination_is_linear():
    q = 5
    mP = [scalar_mul(10, P, W) for P in WB]
    logs = [padic_elliptic_log(P, q, 80, W) for P in mP]
    n = (2, -1, 0, 3)
    lhs = padic_elliptic_log(linear_combination(n, mP, W), q, 80, W)
    rhs = sum((c * L for c, L in zip(n[1:], logs[1:])), n[0] * logs[0])
    assert lhs.equals(rhs, 80)


def test_point_not_in_kernel():
    with pytest.raises(NotInKernel):
        padic_elliptic_log(WB[0], 3, 20, W)


def test_even_characteristic_rejected():
    with pytest.raises(EvenCharacteristic):
        padic_elliptic_log(scalar_mul(10, WB[0], W), 2, 20, W)


def test_identity_log_is_zero():
    assert padic_elliptic_log(RationalPoint.identity(), 3, 20, W).is_zero


def test_padic_group_law_agrees_with_rational():
    q = 7
    P, Q = scalar_mul(12, WB[0], W), scalar_mul(12, WB[1], W)
    Pp, Qp = PadicPoint.from_rational(P, q, 50), PadicPoint.from_rational(Q, q, 50)
    S = padic_point_add(Pp, Qp, W)
    exact = PadicPoint.from_rational(add(P, Q, W), q, 50)
    assert S.x.equals(exact.x, min(S.x.abs_prec, exact.x.abs_prec))
    T = padic_scalar_mul(3, Pp, W)
    exact3 = PadicPoint.from_rational(scalar_mul(3, P, W), q, 50)
    assert T.x.equals(exact3.x, min(T.x.abs_prec, exact3.x.abs_prec))


def test_truncation_inequality():
    # z of valuation v: terms k > t have valuation k v - v_q(k)
    assert truncation_ok(3, 3, 200, 500)
    assert not truncation_ok(1, 3, 20, 500)


REF_DIGITS = {
    3: [(1, 2, 1, 0, 2, 2), (2, 0, 1, 2, 1, 2), (1, 1, 0, 2, 2, 2), (0, 2, 2, 0, 1, 1)],
    5: [(3, 0, 4, 3, 3, 4), (4, 4, 0, 0, 3, 1), (2, 2, 3, 3, 3, 0), (4, 3, 4, 0, 1, 1)],
    7: [(0, 6, 0, 2, 3, 4), (5, 2, 5, 0, 2, 4), (2, 1, 1, 5, 6, 2), (1, 4, 4, 1, 2, 1)],
}
DIGITS = {3: 1281, 5: 875, 7: 723}
V_PRINTED = {3: 8, 5: 6, 7: 5}


def log_digits(q, i, extra=0):
    """Digits of the log of m_q(-P_i); a_k is the coefficient of q^(k-1)."""
    n = DIGITS[q]
    L = -padic_elliptic_log(scalar_mul(M_Q[q], WB[i], W), q, n + extra, W)
    return L.digits(n + extra)


@pytest.mark.parametrize("q", [3, 5, 7])
@pytest.mark.parametrize("i", range(4))
def test_table4_leading_digits(q, i):
    d = log_digits(q, i)
    assert d[0] == 0
    assert tuple(d[1:4]) == REF_DIGITS[q][i][:3]


@pytest.mark.parametrize("q", [3, 5, 7])
@pytest.mark.parametrize("i", range(4))
def test_table4_trailing_digits_and_stability(q, i):
    n, V = DIGITS[q], V_PRINTED[q]
    d = log_digits(q, i)
    d50 = log_digits(q, i, extra=50)
    assert d == d50[:n]
    # the printed tail sits V places below the top of the printed range
    assert tuple(d[n - V - 2:n - V + 1]) == REF_DIGITS[q][i][3:]
