"""Naive and canonical heights, the constant c2, and the regulator.

Normalisation: ``naive_height`` is h(P) = 1/2 log max(|xi|, zeta^2) and
``canonical_height`` is its limit h(2^n P)/4^n, so that
h(P) >= hhat(P) - c2 holds with the closed-form c2.  Regulator matrices are
reported in the other customary normalisation (pairing of 2*hhat), which
is the one regulators and eigenvalues are usually quoted in; bound
formulas must use ``RegulatorData.lam_half``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpf

from .curve import (Curve, RationalPoint, add, discriminant, frac_valuation,
                    local_minimal_model, tate_quantities)
from .errors import IdentityPoint, NotIndependent, PrecisionUnreachable

DEFAULT_DIGITS = 40
MAX_TATE_TERMS = 5000


def naive_height(P: RationalPoint) -> mpf:
    if P.is_identity:
        raise IdentityPoint("naive height of the identity")
    return mpmath.log(max(abs(P.xi), P.zeta ** 2)) / 2


def _smallest_real_root(curve: Curve) -> mpf:
    with mpmath.workdps(30):
        roots = mpmath.polyroots([1, 0, curve.a, curve.b], maxsteps=200, extraprec=200)
        return min(mpmath.re(z) for z in roots if abs(mpmath.im(z)) < mpf(10) ** -10)


def archimedean_local_height(P: RationalPoint, curve: Curve, digits: int = DEFAULT_DIGITS) -> mpf:
    """Tate's series, after shifting x so every real point has x >= 1.

    Normalised without the discriminant term, so that
    4 lam(P) - lam(2P) = log|2y| exactly.
    """
    shift = math.floor(_smallest_real_root(curve)) - 1
    a2 = 3 * shift
    a4 = 3 * shift * shift + curve.a
    a6 = shift ** 3 + curve.a * shift + curve.b
    b2, b4, b6, b8, _, _ = tate_quantities((0, a2, 0, a4, a6))
    with mpmath.workdps(digits + 20):
        x = mpf(P.xi) / P.zeta ** 2 - shift
        t = 1 / x
        total = mpf(0)
        eps = mpf(10) ** -(digits + 5)
        weight = mpf(1)
        for _ in range(MAX_TATE_TERMS):
            t2 = t * t
            z = 1 - b4 * t2 - 2 * b6 * t2 * t - b8 * t2 * t2
            w = 4 * t + b2 * t2 + 2 * b4 * t2 * t + b6 * t2 * t2
            term = weight * mpmath.log(z)
            total += term
            if weight * (abs(mpmath.log(z)) + 1) < eps:
                break
            t = w / z
            weight /= 4
        else:
            raise PrecisionUnreachable("Tate series did not converge")
        return +(mpmath.log(x) / 2 + total / 8)


def _bad_prime_local_height(x: Fraction, y: Fraction, ainvs, p: int) -> Fraction:
    """Local height at p in units of log p, on the given p-minimal model.

    Standard case analysis by reduction type (good, multiplicative,
    additive), without the discriminant term.
    """
    a1, a2, a3, a4, a6 = ainvs
    b2, b4, b6, b8, c4, _ = tate_quantities(ainvs)
    n = frac_valuation(discriminant(ainvs), p)
    A = frac_valuation(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = frac_valuation(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        return Fraction(max(0, -frac_valuation(x, p)), 2)
    if frac_valuation(c4, p) == 0:
        M = min(Fraction(B), Fraction(n, 2))
        return -M * (n - M) / (2 * n)
    C = frac_valuation(3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x * x + 3 * b6 * x + b8, p)
    if C >= 3 * B:
        return Fraction(-B, 3)
    return Fraction(-C, 8)


def non_archimedean_height(P: RationalPoint, curve: Curve) -> list[tuple[int, Fraction]]:
    """Sum over finite places as pairs (n, c) contributing c * log n.

    At primes of bad reduction of the given model the point is moved to a
    p-minimal model.  The archimedean series on a model scaled by u = p^e
    exceeds the one on the minimal model by e log p, which is removed here.
    At good primes the local height is v_p(zeta) log p, so their total is
    log of the part of zeta prime to the bad primes; no factoring needed.
    """
    terms: dict[int, Fraction] = {}
    rest = P.zeta
    for p in curve.bad_primes:
        while rest % p == 0:
            rest //= p
        model, change = local_minimal_model(curve.ainvs, p)
        x, y = change.apply_to_xy(P.x, P.y)
        e = frac_valuation(Fraction(change.u), p)
        value = _bad_prime_local_height(x, y, model, p) - e
        if value:
            terms[p] = value
    out = sorted(terms.items())
    if rest > 1:
        out.append((rest, Fraction(1)))
    return out


def canonical_height(P: RationalPoint, curve: Curve, digits: int = DEFAULT_DIGITS) -> mpf:
    if P.is_identity:
        return mpf(0)
    with mpmath.workdps(digits + 10):
        total = archimedean_local_height(P, curve, digits)
        for p, coeff in non_archimedean_height(P, curve):
            total += mpf(coeff.numerator) / coeff.denominator * mpmath.log(p)
        if abs(total) < mpf(10) ** -(digits - 5):
            total = mpf(0)
        return +total


def height_difference_c2(curve: Curve) -> mpf:
    """c2 = 1/2 (log 2 + mu_inf), so that h(P) >= hhat(P) - c2."""
    return (mpmath.log(2) + mu_infinity(curve)) / 2


def mu_infinity(curve: Curve) -> mpf:
    a, b = abs(curve.a), abs(curve.b)
    return mpmath.log(max(mpmath.sqrt(2 * a), mpmath.cbrt(4 * b)))


def c2_closed_form(curve: Curve) -> mpf:
    a, b = abs(curve.a), abs(curve.b)
    return mpmath.log(max(mpmath.root(8 * a, 4), mpmath.root(32 * b, 6)))


# ---------------------------------------------------------------------------
# Regulator


@dataclass(frozen=True)
class RegulatorData:
    """Height-pairing matrix of a basis, in the <P,P> = 2 hhat(P) normalisation.

    ``lam`` is a certified lower bound of the least eigenvalue (rounded
    down); ``lam_half`` is the same quantity for the hhat normalisation.
    """

    matrix: mpmath.matrix
    lam: mpf
    regulator: mpf
    digits: int

    @property
    def lam_half(self) -> mpf:
        return self.lam / 2

    @property
    def rank(self) -> int:
        return self.matrix.rows


def height_pairing_matrix(basis: Sequence[RationalPoint], curve: Curve,
                          digits: int = DEFAULT_DIGITS) -> mpmath.matrix:
    r = len(basis)
    with mpmath.workdps(digits + 10):
        heights = [canonical_height(P, curve, digits) for P in basis]
        M = mpmath.matrix(r, r)
        for i in range(r):
            M[i, i] = 2 * heights[i]
            for j in range(i + 1, r):
                s = canonical_height(add(basis[i], basis[j], curve), curve, digits)
                M[i, j] = M[j, i] = s - heights[i] - heights[j]
    return M


def count_eigenvalues_below(M: mpmath.matrix, x) -> int:
    """Number of eigenvalues of the symmetric M below x (Sylvester inertia of M - xI)."""
    n = M.rows
    A = [[M[i, j] - (x if i == j else 0) for j in range(n)] for i in range(n)]
    negative = 0
    for k in range(n):
        pivot = A[k][k]
        if pivot == 0:
            pivot = mpf(10) ** (-mpmath.mp.dps)
        if pivot < 0:
            negative += 1
        for i in range(k + 1, n):
            f = A[i][k] / pivot
            for j in range(k + 1, n):
                A[i][j] -= f * A[k][j]
    return negative


def least_eigenvalue(M: mpmath.matrix, digits: int) -> mpf:
    """Least eigenvalue by bisection on the inertia count, rounded down."""
    n = M.rows
    with mpmath.workdps(digits + 10):
        lo = mpf(0)
        hi = min(M[i, i] for i in range(n))
        if count_eigenvalues_below(M, lo) > 0:
            raise NotIndependent("height pairing matrix is not positive definite")
        tol = mpf(10) ** -(digits + 2)
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if count_eigenvalues_below(M, mid) > 0:
                hi = mid
            else:
                lo = mid
        return lo - mpf(10) ** -digits


def regulator_and_lambda(basis: Sequence[RationalPoint], curve: Curve,
                         digits: int = DEFAULT_DIGITS) -> RegulatorData:
    if not basis:
        return RegulatorData(mpmath.matrix(0, 0), mpf(math.inf), mpf(1), digits)
    if len(set(basis)) != len(basis):
        raise NotIndependent("basis points are not distinct")
    M = height_pairing_matrix(basis, curve, digits)
    with mpmath.workdps(digits + 10):
        det = mpmath.det(M)
    if det <= mpf(10) ** -(digits // 2):
        raise NotIndependent(f"regulator {mpmath.nstr(det, 8)} is not positive")
    lam = least_eigenvalue(M, digits)
    return RegulatorData(M, lam, det, digits)
