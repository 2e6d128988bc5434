"""Explicit constants and the initial bound for N = max |n_i|.

All values are evaluated with guard digits and then nudged outward by a
relative 10^-digits, so stored upper bounds are upper bounds and stored
lower bounds (lambda) are lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy
from mpmath import mpf

from .curve import Curve, PlaceSet
from .heights import c2_closed_form, mu_infinity

GUARD = 10
DIGITS = 40


def _up(x, digits: int = DIGITS):
    return x * (1 + mpf(10) ** -digits) if x >= 0 else x * (1 - mpf(10) ** -digits)


def _down(x, digits: int = DIGITS):
    return x * (1 - mpf(10) ** -digits) if x >= 0 else x * (1 + mpf(10) ** -digits)


def log_star(Q) -> mpf:
    return max(mpmath.log(Q), mpf(1)) if Q > 1 else mpf(1)


def linear_form_constants(curve: Curve, places: PlaceSet, delta0: int | None = None,
                            digits: int = DIGITS):
    """(c3, c4, c1, c1_prime).

    ``delta0`` overrides 4a^3 + 27b^2, for evaluating the formulas at a
    value quoted elsewhere.
    """
    d0 = abs(curve.delta0 if delta0 is None else delta0)
    s = places.s
    Q = places.Q or 1
    with mpmath.workdps(digits + GUARD):
        sq = mpmath.sqrt(d0)
        c3 = mpf(32) / 3 * sq * (8 + mpmath.log(d0) / 2) ** 4
        c4 = 10 ** 4 * max(16 * mpf(curve.a) ** 2, 256 * sq ** 3)
        c1 = (7 * mpf(10) ** (38 * s + 49) * mpf(s) ** (20 * s + 15) * mpf(Q) ** 24
              * log_star(Q) ** (4 * s - 2) * c3 * mpmath.log(c3) ** 2
              * (c3 + 20 * (s - 1) * c3 + mpmath.log(mpmath.e * c4)))
        c1p = 5 * mpf(10) ** 64 * c3 * mpmath.log(c3) * (c3 + mpmath.log(c4))
        return tuple(_up(v, digits) for v in (c3, c4, c1, c1p))


def bound_N0(c1, c2, lam, digits: int = DIGITS) -> mpf:
    """sqrt((c1/2 + c2)/lam), rounded up."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    with mpmath.workdps(digits + GUARD):
        return _up(mpmath.sqrt((mpf(c1) / 2 + c2) / lam), digits)


def j_invariant_height(curve: Curve) -> mpf:
    """h = log max{4|a j2|, 4|b j2|, |j1|} with j = j1/j2 in lowest terms."""
    j = Fraction(-1728 * (4 * curve.a) ** 3, 16 * curve.delta0)
    j1, j2 = j.numerator, j.denominator
    return mpmath.log(max(4 * abs(curve.a * j2), 4 * abs(curve.b * j2), abs(j1)))


@dataclass(frozen=True)
class EllLogBoundInputs:
    c6: mpf
    c7: mpf
    C_lower: mpf
    h_j: mpf
    logV: tuple
    tau_im: mpf


def ell_log_constant(r: int) -> mpf:
    return (mpf('2.9') * mpf(10) ** (6 * (r + 2)) * mpf(4) ** (2 * (r + 1) ** 2)
            * mpf(r + 2) ** (2 * r * r + 13 * r + mpf('23.3')))


def ell_log_bound_inputs(curve: Curve, g: int, omega, lam, tau_im, hhat: Sequence, u_primes: Sequence,
                 c6_alternative: bool = False, logV: Sequence | None = None,
                 digits: int = DIGITS) -> EllLogBoundInputs:
    """Constants entering N1.

    With ``c6_alternative`` the cube root sits inside the square root:
    log(2 sqrt(2 cbrt(4g/omega))) instead of log(2 sqrt2 cbrt(4g/omega)).
    ``logV`` defaults to the smallest admissible values.
    """
    r = len(hhat)
    with mpmath.workdps(digits + GUARD):
        cb = mpmath.cbrt(4 * g / mpf(omega))
        inner = 2 * mpmath.sqrt(2 * cb) if c6_alternative else 2 * mpmath.sqrt(2) * cb
        c6 = max(mpmath.log(inner) / lam, mpf(1))
        h = j_invariant_height(curve)
        pi = mpmath.pi
        if logV is None:
            logV = [max(h, 3 * pi / tau_im)]
            logV += [max(mpf(hhat[i]), h, 3 * pi * mpf(u_primes[i]) ** 2 / tau_im) for i in range(r)]
        C = ell_log_constant(r)
        c7 = max(C / lam, mpf(10) ** 9) * (h / 2) ** (r + 2) * mpmath.fprod(logV)
        return EllLogBoundInputs(_up(c6, digits), _up(c7, digits), C, h, tuple(logV), mpf(tau_im))


def bound_N1_from_inputs(r: int, c6, c7, digits: int = DIGITS) -> mpf:
    with mpmath.workdps(digits + GUARD):
        val = (mpf(2) ** (r + 3) * mpmath.sqrt(c6 * c7)
               * mpmath.log(c7 * mpf(r + 3) ** (r + 3)) ** (mpf(r + 3) / 2))
        return _up(val, digits)


def bound_N1(curve: Curve, g: int, omega, lam, tau_im, hhat, u_primes,
             c6_alternative: bool = False, digits: int = DIGITS) -> mpf:
    inp = ell_log_bound_inputs(curve, g, omega, lam, tau_im, hhat, u_primes, c6_alternative, digits=digits)
    return bound_N1_from_inputs(len(hhat), inp.c6, inp.c7, digits)


# ---------------------------------------------------------------------------
# Search threshold


def largest_real_root_bounds(curve: Curve, eps: Fraction = Fraction(1, 10 ** 12)):
    """Rational (lo, hi) enclosing the largest real root of t^3 + at + b."""
    t = sympy.Symbol('t')
    poly = sympy.Poly(t ** 3 + curve.a * t + curve.b, t)
    intervals = poly.intervals(eps=sympy.Rational(eps.numerator, eps.denominator))
    (lo, hi), _ = max(intervals, key=lambda iv: iv[0][1])
    return Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))


def exp_mu_infinity(curve: Curve) -> mpf:
    return mpmath.exp(mu_infinity(curve))


def threshold_x0(curve: Curve, digits: int = DIGITS):
    """(x0, M, exp mu_inf), all rounded up.

    The three roots sum to zero, so max{alpha + beta, 2 gamma} equals
    max{-gamma, 2 gamma} for either root configuration.
    """
    lo, hi = largest_real_root_bounds(curve)
    with mpmath.workdps(digits + GUARD):
        emu = _up(exp_mu_infinity(curve), digits)
        # unsure sign (interval straddles 0) falls into the larger branch
        gamma_ge_zero = lo >= 0
        M = mpf(0) if gamma_ge_zero else _up(emu / (mpf(2) ** (mpf(1) / 3) - 1), digits)
        base = max(-mpf(lo.numerator) / lo.denominator, 2 * mpf(hi.numerator) / hi.denominator)
        x0 = _up(base + M, digits) if base + M > 0 else base + M
        return x0, M, emu


def search_cutoff(curve: Curve) -> mpf:
    x0, _, emu = threshold_x0(curve)
    return max(x0, emu)


def extra_search_exponents(places: PlaceSet, cutoff) -> dict[int, int]:
    """Largest even alpha with alpha <= log(cutoff)/log q, per finite prime."""
    out = {}
    for q in places.finite_primes:
        if cutoff <= 1:
            out[q] = 0
            continue
        # exact comparison q^alpha <= cutoff avoids rounding at the boundary
        alpha = 0
        while mpf(q) ** (alpha + 2) <= cutoff:
            alpha += 2
        out[q] = alpha
    return out


# ---------------------------------------------------------------------------


@dataclass
class BoundLedger:
    c1: mpf
    c1_prime: mpf
    c2: mpf
    c3: mpf
    c4: mpf
    c5_real: mpf
    c8: mpf
    c9: mpf
    N0: mpf
    N0_prime: mpf | None
    N1: mpf | None
    x0: mpf
    M: mpf
    mu_inf_exp: mpf
    alpha_bounds: dict[int, int] = field(default_factory=dict)
    lam: mpf = mpf(0)

    @property
    def N_initial(self) -> int:
        cands = [self.N0] + [v for v in (self.N0_prime, self.N1) if v is not None]
        return int(mpmath.ceil(min(cands)))

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, dict):
                out[k] = dict(v)
            elif v is None:
                out[k] = None
            else:
                out[k] = mpmath.nstr(v, 12)
        return out


def build_ledger(curve: Curve, places: PlaceSet, lam, g: int, omega, *,
                 tau_im=None, hhat=(), u_primes=(), delta0: int | None = None,
                 c6_alternative: bool = False, digits: int = DIGITS) -> BoundLedger:
    """All constants for one problem.

    ``lam`` is the least eigenvalue of the pairing matrix of the height
    for which h(P) >= hhat(P) - c2 holds.
    """
    c3, c4, c1, c1p = linear_form_constants(curve, places, delta0, digits)
    with mpmath.workdps(digits + GUARD):
        c2 = _up(c2_closed_form(curve), digits)
        s = places.s
        N0 = bound_N0(c1, c2, lam, digits)
        N0p = N1 = None
        if s == 1:
            N0p = bound_N0(c1p, c2, lam, digits)
            if hhat and tau_im is not None:
                N1 = bound_N1(curve, g, omega, lam, tau_im, hhat, u_primes, c6_alternative, digits)
        c5 = _up(mpmath.sqrt(8) * g / omega, digits)
        c8 = _up(mpmath.exp(c2 / s), digits)
        c9 = _down(mpf(lam) / s, digits)
        x0, M, emu = threshold_x0(curve, digits)
        alphas = extra_search_exponents(places, max(x0, emu))
    return BoundLedger(c1, c1p, c2, c3, c4, c5, c8, c9, N0, N0p, N1, x0, M, emu, alphas, mpf(lam))
