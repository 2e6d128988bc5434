"""Periods and complex elliptic logarithms of real points.

The invariant differential is dx/(2y), so x = wp(u), y = wp'(u)/2 for the
lattice with g2 = -4a, g3 = -4b.  For a point with x >= e1 (largest real
root) the logarithm is the Carlson integral

    u(P) = -sign(y) * R_F(x - e1, x - e2, x - e3) = -sign(y) * int_x^oo dt / (2 sqrt(f(t))),

which has |u| <= omega/2 and u ~ -x/y near the identity, matching the
local parameter used at the finite places.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import mpc, mpf

from .curve import Curve, RationalPoint
from .errors import IdentityPoint, PrecisionUnreachable


@dataclass(frozen=True)
class Periods:
    omega: mpf
    omega2: mpc
    roots: tuple
    real_roots: int
    precision: int

    @property
    def tau(self) -> mpc:
        return self.omega2 / self.omega


@dataclass(frozen=True)
class EllipticLogReal:
    u: mpc
    on_egg: bool

    @property
    def real(self) -> mpf:
        return mpmath.re(self.u)

    def u_prime(self, g: int, omega) -> mpf:
        return g * self.real / omega


def cubic_roots(curve: Curve, digits: int):
    """Roots of x^3 + ax + b: real ones descending, then a conjugate pair
    (positive imaginary part first) when there is only one."""
    with mpmath.workdps(digits + 20):
        roots = mpmath.polyroots([1, 0, curve.a, curve.b], maxsteps=400,
                                 extraprec=3 * digits + 100)
        # polish by Newton steps against the exact cubic
        f = lambda z: z ** 3 + curve.a * z + curve.b
        roots = [mpmath.findroot(f, z, tol=mpf(10) ** -(digits + 15)) for z in roots]
        if curve.discriminant > 0:
            real = sorted((mpmath.re(z) for z in roots), reverse=True)
            return tuple(real), 3
        roots = sorted(roots, key=lambda z: abs(mpmath.im(z)))
        real, pair = roots[0], roots[1]
        e2 = mpc(mpmath.re(pair), abs(mpmath.im(pair)))
        return (mpmath.re(real), e2, mpmath.conj(e2)), 1


def compute_periods(curve: Curve, digits: int) -> Periods:
    """Real period omega and a second period with Im(omega2/omega) > 0, by the AGM."""
    roots, nreal = cubic_roots(curve, digits)
    with mpmath.workdps(digits + 20):
        pi = mpmath.pi
        if nreal == 3:
            e1, e2, e3 = roots
            omega = pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            omega2 = mpc(0, pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3)))
        else:
            e1, e2, e3 = roots
            beta = mpmath.sqrt(3 * e1 * e1 + curve.a)
            omega = 2 * pi / mpmath.agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + 3 * e1))
            # twice the logarithm of the non-real 2-torsion point is a period
            # completing omega to a basis
            w = 2 * mpmath.elliprf(0, e2 - e1, e2 - e3)
            if mpmath.im(w) < 0:
                w = -w
            w -= omega * mpmath.nint(mpmath.re(w) / omega)
            omega2 = mpc(w)
        if not omega > 0 or not mpmath.im(omega2) > 0:
            raise PrecisionUnreachable("degenerate period computation")
        return Periods(+omega, +omega2, roots, nreal, digits)


def _unbounded_log(x, y, roots) -> mpf:
    e1, e2, e3 = roots
    v = mpmath.re(mpmath.elliprf(x - e1, x - e2, x - e3))
    return -v if y > 0 else v


def elliptic_log(P: RationalPoint, curve: Curve, periods: Periods,
                 digits: int | None = None) -> EllipticLogReal:
    """Elliptic logarithm, taken with |Re u| <= omega/2.

    Points on the bounded component (x < e1, three real roots) are moved
    to the unbounded one by adding T3 = (e3, 0); then u(P) = u(P + T3) +
    omega2/2 with the same real part.
    """
    if P.is_identity:
        raise IdentityPoint("logarithm of the identity")
    digits = digits or periods.precision
    roots = periods.roots
    with mpmath.workdps(digits + 20):
        x = mpf(P.xi) / P.zeta ** 2
        y = mpf(P.eta) / P.zeta ** 3
        half2 = periods.omega2 / 2
        if P.eta == 0:
            # 2-torsion: a half period
            k = min(range(periods.real_roots), key=lambda i: abs(roots[i] - x))
            u = [periods.omega / 2, periods.omega / 2 + half2, half2][k]
            return EllipticLogReal(mpc(u), k > 0)
        e1, e2, e3 = roots
        if periods.real_roots == 1 or x >= e1:
            return EllipticLogReal(mpc(_unbounded_log(x, y, roots)), False)
        x1 = e3 + (e1 - e3) * (e2 - e3) / (x - e3)
        y1 = -y * (x1 - e3) / (x - e3)
        u = _unbounded_log(x1, y1, roots) + half2
        return EllipticLogReal(mpc(u), True)


def elliptic_logs(points: Sequence[RationalPoint], curve: Curve, periods: Periods,
                  digits: int | None = None) -> list[EllipticLogReal]:
    # mpmath precision is process-global, so these run sequentially
    return [elliptic_log(P, curve, periods, digits) for P in points]


def normalized_logs(logs: Sequence[EllipticLogReal], g: int, periods: Periods):
    """u'_i = Re(g u_i / omega) reduced to (-g/2, g/2], and the egg flags."""
    with mpmath.workdps(periods.precision + 20):
        out = []
        for L in logs:
            v = g * mpmath.re(L.u) / periods.omega
            v -= g * mpmath.nint(v / g) if g else 0
            out.append(+v)
        return out, [L.on_egg for L in logs]


# ---------------------------------------------------------------------------
# Independent evaluation of the parametrisation, used as a check


def weierstrass_point(u, curve: Curve, terms: int = 60, halvings: int | None = None):
    """(wp(u), wp'(u)/2) from the Laurent series near 0 plus doubling."""
    a, b = curve.a, curve.b
    c = [mpf(0)] * (terms + 1)
    c[2] = mpf(-4 * a) / 20
    c[3] = mpf(-4 * b) / 28
    for k in range(4, terms + 1):
        c[k] = 3 * sum(c[m] * c[k - m] for m in range(2, k - 1)) / ((2 * k + 1) * (k - 3))
    if halvings is None:
        halvings = max(0, int(mpmath.ceil(mpmath.log(abs(u) + 1, 2))) + 4)
    v = u / 2 ** halvings
    x = 1 / v ** 2 + sum(c[k] * v ** (2 * k - 2) for k in range(2, terms + 1))
    y = (-2 / v ** 3 + sum((2 * k - 2) * c[k] * v ** (2 * k - 3) for k in range(2, terms + 1))) / 2
    for _ in range(halvings):
        lam = (3 * x * x + a) / (2 * y)
        x2 = lam * lam - 2 * x
        y = lam * (x - x2) - y
        x = x2
    return x, y
