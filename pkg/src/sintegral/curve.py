"""Exact arithmetic on y^2 = x^3 + ax + b over Q.

Points are kept in weighted-projective form (xi : eta : zeta) with
x = xi/zeta^2 and y = eta/zeta^3, so the S-integrality test reduces to
factoring zeta.  The identity is the unique point with zeta = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import mpmath
import sympy

from .errors import BadReduction, DegenerateCurve, EvenCharacteristic


class TateQuantities(NamedTuple):
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int


def tate_quantities(ainvs: Sequence[int]) -> TateQuantities:
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    return TateQuantities(b2, b4, b6, b8, c4, c6)


def discriminant(ainvs: Sequence[int]) -> int:
    b2, b4, b6, b8, _, _ = tate_quantities(ainvs)
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class Curve:
    """Short Weierstrass curve y^2 = x^3 + a x + b with integer a, b."""

    a: int
    b: int

    def __post_init__(self):
        if 4 * self.a ** 3 + 27 * self.b ** 2 == 0:
            raise DegenerateCurve(f"4a^3 + 27b^2 = 0 for a={self.a}, b={self.b}")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (0, 0, 0, self.a, self.b)

    @cached_property
    def delta0(self) -> int:
        return 4 * self.a ** 3 + 27 * self.b ** 2

    @cached_property
    def discriminant(self) -> int:
        return -16 * self.delta0

    @cached_property
    def tate(self) -> TateQuantities:
        return tate_quantities(self.ainvs)

    @cached_property
    def j(self) -> Fraction:
        return Fraction(self.tate.c4 ** 3, self.discriminant)

    @cached_property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(sorted(p for p in sympy.factorint(abs(self.discriminant))))

    def rhs(self, x):
        return x ** 3 + self.a * x + self.b

    def contains(self, P: "RationalPoint") -> bool:
        if P.is_identity:
            return True
        z2 = P.zeta ** 2
        return P.eta ** 2 == P.xi ** 3 + self.a * P.xi * z2 * z2 + self.b * z2 ** 3

    def point(self, x, y) -> "RationalPoint":
        P = RationalPoint.from_xy(x, y)
        if not self.contains(P):
            raise ValueError(f"({x}, {y}) is not on {self}")
        return P

    def __str__(self):
        return f"y^2 = x^3 + ({self.a})x + ({self.b})"


def validate_curve(a: int, b: int) -> Curve:
    return Curve(int(a), int(b))


@dataclass(frozen=True)
class RationalPoint:
    xi: int
    eta: int
    zeta: int

    @classmethod
    def identity(cls) -> "RationalPoint":
        return cls(0, 1, 0)

    @classmethod
    def from_xy(cls, x, y) -> "RationalPoint":
        x, y = Fraction(x), Fraction(y)
        zeta = math.isqrt(x.denominator)
        if zeta * zeta != x.denominator or y.denominator != zeta ** 3:
            raise ValueError(f"({x}, {y}) has no (xi/zeta^2, eta/zeta^3) form")
        return cls(x.numerator, y.numerator, zeta)

    @property
    def is_identity(self) -> bool:
        return self.zeta == 0

    @property
    def x(self) -> Fraction:
        return Fraction(self.xi, self.zeta ** 2)

    @property
    def y(self) -> Fraction:
        return Fraction(self.eta, self.zeta ** 3)

    def __neg__(self) -> "RationalPoint":
        if self.is_identity:
            return self
        return RationalPoint(self.xi, -self.eta, self.zeta)

    def __str__(self):
        if self.is_identity:
            return "O"
        if self.zeta == 1:
            return f"({self.xi}, {self.eta})"
        return f"({self.xi}/{self.zeta ** 2}, {self.eta}/{self.zeta ** 3})"


def add(P: RationalPoint, Q: RationalPoint, curve: Curve) -> RationalPoint:
    if P.is_identity:
        return Q
    if Q.is_identity:
        return P
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 == -y2:
            return RationalPoint.identity()
        slope = (3 * x1 * x1 + curve.a) / (2 * y1)
    else:
        slope = (y2 - y1) / (x2 - x1)
    x3 = slope * slope - x1 - x2
    y3 = slope * (x1 - x3) - y1
    return RationalPoint.from_xy(x3, y3)


def sub(P: RationalPoint, Q: RationalPoint, curve: Curve) -> RationalPoint:
    return add(P, -Q, curve)


def scalar_mul(n: int, P: RationalPoint, curve: Curve) -> RationalPoint:
    if n < 0:
        n, P = -n, -P
    result = RationalPoint.identity()
    while n:
        if n & 1:
            result = add(result, P, curve)
        n >>= 1
        if n:
            P = add(P, P, curve)
    return result


def linear_combination(coeffs: Sequence[int], points: Sequence[RationalPoint],
                       curve: Curve) -> RationalPoint:
    total = RationalPoint.identity()
    for n, P in zip(coeffs, points):
        if n:
            total = add(total, scalar_mul(n, P, curve), curve)
    return total


@dataclass(frozen=True)
class PlaceSet:
    """Finite primes of S; the archimedean place is always included."""

    finite_primes: tuple[int, ...] = ()

    def __post_init__(self):
        primes = tuple(int(p) for p in self.finite_primes)
        if list(primes) != sorted(set(primes)):
            raise ValueError(f"primes must be strictly increasing: {primes}")
        for p in primes:
            if not sympy.isprime(p):
                raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "finite_primes", primes)

    includes_infinity = True

    @property
    def s(self) -> int:
        return len(self.finite_primes) + 1

    @property
    def Q(self) -> int | None:
        return max(self.finite_primes) if self.finite_primes else None

    def __contains__(self, p) -> bool:
        return p in self.finite_primes

    def __iter__(self):
        return iter(self.finite_primes)


# ---------------------------------------------------------------------------
# Reduction modulo primes


def _quadratic_character_table(q: int) -> list[int]:
    chi = [-1] * q
    chi[0] = 0
    for v in range(1, (q + 1) // 2):
        chi[v * v % q] = 1
    return chi


def count_points_long(ainvs: Sequence[int], q: int) -> int:
    """#E(F_q) for an arbitrary Weierstrass model with q odd and q not dividing Delta."""
    if q == 2:
        raise EvenCharacteristic()
    if discriminant(ainvs) % q == 0:
        raise BadReduction(q)
    b2, b4, b6, *_ = tate_quantities(ainvs)
    chi = _quadratic_character_table(q)
    # completing the square turns the count into one of 4x^3 + b2 x^2 + 2 b4 x + b6
    total = 1
    for x in range(q):
        total += 1 + chi[(((4 * x + b2) * x + 2 * b4) * x + b6) % q]
    return total


def count_points_mod_q(curve: Curve, q: int) -> int:
    return count_points_long(curve.ainvs, q)


def reduce_point(P: RationalPoint, q: int) -> tuple[int, int] | None:
    """Image of P in E(F_q) as an affine pair, or None for the identity."""
    if P.is_identity or P.zeta % q == 0:
        return None
    inv = pow(P.zeta, -1, q)
    return (P.xi * inv * inv % q, P.eta * inv ** 3 % q)


def add_mod_q(P, Q, curve: Curve, q: int):
    """Group law on the reduced curve over F_q (affine pairs, None = identity)."""
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return None
        slope = (3 * x1 * x1 + curve.a) * pow(2 * y1, -1, q) % q
    else:
        slope = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (slope * slope - x1 - x2) % q
    return (x3, (slope * (x1 - x3) - y1) % q)


# ---------------------------------------------------------------------------
# Local minimal models


def _valuation(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def frac_valuation(x: Fraction, p: int):
    x = Fraction(x)
    if x == 0:
        return math.inf
    return _valuation(x.numerator, p) - _valuation(x.denominator, p)


class ModelChange(NamedTuple):
    """x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""

    u: int
    r: int
    s: int
    t: int

    def compose(self, other: "ModelChange") -> "ModelChange":
        u, r, s, t = self
        u2, r2, s2, t2 = other
        return ModelChange(u * u2, r + u * u * r2, s + u * s2,
                           t + u ** 3 * t2 + s * u * u * r2)

    def apply_to_ainvs(self, ainvs):
        u, r, s, t = self
        a1, a2, a3, a4, a6 = ainvs
        return (
            Fraction(a1 + 2 * s, u),
            Fraction(a2 - s * a1 + 3 * r - s * s, u ** 2),
            Fraction(a3 + r * a1 + 2 * t, u ** 3),
            Fraction(a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t, u ** 4),
            Fraction(a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1, u ** 6),
        )

    def apply_to_xy(self, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
        u, r, s, t = self
        xn = Fraction(x - r, u * u)
        return xn, Fraction(y - s * u * u * xn - t, u ** 3)


IDENTITY_CHANGE = ModelChange(1, 0, 0, 0)


def _descend_once(ainvs, p: int) -> ModelChange | None:
    """Find [p, r, s, t] keeping the model integral at p, if one exists."""
    a1, a2, a3, a4, a6 = ainvs
    for r in range(p * p):
        for s in range(p):
            if (a1 + 2 * s) % p or (a2 - s * a1 + 3 * r - s * s) % p ** 2:
                continue
            for t in range(p ** 3):
                change = ModelChange(p, r, s, t)
                if all(c.denominator % p for c in change.apply_to_ainvs(ainvs)):
                    return change
    return None


@lru_cache(maxsize=None)
def local_minimal_model(ainvs: tuple[int, ...], p: int):
    """A model that is minimal at p, and the change of variables reaching it.

    The returned coefficients are p-integral Fractions; ``change.u`` is a
    power of p.
    """
    model = tuple(Fraction(c) for c in ainvs)
    change = IDENTITY_CHANGE
    a1, a2, a3, a4, a6 = model
    if p >= 5 and a1 == a2 == a3 == 0:
        while frac_valuation(a4, p) >= 4 and frac_valuation(a6, p) >= 6:
            step = ModelChange(p, 0, 0, 0)
            change = change.compose(step)
            a4, a6 = a4 / p ** 4, a6 / p ** 6
        return (Fraction(0), Fraction(0), Fraction(0), a4, a6), change
    if p >= 5:
        raise NotImplementedError("long models are only minimised at 2 and 3")
    while True:
        # every coefficient is p-integral here; descend while possible
        if frac_valuation(discriminant(model), p) < 12:
            return model, change
        step = _descend_once(model, p)
        if step is None:
            return model, change
        model = step.apply_to_ainvs(model)
        change = change.compose(step)


def _ainvs_mod(ainvs, q):
    return tuple(c.numerator * pow(c.denominator, -1, q) % q for c in ainvs)


def has_good_reduction(curve: Curve, q: int) -> bool:
    model, _ = local_minimal_model(curve.ainvs, q)
    return frac_valuation(discriminant(model), q) == 0


def minimal_point_count(curve: Curve, q: int) -> int:
    """#E~(F_q) for the reduction of a q-minimal model."""
    if q == 2:
        raise EvenCharacteristic()
    model, _ = local_minimal_model(curve.ainvs, q)
    if frac_valuation(discriminant(model), q) > 0:
        raise BadReduction(q)
    return count_points_long(_ainvs_mod(model, q), q)


def multiplier_m(curve: Curve, q: int, g: int) -> int:
    """Multiplier sending E(Q) into the kernel of reduction at q.

    lcm(g, N_q) is enough when the given model is minimal at q.  When it is
    not (v_q(u) = e > 0), the local parameter -x/y of this model only has
    positive valuation on E_{e+1} of the minimal model, which needs the
    extra factor q^e.
    """
    n_q = minimal_point_count(curve, q)
    _, change = local_minimal_model(curve.ainvs, q)
    e = _valuation(change.u, q)
    return math.lcm(g, n_q) * q ** e


# ---------------------------------------------------------------------------
# Torsion


@dataclass(frozen=True)
class TorsionData:
    g: int
    torsion_points: tuple[RationalPoint, ...]


def _integer_roots_of_cubic(c2: int, c1: int, c0: int) -> list[int]:
    """Integer roots of t^3 + c2 t^2 + c1 t + c0."""
    f = lambda t: ((t + c2) * t + c1) * t + c0
    digits = max(len(str(abs(c))) for c in (c0, c1, c2, 1)) + 30
    with mpmath.workdps(digits):
        roots = mpmath.polyroots([1, c2, c1, c0], maxsteps=200, extraprec=4 * digits)
    found = set()
    for z in roots:
        if abs(mpmath.im(z)) > 1:
            continue
        base = int(mpmath.nint(mpmath.re(z)))
        for t in (base - 1, base, base + 1):
            if f(t) == 0:
                found.add(t)
    return sorted(found)


def _order(P: RationalPoint, curve: Curve, limit: int = 12) -> int | None:
    Q = P
    for k in range(1, limit + 1):
        if Q.is_identity:
            return k
        Q = add(Q, P, curve)
    return None


def torsion_subgroup(curve: Curve) -> TorsionData:
    """All rational torsion points via Lutz-Nagell and Mazur's bound."""
    d = abs(curve.delta0)
    factors = sympy.factorint(d)
    # y = 0 or y^2 | delta0
    ys = {0}
    half = {p: e // 2 for p, e in factors.items()}
    ys_list = [1]
    for p, e in half.items():
        ys_list = [y * p ** k for y in ys_list for k in range(e + 1)]
    ys.update(ys_list)
    points = []
    for y in sorted(ys):
        for x in _integer_roots_of_cubic(0, curve.a, curve.b - y * y):
            for yy in {y, -y}:
                P = RationalPoint(x, yy, 1)
                if _order(P, curve) is not None:
                    points.append(P)
    points.sort(key=lambda P: (P.xi, P.eta))
    return TorsionData(len(points) + 1, (RationalPoint.identity(), *points))


# ---------------------------------------------------------------------------
# Long to short Weierstrass form


@dataclass(frozen=True)
class CoordinateMap:
    """Affine map between a long model and its short form.

    forward: X = 36 x + 3 b2, Y = 108 (2 y + a1 x + a3); identity for
    already-short input.
    """

    ainvs: tuple[int, int, int, int, int]
    identity: bool

    def forward_xy(self, x, y):
        if self.identity:
            return Fraction(x), Fraction(y)
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        return 36 * Fraction(x) + 3 * b2, 108 * (2 * Fraction(y) + a1 * Fraction(x) + a3)

    def backward_xy(self, X, Y):
        if self.identity:
            return Fraction(X), Fraction(Y)
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        x = (Fraction(X) - 3 * b2) / 36
        return x, (Fraction(Y) / 108 - a1 * x - a3) / 2

    def forward(self, P: RationalPoint) -> RationalPoint:
        if P.is_identity or self.identity:
            return P
        return RationalPoint.from_xy(*self.forward_xy(P.x, P.y))

    def backward(self, P: RationalPoint) -> tuple[Fraction, Fraction] | None:
        """Original (x, y); not always of (xi/zeta^2, eta/zeta^3) shape."""
        if P.is_identity:
            return None
        return self.backward_xy(P.x, P.y)

    def on_long_curve(self, x, y) -> bool:
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x ** 3 + a2 * x * x + a4 * x + a6


def long_to_short(a1: int, a2: int, a3: int, a4: int, a6: int) -> tuple[Curve, CoordinateMap]:
    ainvs = (int(a1), int(a2), int(a3), int(a4), int(a6))
    if discriminant(ainvs) == 0:
        raise DegenerateCurve(f"singular model {ainvs}")
    if a1 == a2 == a3 == 0:
        return Curve(a4, a6), CoordinateMap(ainvs, True)
    t = tate_quantities(ainvs)
    return Curve(-27 * t.c4, -54 * t.c6), CoordinateMap(ainvs, False)
