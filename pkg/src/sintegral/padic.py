"""Fixed-precision q-adic numbers, the formal group of E, and q-adic elliptic logs.

A nonzero PadicNumber is q^val * unit with the unit known modulo
q^(abs_prec - val).  Zero is represented by unit = 0 and val = abs_prec,
i.e. "zero to the known precision".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .curve import Curve, RationalPoint, frac_valuation, scalar_mul
from .errors import (DivisionByIndistinguishableZero, NotInKernel,
                     PrecisionExhausted)


def _strip(n: int, q: int) -> tuple[int, int]:
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v, n


@dataclass(frozen=True)
class PadicNumber:
    q: int
    val: int
    unit: int
    abs_prec: int

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, q: int, abs_prec: int) -> "PadicNumber":
        return cls(q, abs_prec, 0, abs_prec)

    @classmethod
    def _make(cls, q: int, n: int, shift: int, abs_prec: int) -> "PadicNumber":
        """q^shift * n known modulo q^abs_prec."""
        if abs_prec <= shift:
            return cls.zero(q, abs_prec)
        mod = q ** (abs_prec - shift)
        n %= mod
        if n == 0:
            return cls.zero(q, abs_prec)
        v, u = _strip(n, q)
        return cls(q, shift + v, u % q ** (abs_prec - shift - v), abs_prec)

    @classmethod
    def from_rational(cls, x, q: int, rel_prec: int | None = None,
                      abs_prec: int | None = None) -> "PadicNumber":
        """Exact rational x to the given relative or absolute precision."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(q, abs_prec if abs_prec is not None else rel_prec)
        vn, num = _strip(x.numerator, q)
        vd, den = _strip(x.denominator, q)
        v = vn - vd
        if abs_prec is None:
            abs_prec = v + rel_prec
        k = abs_prec - v
        if k <= 0:
            return cls.zero(q, abs_prec)
        mod = q ** k
        return cls(q, v, num * pow(den, -1, mod) % mod, abs_prec)

    # -- queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def rel_prec(self) -> int:
        return 0 if self.is_zero else self.abs_prec - self.val

    def residue(self, n: int | None = None) -> int:
        """Integer representative modulo q^n (n <= abs_prec), needs val >= 0."""
        n = self.abs_prec if n is None else n
        if n > self.abs_prec:
            raise PrecisionExhausted(f"asked for {n} digits, have {self.abs_prec}")
        if self.is_zero:
            return 0
        if self.val < 0:
            raise ValueError("not a q-adic integer")
        return self.unit * self.q ** self.val % self.q ** n

    def digits(self, n: int | None = None) -> list[int]:
        """Digits of q^0, q^1, ..., q^(n-1)."""
        n = self.abs_prec if n is None else n
        r = self.residue(n)
        out = []
        for _ in range(n):
            r, d = divmod(r, self.q)
            out.append(d)
        return out

    def to_fraction(self) -> Fraction:
        """The representative q^val * unit (unit in [0, q^k))."""
        return Fraction(self.unit) * Fraction(self.q) ** self.val

    def _check(self, other):
        if isinstance(other, PadicNumber):
            if other.q != self.q:
                raise ValueError("different primes")
            return other
        # exact constants never limit the precision of the result
        c = Fraction(other)
        if c == 0:
            return PadicNumber.zero(self.q, self.abs_prec + 1)
        rel = max(self.abs_prec - frac_valuation(c, self.q), self.rel_prec, 1) + 1
        return PadicNumber.from_rational(c, self.q, rel_prec=rel)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        if self.is_zero:
            return self
        return PadicNumber(self.q, self.val, (-self.unit) % self.q ** self.rel_prec, self.abs_prec)

    def __add__(self, other):
        other = self._check(other)
        q = self.q
        prec = min(self.abs_prec, other.abs_prec)
        if self.is_zero:
            return PadicNumber._make(q, other.unit, other.val, prec) if not other.is_zero else PadicNumber.zero(q, prec)
        if other.is_zero:
            return PadicNumber._make(q, self.unit, self.val, prec)
        v = min(self.val, other.val)
        n = self.unit * q ** (self.val - v) + other.unit * q ** (other.val - v)
        return PadicNumber._make(q, n, v, prec)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def __mul__(self, other):
        other = self._check(other)
        q = self.q
        if self.is_zero and other.is_zero:
            return PadicNumber.zero(q, self.abs_prec + other.abs_prec)
        if self.is_zero:
            return PadicNumber.zero(q, self.abs_prec + other.val)
        if other.is_zero:
            return PadicNumber.zero(q, other.abs_prec + self.val)
        val = self.val + other.val
        rel = min(self.rel_prec, other.rel_prec)
        return PadicNumber._make(q, self.unit * other.unit, val, val + rel)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero:
            raise DivisionByIndistinguishableZero(
                f"divisor is 0 mod {self.q}^{self.abs_prec}")
        rel = self.rel_prec
        mod = self.q ** rel
        return PadicNumber(self.q, -self.val, pow(self.unit, -1, mod), rel - self.val)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PadicNumber.from_rational(1, self.q, rel_prec=self.rel_prec if not self.is_zero else self.abs_prec)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def equals(self, other, prec: int | None = None) -> bool:
        """Equality modulo q^prec (default: the common known precision)."""
        d = self - other
        p = d.abs_prec if prec is None else prec
        if p > d.abs_prec:
            raise PrecisionExhausted("comparison beyond known precision")
        return d.is_zero or d.val >= p

    def __repr__(self):
        if self.is_zero:
            return f"O({self.q}^{self.abs_prec})"
        return f"{self.q}^{self.val}*{self.unit} + O({self.q}^{self.abs_prec})"


# ---------------------------------------------------------------------------
# Formal group


def _coeff_div(x, d):
    if isinstance(x, int) or isinstance(x, Fraction):
        r = Fraction(x) / d
        return int(r) if r.denominator == 1 else r
    return (x / d).expand() if hasattr(x, "expand") else x / d


def _simplify(x):
    return x.expand() if hasattr(x, "expand") else x


@dataclass(frozen=True)
class FormalSeries:
    ainvs: tuple
    w_coeffs: tuple          # index n -> coefficient of z^n (0..D)
    omega_coeffs: tuple      # index n -> coefficient of z^n (0..D-3)
    psi_terms: tuple         # index i -> d_i / i (index 0 unused)

    @property
    def degree(self) -> int:
        return len(self.w_coeffs) - 1

    @property
    def t(self) -> int:
        return len(self.psi_terms) - 1

    def d(self, i: int):
        return self.omega_coeffs[i - 1]


def formal_w(ainvs: Sequence, D: int) -> list:
    """Coefficients of w(z) = z^3 + a1 z w + a2 z^2 w + a3 w^2 + a4 z w^2 + a6 w^3.

    The coefficient of z^n on the right only involves w_k with k < n, so a
    single pass in increasing degree solves the fixed point.  w2 and w3 are
    the coefficient lists of w^2 and w^3, filled in as soon as possible.
    """
    a1, a2, a3, a4, a6 = ainvs
    zero = 0 * a1
    w = [zero] * (D + 1)
    w2 = [zero] * (D + 1)
    w3 = [zero] * (D + 1)
    if D >= 3:
        w[3] = 1 + zero
    for n in range(4, D + 1):
        # w^2 at degree n-1 and n, w^3 at degree n; all need only w_k, k < n
        for m in (n - 1, n):
            if m >= 6 and w2[m] == zero:
                w2[m] = _simplify(sum((w[i] * w[m - i] for i in range(3, m - 2)), zero))
        w3[n] = _simplify(sum((w[i] * w2[n - i] for i in range(3, n - 5)), zero)) if n >= 9 else zero
        rhs = (a1 * w[n - 1] + a2 * w[n - 2] + a3 * w2[n] + a4 * w2[n - 1] + a6 * w3[n])
        w[n] = _simplify(rhs)
    return w


def _series_mul(a, b, D):
    zero = 0 * a[0]
    return [_simplify(sum((a[i] * b[n - i] for i in range(n + 1) if i < len(a) and n - i < len(b)), zero))
            for n in range(D + 1)]


def _series_inverse(a, D):
    """1/a for a series with invertible constant term."""
    inv = [_coeff_div(1, a[0])]
    for n in range(1, D + 1):
        s = sum((a[i] * inv[n - i] for i in range(1, min(n, len(a) - 1) + 1)), 0 * a[0])
        inv.append(_coeff_div(-_simplify(s), a[0]))
    return inv


def formal_omega(ainvs: Sequence, w: Sequence, D: int) -> list:
    """omega(z) = (w - z w') / (w (-2 + a1 z + a3 w)) to degree D."""
    a1, _, a3, _, _ = ainvs
    size = len(w) - 1
    # divide numerator and w by z^3
    num = [(1 - n) * w[n] for n in range(3, size + 1)]
    wt = [w[n] for n in range(3, size + 1)]
    fac = [0 * a1] * (size + 1)
    fac[0] = -2 + 0 * a1
    fac[1] = a1
    for n in range(size + 1):
        fac[n] = _simplify(fac[n] + a3 * w[n])
    den = _series_mul(wt, fac, D)
    om = _series_mul(num, _series_inverse(den, D), D)
    return [_coeff_div(c, 1) for c in om]


def build_formal_series(ainvs: Sequence, D: int, t: int | None = None) -> FormalSeries:
    """w(z), omega(z) and the logarithm terms d_i/i for i = 1..t."""
    t = D - 3 if t is None else t
    if D < t + 3:
        raise ValueError("need D >= t + 3")
    ainvs = tuple(ainvs)
    w = formal_w(ainvs, D)
    om = formal_omega(ainvs, w, D - 3)
    psi = [None] + [_coeff_div(om[i - 1], i) for i in range(1, t + 1)]
    return FormalSeries(ainvs, tuple(w), tuple(om), tuple(psi))


@lru_cache(maxsize=32)
def series_for_curve(ainvs: tuple, t: int) -> FormalSeries:
    return build_formal_series(ainvs, t + 3, t)


# ---------------------------------------------------------------------------
# Points over Q_q


@dataclass(frozen=True)
class PadicPoint:
    x: PadicNumber
    y: PadicNumber

    @property
    def level(self) -> int:
        """v with P in E_v \\ E_{v+1}, or 0 if P is not in E_1."""
        if self.x.is_zero or self.x.val >= 0:
            return 0
        return -self.x.val // 2

    @property
    def z(self) -> PadicNumber:
        return -(self.x / self.y)

    @classmethod
    def from_rational(cls, P: RationalPoint, q: int, rel_prec: int) -> "PadicPoint":
        return cls(PadicNumber.from_rational(P.x, q, rel_prec=rel_prec),
                   PadicNumber.from_rational(P.y, q, rel_prec=rel_prec))


def _is_identity_like(P: PadicPoint | None) -> bool:
    return P is None


def padic_point_add(P: PadicPoint | None, Q: PadicPoint | None, curve: Curve,
                    min_prec: int = 1) -> PadicPoint | None:
    """Affine chord-tangent law with the precision carried by PadicNumber.

    None is the identity.  Raises PrecisionExhausted when the relative
    precision of a resulting coordinate drops below ``min_prec``.
    """
    if P is None:
        return Q
    if Q is None:
        return P
    dx = Q.x - P.x
    if dx.is_zero:
        sy = P.y + Q.y
        if sy.is_zero:
            return None
        lam = (3 * P.x * P.x + curve.a) / (2 * P.y)
    else:
        lam = (Q.y - P.y) / dx
    x3 = lam * lam - P.x - Q.x
    y3 = lam * (P.x - x3) - P.y
    if x3.rel_prec < min_prec or y3.rel_prec < min_prec:
        raise PrecisionExhausted("coordinate precision fell below the requested minimum")
    return PadicPoint(x3, y3)


def padic_scalar_mul(n: int, P: PadicPoint, curve: Curve, min_prec: int = 1) -> PadicPoint | None:
    if n < 0:
        return padic_scalar_mul(-n, PadicPoint(P.x, -P.y), curve, min_prec)
    R = None
    while n:
        if n & 1:
            R = padic_point_add(R, P, curve, min_prec)
        n >>= 1
        if n:
            P = padic_point_add(P, P, curve, min_prec)
    return R


# ---------------------------------------------------------------------------
# Logarithm


def _vq(n: int, q: int) -> int:
    return _strip(n, q)[0] if n else 0


def evaluate_log_series(z: PadicNumber, series: FormalSeries, terms: int) -> PadicNumber:
    """sum_{i <= terms} (d_i/i) z^i for val(z) >= 1, with exact precision bookkeeping.

    Each term is q^(i v - v_q(i)) * d_i * u^i * (i/q^v_q(i))^-1, computed by
    modular integer arithmetic, so no digit of d_i/i is lost.
    """
    q = z.q
    if z.is_zero:
        return PadicNumber.zero(q, z.abs_prec)
    v, rel = z.val, z.rel_prec
    if v < 1:
        raise NotInKernel("log series needs val(z) >= 1")
    # absolute precision of the sum is min over terms of (i v - e_i) + rel
    prec = min(i * v - _vq(i, q) + rel for i in range(1, terms + 1))
    mod = q ** prec
    total = 0
    upow = 1
    u = z.unit
    for i in range(1, terms + 1):
        upow = upow * u % mod
        e = _vq(i, q)
        shift = i * v - e
        if shift >= prec:
            continue
        m = q ** (prec - shift)
        d = series.d(i)
        if isinstance(d, Fraction):
            if d.denominator % q == 0:
                raise ValueError("non-integral formal coefficient")
            d = d.numerator * pow(d.denominator, -1, m)
        coeff = d * pow(i // q ** e, -1, m) % m
        total += q ** shift * (coeff * upow % m)
    return PadicNumber._make(q, total, 0, prec)


def truncation_ok(z_val: int, q: int, t: int, target: int, horizon: int = 4096) -> bool:
    """min_{k > t} (k val(z) - v_q(k)) >= target."""
    k_max = max(t + 1, target + horizon)
    best = min(k * z_val - _vq(k, q) for k in range(t + 1, k_max + 1))
    # beyond k_max the term only grows
    return best >= target


def padic_elliptic_log(P: RationalPoint, q: int, n: int, curve: Curve, t: int = 200,
                       series: FormalSeries | None = None, guard: int = 10,
                       return_info: bool = False):
    """psi_q(P) to absolute precision >= n for P in E_1(Q_q).

    P_V = q^V P is formed q-adically with V = floor(n/t), so its parameter
    z has valuation >= V + 1 and t terms of the series suffice for n + V
    digits; the result is psi(P_V)/q^V.  If the truncation inequality
    fails (it ignores v_q(i) losses) V is raised until it holds.
    """
    if q == 2:
        from .errors import EvenCharacteristic
        raise EvenCharacteristic()
    if P.is_identity:
        return PadicNumber.zero(q, n)
    if frac_valuation(P.x, q) > -2:
        raise NotInKernel(f"point is not in the kernel of reduction at {q}")
    series = series or series_for_curve(curve.ainvs, t)
    V = n // t
    while True:
        nprime = n + V
        start_level = -frac_valuation(P.x, q) // 2
        work = nprime + guard + 3 * V + 2
        while True:
            Pq = PadicPoint.from_rational(P, q, rel_prec=work)
            PV = padic_scalar_mul(q ** V, Pq, curve) if V else Pq
            if PV is None:
                raise NotInKernel("point became the identity; it is torsion")
            z = PV.z
            # need z to absolute precision n'
            if z.abs_prec >= nprime:
                break
            work += nprime - z.abs_prec + guard
        if truncation_ok(z.val, q, t, nprime):
            break
        V += 1
    logv = evaluate_log_series(z, series, t)
    if logv.abs_prec < nprime:
        raise PrecisionExhausted("log series lost precision")
    if logv.is_zero:
        res = PadicNumber.zero(q, n)
    else:
        res = PadicNumber._make(q, logv.unit, logv.val - V, n)
    if not log_norm_identity_check(res, z, V):
        raise PrecisionExhausted("log valuation does not match the point's level")
    if return_info:
        return res, {"V": V, "n_prime": nprime, "level": start_level, "z_val": z.val}
    return res


def log_norm_identity_check(log: PadicNumber, z: PadicNumber, V: int = 0) -> bool:
    """|psi(P)| = |z(P)|, where z is the parameter of q^V P."""
    if log.is_zero:
        return z.is_zero or z.val - V >= log.abs_prec
    return log.val == z.val - V


def points_log_norm_check(P: RationalPoint, log: PadicNumber, q: int) -> bool:
    """|psi(P)| = |-x/y| for a rational point P in E_1."""
    return log.val == frac_valuation(-P.x / P.y, q)


def kernel_multiple(P: RationalPoint, m: int, curve: Curve) -> RationalPoint:
    return scalar_mul(m, P, curve)
