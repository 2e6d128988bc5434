"""Enumeration of small coefficient vectors and the residual bounded search.

Completeness argument.  An S-integral point P = sum n_i P_i + T either has
|x|_q <= cutoff at every place (found by ``extra_search``), or the linear
form inequality holds at the place where |x| is largest, with N = max|n_i|.
``quick_test`` accepts every vector for which that inequality holds at
some place (slack factor 10, rounding outward), so no such point is lost.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .curve import (Curve, PlaceSet, RationalPoint, TorsionData, add,
                    scalar_mul)
from .padic import PadicNumber

SLACK = 10.0


@dataclass(frozen=True)
class SolutionRecord:
    xi: int
    eta: int          # stored with eta >= 0
    zeta: int
    coefficients: tuple[int, ...]
    torsion_index: int = 0

    @property
    def point(self) -> RationalPoint:
        return RationalPoint(self.xi, self.eta, self.zeta)

    @property
    def zeta_factorization(self) -> dict[int, int]:
        return dict(sorted(sympy.factorint(self.zeta).items())) if self.zeta > 1 else {}

    def zeta_factor_string(self) -> str:
        f = self.zeta_factorization
        return " x ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in f.items())

    def as_dict(self) -> dict:
        return {"xi": str(self.xi), "eta": str(self.eta), "zeta": str(self.zeta),
                "zeta_factorization": {str(p): e for p, e in self.zeta_factorization.items()},
                "coefficients": list(self.coefficients), "torsion_index": self.torsion_index}

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionRecord":
        return cls(int(d["xi"]), int(d["eta"]), int(d["zeta"]),
                   tuple(d["coefficients"]), d.get("torsion_index", 0))


def canonical_record(P: RationalPoint, coeffs: Sequence[int], tindex: int = 0) -> SolutionRecord:
    """Normalise to eta >= 0, flipping the coefficient vector with the sign."""
    if P.eta < 0:
        return SolutionRecord(P.xi, -P.eta, P.zeta, tuple(-c for c in coeffs), tindex)
    return SolutionRecord(P.xi, P.eta, P.zeta, tuple(coeffs), tindex)


def s_integrality_test(P: RationalPoint, places: PlaceSet | Iterable[int]) -> bool:
    if P.is_identity:
        raise ValueError("identity has no coordinates")
    z = P.zeta
    for p in places:
        while z % p == 0:
            z //= p
    return z == 1


def is_s_integral_rational(x: Fraction, places: Iterable[int]) -> bool:
    d = Fraction(x).denominator
    for p in places:
        while d % p == 0:
            d //= p
    return d == 1


# ---------------------------------------------------------------------------
# Quick test


@dataclass
class QuickFilter:
    """Low-precision data for the linear-form inequality at each place.

    real: u'_i as floats with the constant c5*c8 (or None if not used);
    padic: per prime, residues of the logs modulo q^K plus log(c8).
    """

    c9: float
    real_u: np.ndarray | None = None
    real_const: float = 0.0
    padic: dict = field(default_factory=dict)   # q -> (residues int64 array, K, log_c8)

    @classmethod
    def build(cls, c5, c8, c9, real_u: Sequence | None, padic_logs: dict[int, Sequence[PadicNumber]],
              N_max: int, r: int):
        qf = cls(float(c9))
        if real_u is not None:
            qf.real_u = np.array([float(u) for u in real_u])
            qf.real_const = float(c5) * float(c8)
        for q, logs in padic_logs.items():
            K = int(math.floor(math.log(2 ** 62 / (r * N_max + 1)) / math.log(q)))
            K = max(1, min(K, min(L.abs_prec for L in logs)))
            res = np.array([L.residue(K) for L in logs], dtype=np.int64)
            qf.padic[q] = (res, K, math.log(float(c8)))
        return qf

    def passes(self, vecs: np.ndarray) -> np.ndarray:
        """Boolean mask over rows of an (m, r) int array."""
        N = np.abs(vecs).max(axis=1).astype(float)
        decay = self.c9 * N * N
        ok = np.zeros(len(vecs), dtype=bool)
        if self.real_u is not None:
            lam = vecs @ self.real_u
            dist = np.abs(lam - np.rint(lam))
            bound = SLACK * self.real_const * np.exp(-decay) + 1e-12
            ok |= dist <= bound
        for q, (res, K, logc8) in self.padic.items():
            mod = q ** K
            lam = (vecs.astype(np.int64) @ res) % mod
            # valuation of lam; exact when lam != 0 mod q^K
            v = np.zeros(len(vecs), dtype=np.int64)
            cur = lam.copy()
            alive = cur != 0
            while alive.any():
                alive &= cur % q == 0
                v[alive] += 1
                cur[alive] //= q
            # |Lambda|_q = q^-v <= SLACK * c8 exp(-c9 N^2); lam == 0 is kept
            need = (decay - logc8 - math.log(SLACK)) / math.log(q)
            ok |= (v >= need) | (lam == 0)
        return ok


def quick_test(n: Sequence[int], qf: QuickFilter) -> bool:
    return bool(qf.passes(np.array([list(n)], dtype=np.int64))[0])


# ---------------------------------------------------------------------------
# Enumeration


def _half_box(r: int, N: int) -> np.ndarray:
    """All nonzero vectors in [-N, N]^r whose first nonzero entry is positive."""
    rng = np.arange(-N, N + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * r), indexing="ij")
    vecs = np.stack([g.ravel() for g in grids], axis=1)
    nz = vecs != 0
    first = np.argmax(nz, axis=1)
    lead = vecs[np.arange(len(vecs)), first]
    return vecs[lead > 0]


class _Combiner:
    """Exact sum n_i P_i with cached multiples and prefix sums."""

    def __init__(self, basis: Sequence[RationalPoint], curve: Curve):
        self.basis = list(basis)
        self.curve = curve
        self.multiples: dict[tuple[int, int], RationalPoint] = {}
        self.prefix: dict[tuple[int, ...], RationalPoint] = {(): RationalPoint.identity()}

    def mult(self, i: int, n: int) -> RationalPoint:
        key = (i, n)
        if key not in self.multiples:
            if n == 0:
                P = RationalPoint.identity()
            elif abs(n) == 1:
                P = self.basis[i] if n > 0 else -self.basis[i]
            else:
                step = 1 if n > 0 else -1
                P = add(self.mult(i, n - step), self.mult(i, step), self.curve)
            self.multiples[key] = P
        return self.multiples[key]

    def combine(self, n: Sequence[int]) -> RationalPoint:
        # proper prefixes are cached; full vectors are not, to bound memory
        n = tuple(int(v) for v in n)
        for k in range(1, len(n)):
            if n[:k] not in self.prefix:
                self.prefix[n[:k]] = add(self.prefix[n[:k - 1]], self.mult(k - 1, n[k - 1]), self.curve)
        return add(self.prefix[n[:-1]], self.mult(len(n) - 1, n[-1]), self.curve)


def enumerate_candidates(basis: Sequence[RationalPoint], torsion: TorsionData, N: int,
                         qf: QuickFilter | None, curve: Curve, places: PlaceSet,
                         chunk: int = 2_000_000) -> tuple[list[SolutionRecord], dict]:
    """All S-integral points sum n_i P_i + T with max|n_i| <= N that pass the filter."""
    r = len(basis)
    found: dict[tuple[int, int, int], SolutionRecord] = {}
    stats = {"vectors": 0, "survivors": 0}
    tors = list(torsion.torsion_points)

    def consider(P: RationalPoint, coeffs, ti):
        if P.is_identity or not s_integrality_test(P, places):
            return
        rec = canonical_record(P, coeffs, ti)
        found.setdefault((rec.xi, rec.eta, rec.zeta), rec)

    for ti, T in enumerate(tors):
        if not T.is_identity:
            consider(T, (0,) * r, ti)
    if r == 0 or N <= 0:
        return sorted(found.values(), key=_sort_key), stats
    comb = _Combiner(basis, curve)
    vecs = _half_box(r, N)
    stats["vectors"] = len(vecs)
    keep = np.concatenate([qf.passes(vecs[i:i + chunk]) for i in range(0, len(vecs), chunk)]) \
        if qf is not None else np.ones(len(vecs), dtype=bool)
    surv = vecs[keep]
    stats["survivors"] = len(surv)
    # lexicographic order maximises prefix reuse
    for n in surv[np.lexsort(surv.T[::-1])]:
        P = comb.combine(n)
        for ti, T in enumerate(tors):
            Q = add(P, T, curve) if not T.is_identity else P
            consider(Q, tuple(int(v) for v in n), ti)
            # -P + T is not covered by the half box when T != -T
            if not T.is_identity:
                Q2 = add(-P, T, curve)
                consider(Q2, tuple(-int(v) for v in n), ti)
    return sorted(found.values(), key=_sort_key), stats


def _sort_key(rec: SolutionRecord):
    return (rec.zeta, Fraction(rec.xi, rec.zeta ** 2), rec.eta)


# ---------------------------------------------------------------------------
# Residual search


def extra_search(curve: Curve, places: PlaceSet, cutoff, alpha_bounds: dict[int, int]) -> list[RationalPoint]:
    """All points with |x|_v <= cutoff at every place of S (eta >= 0 representatives).

    x = xi/zeta^2 with zeta^2 | prod q^alpha_q and |xi| <= cutoff * zeta^2.
    """
    exps = [range(0, alpha_bounds.get(q, 0) // 2 + 1) for q in places.finite_primes]
    out = []
    cutoff = mpmath.mpf(cutoff)
    for es in itertools.product(*exps):
        zeta = 1
        for q, e in zip(places.finite_primes, es):
            zeta *= q ** e
        z2 = zeta * zeta
        lim = int(mpmath.floor(cutoff * z2))
        z4, z6 = z2 * z2, z2 ** 3
        for xi in range(-lim, lim + 1):
            if math.gcd(xi, zeta) != 1:
                continue
            rhs = xi ** 3 + curve.a * xi * z4 + curve.b * z6
            if rhs < 0:
                continue
            eta = math.isqrt(rhs)
            if eta * eta == rhs:
                out.append(RationalPoint(xi, eta, zeta))
    return out


def express_in_basis(P: RationalPoint, basis: Sequence[RationalPoint], torsion: TorsionData,
                     curve: Curve, pairing_matrix, digits: int = 30) -> tuple[tuple[int, ...], int]:
    """Coefficients n and torsion index with P = sum n_i P_i + T.

    n is read off from the height pairing (n = M^-1 <P, P_i>) and then
    confirmed exactly; neighbouring integer vectors are tried if rounding
    was ambiguous.
    """
    from .heights import canonical_height
    r = len(basis)
    tors = list(torsion.torsion_points)
    if r == 0:
        cand = [()]
    else:
        with mpmath.workdps(digits + 10):
            hP = canonical_height(P, curve, digits)
            v = mpmath.matrix(r, 1)
            for i, Pi in enumerate(basis):
                v[i] = (canonical_height(add(P, Pi, curve), curve, digits) - hP
                        - canonical_height(Pi, curve, digits))
            sol = mpmath.lu_solve(pairing_matrix, v)
            base = [int(mpmath.nint(sol[i])) for i in range(r)]
        cand = [tuple(b + d for b, d in zip(base, delta))
                for delta in itertools.product((0, -1, 1), repeat=r)]
    for n in cand:
        S = RationalPoint.identity()
        for c, Pi in zip(n, basis):
            if c:
                S = add(S, scalar_mul(c, Pi, curve), curve)
        for ti, T in enumerate(tors):
            if add(S, T, curve) == P:
                return tuple(n), ti
    raise ValueError(f"{P} is not in the span of the basis and torsion")
