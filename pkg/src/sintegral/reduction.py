"""Integral LLL and lattice reduction of the bound N at each place.

Real place.  With u'_1..u'_r the normalised logs and
Lambda = sum n_i u'_i + n_{r+1}, the lattice spanned by the rows

    e_i + [C u'_i] e_{r+1}  (i <= r),     C e_{r+1}

contains y = (n_1, .., n_r, sum n_i [C u'_i] + n_{r+1} C), whose last
coordinate is C Lambda + theta with |theta| <= T = (1 + r N)/2 (rounding
errors plus one for the precision of u').  If every nonzero lattice vector
has length >= l and l^2 > T^2 + S with S = r N^2, then
|Lambda| >= (sqrt(l^2 - S) - T)/C, since y is a nonzero lattice vector and
l^2 <= |y|^2 <= S + (C |Lambda| + T)^2.  Combined with
|Lambda| <= c5 c8 exp(-c9 N^2) this gives

    N^2 <= (log(C c5 c8) - log(sqrt(l^2 - S) - T)) / c9.

q-adic place.  Divide by a log of minimal valuation v0 and work in the
lattice {n : sum n_i beta_i = 0 mod q^mu}.  If every nonzero vector has
length > sqrt(r) N then a solution with N <= N_current is not in it, so
v_q(Lambda) < mu + v0 and

    N^2 < ((mu + v0) log q + log c8) / c9.

For the lower bound l on the shortest vector we use the larger of
2^{-(n-1)/2} |b_1| and min |b_i*| for the LLL-reduced basis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from .errors import (AllLogsVanish, InsufficientPrecision, NeedLargerC,
                     NeedLargerMu, NonConvergence, SIntegralError)
from .padic import PadicNumber

log = logging.getLogger(__name__)

Vector = list[int]


# ---------------------------------------------------------------------------
# LLL


@dataclass
class LLLResult:
    basis: list[Vector]
    d: list[int]          # d[0] = 1, d[i] = Gram determinant of the first i rows
    swaps: int

    def gs_sqnorms(self) -> list[Fraction]:
        return [Fraction(self.d[i + 1], self.d[i]) for i in range(len(self.basis))]


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(rows: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> LLLResult:
    """Integral LLL on linearly independent rows.

    All arithmetic is exact; d_i and lambda_ij are the integral
    Gram-Schmidt data, so no floating point enters.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    dp, dq = delta.numerator, delta.denominator
    b = [list(map(int, r)) for r in rows]
    n = len(b)
    if n == 0:
        return LLLResult([], [1], 0)
    d = [0] * (n + 1)
    d[0] = 1
    lam = [[0] * n for _ in range(n)]
    swaps = 0

    def red(k, l):
        dl = d[l + 1]
        if 2 * abs(lam[k][l]) > dl:
            qq = (2 * lam[k][l] + dl) // (2 * dl)
            bk, bl = b[k], b[l]
            for i in range(len(bk)):
                bk[i] -= qq * bl[i]
            lam[k][l] -= qq * dl
            for i in range(l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        L = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + L * L) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - L * t) // d[k]
            lam[i][k - 1] = (B * t + L * lam[i][k]) // d[k + 1]
        d[k] = B

    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("dependent rows")
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
                    if u == 0:
                        raise ValueError("dependent rows")
        red(k, k - 1)
        if dq * d[k + 1] * d[k - 1] < dp * d[k] ** 2 - dq * lam[k][k - 1] ** 2:
            swap(k)
            swaps += 1
            k = max(1, k - 1)
            continue
        for l in range(k - 2, -1, -1):
            red(k, l)
        k += 1
    return LLLResult(b, d, swaps)


def is_lll_reduced(res: LLLResult, delta: Fraction = Fraction(3, 4)) -> bool:
    """Size reduction and Lovasz conditions, checked exactly."""
    b = res.basis
    n = len(b)
    # exact Gram-Schmidt over Q
    bstar: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = sum(x * y for x, y in zip(b[i], bstar[j])) / norms[j]
            v = [vi - mu[i][j] * yj for vi, yj in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(y * y for y in v))
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if norms[k] < (Fraction(delta) - mu[k][k - 1] ** 2) * norms[k - 1]:
            return False
    return True


def shortest_vector_lower_bound(res: LLLResult) -> mpf:
    """max(2^{-(n-1)/2} |b_1|, min_i |b_i*|) <= length of any nonzero vector."""
    n = len(res.basis)
    b1 = mpmath.sqrt(_dot(res.basis[0], res.basis[0]))
    via_b1 = b1 / mpmath.sqrt(2) ** (n - 1)
    gs = res.gs_sqnorms()
    via_gs = mpmath.sqrt(min(mpf(g.numerator) / g.denominator for g in gs))
    return max(via_b1, via_gs)


# ---------------------------------------------------------------------------
# Steps


@dataclass
class ReductionStep:
    iteration: int
    place: str
    N_in: int
    scale: str          # "10^k" or "q^mu"
    bound: int | None   # None on failure

    def as_dict(self):
        return {"iteration": self.iteration, "place": self.place, "N_in": self.N_in,
                "scale": self.scale, "bound": self.bound}


def real_lattice(u_primes: Sequence, C: int) -> list[Vector]:
    r = len(u_primes)
    rows = []
    for i, u in enumerate(u_primes):
        row = [0] * (r + 1)
        row[i] = 1
        row[r] = int(mpmath.nint(C * u))
        rows.append(row)
    rows.append([0] * r + [C])
    return rows


def reduce_real_place(u_primes: Sequence, N: int, c5, c8, c9, C: int,
                      log_digits: int, delta: Fraction = Fraction(3, 4)) -> int:
    """New bound for solutions of the real linear-form inequality with N <= N."""
    r = len(u_primes)
    if r == 0:
        return 0
    need = int(math.log10(C)) + 30
    if log_digits < need:
        raise InsufficientPrecision(f"logs known to {log_digits} digits, need {need}")
    with mpmath.workdps(max(need, 50) + 20):
        res = lll_reduce(real_lattice(u_primes, C), delta)
        l = shortest_vector_lower_bound(res)
        S = mpf(r) * N * N
        T = (1 + mpf(r) * N) / 2
        if not l * l > T * T + S:
            raise NeedLargerC(f"shortest vector {mpmath.nstr(l, 5)} too short for N = {N}")
        gap = mpmath.sqrt(l * l - S) - T
        val = (mpmath.log(C * mpf(c5) * c8) - mpmath.log(gap)) / c9
        return int(mpmath.floor(mpmath.sqrt(max(val, 0))))


def padic_lattice(logs: Sequence[PadicNumber], mu: int) -> tuple[list[Vector], int, int]:
    """Rows of {n : sum n_i beta_i = 0 mod q^mu} with beta_i = log_i / log_i0.

    Returns (rows, i0, v0)."""
    q = logs[0].q
    nonzero = [i for i, L in enumerate(logs) if not L.is_zero]
    if not nonzero:
        raise AllLogsVanish("every log vanishes to the working precision")
    i0 = min(nonzero, key=lambda i: logs[i].val)
    v0 = logs[i0].val
    base = logs[i0]
    r = len(logs)
    rows = []
    mod = q ** mu
    for i in range(r):
        if i == i0:
            continue
        beta = logs[i] / base
        if beta.abs_prec < mu:
            raise InsufficientPrecision(f"log ratio known to {beta.abs_prec} digits, need {mu}")
        row = [0] * r
        row[i] = 1
        row[i0] = -beta.residue(mu) % mod
        rows.append(row)
    row = [0] * r
    row[i0] = mod
    rows.append(row)
    return rows, i0, v0


def reduce_padic_place(logs: Sequence[PadicNumber], N: int, c8, c9, mu: int,
                       delta: Fraction = Fraction(3, 4)) -> int:
    r = len(logs)
    if r == 0:
        return 0
    q = logs[0].q
    rows, i0, v0 = padic_lattice(logs, mu)
    res = lll_reduce(rows, delta)
    with mpmath.workdps(50):
        l = shortest_vector_lower_bound(res)
        if not l * l > mpf(r) * N * N:
            raise NeedLargerMu(f"shortest vector {mpmath.nstr(l, 5)} too short for N = {N}")
        val = ((mu + v0) * mpmath.log(q) + mpmath.log(c8)) / c9
        return int(mpmath.floor(mpmath.sqrt(max(val, 0))))


# ---------------------------------------------------------------------------
# Driver


def initial_real_exponent(r: int, N: int, margin: int = 20) -> int:
    return int(math.ceil((r + 1) * math.log10(max(N, 2)))) + margin


def initial_mu(r: int, N: int, q: int, margin: int = 15) -> int:
    return int(math.ceil(r * math.log(max(N, 2)) / math.log(q))) + margin


@dataclass
class DriverConfig:
    delta: Fraction = Fraction(3, 4)
    max_iterations: int = 30
    max_retries: int = 6
    c_step: int = 10            # multiply C by 10^c_step on failure
    mu_step: int = 10
    ladder: bool = True         # also try smaller scales after a success
    ladder_step_real: int = 3
    ladder_step_padic: int = 2


@dataclass
class ReductionOutcome:
    N_final: int
    trace: list[ReductionStep] = field(default_factory=list)
    rounds: list[int] = field(default_factory=list)   # bound after each full round


def _try_real(get_logs, N, r, c5, c8, c9, exp10, cfg, it, trace):
    u, digits = get_logs(exp10 + 40)
    try:
        bound = reduce_real_place(u, N, c5, c8, c9, 10 ** exp10, digits, cfg.delta)
    except NeedLargerC:
        trace.append(ReductionStep(it, "inf", N, f"10^{exp10}", None))
        return None
    trace.append(ReductionStep(it, "inf", N, f"10^{exp10}", bound))
    return bound


def _try_padic(get_logs, q, N, c8, c9, mu, cfg, it, trace):
    logs = get_logs(q, mu)
    try:
        bound = reduce_padic_place(logs, N, c8, c9, mu, cfg.delta)
    except NeedLargerMu:
        trace.append(ReductionStep(it, str(q), N, f"{q}^{mu}", None))
        return None
    trace.append(ReductionStep(it, str(q), N, f"{q}^{mu}", bound))
    return bound


def reduce_place(place, N: int, r: int, consts: dict, get_real_logs, get_padic_logs,
                 cfg: DriverConfig, it: int, trace: list, ladder: bool | None = None) -> int:
    """Best bound at one place; raises NonConvergence if no scale works."""
    c5, c8, c9 = consts["c5"], consts["c8"], consts["c9"]
    ladder = cfg.ladder if ladder is None else ladder
    if place == "inf":
        e = initial_real_exponent(r, N)
        for _ in range(cfg.max_retries):
            b = _try_real(get_real_logs, N, r, c5, c8, c9, e, cfg, it, trace)
            if b is not None:
                break
            e += cfg.c_step
        else:
            raise NonConvergence(f"real reduction failed up to C = 10^{e}")
        best = b
        while ladder and e - cfg.ladder_step_real > 0:
            e -= cfg.ladder_step_real
            b = _try_real(get_real_logs, N, r, c5, c8, c9, e, cfg, it, trace)
            if b is None or b > best:
                break
            best = b
        return best
    q = place
    mu = initial_mu(r, N, q)
    for _ in range(cfg.max_retries):
        b = _try_padic(get_padic_logs, q, N, c8, c9, mu, cfg, it, trace)
        if b is not None:
            break
        mu += cfg.mu_step
    else:
        raise NonConvergence(f"{q}-adic reduction failed up to mu = {mu}")
    best = b
    while ladder and mu - cfg.ladder_step_padic > 0:
        mu -= cfg.ladder_step_padic
        b = _try_padic(get_padic_logs, q, N, c8, c9, mu, cfg, it, trace)
        if b is None or b > best:
            break
        best = b
    return best


def reduction_driver(places: Sequence, r: int, N0: int, consts_by_place: dict,
                     get_real_logs: Callable, get_padic_logs: Callable,
                     cfg: DriverConfig | None = None, first_round_ladder: bool = False) -> ReductionOutcome:
    """Iterate reductions at every place until the bound stops improving.

    ``places`` holds "inf" and/or primes.  ``get_real_logs(digits)`` returns
    (u_primes, digits_known); ``get_padic_logs(q, mu)`` returns the logs at
    q with enough precision for mu digits of their ratios.
    """
    cfg = cfg or DriverConfig()
    out = ReductionOutcome(N0)
    if r == 0:
        out.N_final = 0
        return out
    N = N0
    try:
        for it in range(cfg.max_iterations):
            ladder = cfg.ladder and (it > 0 or first_round_ladder)
            bounds = [reduce_place(p, N, r, consts_by_place[p], get_real_logs, get_padic_logs,
                                   cfg, it, out.trace, ladder) for p in places]
            newN = min(N, max(bounds))
            out.rounds.append(newN)
            log.info("reduction round %d: N <= %d", it, newN)
            if newN >= N:
                break
            N = newN
        else:
            raise NonConvergence("iteration cap reached")
    except SIntegralError as e:
        # the trace so far is still a valid record of certified steps
        out.N_final = N
        e.outcome = out
        raise
    out.N_final = N
    return out
