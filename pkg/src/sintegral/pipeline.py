"""Problem parsing and the end-to-end solver.

Stages: validate -> heights -> periods/logs -> bounds -> reduction ->
enumeration -> extra search.  Every stage logs a tagged line to the
``sintegral`` logger and records its wall time.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath
import sympy

from .bounds import BoundLedger, build_ledger
from .curve import (CoordinateMap, Curve, PlaceSet, RationalPoint, TorsionData,
                    has_good_reduction, long_to_short, multiplier_m, scalar_mul,
                    torsion_subgroup, validate_curve)
from .ell_log_real import compute_periods, elliptic_logs, normalized_logs
from .errors import (BadReduction, EvenCharacteristic, InvalidProblem, NotIndependent,
                     SIntegralError)
from .heights import RegulatorData, canonical_height, regulator_and_lambda
from .padic import padic_elliptic_log, series_for_curve
from .reduction import DriverConfig, ReductionOutcome, reduction_driver
from .search import (QuickFilter, SolutionRecord, canonical_record, enumerate_candidates,
                     express_in_basis, extra_search)

log = logging.getLogger("sintegral")


@dataclass
class SolverConfig:
    """Tunable parameters; all have documented ranges checked in ``validate``."""

    t: int = 200                    # q-adic log series length, >= 20
    guard: int = 10                 # guard digits, >= 0
    lll_delta: str = "3/4"          # in (1/4, 1]
    height_digits: int = 40         # >= 20
    max_iterations: int = 30
    max_retries: int = 6
    ladder: bool = True
    initial_bound: str = "N0"       # N0 | N0_prime | N1 | min   (the last three need s = 1)
    c6_alternative: bool = False
    extra_search: bool = True
    quick_digits: int = 30
    threads: int = 1

    def validate(self) -> None:
        d = Fraction(self.lll_delta)
        if not Fraction(1, 4) < d <= 1:
            raise InvalidProblem(f"lll_delta {self.lll_delta} outside (1/4, 1]")
        if self.t < 20 or self.guard < 0 or self.height_digits < 20:
            raise InvalidProblem("t >= 20, guard >= 0, height_digits >= 20 required")
        if self.max_iterations < 1 or self.max_retries < 1 or self.threads < 1:
            raise InvalidProblem("iteration caps and threads must be positive")
        if self.initial_bound not in ("N0", "N0_prime", "N1", "min"):
            raise InvalidProblem(f"unknown initial_bound {self.initial_bound!r}")

    def with_overrides(self, overrides: dict[str, Any]) -> "SolverConfig":
        kinds = {f.name: f.type for f in dataclasses.fields(self)}
        vals = {}
        for k, v in overrides.items():
            if k not in kinds:
                raise InvalidProblem(f"unknown config key {k!r}")
            cur = getattr(self, k)
            if isinstance(cur, bool):
                if isinstance(v, str):
                    if v.lower() not in ("1", "0", "true", "false", "yes", "no"):
                        raise InvalidProblem(f"bad boolean for {k}: {v!r}")
                    v = v.lower() in ("1", "true", "yes")
                vals[k] = bool(v)
            elif isinstance(cur, int):
                try:
                    vals[k] = int(v)
                except (TypeError, ValueError):
                    raise InvalidProblem(f"bad integer for {k}: {v!r}") from None
            else:
                vals[k] = str(v)
        out = dataclasses.replace(self, **vals)
        out.validate()
        return out


@dataclass
class ProblemSpec:
    curve: Curve                     # short model actually solved
    primes: tuple[int, ...]
    basis: tuple[RationalPoint, ...]  # on the short model
    torsion_override: tuple[RationalPoint, ...] | None = None
    config: SolverConfig = field(default_factory=SolverConfig)
    long_ainvs: tuple[int, ...] | None = None
    coord_map: CoordinateMap | None = None
    name: str = ""


def _parse_int(v, what: str) -> int:
    if isinstance(v, bool):
        raise InvalidProblem(f"{what}: expected integer")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v.strip())
        except ValueError:
            pass
    raise InvalidProblem(f"{what}: expected integer or decimal string, got {v!r}")


def _parse_rational(v, what: str) -> Fraction:
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        try:
            return Fraction(str(v).strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise InvalidProblem(f"{what}: expected rational as string, got {v!r}")


def _parse_point(v, what: str):
    if isinstance(v, dict):
        return _parse_rational(v.get("x"), what + ".x"), _parse_rational(v.get("y"), what + ".y")
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return _parse_rational(v[0], what + "[0]"), _parse_rational(v[1], what + "[1]")
    raise InvalidProblem(f"{what}: expected [x, y] or {{x, y}}")


def parse_problem(doc: dict, overrides: dict[str, Any] | None = None) -> ProblemSpec:
    """Build a ProblemSpec from the JSON document.

    Schema::

        {"name": str?,
         "curve": {"a": "..", "b": ".."} | {"a1": .., "a2": .., "a3": .., "a4": .., "a6": ..},
         "S": [primes],
         "basis": [[x, y], ...],           # on the given model
         "torsion": [[x, y], ...]?,        # optional override, identity implied
         "config": {key: value}?}
    """
    if not isinstance(doc, dict):
        raise InvalidProblem("problem must be a JSON object")
    cdoc = doc.get("curve")
    if not isinstance(cdoc, dict):
        raise InvalidProblem("missing curve")
    long_ainvs = cmap = None
    try:
        if "a" in cdoc and "b" in cdoc:
            curve = validate_curve(_parse_int(cdoc["a"], "curve.a"), _parse_int(cdoc["b"], "curve.b"))
        elif all(k in cdoc for k in ("a1", "a2", "a3", "a4", "a6")):
            long_ainvs = tuple(_parse_int(cdoc[k], f"curve.{k}") for k in ("a1", "a2", "a3", "a4", "a6"))
            curve, cmap = long_to_short(*long_ainvs)
        else:
            raise InvalidProblem("curve needs a, b or a1, a2, a3, a4, a6")
    except SIntegralError as e:
        if isinstance(e, InvalidProblem):
            raise
        raise InvalidProblem(str(e)) from e

    primes = doc.get("S", [])
    if not isinstance(primes, list):
        raise InvalidProblem("S must be a list of primes")
    ps = tuple(_parse_int(p, "S") for p in primes)
    if len(set(ps)) != len(ps):
        raise InvalidProblem("S primes must be distinct")
    for p in ps:
        if p < 2 or not sympy.isprime(p):
            raise InvalidProblem(f"{p} is not prime")

    def on_model(xy, what):
        x, y = xy
        if cmap is None:
            if y * y != x ** 3 + curve.a * x + curve.b:
                raise InvalidProblem(f"{what} is not on the curve")
            return RationalPoint.from_xy(x, y)
        if not cmap.on_long_curve(x, y):
            raise InvalidProblem(f"{what} is not on the curve")
        return cmap.forward(RationalPoint.from_xy(x, y))

    bdoc = doc.get("basis", [])
    if not isinstance(bdoc, list):
        raise InvalidProblem("basis must be a list")
    basis = tuple(on_model(_parse_point(v, f"basis[{i}]"), f"basis[{i}]") for i, v in enumerate(bdoc))
    tors = None
    if doc.get("torsion") is not None:
        tors = tuple(on_model(_parse_point(v, f"torsion[{i}]"), f"torsion[{i}]")
                     for i, v in enumerate(doc["torsion"]))
    cfgdoc = dict(doc.get("config") or {})
    cfgdoc.update(overrides or {})
    cfg = SolverConfig().with_overrides(cfgdoc)
    return ProblemSpec(curve, ps, basis, tors, cfg, long_ainvs, cmap, str(doc.get("name", "")))


# ---------------------------------------------------------------------------


@dataclass
class PipelineResult:
    spec: ProblemSpec
    torsion: TorsionData
    regulator: RegulatorData | None
    omega: Any
    multipliers: dict[int, int]
    ledger: BoundLedger | None
    N_initial: int | None = None
    reduction: ReductionOutcome | None = None
    records: list[SolutionRecord] = field(default_factory=list)
    extra_points: int = 0
    stats: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    bound_only: bool = False
    # records equal to their own negative (2-torsion), by position
    self_negative: list[bool] = field(default_factory=list)

    @property
    def count_with_sign(self) -> int:
        return sum(1 if t else 2 for t in self.self_negative)

    @property
    def count_integral_with_sign(self) -> int:
        return sum(1 if t else 2 for R, t in zip(self.records, self.self_negative) if R.zeta == 1)


class _Stage:
    def __init__(self, name: str, timings: dict):
        self.name, self.timings = name, timings

    def __enter__(self):
        log.info("[%s] start", self.name)
        self.t = time.perf_counter()
        return self

    def __exit__(self, et, ev, tb):
        dt = time.perf_counter() - self.t
        self.timings[self.name] = round(dt, 3)
        if ev is not None and isinstance(ev, SIntegralError) and not getattr(ev, "stage", None):
            ev.stage = self.name
        log.info("[%s] %s in %.2fs", self.name, "failed" if ev else "done", dt)
        return False


def check_places(curve: Curve, primes: Sequence[int]) -> None:
    for q in primes:
        if q == 2:
            raise EvenCharacteristic()
        if not has_good_reduction(curve, q):
            raise BadReduction(q)


class LogProvider:
    """Cached real and q-adic elliptic logs of the basis."""

    def __init__(self, curve: Curve, basis: Sequence[RationalPoint], g: int,
                 multipliers: dict[int, int], cfg: SolverConfig):
        self.curve, self.basis, self.g = curve, list(basis), g
        self.m = multipliers
        self.cfg = cfg
        self._real: tuple[int, list] | None = None
        self._padic: dict[int, tuple[int, list]] = {}
        self._mult_points: dict[int, list[RationalPoint]] = {}

    def real(self, digits: int):
        if self._real is None or self._real[0] < digits:
            work = max(digits, 50) + self.cfg.guard
            with mpmath.workdps(work):
                per = compute_periods(self.curve, work)
                logs = elliptic_logs(self.basis, self.curve, per, work)
                u, _ = normalized_logs(logs, self.g, per)
            self._real = (digits, list(u))
        return self._real[1], self._real[0]

    def padic(self, q: int, mu: int):
        need = mu + 20
        cached = self._padic.get(q)
        if cached is not None:
            n, logs = cached
            v0 = min((L.val for L in logs if not L.is_zero), default=0)
            if n >= mu + v0 + 2:
                return logs
            need = max(need, mu + v0 + 20)
        if q not in self._mult_points:
            self._mult_points[q] = [scalar_mul(self.m[q], P, self.curve) for P in self.basis]
        while True:
            logs = self._padic_logs(q, need)
            v0 = min((L.val for L in logs if not L.is_zero), default=0)
            if need >= mu + v0 + 2:
                break
            need = mu + v0 + 20
        self._padic[q] = (need, logs)
        return logs

    def _padic_logs(self, q: int, n: int):
        pts = self._mult_points[q]
        if self.cfg.threads > 1 and len(pts) > 1:
            jobs = [(P, q, n, self.curve, self.cfg.t, self.cfg.guard) for P in pts]
            with ProcessPoolExecutor(max_workers=min(self.cfg.threads, len(pts))) as ex:
                return list(ex.map(_padic_job, jobs))
        series = series_for_curve(self.curve.ainvs, self.cfg.t)
        return [padic_elliptic_log(P, q, n, self.curve, self.cfg.t, series, self.cfg.guard) for P in pts]


def _padic_job(args):
    P, q, n, curve, t, guard = args
    return padic_elliptic_log(P, q, n, curve, t, None, guard)


def _pick_initial(ledger: BoundLedger, mode: str, s: int) -> int:
    if mode == "N0" or s != 1:
        if mode != "N0":
            log.warning("initial_bound=%s needs s = 1; using N0", mode)
        return int(mpmath.ceil(ledger.N0))
    cands = {"N0_prime": [ledger.N0_prime], "N1": [ledger.N1],
             "min": [ledger.N0, ledger.N0_prime, ledger.N1]}[mode]
    cands = [c for c in cands if c is not None]
    if not cands:
        return int(mpmath.ceil(ledger.N0))
    return int(mpmath.ceil(min(cands)))


def run_pipeline(spec: ProblemSpec, bound_only: bool = False) -> PipelineResult:
    """Solve one problem.  On failure the exception carries ``partial``, the
    result filled in up to the failing stage (or None before heights)."""
    holder: dict[str, PipelineResult] = {}
    try:
        return _run(spec, bound_only, holder)
    except SIntegralError as e:
        e.partial = holder.get("result")
        raise


def _run(spec: ProblemSpec, bound_only: bool, holder: dict) -> PipelineResult:
    cfg = spec.config
    curve = spec.curve
    timings: dict[str, float] = {}
    places = PlaceSet(spec.primes)

    with _Stage("validate", timings):
        check_places(curve, spec.primes)
        if spec.torsion_override is not None:
            pts = [RationalPoint.identity()] + [P for P in spec.torsion_override if not P.is_identity]
            torsion = TorsionData(len(pts), tuple(pts))
            for P in pts[1:]:
                if not scalar_mul(torsion.g, P, curve).is_identity:
                    raise InvalidProblem(f"torsion override {P} has order not dividing {torsion.g}")
        else:
            torsion = torsion_subgroup(curve)
        for P in spec.basis:
            if P.is_identity:
                raise InvalidProblem("basis contains the identity")
        multipliers = {q: multiplier_m(curve, q, torsion.g) for q in spec.primes}
        log.info("[validate] g = %d, m = %s", torsion.g, multipliers)

    result = PipelineResult(spec, torsion, None, None, multipliers, None, timings=timings,
                            bound_only=bound_only)
    holder["result"] = result
    r = len(spec.basis)

    with _Stage("heights", timings):
        reg = None
        if r:
            reg = regulator_and_lambda(list(spec.basis), curve, cfg.height_digits)
            if not reg.lam_half > 0:
                raise NotIndependent("height pairing matrix is singular")
            log.info("[heights] lambda = %s, R = %s", mpmath.nstr(reg.lam, 10), mpmath.nstr(reg.regulator, 10))
        result.regulator = reg

    provider = LogProvider(curve, spec.basis, torsion.g, multipliers, cfg)
    with _Stage("periods", timings):
        with mpmath.workdps(cfg.height_digits + cfg.guard):
            per = compute_periods(curve, cfg.height_digits + cfg.guard)
            result.omega = per.omega
            u_low = None
            if r:
                u_low, _ = normalized_logs(elliptic_logs(list(spec.basis), curve, per,
                                                         cfg.height_digits + cfg.guard),
                                           torsion.g, per)
                hhat = [canonical_height(P, curve, cfg.height_digits) for P in spec.basis]
            else:
                hhat = []

    with _Stage("bounds", timings):
        lam = reg.lam_half if reg else mpmath.mpf(1)
        ledger = build_ledger(curve, places, lam, torsion.g, per.omega,
                              tau_im=per.tau.imag if r else None, hhat=tuple(hhat),
                              u_primes=tuple(u_low or ()), c6_alternative=cfg.c6_alternative,
                              digits=cfg.height_digits)
        result.ledger = ledger
        N_init = _pick_initial(ledger, cfg.initial_bound, places.s)
        result.N_initial = N_init
        log.info("[bounds] N0 = %s, initial N = %.3e", mpmath.nstr(ledger.N0, 6), N_init)
    if bound_only:
        return result

    order = ["inf"] + list(spec.primes)
    consts = {p: {"c5": ledger.c5_real, "c8": ledger.c8, "c9": ledger.c9} for p in order}
    dcfg = DriverConfig(delta=Fraction(cfg.lll_delta), max_iterations=cfg.max_iterations,
                        max_retries=cfg.max_retries, ladder=cfg.ladder)
    with _Stage("reduction", timings):
        try:
            outcome = reduction_driver(order, r, N_init, consts, provider.real, provider.padic, dcfg)
        except SIntegralError as e:
            result.reduction = getattr(e, "outcome", None)
            raise
        result.reduction = outcome
        log.info("[reduction] rounds %s, final N = %d", outcome.rounds, outcome.N_final)

    with _Stage("enumeration", timings):
        qf = None
        if r:
            real_u, _ = provider.real(cfg.quick_digits)
            plogs = {q: provider.padic(q, cfg.quick_digits) for q in spec.primes}
            qf = QuickFilter.build(ledger.c5_real, ledger.c8, ledger.c9, real_u, plogs,
                                   outcome.N_final, r)
        records, stats = enumerate_candidates(list(spec.basis), torsion, outcome.N_final, qf,
                                              curve, places)
        result.stats.update(stats)
        log.info("[enumeration] %d vectors, %d survivors, %d points",
                 stats["vectors"], stats["survivors"], len(records))

    if cfg.extra_search:
        with _Stage("extra_search", timings):
            seen = {(R.xi, R.eta, R.zeta) for R in records}
            extra = extra_search(curve, places, max(ledger.x0, ledger.mu_inf_exp), ledger.alpha_bounds)
            result.extra_points = len(extra)
            new = 0
            for P in extra:
                if (P.xi, P.eta, P.zeta) in seen:
                    continue
                n, ti = express_in_basis(P, spec.basis, torsion, curve, reg.matrix if reg else None)
                records.append(canonical_record(P, n, ti))
                seen.add((P.xi, P.eta, P.zeta))
                new += 1
            result.stats["extra_new"] = new
            log.info("[extra_search] %d points, %d not found by enumeration", len(extra), new)
        records.sort(key=lambda R: (R.zeta, Fraction(R.xi, R.zeta ** 2), R.eta))

    if spec.coord_map is not None:
        records, result.self_negative = _filter_long(records, spec)
    else:
        result.self_negative = [R.eta == 0 for R in records]
    result.records = records
    return result


def _filter_long(records: list[SolutionRecord], spec: ProblemSpec):
    """Keep points whose long-model x is S-integral, reported on the long model.

    The stored representative is the one whose short-model eta is >= 0.
    """
    out, selfneg = [], []
    for R in records:
        x, y = spec.coord_map.backward_xy(Fraction(R.xi, R.zeta ** 2), Fraction(R.eta, R.zeta ** 3))
        d = x.denominator
        for p in spec.primes:
            while d % p == 0:
                d //= p
        if d != 1:
            continue
        zeta = math.isqrt(x.denominator)
        out.append(SolutionRecord(x.numerator, int(y * zeta ** 3), zeta, R.coefficients, R.torsion_index))
        selfneg.append(R.eta == 0)
    return out, selfneg


# ---------------------------------------------------------------------------
# Output


def _num(v) -> str:
    return mpmath.nstr(v, 15) if v is not None else None


def result_document(res: PipelineResult, include_timing: bool = False) -> dict:
    spec = res.spec
    doc: dict[str, Any] = {
        "name": spec.name,
        "curve": ({k: str(v) for k, v in zip(("a1", "a2", "a3", "a4", "a6"), spec.long_ainvs)}
                  if spec.long_ainvs else {"a": str(spec.curve.a), "b": str(spec.curve.b)}),
        "short_model": {"a": str(spec.curve.a), "b": str(spec.curve.b)},
        "S": list(spec.primes),
        "rank": len(spec.basis),
        "torsion_order": res.torsion.g,
        "multipliers": {str(q): m for q, m in res.multipliers.items()},
        "omega": _num(res.omega),
    }
    if res.regulator is not None:
        doc["regulator"] = _num(res.regulator.regulator)
        doc["lambda"] = _num(res.regulator.lam)
        doc["lambda_used"] = _num(res.regulator.lam_half)
    led = res.ledger.as_dict() if res.ledger else {}
    doc["ledger"] = {"rounding": "upper bounds rounded up; lambda, lambda_used and c9 rounded down",
                     "values": led, "N_initial": str(res.N_initial) if res.N_initial is not None else None}
    if res.bound_only:
        if include_timing:
            doc["timing"] = dict(res.timings)
        return doc
    red = res.reduction
    doc["reduction"] = {
        "rounds": [int(v) for v in red.rounds] if red else [],
        "N_final": int(red.N_final) if red else None,
        "steps": [s.as_dict() for s in red.trace] if red else [],
    }
    doc["search"] = {k: int(v) for k, v in sorted(res.stats.items())}
    doc["search"]["extra_search_points"] = res.extra_points
    doc["points"] = [R.as_dict() for R in res.records]
    doc["counts"] = {"points": len(res.records), "with_sign": res.count_with_sign,
                     "integral_with_sign": res.count_integral_with_sign}
    if include_timing:
        doc["timing"] = dict(res.timings)
    return doc


def _poly(terms) -> str:
    out = ""
    for coef, mon in terms:
        if coef == 0:
            continue
        mag = str(abs(coef)) if abs(coef) != 1 or not mon else ""
        sign = "-" if coef < 0 else "+"
        out += (f" {sign} " if out else ("-" if coef < 0 else "")) + mag + mon
    return out or "0"


def format_text(doc: dict) -> str:
    lines = []
    c = {k: int(v) for k, v in doc["curve"].items()}
    if "a" in c:
        eq = "y^2 = " + _poly([(1, "x^3"), (c["a"], "x"), (c["b"], "")])
    else:
        eq = (_poly([(1, "y^2"), (c["a1"], "xy"), (c["a3"], "y")]) + " = "
              + _poly([(1, "x^3"), (c["a2"], "x^2"), (c["a4"], "x"), (c["a6"], "")]))
    lines.append(f"curve: {eq}")
    lines.append("S: {" + ", ".join(str(p) for p in doc["S"]) + ", inf}")
    lines.append(f"rank {doc['rank']}, torsion order {doc['torsion_order']}")
    if "regulator" in doc:
        lines.append(f"regulator {doc['regulator']}, lambda {doc['lambda']}")
    lines.append(f"omega {doc['omega']}")
    lines.append("ledger:")
    for k, v in doc["ledger"]["values"].items():
        lines.append(f"  {k} = {v}")
    lines.append(f"  N_initial = {doc['ledger']['N_initial']}")
    if "reduction" not in doc:
        return "\n".join(lines) + "\n"
    lines.append("reduction rounds: " + " -> ".join(str(v) for v in doc["reduction"]["rounds"]))
    lines.append(f"final bound: {doc['reduction']['N_final']}")
    pts = doc["points"]
    header = ("#", "xi", "eta", "zeta", "F", "coefficients")
    rows = []
    for i, p in enumerate(pts, 1):
        F = " x ".join(f"{q}^{e}" if e > 1 else q for q, e in p["zeta_factorization"].items())
        rows.append((str(i), p["xi"], p["eta"], p["zeta"], F,
                     "(" + ", ".join(str(v) for v in p["coefficients"]) + ")"
                     + (f" + T{p['torsion_index']}" if p["torsion_index"] else "")))
    widths = [max([len(h)] + [len(row[j]) for row in rows]) for j, h in enumerate(header)]
    lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    cn = doc["counts"]
    lines.append(f"{cn['points']} points up to sign, {cn['with_sign']} with sign, "
                 f"{cn['integral_with_sign']} integral with sign")
    return "\n".join(lines) + "\n"
