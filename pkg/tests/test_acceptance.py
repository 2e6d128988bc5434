"""One pass/fail line per acceptance criterion (run with -s or -v; lines go to the terminal)."""

import subprocess
import sys
import time

import mpmath
import numpy as np
import pytest

import sintegral.search as search_mod
from sintegral.bounds import bound_N0, bound_N1_from_inputs, ell_log_bound_inputs, linear_form_constants
from sintegral.curve import PlaceSet, RationalPoint, linear_combination, validate_curve
from sintegral.heights import c2_closed_form
from sintegral.pipeline import LogProvider
from sintegral.reduction import reduce_real_place
from sintegral.search import QuickFilter, _half_box

from conftest import ROOT, RANK4_BASIS_XY, corrected_rows, load_rank4_points
from test_bounds import oracle_N0_prime, oracle_N1, synthetic_sets
from test_padic import REF_DIGITS, DIGITS, V_PRINTED, log_digits
from test_pipeline import RANK2_PAIRS, _up_to_sign

W = validate_curve(-172, 505)
WB = [RationalPoint.from_xy(x, y) for x, y in RANK4_BASIS_XY]


def report(capsys, k, checks):
    """checks: list of (label, ok, detail)."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{lab} {'ok' if good else 'FAILED'} ({d})" for lab, good, d in checks)
    with capsys.disabled():
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def rel(x, y):
    return abs(mpmath.mpf(x) / mpmath.mpf(y) - 1)


def test_criterion_1_rank4_end_to_end(capsys, rank4_result):
    res = rank4_result
    got = {(R.xi, R.eta, R.zeta) for R in res.records}
    want = {(r["xi"], abs(r["eta"]), r["zeta"]) for r in corrected_rows()}
    # each correction: the printed row is inconsistent, the corrected one is consistent
    corr_ok = True
    for row in load_rank4_points()["rows"]:
        if "correction" not in row:
            continue
        fixed = dict(row, **{k: v for k, v in row["correction"].items() if k != "note"})
        P = RationalPoint(row["xi"], row["eta"], row["zeta"])
        # a printed vector that does not parse (row 30) is stored as None
        printed_bad = (not W.contains(P) or row["coefficients"] is None or
                       linear_combination(row["coefficients"], WB, W) not in (P, -P))
        Q = RationalPoint(fixed["xi"], fixed["eta"], fixed["zeta"])
        fixed_good = W.contains(Q) and linear_combination(fixed["coefficients"], WB, W) in (Q, -Q)
        corr_ok &= printed_bad and fixed_good
    runtime = sum(res.timings.values())
    report(capsys, 1, [
        ("set equality", got == want, f"{len(got)} points, {len(got ^ want)} differ"),
        ("counts", (len(got), res.count_with_sign, res.count_integral_with_sign) == (72, 144, 58),
         f"{len(got)}/{res.count_with_sign}/{res.count_integral_with_sign}"),
        ("table corrections", corr_ok, "6 printed rows inconsistent, corrected rows consistent"),
        ("runtime", runtime < 600, f"{runtime:.1f} s"),
    ])


def test_criterion_2_rank4_constants(capsys, rank4_result):
    res = rank4_result
    reg = res.regulator
    report(capsys, 2, [
        ("g", res.torsion.g == 1, str(res.torsion.g)),
        ("m_q", res.multipliers == {3: 7, 5: 10, 7: 12}, str(res.multipliers)),
        ("omega", abs(res.omega - mpmath.mpf("0.808974")) <= 1e-6, mpmath.nstr(res.omega, 10)),
        ("lambda", abs(reg.lam - mpmath.mpf("0.7467531")) <= 1e-6, mpmath.nstr(reg.lam, 10)),
        ("R", abs(reg.regulator - mpmath.mpf("2.79532")) <= 1e-4, mpmath.nstr(reg.regulator, 10)),
    ])


def test_criterion_3_constants_at_printed_delta0(capsys, rank4):
    C, _, S = rank4
    c3, c4, c1, _ = linear_form_constants(C, S, delta0=2198992)
    c2 = c2_closed_form(C)
    N0 = bound_N0(c1, c2, mpmath.mpf("0.7467531"))
    report(capsys, 3, [
        ("c2", abs(c2 - mpmath.mpf("1.81")) <= 0.01, mpmath.nstr(c2, 6)),
        ("c3", rel(c3, "8.7e8") <= 0.01, mpmath.nstr(c3, 6)),
        ("c4", rel(c4, "8.35e15") <= 0.01, mpmath.nstr(c4, 6)),
        ("c1", rel(c1, "4.564e305") <= 0.01, mpmath.nstr(c1, 6)),
        ("N0", rel(N0, "5.53e152") <= 0.02, mpmath.nstr(N0, 6)),
    ])


@pytest.mark.slow
def test_criterion_4_log_digits(capsys):
    lead = trail = stable = 0
    for q in (3, 5, 7):
        for i in range(4):
            d = log_digits(q, i)
            d50 = log_digits(q, i, extra=50)
            n, V = DIGITS[q], V_PRINTED[q]
            lead += d[0] == 0 and tuple(d[1:4]) == REF_DIGITS[q][i][:3]
            trail += tuple(d[n - V - 2:n - V + 1]) == REF_DIGITS[q][i][3:]
            stable += d == d50[:n]
    report(capsys, 4, [
        ("leading digits and a1 = 0", lead == 12, f"{lead}/12"),
        ("stable at +50 digits", stable == 12, f"{stable}/12"),
        ("trailing digits (extra)", trail == 12, f"{trail}/12"),
    ])


def _exact_filter(res, N_max):
    spec = res.spec
    prov = LogProvider(spec.curve, spec.basis, res.torsion.g, res.multipliers, spec.config)
    u, _ = prov.real(30)
    plogs = {q: prov.padic(q, 40) for q in spec.primes}
    led = res.ledger
    return QuickFilter.build(led.c5_real, led.c8, led.c9, u, plogs, N_max, len(spec.basis)), prov


@pytest.mark.slow
def test_criterion_5_reduction_trajectory(capsys, rank4_result, monkeypatch):
    res = rank4_result
    led = res.ledger
    red = res.reduction
    N0 = int(mpmath.ceil(led.N0))
    # first real reduction at C = 10^910 from the initial bound
    prov = LogProvider(res.spec.curve, res.spec.basis, res.torsion.g, res.multipliers, res.spec.config)
    u, digits = prov.real(960)
    first_real = reduce_real_place(u, N0, led.c5_real, led.c8, led.c9, 10 ** 910, digits)
    # soundness at the fixpoint: every vector in the box of the last input bound that
    # satisfies the linear-form inequality (no slack) lies within the returned bound
    N_in = min(v for v in [N0] + red.rounds if v > red.N_final)
    monkeypatch.setattr(search_mod, "SLACK", 1.0)
    qf, _ = _exact_filter(res, N_in)
    vecs = _half_box(4, N_in)
    hits = vecs[qf.passes(vecs)]
    worst = int(np.abs(hits).max()) if len(hits) else 0
    report(capsys, 5, [
        ("first real step at 10^910 <= 80", first_real <= 80, f"{first_real}; reference 69"),
        ("first full round <= 150", red.rounds[0] <= 150, f"{red.rounds[0]}; reference 124"),
        ("fixpoint <= 30", red.N_final <= 30, f"{red.N_final}; reference 17; rounds {red.rounds}"),
        ("soundness", worst <= red.N_final, f"{len(hits)} vectors with max|n| <= {N_in} satisfy the "
                                            f"inequality, largest max|n| = {worst}"),
    ])


def test_criterion_6_rank2(capsys, rank2_result):
    res = rank2_result
    got = {_up_to_sign(R.coefficients) for R in res.records}
    want = {_up_to_sign(p) for p in RANK2_PAIRS}
    N0 = res.ledger.N0
    ratio = float(N0 / mpmath.mpf("6e121"))
    report(capsys, 6, [
        ("coefficient set", got == want, f"{len(got)} pairs"),
        ("N0 within an order of magnitude of 6e121", 0.1 <= ratio <= 10,
         f"{mpmath.nstr(N0, 3)}, ratio {ratio:.1f}"),
        ("first reduction <= 150", res.reduction.rounds[0] <= 150, f"{res.reduction.rounds[0]}; reference 106"),
    ])


PROPERTY_TESTS = {
    "group law": ["tests/test_curve.py::test_addition_commutes", "tests/test_curve.py::test_addition_associates",
                  "tests/test_curve.py::test_inverse_and_identity"],
    "parallelogram": ["tests/test_heights.py::test_parallelogram_law"],
    "Hasse": ["tests/test_curve.py::test_hasse_bound"],
    "w series to degree 210": ["tests/test_padic.py::test_formal_w_identity_to_degree_210"],
    "log additivity": ["tests/test_padic.py::test_log_is_additive"],
    "LLL": ["tests/test_reduction.py::test_lll_output_is_reduced_and_same_lattice",
            "tests/test_reduction.py::test_gram_determinants_are_exact"],
    "ring laws": ["tests/test_padic.py::test_ring_laws_against_exact_rationals"],
    "extra search": ["tests/test_search.py::test_extra_search_matches_brute_force"],
}


@pytest.mark.slow
def test_criterion_7_property_suites(capsys):
    checks = []
    for label, ids in PROPERTY_TESTS.items():
        t = time.time()
        r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *ids],
                           cwd=ROOT, capture_output=True, text=True)
        tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr[-200:]
        checks.append((label, r.returncode == 0, f"{tail}, {time.time() - t:.0f} s"))
    report(capsys, 7, checks)


def test_criterion_8_bound_evaluators(capsys, rank2_integral_result):
    worst = 0.0
    for a, b, r, lam, g, omega, tau_im, hhat, u in synthetic_sets():
        C = validate_curve(a, b)
        _, _, _, c1p = linear_form_constants(C, PlaceSet(()))
        with mpmath.workdps(50):
            N0p = bound_N0(c1p, c2_closed_form(C), mpmath.mpf(lam))
            inp = ell_log_bound_inputs(C, g, mpmath.mpf(omega), mpmath.mpf(lam), mpmath.mpf(tau_im),
                               [mpmath.mpf(x) for x in hhat], [mpmath.mpf(x) for x in u])
            N1 = bound_N1_from_inputs(r, inp.c6, inp.c7)
            worst = max(worst, float(rel(N0p, str(oracle_N0_prime(a, b, lam)))),
                        float(rel(N1, str(oracle_N1(a, b, r, lam, g, omega, tau_im, hhat, u)))))
    led = rank2_integral_result.ledger
    report(capsys, 8, [
        ("oracle agreement on 20 sets", worst < 1e-6, f"max relative error {worst:.1e}"),
        ("rank-2 integral N1 <= N0'", led.N1 <= led.N0_prime,
         f"N1 = {mpmath.nstr(led.N1, 3)}, N0' = {mpmath.nstr(led.N0_prime, 3)}"),
    ])
