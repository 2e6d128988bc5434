"""Bounds for y^2 + y = x^3 + x^2 - 2x and a few Mordell curves.

Shows N0 for S = {3, 5} under several discriminant and height conventions,
and compares N0' with N1 in the integral case.
"""

import mpmath

from sintegral.bounds import bound_N0, build_ledger, linear_form_constants
from sintegral.curve import PlaceSet, RationalPoint, long_to_short, validate_curve
from sintegral.ell_log_real import compute_periods, elliptic_logs, normalized_logs
from sintegral.heights import c2_closed_form, canonical_height, regulator_and_lambda


def integral_bounds(curve, basis, g=1):
    reg = regulator_and_lambda(basis, curve, 40)
    per = compute_periods(curve, 50)
    u, _ = normalized_logs(elliptic_logs(basis, curve, per, 50), g, per)
    hh = tuple(canonical_height(P, curve, 40) for P in basis)
    led = build_ledger(curve, PlaceSet(()), reg.lam_half, g, per.omega, tau_im=per.tau.imag,
                       hhat=hh, u_primes=tuple(u))
    return led


def main():
    curve, cmap = long_to_short(0, 1, 1, -2, 0)
    basis = [cmap.forward(RationalPoint.from_xy(0, 0)), cmap.forward(RationalPoint.from_xy(1, 0))]
    reg = regulator_and_lambda(basis, curve, 40)
    S = PlaceSet((3, 5))
    c2 = c2_closed_form(curve)
    print(f"short model a = {curve.a}, b = {curve.b}, Delta0 = {curve.delta0}")
    print(f"lambda printed convention {mpmath.nstr(reg.lam, 8)}, used {mpmath.nstr(reg.lam_half, 8)}")
    for d0, label in ((None, "true Delta0"), (389 * 2 ** 10 * 3 ** 6, "Delta0 = 389 * 2^10 * 3^6")):
        _, _, c1, _ = linear_form_constants(curve, S, delta0=d0)
        for lam, ll in ((reg.lam_half, "lambda used"), (reg.lam, "lambda printed")):
            print(f"  N0 ({label}, {ll}) = {mpmath.nstr(bound_N0(c1, c2, lam), 4)}")
    led = integral_bounds(curve, basis)
    print(f"integral case: N0' = {mpmath.nstr(led.N0_prime, 4)}, N1 = {mpmath.nstr(led.N1, 4)}")
    C = validate_curve(0, 108)
    led = integral_bounds(C, [RationalPoint.from_xy(-2, 10)])
    print(f"y^2 = x^3 + 108: N0' = {mpmath.nstr(led.N0_prime, 4)}, N1 = {mpmath.nstr(led.N1, 4)}")


if __name__ == "__main__":
    main()
