"""Leading and trailing q-adic digits of the logs of m_q(-P_i) on y^2 = x^3 - 172x + 505."""

import time

from sintegral.curve import RationalPoint, scalar_mul, validate_curve
from sintegral.padic import padic_elliptic_log

BASIS = [(12, 13), (-14, 13), (-1, 26), (38, 221)]
M_Q = {3: 7, 5: 10, 7: 12}
DIGITS = {3: 1281, 5: 875, 7: 723}
V = {3: 8, 5: 6, 7: 5}


def main():
    C = validate_curve(-172, 505)
    pts = [RationalPoint.from_xy(x, y) for x, y in BASIS]
    for q in (3, 5, 7):
        n = DIGITS[q]
        for i, P in enumerate(pts, 1):
            t = time.time()
            L = -padic_elliptic_log(scalar_mul(M_Q[q], P, C), q, n, C)
            d = L.digits(n)
            lead = "".join(map(str, d[1:4]))
            tail = "".join(map(str, d[n - V[q] - 2:n - V[q] + 1]))
            print(f"q = {q}  i = {i}  a1 = {d[0]}  a2..a4 = {lead}  tail = {tail}  ({time.time() - t:.2f} s)")


if __name__ == "__main__":
    main()
