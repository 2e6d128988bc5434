"""Reduction trajectory for y^2 = x^3 - 172x + 505, S = {3, 5, 7}.

Prints every reduction step of the driver and the single real step at
C = 10^910 from the initial bound.
"""

import json
from pathlib import Path

import mpmath

from sintegral.pipeline import LogProvider, parse_problem, run_pipeline
from sintegral.reduction import reduce_real_place

ROOT = Path(__file__).resolve().parent.parent


def main():
    spec = parse_problem(json.loads((ROOT / "problems" / "rank4.json").read_text()))
    res = run_pipeline(spec)
    led = res.ledger
    print(f"N0 = {mpmath.nstr(led.N0, 6)}  c5 = {mpmath.nstr(led.c5_real, 6)}  "
          f"c8 = {mpmath.nstr(led.c8, 6)}  c9 = {mpmath.nstr(led.c9, 6)}")
    for st in res.reduction.trace:
        print(f"  round {st.iteration}  place {st.place:>3}  N_in {st.N_in:<12}  "
              f"{st.scale:>8}  -> {st.bound if st.bound is not None else 'too small'}")
    print("rounds:", " -> ".join(map(str, res.reduction.rounds)))
    prov = LogProvider(spec.curve, spec.basis, res.torsion.g, res.multipliers, spec.config)
    u, digits = prov.real(960)
    N0 = int(mpmath.ceil(led.N0))
    for c9, label in ((led.c9, "c9 used"), (2 * led.c9, "c9 with the doubled lambda")):
        b = reduce_real_place(u, N0, led.c5_real, led.c8, c9, 10 ** 910, digits)
        print(f"real step at C = 10^910 ({label}, {mpmath.nstr(c9, 5)}): {b}")
    print(f"{len(res.records)} points up to sign")


if __name__ == "__main__":
    main()
