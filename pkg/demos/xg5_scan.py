#!/usr/bin/env python3
"""Sweep small rationals t on X_G(5) and certify both CM fields mod 5.

j(t) = j(5/t), so t and 5/t give the same curve.  The fixed model from
curve_from_j can be the wrong twist when j = 0 or 1728; xg5_curve searches
twists instead, which is what the scan reports in its model column.
"""
from fractions import Fraction
import numpy as np

from heckelift.curves import cm_mod_check, curve_from_j, j_of_t, xg5_curve, xg5_fields

ts = sorted({Fraction(a, b) for a in range(-4, 5) for b in range(1, 4)})
rows = []
for t in ts:
    try:
        d1, d2 = xg5_fields(t)
        E = xg5_curve(t)
    except (ZeroDivisionError, ValueError):
        continue
    bad = cm_mod_check(E, d1, 5, 300) + cm_mod_check(E, d2, 5, 300)
    rows.append((t, d1, d2, len(bad)))
    print(f"t={str(t):>5}  K1={d1:>6}  K2={d2:>6}  failures={len(bad)}")

fails = np.array([r[3] for r in rows])
print()
print(f"{len(rows)} points, {np.count_nonzero(fails == 0)} certified to p <= 300")

# the fixed model at t = 0 is x^3 + 1, a sextic twist that misses Q(sqrt-15)
E0 = curve_from_j(j_of_t(0))
print("t=0 fixed model failures for -15:", cm_mod_check(E0, -15, 5, 300))
