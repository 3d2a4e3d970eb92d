#!/usr/bin/env python3
"""An elliptic curve of CM type mod 5 for two different imaginary quadratic fields.

The curve comes from t = -4/5 on X_G(5).  Point counts certify the residual
CM property for Q(sqrt-223) and Q(sqrt-1115); then the full pipeline derives
the residual character from the traces and lifts it to a CM form.
"""
from fractions import Fraction

from heckelift.config import load_config
from heckelift.curves import WeierstrassCurve, cm_mod_check, j_of_t, xg5_point
from heckelift.data import path
from heckelift.galrep import detect_cm_type
from heckelift.pipeline import curve_newform, run_pipeline
from heckelift.quadfield import QuadField, class_group

t = Fraction(-4, 5)
pt = xg5_point(t)
print("t =", t, " j =", j_of_t(t))
print("predicted fields:", pt.K1_disc, pt.K2_disc)

cfg = load_config(path("lift_1115.json"))
spec = cfg.f["curve"]
E = WeierstrassCurve(spec["A"], spec["B"], spec["conductor"])
for d in (pt.K1_disc, pt.K2_disc):
    cg = class_group(QuadField(d))
    bad = cm_mod_check(E, d, 5, 500)
    print(f"Q(sqrt{d}): h = {cg.h}, inert a_p != 0 mod 5 below 500: {bad or 'none'}")

# detection from the a_p alone, with no hint about K
f = curve_newform(E, 500)
hits = [d for d, _ in detect_cm_type(f, 5, 1200, 500)]
print("detected discriminants:", hits)

res = run_pipeline(cfg)
print()
print("verdict:", "pass" if res.verdict else "fail")
print("g level:", res.level, "= (8*5*223)^2" if res.level == (8 * 5 * 223) ** 2 else "")
print("bound:", res.report.bound, res.report.bound_kind)
for flag in res.flags:
    print("  *", flag)
