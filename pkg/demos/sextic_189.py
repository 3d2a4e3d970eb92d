#!/usr/bin/env python3
"""Weight-2 CM form of level 27 congruent mod 7 to a newform of level 189.

Walks the sextic character of Q(sqrt-3) through the whole chain: residual
character, Hecke lift, psi table, q-expansion and the congruence check.
"""
from heckelift.characters import lift_hecke
from heckelift.cmform import cm_level, format_psi_table, make_cm_form, psi_table, to_newform_data
from heckelift.config import load_config
from heckelift.data import path
from heckelift.pipeline import character_from_config
from heckelift.verify import ingest, verify_congruence

cfg = load_config(path("char_189.json"))
r = character_from_config(cfg)  # eta(a) = a^-1 on (O/3)*, values in F_7
psi = lift_hecke(r).primitive()
print("modulus", psi.modulus, "mode", psi.mode)
print("level", cm_level(psi))

g = make_cm_form(psi)
f = ingest(path("f189.json"))
print()
print(format_psi_table(psi_table(g, f, 67)))

# compare with the level-189 form, both directions of the residue choice are tried
rep = verify_congruence(f, to_newform_data(g, 67, "g27"), 7, 67)
print()
print(rep.table())
