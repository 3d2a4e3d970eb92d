"""Hecke lifts of residual characters of imaginary quadratic fields.

Residual characters r of K are lifted to Hecke characters psi, turned into
weight-2 CM forms, and compared mod l with a given newform.
"""
from heckelift.algebra import ResidueField, TowerField, reduction_map, residue_field, teichmuller
from heckelift.characters import HeckeCharacter, RayCharacter, lift_hecke
from heckelift.cmform import cm_level, make_cm_form, prime_coefficients, q_expansion
from heckelift.config import RunConfig, load_config
from heckelift.curves import WeierstrassCurve, count_ap, curve_from_j, j_of_t, xg5_fields
from heckelift.galrep import detect_cm_type
from heckelift.pipeline import run_pipeline
from heckelift.quadfield import QuadField, class_group, split_type
from heckelift.verify import NewformData, ingest, sturm_bound, verify_congruence

__version__ = "0.1.0"

__all__ = [
    "ResidueField", "TowerField", "reduction_map", "residue_field", "teichmuller",
    "HeckeCharacter", "RayCharacter", "lift_hecke",
    "cm_level", "make_cm_form", "prime_coefficients", "q_expansion",
    "RunConfig", "load_config",
    "WeierstrassCurve", "count_ap", "curve_from_j", "j_of_t", "xg5_fields",
    "detect_cm_type", "run_pipeline",
    "QuadField", "class_group", "split_type",
    "NewformData", "ingest", "sturm_bound", "verify_congruence",
]
