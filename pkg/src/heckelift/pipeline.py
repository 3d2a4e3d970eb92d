"""End-to-end run: detect, derive r from residual traces, lift, synthesize g, verify."""

import json
import logging
import os
from dataclasses import dataclass, field as dc_field
from itertools import product

from .algebra import FieldEmbedding, poly_roots, residue_field
from .arith import primes_upto
from .characters import LiftError, PropertyHFailure, RayCharacter, lift_hecke
from .cmform import cm_level, make_cm_form, to_newform_data
from .config import ConfigError, build_eta, expand_choices
from .curves import BadReduction, WeierstrassCurve, count_ap
from .galrep import detect_cm_type
from .quadfield import QuadField, class_group, split_type
from .verify import NewformData, _reduce_vec, ingest, prime_factors_mod, save, sturm_bound, verify_congruence

__all__ = ["StageError", "Candidate", "PipelineResult", "curve_newform", "load_f", "trace_table",
           "candidate_roots", "derive_r", "run_pipeline", "character_from_config"]

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """An error raised by one pipeline stage; `stage` names it."""

    def __init__(self, stage, msg):
        self.stage = stage
        super().__init__(f"[{stage}] {msg}")


def curve_newform(curve, bound, label="curve"):
    """a_p of a curve over Q as NewformData (degree-one coefficient field)."""
    coeffs = {}
    for p in primes_upto(bound):
        try:
            coeffs[p] = [count_ap(curve, p)]
        except BadReduction:
            continue
    return NewformData(label, curve.conductor_hint or abs(curve.discriminant), [0, 1], coeffs, "curve")


def load_f(cfg, bound):
    spec = cfg.f or {}
    if "fixture" in spec:
        return ingest(spec["fixture"])
    if "curve" in spec:
        c = spec["curve"]
        E = WeierstrassCurve(int(c["A"]), int(c["B"]), c.get("conductor"))
        return curve_newform(E, bound, c.get("label", "E"))
    raise ConfigError("config has no f (fixture or curve)")


def trace_table(f, factor, F, root_index=0):
    """{p: a_p mod L} in F, for the prime L of f's field given by the factor."""
    Fd = residue_field(factor.ell, factor.degree)
    emb = FieldEmbedding(Fd, F)
    root = poly_roots(list(factor.factor), Fd)[root_index]
    return {p: emb(_reduce_vec(v, root)) for p, v in f.coeffs.items()}


@dataclass
class Candidate:
    kred_choice: object
    values: list
    roots: tuple
    failures: list
    r: object = None

    @property
    def passed(self):
        return not self.failures

    def describe(self):
        return {"kred": self.kred_choice, "values": self.values, "generator_roots": list(self.roots),
                "passed": self.passed, "failures": self.failures[:10]}


def candidate_roots(F, kred, eta, cg, traces):
    """Per generator p_i, indices into F.nth_roots(red(a) eta(a), e) that are roots of x^2 - a_p x + p."""
    out = []
    for (P, e), a in zip(cg.generators, cg.generator_alphas):
        p = P.norm
        if p not in traces:
            raise StageError("derive", f"no trace at the generator prime {p}")
        ap = traces[p]
        roots = F.nth_roots(kred(a) * eta(a), e)
        out.append([i for i, v in enumerate(roots) if v * v - ap * v + F(p) == F.zero])
    return out


def _trace_failures(r, traces, level, bound):
    ell = r.target.ell
    bad = []
    for p in primes_upto(bound):
        if p == ell or level % p == 0 or r.modulus.norm % p == 0 or p not in traces:
            continue
        st = split_type(r.field, p)
        if st.kind == "split":
            P, Q = st.primes
            if r(P) + r(Q) != traces[p]:
                bad.append(p)
        elif st.kind == "inert" and traces[p]:
            bad.append(p)
    return bad


def derive_r(cfg, traces, level, bound, avoid=1):
    """Every resolved choice of (kred, eta values, generator roots) with its trace failures.

    The root at each class-group generator p_i is anchored on x^2 - a_p x + p and
    the e_i-th root condition; the character is then extended multiplicatively
    through the class-group decomposition and compared with a_p at all good p.
    """
    out = []
    for kchoice, values in expand_choices(cfg):
        K, F, kred, eta = build_eta(cfg, kchoice, values)
        cg = class_group(K, avoid * eta.modulus.norm * F.ell * 6)
        if cfg.generator_roots == "auto":
            options = candidate_roots(F, kred, eta, cg, traces)
        else:
            options = [[i] for i in cfg.generator_roots]
        if any(not o for o in options):
            out.append(Candidate(kchoice, values, (), ["no root of x^2 - a_p x + p at a generator"]))
            continue
        for roots in product(*options):
            vals = [F.nth_roots(kred(a) * eta(a), e)[i]
                    for ((P, e), a), i in zip(zip(cg.generators, cg.generator_alphas), roots)]
            r = RayCharacter(eta, cg, vals)
            bad = _trace_failures(r, traces, level, bound)
            out.append(Candidate(kchoice, values, roots, bad, r))
    return out


def character_from_config(cfg):
    """r for a config whose generator roots are fixed explicitly (no f needed)."""
    if cfg.generator_roots == "auto" or cfg.kred == "any":
        raise ConfigError("explicit kred and generator_roots are required")
    if any(s.get("value") == "any" for s in cfg.eta):
        raise ConfigError("component values must be resolved")
    K, F, kred, eta = build_eta(cfg)
    cg = class_group(K, eta.modulus.norm * F.ell * 6)
    vals = [F.nth_roots(kred(a) * eta(a), e)[i]
            for ((P, e), a), i in zip(zip(cg.generators, cg.generator_alphas), cfg.generator_roots)]
    return RayCharacter(eta, cg, vals)


@dataclass
class PipelineResult:
    config: object
    detected: list = dc_field(default_factory=list)
    candidates: list = dc_field(default_factory=list)
    chosen: object = None
    psi: object = None
    level: int = None
    g: object = None
    report: object = None
    flags: list = dc_field(default_factory=list)

    @property
    def verdict(self):
        if self.report is None:
            # character-only run: the lift and its postcondition succeeded
            return self.psi is not None and self.g is not None
        return self.report.verdict

    def to_json(self):
        return {
            "delta": self.config.delta, "ell": self.config.ell,
            "detected_discs": sorted({d for d, _ in self.detected}),
            "candidates": [c.describe() for c in self.candidates],
            "chosen": self.chosen.describe() if self.chosen else None,
            "psi": {"modulus": list(self.psi.modulus.hnf()), "mode": self.psi.mode,
                    "flags": list(self.psi.flags)} if self.psi else None,
            "g_level": self.level,
            "report": self.report.to_json() if self.report else None,
            "flags": self.flags,
            "verdict": "pass" if self.verdict else "fail",
        }


def run_pipeline(cfg):
    res = PipelineResult(cfg)
    if cfg.ell == 2:
        res.flags.append("l = 2: experimental mode, no correctness claim")
        log.warning("l = 2 runs in experimental mode")
    if not cfg.f:
        return _lift_only(cfg, res)
    f = load_f(cfg, cfg.p_bound if cfg.bound == "auto" else max(int(cfg.bound), cfg.p_bound))

    try:
        res.detected = detect_cm_type(f, cfg.ell, cfg.max_disc, cfg.p_bound)
    except ValueError as exc:
        raise StageError("detect", str(exc)) from exc
    disc = QuadField(cfg.delta).disc
    factors = [fac for d, fac in res.detected if d == disc]
    if not factors:
        res.flags.append(f"disc {disc} not detected at p <= {cfg.p_bound}")
        factors = prime_factors_mod(f, cfg.ell)

    F = residue_field(cfg.ell, cfg.n or 1)
    for fac in factors:
        if F.n % fac.degree:
            continue
        traces = trace_table(f, fac, F)
        try:
            cands = derive_r(cfg, traces, f.level, cfg.p_bound, avoid=f.level)
        except (ValueError, LiftError) as exc:
            raise StageError("derive", str(exc)) from exc
        res.candidates.extend(cands)
        good = [c for c in cands if c.passed]
        if good:
            res.chosen = good[0]
            break
    if res.chosen is None:
        raise StageError("derive", "no choice of r matches the residual traces")

    _lift(cfg, res, res.chosen.r)

    bound = sturm_bound(cfg.ell, f.level, res.level) if cfg.bound == "auto" else int(cfg.bound)
    if bound > max(f.coeffs) and "curve" in (cfg.f or {}):
        f = load_f(cfg, bound)
    res.g = to_newform_data(make_cm_form(res.psi), bound, label=cfg.label or f"g{cfg.delta}")
    try:
        res.report = verify_congruence(f, res.g, cfg.ell, cfg.bound if cfg.bound == "auto" else bound)
    except ValueError as exc:
        raise StageError("verify", str(exc)) from exc
    _write(cfg, res)
    return res


def _lift(cfg, res, r):
    try:
        psi = lift_hecke(r, degree_cap=cfg.degree_cap, check_bound=cfg.check_bound,
                         experimental=cfg.experimental or cfg.ell == 2, seed=cfg.seed)
    except (PropertyHFailure, LiftError) as exc:
        raise StageError("lift", str(exc)) from exc
    if cfg.primitive:
        psi = psi.primitive(seed=cfg.seed)
    res.psi = psi
    res.level = cm_level(psi)


def _lift_only(cfg, res):
    try:
        r = character_from_config(cfg)
    except ValueError as exc:
        raise StageError("derive", str(exc)) from exc
    _lift(cfg, res, r)
    bound = 200 if cfg.bound == "auto" else int(cfg.bound)
    res.g = to_newform_data(make_cm_form(res.psi), bound, label=cfg.label or f"g{cfg.delta}")
    res.flags.append("no f supplied: lift and synthesis only")
    _write(cfg, res)
    return res


def _write(cfg, res):
    if cfg.output:
        os.makedirs(cfg.output, exist_ok=True)
        save(res.g, os.path.join(cfg.output, f"{res.g.label}.json"))
        with open(os.path.join(cfg.output, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(res.to_json(), fh, indent=1)
