"""Run configuration and the JSON character-specification language.

A character spec is a list of components, each a small JSON object:

    {"kind": "quadratic", "modulus": "sqrt_delta"}
    {"kind": "norm", "kronecker": 8}
    {"kind": "norm", "M": 13, "g": 2, "order": 3, "k": 1}
    {"kind": "power", "modulus": 3, "gamma": "omega", "order": 6, "value": "inverse"}
    {"kind": "trivial", "modulus": {"prime": 2, "index": 0}}

Ideals are written as an integer n (the ideal (n)), "sqrt_delta",
{"prime": p, "index": i}, {"hnf": [a, b, c]}, {"product": [...]} or
{"power": [ideal, k]}.  Elements are "omega", "sqrt_delta", an integer, or
[x, y] meaning x + y*omega.  A power component's value may be "any", in which
case the pipeline enumerates every value of the declared order.
"""

import json
import os
from dataclasses import asdict, dataclass, field as dc_field, fields
from fractions import Fraction
from itertools import product
from math import gcd

from .algebra import reduction_map, residue_field
from .characters import (DirichletCharModM, NormComponent, PowerComponent, QuadraticComponent,
                         TrivialComponent)
from .quadfield import QuadElement, QuadField, QuadIdeal, split_type

__all__ = ["RunConfig", "ConfigError", "parse_ideal", "parse_element", "build_components",
           "expand_choices", "build_eta", "find_generator", "load_config", "threads"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "lift"
    delta: int = None
    ell: int = None
    n: int = None
    kred: object = None            # reduction_map choice, or "any"
    eta: list = dc_field(default_factory=list)
    generator_roots: object = "auto"   # list of root indices, or "auto" (derive from traces)
    f: dict = None                 # {"fixture": path} or {"curve": {"A":.., "B":.., "conductor":..}}
    bound: object = "auto"
    p_bound: int = 500
    degree_cap: int = 64
    check_bound: int = 1000
    max_disc: int = 1200
    primitive: bool = True
    experimental: bool = False
    label: str = None
    output: str = None
    log_level: str = "WARNING"
    seed: int = 0

    def to_json(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, raw):
        known = {f.name for f in fields(cls)}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        cfg = cls(**raw)
        if cfg.delta is None or cfg.ell is None:
            raise ConfigError("config needs delta and ell")
        return cfg

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        cfg = RunConfig.loads(fh.read())
    base = os.path.dirname(os.path.abspath(path))
    if cfg.f and "fixture" in cfg.f and not os.path.isabs(cfg.f["fixture"]):
        cfg.f = dict(cfg.f, fixture=os.path.join(base, cfg.f["fixture"]))
    return cfg


def threads():
    """Worker cap from HECKELIFT_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("HECKELIFT_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------- parsing

def parse_element(K, spec):
    if spec == "omega":
        return K.omega
    if spec == "sqrt_delta":
        return K.sqrt_delta
    if isinstance(spec, int):
        return K(spec)
    if isinstance(spec, list) and len(spec) == 2:
        return QuadElement(K, Fraction(spec[0]), Fraction(spec[1]))
    raise ConfigError(f"cannot parse element {spec!r}")


def parse_ideal(K, spec):
    if isinstance(spec, int):
        return K.ideal(spec)
    if spec == "sqrt_delta":
        return K.ideal(K.sqrt_delta)
    if isinstance(spec, dict):
        if "prime" in spec:
            primes = split_type(K, spec["prime"]).primes
            return primes[spec.get("index", 0)]
        if "hnf" in spec:
            a, b, c = spec["hnf"]
            return QuadIdeal(K, a, b, c)
        if "product" in spec:
            out = K.unit_ideal()
            for s in spec["product"]:
                out = out * parse_ideal(K, s)
            return out
        if "power" in spec:
            base, k = spec["power"]
            return parse_ideal(K, base) ** k
    raise ConfigError(f"cannot parse ideal {spec!r}")


def find_generator(q):
    """Smallest x + y*omega (by height) generating the cyclic group (O/q)*."""
    K = q.field
    N = q.norm
    for h in range(1, N + 2):
        for x in range(-h, h + 1):
            for y in (h - abs(x), -(h - abs(x))) if h != abs(x) else (0,):
                g = QuadElement(K, x, y)
                try:
                    PowerComponent(q, g, 1)
                except ValueError:
                    continue
                return g
    raise ConfigError(f"(O/{q})* is not cyclic or has no small generator")


def build_components(K, specs, choice=None):
    """Component objects for one resolved spec; `choice` fills "any" values in order."""
    choice = list(choice or [])
    out = []
    for s in specs:
        kind = s.get("kind")
        if kind == "quadratic":
            out.append(QuadraticComponent(parse_ideal(K, s.get("modulus", "sqrt_delta"))))
        elif kind == "norm":
            if "kronecker" in s:
                out.append(NormComponent(K, kronecker_d=s["kronecker"]))
            else:
                out.append(NormComponent(K, M=s["M"], g=s["g"], order=s["order"], k=s.get("k", 1)))
        elif kind == "power":
            q = parse_ideal(K, s["modulus"])
            gamma = find_generator(q) if s.get("gamma", "auto") == "auto" else parse_element(K, s["gamma"])
            value = s.get("value", 1)
            if value == "any":
                value = choice.pop(0)
            out.append(PowerComponent(q, gamma, s["order"], value))
        elif kind == "trivial":
            out.append(TrivialComponent(parse_ideal(K, s["modulus"])))
        else:
            raise ConfigError(f"unknown component kind {kind!r}")
    return out


def _any_values(specs):
    """Per "any" component, the exponents k giving a character of exactly the declared order."""
    out = []
    for s in specs:
        if s.get("kind") == "power" and s.get("value") == "any":
            d = s["order"]
            out.append([k for k in range(1, d) if gcd(k, d) == 1] or [0])
    return out


def expand_choices(cfg):
    """Every (kred choice, component values) combination the config leaves open."""
    K = QuadField(cfg.delta)
    if cfg.kred == "any":
        nroots = 1 if split_type(K, cfg.ell).kind == "ramified" else 2
        kreds = [[i] for i in range(nroots)]
    else:
        kreds = [cfg.kred]
    return [(k, list(v)) for k, v in product(kreds, product(*_any_values(cfg.eta)))]


def build_eta(cfg, kred_choice=None, values=None):
    """(K, F, kred, eta) for one resolved choice."""
    K = QuadField(cfg.delta)
    F = residue_field(cfg.ell, cfg.n or 1)
    kred = reduction_map(K, F, kred_choice if kred_choice is not None else
                         (None if cfg.kred == "any" else cfg.kred))
    comps = build_components(K, cfg.eta, values)
    eta = DirichletCharModM(K, comps, F, kred, seed=cfg.seed)
    return K, F, kred, eta
