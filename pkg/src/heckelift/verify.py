"""Coefficient fixtures, the comparison bound, and congruence checks modulo primes above l."""

import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product

import sympy

from .algebra import poly_roots, residue_field
from .arith import is_prime, lcm

__all__ = [
    "NewformData", "FixtureError", "CoverageError", "CongruenceReport", "FactorChoice",
    "ingest", "save", "sturm_bound", "reduce_coefficient", "prime_factors_mod",
    "verify_congruence",
]

_X = sympy.Symbol("x")


class FixtureError(ValueError):
    pass


class CoverageError(ValueError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"coefficients missing at primes {self.missing}")


@dataclass
class NewformData:
    label: str
    level: int
    field_poly: list
    coeffs: dict
    source: str = "fixture"

    def __post_init__(self):
        self.field_poly = [int(c) for c in self.field_poly]
        self.coeffs = {int(p): [Fraction(c) for c in v] for p, v in self.coeffs.items()}
        self.validate()

    @property
    def degree(self):
        return len(self.field_poly) - 1

    def validate(self):
        if self.degree < 1 or self.field_poly[-1] == 0:
            raise FixtureError("field_poly must have positive degree")
        if self.degree > 1 and not sympy.Poly(list(reversed(self.field_poly)), _X).is_irreducible:
            raise FixtureError(f"field_poly {self.field_poly} is reducible")
        if not self.coeffs:
            raise FixtureError("no coefficients")
        for p, v in self.coeffs.items():
            if not is_prime(p):
                raise FixtureError(f"coefficient index {p} is not prime")
            if len(v) != self.degree:
                raise FixtureError(f"coefficient at {p} has {len(v)} coordinates, "
                                   f"expected {self.degree}")
        if self.level < 1:
            raise FixtureError("level must be positive")

    def primes(self):
        return sorted(self.coeffs)

    def to_json(self):
        return {
            "label": self.label,
            "level": self.level,
            "field_poly": list(self.field_poly),
            "coeffs": {str(p): [_fmt(c) for c in self.coeffs[p]] for p in self.primes()},
            "source": self.source,
        }

    def value(self, p):
        """a_p as a sympy expression in x (the field generator)."""
        return sum(sympy.Rational(c.numerator, c.denominator) * _X ** i
                   for i, c in enumerate(self.coeffs[p]))


def _fmt(c):
    return f"{c.numerator}/{c.denominator}"


def _parse_rational(s, where):
    try:
        if isinstance(s, int):
            return Fraction(s)
        num, _, den = str(s).partition("/")
        return Fraction(int(num), int(den) if den else 1)
    except (ValueError, ZeroDivisionError) as exc:
        raise FixtureError(f"{where}: bad rational {s!r}") from exc


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if key in line:
            return i
    return "?"


def ingest(source):
    """Load a fixture from a path, a file object, or a JSON string."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"line {exc.lineno}: {exc.msg}") from exc
    for key in ("label", "level", "field_poly", "coeffs", "source"):
        if key not in raw:
            raise FixtureError(f"missing field {key!r}")
    coeffs = {}
    for p, vec in raw["coeffs"].items():
        where = f"line {_line_of(text, chr(34) + p + chr(34))}"
        try:
            key = int(p)
        except ValueError as exc:
            raise FixtureError(f"{where}: index {p!r} is not an integer") from exc
        if not isinstance(vec, list):
            raise FixtureError(f"{where}: coefficient vector must be a list")
        coeffs[key] = [_parse_rational(c, where) for c in vec]
    return NewformData(raw["label"], int(raw["level"]), raw["field_poly"], coeffs, raw["source"])


def save(data, path=None):
    text = json.dumps(data.to_json(), indent=1, ensure_ascii=False) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def sturm_bound(ell, Nf, Ng, log=math.log):
    """ceil(2 log(l Nf Ng)^2), natural log unless another is supplied."""
    return math.ceil(2 * log(ell * Nf * Ng) ** 2)


# ----------------------------------------------------- reductions mod l

@dataclass(frozen=True)
class FactorChoice:
    """An irreducible factor of field_poly mod l and the chosen root in F_{l^m}."""
    ell: int
    factor: tuple      # coefficients mod l, constant first, monic
    multiplicity: int
    degree: int


def prime_factors_mod(data, ell):
    """Irreducible factors of the defining polynomial modulo l."""
    poly = sympy.Poly(list(reversed(data.field_poly)), _X, modulus=ell)
    out = []
    for fac, mult in poly.factor_list()[1]:
        coeffs = tuple(int(c) % ell for c in reversed(fac.all_coeffs()))
        out.append(FactorChoice(ell, coeffs, mult, len(coeffs) - 1))
    return sorted(out, key=lambda f: (f.degree, f.factor))


def _reduce_vec(vec, root):
    F = root.F
    acc = F.zero
    for c in reversed(vec):
        if c.denominator % F.ell == 0:
            raise ZeroDivisionError(f"coefficient {c} is not {F.ell}-integral")
        acc = acc * root + F(c)
    return acc


def reduce_coefficient(data, p, factor, root_index=0, F=None):
    """Image of a_p in F_{l^d} (d = deg factor, or F if given) under x -> a root of the factor."""
    if p not in data.coeffs:
        raise KeyError(f"no coefficient at {p}")
    F = F or residue_field(factor.ell, factor.degree)
    roots = poly_roots(list(factor.factor), F)
    return _reduce_vec(data.coeffs[p], roots[root_index])


@dataclass
class PairResult:
    f_factor: FactorChoice
    g_factor: FactorChoice
    g_root: int
    field_degree: int
    failures: list

    @property
    def passed(self):
        return not self.failures


@dataclass
class CongruenceReport:
    f_label: str
    g_label: str
    ell: int
    bound: int
    bound_kind: str
    log_base: str
    excluded: list
    checked: list
    pairs: list = dc_field(default_factory=list)

    @property
    def passing_pairs(self):
        return [r for r in self.pairs if r.passed]

    @property
    def verdict(self):
        return bool(self.passing_pairs)

    def to_json(self):
        return {
            "f": self.f_label, "g": self.g_label, "ell": self.ell,
            "bound": self.bound, "bound_kind": self.bound_kind, "log": self.log_base,
            "excluded_primes": self.excluded, "checked_primes": self.checked,
            "pairs": [{
                "f_factor": list(r.f_factor.factor), "f_residue_degree": r.f_factor.degree,
                "g_factor": list(r.g_factor.factor), "g_residue_degree": r.g_factor.degree,
                "g_root": r.g_root, "common_field_degree": r.field_degree,
                "passed": r.passed, "failures": r.failures,
            } for r in self.pairs],
            "verdict": "pass" if self.verdict else "fail",
        }

    def table(self):
        head = f"{self.f_label} vs {self.g_label} mod {self.ell}, p <= {self.bound} ({self.bound_kind})"
        lines = [head]
        for r in self.pairs:
            tag = "pass" if r.passed else f"fail at {[p for p, *_ in r.failures]}"
            lines.append(f"  f factor {list(r.f_factor.factor)} (deg {r.f_factor.degree}), "
                         f"g factor {list(r.g_factor.factor)} (deg {r.g_factor.degree}, root {r.g_root}):"
                         f" {tag}")
        lines.append(f"  excluded: {self.excluded}")
        lines.append(f"verdict: {'pass' if self.verdict else 'fail'}")
        return "\n".join(lines)


def verify_congruence(f, g, ell, bound="auto", exclude=()):
    """Compare a_p and b_p modulo every compatible pair of primes above l.

    Each form's primes above l are the irreducible factors of its defining
    polynomial mod l.  A pair is realised in F_{l^m}, m the lcm of the degrees:
    f's factor is sent to its first root there and g's factor to each of its
    roots in turn, which covers every prime of the composite field above l.
    """
    if bound == "auto":
        bound, kind = sturm_bound(ell, f.level, g.level), "sturm"
    else:
        bound, kind = int(bound), "user"
    bad = set(exclude)
    primes = list(sympy.primerange(2, bound + 1))
    excluded = [p for p in primes if p == ell or f.level % p == 0 or g.level % p == 0 or p in bad]
    checked = [p for p in primes if p not in excluded]
    missing = [p for p in checked if p not in f.coeffs or p not in g.coeffs]
    if missing:
        raise CoverageError(missing)
    report = CongruenceReport(f.label, g.label, ell, bound, kind, "natural", excluded, checked)
    for ff, gf in product(prime_factors_mod(f, ell), prime_factors_mod(g, ell)):
        m = lcm(ff.degree, gf.degree)
        F = residue_field(ell, m)
        froot = poly_roots(list(ff.factor), F)[0]
        for j, groot in enumerate(poly_roots(list(gf.factor), F)):
            fails = []
            for p in checked:
                a = _reduce_vec(f.coeffs[p], froot)
                b = _reduce_vec(g.coeffs[p], groot)
                if a != b:
                    fails.append([p, str(a), str(b)])
            report.pairs.append(PairResult(ff, gf, j, m, fails))
    return report
