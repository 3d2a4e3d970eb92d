"""Dirichlet characters on (O/m)*, mod-l characters on ideals, and the Hecke lift.

Character values in F_{l^n}* are handled as discrete logarithms to the base of
the field's primitive element, so a Dirichlet character is an additive map
into Z/(q-1).  The Teichmuller lift turns such a log into a power of the
cyclotomic generator of the value tower.
"""

import copy
import random
from dataclasses import dataclass, field as dc_field
from functools import cached_property

from .algebra import (
    FFElement, FieldEmbedding, ReducibleLayer, ReductionMap, reduction_map, TowerField, poly_roots, residue_field,
    teichmuller_exponent, value_field,
)
from .arith import factor, kronecker, primes_upto
from .quadfield import (
    QuadElement, QuadIdeal, class_group, ideal_decompose, principal_generator, split_type,
)

__all__ = [
    "QuadraticComponent", "NormComponent", "PowerComponent", "TrivialComponent",
    "DirichletCharModM", "PointwiseEta", "LinearCharacter", "RayCharacter",
    "PrimeTableCharacter", "HeckeCharacter", "HReport", "PropertyHFailure",
    "LiftError", "NoCompatibleRoot", "check_property_H", "derive_eta", "lift_hecke",
    "nebentypus_is_trivial", "conductor", "enforce_property_H", "prime_reduction", "distinguished_prime",
    "ideal_from_factors", "ideal_quotient", "random_unit_residue", "primes_of_norm_upto",
]


class PropertyHFailure(ValueError):
    pass


class LiftError(ValueError):
    pass


class NoCompatibleRoot(LiftError):
    pass


# ------------------------------------------------------------------ helpers

def ideal_from_factors(field, factors):
    out = field.unit_ideal()
    for P, e in factors.items():
        if e:
            out = out * P ** e
    return out


def ideal_quotient(a, b):
    """a / b for integral ideals with b | a."""
    fa, fb = a.factor(), b.factor()
    out = dict(fa)
    for P, e in fb.items():
        if out.get(P, 0) < e:
            raise ValueError(f"{b} does not divide {a}")
        out[P] -= e
    return ideal_from_factors(a.field, out)


def _coprime_elt(elt, primes):
    x, y = elt
    for P in primes:
        if P.contains(QuadElement(P.field, x, y)):
            return False
    return True


def random_unit_residue(modulus, rng, height=None):
    """Random integral element coprime to the modulus, coordinates in a box."""
    primes = list(modulus.factor())
    H = height or max(modulus.norm, 4)
    while True:
        x, y = rng.randrange(-H, H + 1), rng.randrange(-H, H + 1)
        if (x or y) and _coprime_elt((x, y), primes):
            return QuadElement(modulus.field, x, y)


def random_one_mod(modulus, rng, coprime_to=None, height=None):
    """Random alpha = 1 mod `modulus`, coprime to `coprime_to` if given."""
    primes = list(coprime_to.factor()) if coprime_to is not None else []
    H = height or max((coprime_to or modulus).norm, 4)
    a, b, c = modulus.hnf()
    while True:
        s, t = rng.randrange(-H, H + 1), rng.randrange(-H, H + 1)
        x, y = 1 + s * a + t * b, t * c
        if (x or y) and _coprime_elt((x, y), primes):
            return QuadElement(modulus.field, x, y)


def primes_of_norm_upto(field, bound, coprime_to=None):
    """Prime ideals of norm <= bound, sorted by norm then Hermite basis."""
    out = []
    for p in primes_upto(bound):
        for P in split_type(field, p).primes:
            if P.norm <= bound and P.is_coprime(coprime_to):
                out.append(P)
    return sorted(out)


def prime_reduction(P, F=None):
    """The map K -> F with kernel the prime ideal P (F defaults to O/P)."""
    field = P.field
    ell = P.a
    st = split_type(field, ell)
    T = TowerField.quadratic(field)
    if F is None:
        F = residue_field(ell, 2 if st.kind == "inert" else 1)
    if st.kind == "inert":
        if F.n % 2:
            raise ValueError("inert prime needs an even-degree residue field")
        rho = poly_roots([F(field.nw), F(-field.s), F.one], F)[0]
    else:
        rho = F(-P.b)
    return ReductionMap(T, F, [rho])


def distinguished_prime(kred):
    """The prime ideal of K that is the kernel of a reduction map K -> F."""
    field = kred.source.quad
    ell = kred.target.ell
    st = split_type(field, ell)
    if st.kind == "inert":
        return st.primes[0]
    for P in st.primes:
        if not kred(P.gen2):
            return P
    raise AssertionError("kernel prime not found")


def _split_den(alpha):
    """alpha = beta / d with beta integral and d a positive integer."""
    d = alpha.denominator()
    return (alpha * d), d


# ---------------------------------------------------------- Dirichlet chars

class Component:
    """One factor of a Dirichlet character on (O/q)* for a divisor q of the modulus."""

    kind = "abstract"

    def __init__(self, modulus, order):
        self.modulus = modulus
        self.order = int(order)

    def bind(self, F, kred):
        """Attach the value field; returns self for chaining."""
        self.F = F
        self.m = F.q - 1
        self.kred = kred
        if self.m % self.order:
            raise ValueError(f"{F} has no elements of order {self.order}")
        return self

    def log(self, elt):
        raise NotImplementedError

    def describe(self):
        return {"kind": self.kind, "modulus": list(self.modulus.hnf()), "order": self.order}


class TrivialComponent(Component):
    kind = "trivial"

    def __init__(self, modulus):
        super().__init__(modulus, 1)

    def log(self, elt):
        return 0


class QuadraticComponent(Component):
    """Jacobi symbol of a rational representative modulo an ideal with cyclic Z-quotient."""

    kind = "quadratic"

    def __init__(self, modulus):
        if modulus.c != 1 or modulus.a % 2 == 0:
            raise ValueError("quadratic components need an odd ideal with content 1")
        super().__init__(modulus, 2)

    def log(self, elt):
        x, y = elt.int_coords()
        rep = (x - y * self.modulus.b) % self.modulus.a
        j = kronecker(rep, self.modulus.a)
        if j == 0:
            raise ValueError("element not coprime to the component modulus")
        return 0 if j == 1 else self.m // 2


class NormComponent(Component):
    """chi(Norm(alpha)) for a rational Dirichlet character chi.

    chi is either a Kronecker symbol (kronecker=d) or a power character on a
    cyclic (Z/M)* given by a generator g, its order, and an exponent k with
    chi(g) of order `order`, namely chi(g) = gen^(k (q-1)/order).
    """

    kind = "norm"

    def __init__(self, field, kronecker_d=None, M=None, g=None, order=None, k=1):
        self.field = field
        self.d = kronecker_d
        if kronecker_d is not None:
            cond = abs(kronecker_d)
            M = cond
            order = 2
        self.M, self.g, self.k = int(M), g, k
        super().__init__(field.ideal(self.M), order)
        if self.d is None:
            self._table = {}
            x = 1
            for t in range(self.M):
                if x in self._table:
                    break
                self._table[x] = t
                x = x * g % self.M
            if len(self._table) % self.order:
                raise ValueError("declared order does not divide the order of g")

    def log(self, elt):
        n = int(elt.norm())
        if self.d is not None:
            j = kronecker(self.d, n)
            if j == 0:
                raise ValueError("norm not coprime to the character modulus")
            return 0 if j == 1 else self.m // 2
        t = self._table.get(n % self.M)
        if t is None:
            raise ValueError("norm outside the cyclic group generated by g")
        return t * self.k * (self.m // self.order) % self.m

    def describe(self):
        out = super().describe()
        out.update({"kronecker": self.d} if self.d is not None
                   else {"M": self.M, "g": self.g, "k": self.k})
        return out


class PowerComponent(Component):
    """Character of a small (O/q)* that is cyclic on a declared generator gamma.

    `value` is an exponent k (chi(gamma) = gen^(k (q-1)/order)) or "inverse"
    (chi(gamma) = (gamma mod l)^-1, the unit-type character).
    """

    kind = "power"

    def __init__(self, modulus, gamma, order, value=1):
        super().__init__(modulus, order)
        self.gamma = gamma
        self.value = value
        table = {}
        g = gamma.int_coords()
        x = modulus.residue((1, 0))
        field = modulus.field
        for t in range(modulus.norm + 1):
            if x in table:
                break
            table[x] = t
            x = modulus.residue(field._mul(x, g))
        self._table = table
        self.group_order = len(table)
        if self.group_order % order:
            raise ValueError("declared order does not divide the order of gamma")
        phi = modulus.norm
        for P in modulus.factor():
            phi = phi * (P.norm - 1) // P.norm
        if self.group_order != phi:
            raise ValueError(f"gamma has order {self.group_order}, not generating (O/q)* of order {phi}")

    def bind(self, F, kred):
        super().bind(F, kred)
        if self.value == "inverse":
            self.vlog = (-F.log(kred(self.gamma))) % self.m
            if (self.vlog * self.order) % self.m:
                raise ValueError("inverse-type value has the wrong order")
        else:
            self.vlog = int(self.value) * (self.m // self.order) % self.m
        return self

    def log(self, elt):
        t = self._table.get(self.modulus.residue(elt))
        if t is None:
            raise ValueError("element not coprime to the component modulus")
        return t * self.vlog % self.m

    def describe(self):
        out = super().describe()
        out.update({"gamma": [str(self.gamma.x), str(self.gamma.y)], "value": self.value})
        return out


class DirichletCharModM:
    """Character of (O/m)* with values in F_{l^n}*, as a product of components."""

    def __init__(self, field, components, F, kred, modulus=None, verify=True, seed=0):
        self.field = field
        self.components = [c.bind(F, kred) for c in components]
        self.F = F
        self.m = F.q - 1
        self.kred = kred
        if modulus is None:
            modulus = field.unit_ideal()
            for c in self.components:
                modulus = _lcm_ideal(modulus, c.modulus)
        self.modulus = modulus
        self._primes = list(modulus.factor())
        if verify:
            self.verify(seed=seed)

    def log(self, alpha):
        """log_gen eta(alpha) for alpha coprime to the modulus (fractions allowed)."""
        beta, d = _split_den(alpha)
        out = 0
        for c in self.components:
            out += c.log(beta)
            if d != 1:
                out -= c.log(QuadElement(self.field, d))
        return out % self.m

    def __call__(self, alpha):
        return self.F.exp(self.log(alpha))

    def is_coprime(self, alpha):
        beta, d = _split_den(alpha)
        return _coprime_elt(beta.int_coords(), self._primes) and _coprime_elt((d, 0), self._primes)

    def verify(self, samples=200, seed=0):
        rng = random.Random(seed)
        for _ in range(samples):
            a = random_unit_residue(self.modulus, rng)
            b = random_unit_residue(self.modulus, rng)
            if self.log(a * b) != (self.log(a) + self.log(b)) % self.m:
                raise ValueError("Dirichlet character is not multiplicative")
        for c in self.components:
            vals = [c.log(random_unit_residue(c.modulus, rng)) for _ in range(samples)]
            if any(v * c.order % self.m for v in vals):
                raise ValueError(f"{c.kind} component exceeds its declared order {c.order}")
            for r in factor(c.order) if c.order > 1 else ():
                if all(v * (c.order // r) % self.m == 0 for v in vals):
                    raise ValueError(f"{c.kind} component has order smaller than {c.order}")
        self.check_units()

    def check_units(self):
        for u in self.field.units():
            want = (-self.F.log(self.kred(u))) % self.m
            if self.log(u) != want:
                raise ValueError(f"eta({u}) is not the inverse of its reduction")

    def describe(self):
        return [c.describe() for c in self.components]

    def restrict(self, modulus, seed=0):
        """The same character viewed modulo a divisor of its modulus, via a CRT representative."""
        return InducedEta(self, modulus)


def _lcm_ideal(a, b):
    fa, fb = a.factor(), b.factor()
    out = dict(fa)
    for P, e in fb.items():
        out[P] = max(out.get(P, 0), e)
    return ideal_from_factors(a.field, out)


class InducedEta:
    """eta defined modulo a divisor f of the original modulus m (eta must factor through f)."""

    def __init__(self, parent, modulus):
        self.parent = parent
        self.field = parent.field
        self.modulus = modulus
        self.F, self.m, self.kred = parent.F, parent.m, parent.kred
        self._primes = list(modulus.factor())
        self._extra = [P for P in parent._primes if P not in self._primes]
        self.components = parent.components

    def _adjust(self, beta):
        """beta + mu with mu in f and the result coprime to the parent modulus."""
        a, b, c = self.modulus.hnf()
        x0, y0 = beta.int_coords()
        for r in range(0, 64):
            for s in range(-r, r + 1):
                for t in (-r + abs(s), r - abs(s)):
                    x, y = x0 + s * a + t * b, y0 + t * c
                    if _coprime_elt((x, y), self.parent._primes):
                        return QuadElement(self.field, x, y)
        raise AssertionError("no coprime representative found")

    def log(self, alpha):
        beta, d = _split_den(alpha)
        out = self.parent.log(self._adjust(beta))
        if d != 1:
            out -= self.parent.log(self._adjust(QuadElement(self.field, d)))
        return out % self.m

    def __call__(self, alpha):
        return self.F.exp(self.log(alpha))

    def is_coprime(self, alpha):
        beta, d = _split_den(alpha)
        return _coprime_elt(beta.int_coords(), self._primes) and _coprime_elt((d, 0), self._primes)

    def describe(self):
        return {"restricted_to": list(self.modulus.hnf()), "from": self.parent.describe()}


class PointwiseEta:
    """eta(alpha) = r((alpha)) (alpha mod l)^-1, evaluated on demand."""

    def __init__(self, r):
        self.r = r
        self.field = r.field
        self.modulus = r.modulus
        self.F = r.target
        self.m = self.F.q - 1
        self.kred = r.kred
        self._primes = list(self.modulus.factor())
        self.components = []

    def log(self, alpha):
        beta, d = _split_den(alpha)
        out = self.F.log(self.r.principal_value(beta)) - self.F.log(self.kred(beta))
        if d != 1:
            dd = QuadElement(self.field, d)
            out -= self.F.log(self.r.principal_value(dd)) - self.F.log(self.kred(dd))
        return out % self.m

    def __call__(self, alpha):
        return self.F.exp(self.log(alpha))

    def is_coprime(self, alpha):
        beta, d = _split_den(alpha)
        return _coprime_elt(beta.int_coords(), self._primes) and _coprime_elt((d, 0), self._primes)

    def describe(self):
        return [{"kind": "pointwise"}]

    def check_units(self):
        for u in self.field.units():
            if self.log(u) != (-self.F.log(self.kred(u))) % self.m:
                raise PropertyHFailure(f"eta({u}) is not the inverse of its reduction")


# --------------------------------------------------------- linear characters

class LinearCharacter:
    """A character r on ideals coprime to the modulus, with values in F_{l^n}*.

    Subclasses provide `prime_value(P)`; the value on a general ideal comes from
    its factorisation.  `kred` is the reduction K -> F fixing the prime l.
    """

    provenance = "synthetic"

    def __init__(self, field, modulus, target, kred, provenance=None):
        if kred.target != target:
            raise ValueError("the reduction map must land in the value field")
        self.field = field
        self.modulus = modulus
        self.target = target
        self.kred = kred
        if provenance:
            self.provenance = provenance
        self._cache = {}

    @property
    def ell(self):
        return self.target.ell

    def prime_value(self, P):
        raise NotImplementedError

    def _prime(self, P):
        v = self._cache.get(P)
        if v is None:
            if not P.is_coprime(self.modulus):
                raise ValueError(f"{P} is not coprime to the modulus")
            v = self.prime_value(P)
            self._cache[P] = v
        return v

    def __call__(self, ideal):
        out = self.target.one
        for P, e in ideal.factor().items():
            out = out * self._prime(P) ** e
        return out

    def principal_value(self, beta):
        return self(self.field.ideal(beta))

    @cached_property
    def lprime(self):
        return distinguished_prime(self.kred)

    def with_modulus(self, modulus):
        """The same character, now regarded on ideals coprime to a multiple of the modulus."""
        if not self.modulus.divides(modulus):
            raise ValueError("the new modulus must be a multiple of the old one")
        out = copy.copy(self)
        out.modulus = modulus
        out._cache = {}
        return out

    def with_target(self, G):
        raise PropertyHFailure(f"{type(self).__name__} cannot be moved to {G}; "
                               "declare the character over the larger field")


class PrimeTableCharacter(LinearCharacter):
    """r given by a callable (or dict) on prime ideals."""

    def __init__(self, field, modulus, target, kred, values, provenance=None):
        super().__init__(field, modulus, target, kred, provenance)
        self._values = values

    def prime_value(self, P):
        v = self._values(P) if callable(self._values) else self._values[P]
        return v if isinstance(v, FFElement) else self.target(v)

    def with_target(self, G):
        emb = FieldEmbedding(self.target, G)
        kred = reduction_map(self.kred.source, G, {"omega": emb(self.kred.omega_image)})
        values = self._values
        get = values if callable(values) else values.__getitem__

        def lifted(P):
            v = get(P)
            return emb(v if isinstance(v, FFElement) else self.target(v))

        return PrimeTableCharacter(self.field, self.modulus, G, kred, lifted, self.provenance)


class RayCharacter(LinearCharacter):
    """r(p_1^n_1 ... (alpha)) = prod v_i^n_i * red(alpha) * eta(alpha).

    This is the shape of every character satisfying property (H); the values
    v_i on the class-group generators must satisfy v_i^e_i = red(alpha_i) eta(alpha_i).
    """

    def __init__(self, eta, cg, gen_values, provenance=None, modulus=None):
        super().__init__(eta.field, modulus or eta.modulus, eta.F, eta.kred, provenance)
        self.eta = eta
        self.cg = cg
        self.gen_values = [v if isinstance(v, FFElement) else self.target(v) for v in gen_values]
        if len(self.gen_values) != len(cg.generators):
            raise ValueError("one value per class-group generator is required")
        for (P, e), a, v in zip(cg.generators, cg.generator_alphas, self.gen_values):
            if not P.is_coprime(self.modulus):
                raise ValueError("class-group generators must be coprime to the modulus")
            if v ** e != self.kred(a) * eta(a):
                raise ValueError(f"value at {P} is not an e-th root of red(alpha) eta(alpha)")

    def __call__(self, ideal):
        if not ideal.is_coprime(self.modulus):
            raise ValueError(f"{ideal} is not coprime to the modulus")
        exps, alpha = ideal_decompose(ideal, self.cg)
        out = self.kred(alpha) * self.eta(alpha)
        for v, n in zip(self.gen_values, exps):
            if n:
                out = out * v ** n
        return out

    def prime_value(self, P):
        return self(P)

    def principal_value(self, beta):
        return self.kred(beta) * self.eta(beta)


# ------------------------------------------------------------ property (H)

@dataclass
class HReport:
    ok: bool
    conditions: dict = dc_field(default_factory=dict)
    messages: list = dc_field(default_factory=list)
    experimental: bool = False

    def violated(self):
        return [k for k, v in self.conditions.items() if not v]


def check_property_H(r, samples=500, seed=0, experimental=False):
    """Check the four conditions of property (H) for r; report-style output."""
    field, F = r.field, r.target
    ell, n = F.ell, F.n
    st = split_type(field, ell)
    fdeg = 2 if st.kind == "inert" else 1
    cond = {}
    msgs = []
    cond["i"] = n % fdeg == 0
    if not cond["i"]:
        msgs.append(f"(i) residue degree {fdeg} of the primes above {ell} does not divide n={n}")
    lp = r.lprime
    cond["ii"] = lp.divides(r.modulus)
    if not cond["ii"]:
        msgs.append(f"(ii) the prime {lp} does not divide the modulus")
    units = field.unit_count
    cond["iii"] = (F.q - 1) % units == 0
    if not cond["iii"]:
        msgs.append(f"(iii) the unit group of order {units} does not embed in F_{F.q}*")
    rng = random.Random(seed)
    bad = None
    for _ in range(samples):
        a = random_one_mod(r.modulus, rng)
        if r.principal_value(a) != F.one:
            bad = a
            break
    cond["iv"] = bad is None
    if bad is not None:
        msgs.append(f"(iv) r(({bad})) != 1 although {bad} = 1 mod m")
    skipped = experimental and not cond["iii"]
    ok = all(v for k, v in cond.items() if not (skipped and k == "iii"))
    return HReport(ok, cond, msgs, experimental=skipped)


def enforce_property_H(r):
    """Apply the standard repair for conditions (i) and (ii): n -> lcm(n, f) and m -> m*l.

    Returns the (possibly new) character and a list of notes describing what changed.
    """
    notes = []
    F = r.target
    st = split_type(r.field, F.ell)
    fdeg = 2 if st.kind == "inert" else 1
    if F.n % fdeg:
        G = residue_field(F.ell, F.n * fdeg)
        r = r.with_target(G)
        notes.append(f"value field enlarged from {F} to {G} (condition (i))")
    lp = r.lprime
    if not lp.divides(r.modulus):
        new = r.modulus * lp
        notes.append(f"modulus enlarged from {r.modulus} to {new} (condition (ii))")
        r = r.with_modulus(new)
    return r, notes


def conductor(char_log, modulus, samples=200, seed=0):
    """Smallest divisor f of the modulus through which alpha -> char_log(alpha) factors.

    char_log(alpha) must return 0 exactly when the character is trivial at alpha,
    for alpha integral and coprime to the modulus.  Divisor descent by sampling.
    """
    rng = random.Random(seed)
    f = modulus
    changed = True
    while changed:
        changed = False
        for P in sorted(f.factor()):
            g = ideal_quotient(f, P)
            if all(char_log(random_one_mod(g, rng, coprime_to=modulus)) == 0 for _ in range(samples)):
                f = g
                changed = True
                break
    return f


def derive_eta(r, samples=100, seed=0):
    """eta(alpha) = r((alpha)) (alpha mod l)^-1 on (O/m)*; checks representative independence."""
    eta = PointwiseEta(r)
    rng = random.Random(seed)
    for _ in range(samples):
        a = random_unit_residue(r.modulus, rng)
        mu = random_one_mod(r.modulus, rng) - 1
        b = a + mu
        if b and eta.is_coprime(b) and eta.log(a) != eta.log(b):
            raise PropertyHFailure(f"r((alpha)) (alpha mod l)^-1 depends on the representative at {a}")
    eta.check_units()
    base = getattr(r, "eta", None)
    if base is not None:
        for _ in range(samples):
            a = random_unit_residue(r.modulus, rng)
            if base.log(a) != eta.log(a):
                raise PropertyHFailure("declared eta disagrees with r((alpha)) (alpha mod l)^-1")
        return base
    return eta


# --------------------------------------------------------------- Hecke lift

class HeckeCharacter:
    """psi on ideals coprime to its modulus with psi((alpha)) = alpha * eta~(alpha).

    In exact mode the values live in `tower` and `rmap` is the reduction modulo
    the distinguished prime; in residual mode only the reduction is available.
    """

    def __init__(self, field, modulus, eta, cg, gen_values, residues, rmap, kred,
                 tower=None, mode="exact", flags=(), source=None):
        self.field = field
        self.modulus = modulus
        self.eta = eta
        self.cg = cg
        self.gen_values = gen_values  # exact a_i (tower elements) or None
        self.residues = residues      # r(p_i) in F
        self.rmap = rmap
        self.kred = kred
        self.tower = tower
        self.mode = mode
        self.flags = list(flags)
        self.source = source
        self.F = kred.target
        self._pow_cache = {}
        self._prime_cache = {}
        self._res_cache = {}

    @property
    def target(self):
        return self.F

    @property
    def generators(self):
        return self.cg.generators

    def __repr__(self):
        return (f"HeckeCharacter(K={self.field.delta}, m={self.modulus}, mode={self.mode}, "
                f"h={self.cg.h})")

    def is_exact(self):
        return self.mode == "exact"

    def _gen_power(self, i, n):
        key = (i, n)
        v = self._pow_cache.get(key)
        if v is None:
            v = self.gen_values[i] ** n
            self._pow_cache[key] = v
        return v

    def eta_tilde(self, alpha):
        j = teichmuller_exponent(self.rmap, self.F.exp(self.eta.log(alpha)))
        return self.tower.zeta ** j

    def principal_value(self, alpha):
        """psi((alpha)) = alpha eta~(alpha) (exact mode)."""
        self._need_exact()
        return self.tower.embed(alpha) * self.eta_tilde(alpha)

    def _need_exact(self):
        if self.mode != "exact":
            raise ValueError("exact values are not available in residual mode")

    def _check(self, ideal):
        if not ideal.is_coprime(self.modulus):
            raise ValueError(f"{ideal} is not coprime to the modulus")

    def __call__(self, ideal):
        """Exact value psi(ideal) via the class-group decomposition."""
        self._need_exact()
        self._check(ideal)
        exps, alpha = ideal_decompose(ideal, self.cg)
        out = self.principal_value(alpha)
        for i, n in enumerate(exps):
            if n:
                out = out * self._gen_power(i, n)
        return out

    def residual(self, ideal):
        """psi(ideal) mod the distinguished prime, computed without the tower."""
        self._check(ideal)
        exps, alpha = ideal_decompose(ideal, self.cg)
        out = self.kred(alpha) * self.eta(alpha)
        for v, n in zip(self.residues, exps):
            if n:
                out = out * v ** n
        return out

    def prime_value(self, P):
        v = self._prime_cache.get(P)
        if v is None:
            v = self(P)
            self._prime_cache[P] = v
        return v

    def prime_residue(self, P):
        v = self._res_cache.get(P)
        if v is None:
            v = self.residual(P)
            self._res_cache[P] = v
        return v

    def reduce(self, value):
        return self.rmap(value)

    def residual_character(self):
        return ReducedHecke(self)

    def conductor(self, samples=200, seed=0):
        return conductor(self.eta.log, self.modulus, samples, seed)

    def primitive(self, samples=200, seed=0):
        """The same character modulo the conductor of eta."""
        f = self.conductor(samples, seed)
        if f == self.modulus:
            return self
        eta = InducedEta(self.eta, f)
        return HeckeCharacter(self.field, f, eta, self.cg, self.gen_values, self.residues,
                              self.rmap, self.kred, self.tower, self.mode,
                              self.flags + [f"primitive modulus {f} from {self.modulus}"], self.source)

    def check_generators(self):
        """psi(p_i)^e_i = alpha_i eta~(alpha_i) exactly."""
        self._need_exact()
        for i, ((P, e), a) in enumerate(zip(self.cg.generators, self.cg.generator_alphas)):
            if self.gen_values[i] ** e != self.principal_value(a):
                return False
        return True


class ReducedHecke(LinearCharacter):
    """psi mod the distinguished prime, as a linear character."""

    provenance = "reduced Hecke character"

    def __init__(self, psi):
        super().__init__(psi.field, psi.modulus, psi.F, psi.kred)
        self.psi = psi

    def __call__(self, ideal):
        return self.psi.residual(ideal)

    def prime_value(self, P):
        return self.psi.residual(P)


def _eta_values_ok(r, eta, cg):
    for (P, e), a, in zip(cg.generators, cg.generator_alphas):
        if r(P) ** e != r.kred(a) * eta(a):
            return False
    return True


def lift_hecke(r, cg=None, rmap=None, degree_cap=64, mode="auto", check_bound=1000,
               experimental=False, seed=0):
    """Lift r to a Hecke character psi with psi(p) = r(p) modulo a prime above l.

    Follows the constructive argument: eta from r, Teichmuller lift of eta, the
    class-group generators p_i with p_i^e_i = (alpha_i), formal roots a_i of
    alpha_i eta~(alpha_i) reducing to r(p_i).  Falls back to residual mode when
    the tower would exceed `degree_cap` or a root layer cannot be certified.
    """
    r, flags = enforce_property_H(r)
    report = check_property_H(r, seed=seed, experimental=experimental)
    if not report.ok:
        raise PropertyHFailure("; ".join(report.messages))
    field, F, kred = r.field, r.target, r.kred
    if report.experimental:
        flags.append("experimental: unit condition (iii) skipped")
        mode = "residual"
    eta = derive_eta(r, seed=seed)
    if cg is None:
        cg = getattr(r, "cg", None) or class_group(field, avoid=r.modulus.norm * F.ell)
    for P, _ in cg.generators:
        if not P.is_coprime(r.modulus) or P.norm % F.ell == 0:
            raise LiftError(f"class-group generator {P} is not coprime to m l")
    residues = [r(P) for P, _ in cg.generators]
    alphas = cg.generator_alphas
    for (P, e), a, v in zip(cg.generators, alphas, residues):
        if v ** e != kred(a) * eta(a):
            raise NoCompatibleRoot(f"r({P})^{e} differs from red(alpha) eta(alpha)")

    w = F.q - 1
    psi = None
    if mode != "residual":
        degree = _base_degree(field, w)
        for _, e in cg.generators:
            degree *= e
        if degree > degree_cap:
            flags.append(f"tower degree {degree} exceeds cap {degree_cap}: residual mode")
        else:
            try:
                psi = _exact_lift(field, r.modulus, eta, cg, residues, kred, w, flags)
            except ReducibleLayer as exc:
                flags.append(f"root layer not certified irreducible ({exc}): residual mode")
    if psi is None:
        psi = HeckeCharacter(field, r.modulus, eta, cg, None, residues, kred, kred,
                             mode="residual", flags=flags, source=r)
    psi.source = r
    _postcondition(psi, r, check_bound)
    return psi


def _base_degree(field, w):
    T = TowerField(certify=False).add_cyclotomic(w)
    return T.degree * (1 if T.contains_quadratic(field) else 2)


def _exact_lift(field, modulus, eta, cg, residues, kred, w, flags):
    base = value_field(field, w)
    F = kred.target
    bmap = reduction_map(base, F, {"omega": kred.omega_image})
    T = base
    images = list(bmap.images)
    gens = []
    pending = []
    for (P, e), a, v in zip(cg.generators, cg.generator_alphas, residues):
        j = teichmuller_exponent(bmap, eta(a))
        c = base.embed(a) * base.zeta ** j
        if bmap(c) != v ** e:
            raise NoCompatibleRoot(f"reduction of alpha eta~(alpha) at {P} is not r(p)^e")
        if e == 1:
            gens.append(c)
            continue
        T = T.add_root(e, c)
        images.append(v)
        pending.append(len(gens))
        gens.append(None)
    rmap = ReductionMap(T, F, images)
    k = base.depth
    for idx in pending:
        gens[idx] = T.gen(k)
        k += 1
    gens = [T._coerce(g) for g in gens]
    flags.append(f"exact tower {T} of degree {T.degree}")
    return HeckeCharacter(field, modulus, eta, cg, gens, residues, rmap, kred, T, "exact", flags)


def _postcondition(psi, r, bound):
    for P in primes_of_norm_upto(psi.field, bound, psi.modulus):
        want = r(P)
        got = psi.reduce(psi.prime_value(P)) if psi.is_exact() else psi.prime_residue(P)
        if got != want:
            raise LiftError(f"psi({P}) does not reduce to r({P})")


def nebentypus_is_trivial(chi, sample_bound=200):
    """True iff chi((p)) = p eps(p) for the sampled primes p coprime to m l."""
    field = chi.field
    F = chi.target
    exact = isinstance(chi, HeckeCharacter) and chi.is_exact()
    for p in primes_upto(sample_bound):
        if p % F.ell == 0 or chi.modulus.norm % p == 0:
            continue
        eps = kronecker(field.disc, p)
        I = field.ideal(p)
        if exact:
            if chi(I) != chi.tower.from_rational(p * eps):
                return False
        else:
            val = chi.residual(I) if isinstance(chi, HeckeCharacter) else chi(I)
            if val != F(p * eps):
                return False
    return True
