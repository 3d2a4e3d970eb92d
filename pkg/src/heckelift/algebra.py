"""Finite fields, exact tower fields and reduction maps between them.

Elements of F_{l^n} are stored as their index sum(c_i * l**i) over the
coefficient vector in the basis 1, z, ..., z^{n-1}; the index order is also
the "canonical enumeration" used whenever a smallest root is needed.

A TowerField is Q followed by simple extensions.  A level-k element is a tuple
of level-(k-1) elements and level 0 is gmpy2.mpq, so arithmetic stays exact.
Three layer kinds occur: the cyclotomic layer of a root of unity of order w,
the quadratic layer generated by the integral basis element w of an imaginary
quadratic field, and formal root layers y^e - c.
"""

from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd

import gmpy2
from gmpy2 import mpq
from sympy import cyclotomic_poly, totient
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p

from .arith import factor, is_prime, kronecker
from .quadfield import QuadElement

__all__ = [
    "ResidueField", "FFElement", "residue_field", "TowerField", "TowerElement",
    "ReductionMap", "reduction_map", "teichmuller", "value_field",
    "NoRootError", "ReducibleLayer", "poly_roots", "FieldEmbedding",
]

TABLE_LIMIT = 1 << 21
_SCALARS = (int, Fraction, type(mpq(0)))


class NoRootError(ValueError):
    """A layer polynomial has no root in the requested residue field."""


class ReducibleLayer(ValueError):
    """Irreducibility of a tower layer could not be certified."""


# ------------------------------------------------------------ F_l[x] helpers

def _pmulmod(a, b, mod, ell):
    """Product of coefficient lists a, b modulo the monic list `mod` over F_l."""
    n = len(mod) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for k in range(len(prod) - 1, n - 1, -1):
        t = prod[k] % ell
        if t:
            for i in range(n):
                prod[k - n + i] -= t * mod[i]
        prod[k] = 0
    out = [c % ell for c in prod[:n]]
    return out + [0] * (n - len(out))


def _irreducible(coeffs, ell):
    """coeffs constant-first, monic."""
    return gf_irreducible_p([int(c) % ell for c in reversed(coeffs)], ell, ZZ)


def least_irreducible(ell, n):
    """Lexicographically least monic irreducible of degree n, ordered by (c_{n-1}, ..., c_0)."""
    if n == 1:
        return (0, 1)
    for k in range(ell ** n):
        c = []
        t = k
        for _ in range(n):
            t, r = divmod(t, ell)
            c.append(r)
        if c[0] and _irreducible(c + [1], ell):
            return tuple(c + [1])
    raise AssertionError("no irreducible polynomial found")


class FFElement:
    __slots__ = ("F", "v")

    def __init__(self, F, v):
        self.F = F
        self.v = v

    def _other(self, o):
        if isinstance(o, FFElement):
            if o.F is not self.F and o.F != self.F:
                raise ValueError("elements of different finite fields")
            return o.v
        if isinstance(o, int):
            return o % self.F.ell
        return NotImplemented

    def __add__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return FFElement(self.F, self.F._add(self.v, o))

    __radd__ = __add__

    def __neg__(self):
        return FFElement(self.F, self.F._neg(self.v))

    def __sub__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return FFElement(self.F, self.F._add(self.v, self.F._neg(o)))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return FFElement(self.F, self.F._mul(self.v, o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return FFElement(self.F, self.F._mul(self.v, self.F._inv(o)))

    def __rtruediv__(self, o):
        return FFElement(self.F, self.F._mul(o % self.F.ell, self.F._inv(self.v)))

    def __pow__(self, k):
        return FFElement(self.F, self.F._pow(self.v, k))

    def __eq__(self, o):
        if isinstance(o, FFElement):
            return self.F == o.F and self.v == o.v
        if isinstance(o, int):
            return self.v == o % self.F.ell
        return NotImplemented

    def __hash__(self):
        return hash((self.F.ell, self.F.n, self.v))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        if self.F.n > 1 and self.v >= self.F.ell:
            raise ValueError("element is not in the prime field")
        return self.v

    def __lt__(self, o):
        return self.v < o.v

    def log(self):
        return self.F.log(self)

    def coeffs(self):
        return self.F._digits(self.v)

    def order(self):
        return self.F.element_order(self)

    def __repr__(self):
        if self.F.n == 1:
            return str(self.v)
        terms = []
        for i, c in enumerate(self.F._digits(self.v)):
            if c:
                mono = "" if i == 0 else "z" if i == 1 else f"z^{i}"
                terms.append(f"{c}{'*' if mono else ''}{mono}" if c != 1 or not mono else mono)
        return " + ".join(reversed(terms)) or "0"


class ResidueField:
    """The finite field F_{l^n} = F_l[z]/(modulus)."""

    def __init__(self, ell, n=1, modulus=None):
        if not is_prime(ell):
            raise ValueError(f"{ell} is not prime")
        if n < 1:
            raise ValueError("degree must be positive")
        self.ell, self.n = int(ell), int(n)
        self.q = self.ell ** self.n
        if modulus is None:
            modulus = least_irreducible(self.ell, self.n)
        modulus = tuple(int(c) % self.ell for c in modulus)
        if len(modulus) != self.n + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree n")
        if self.n > 1 and not _irreducible(modulus, self.ell):
            raise ValueError("modulus is reducible")
        self.modulus = modulus

    def __eq__(self, other):
        return (isinstance(other, ResidueField) and self.ell == other.ell
                and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.ell, self.modulus))

    def __repr__(self):
        return f"GF({self.ell}^{self.n})"

    # encoding
    def _digits(self, v):
        out = []
        for _ in range(self.n):
            v, r = divmod(v, self.ell)
            out.append(r)
        return out

    def _index(self, digits):
        v = 0
        for c in reversed(digits):
            v = v * self.ell + c % self.ell
        return v

    def __call__(self, value):
        """Image of an integer (or rational) under Z -> F_l -> F_{l^n}."""
        if isinstance(value, FFElement):
            if value.F != self:
                raise ValueError("element of another field")
            return value
        return FFElement(self, _rat_mod(value, self.ell))

    def from_index(self, k):
        if not 0 <= k < self.q:
            raise ValueError("index out of range")
        return FFElement(self, int(k))

    def from_coeffs(self, coeffs):
        c = list(coeffs)[: self.n] + [0] * max(0, self.n - len(coeffs))
        return FFElement(self, self._index([_rat_mod(x, self.ell) for x in c]))

    @property
    def zero(self):
        return FFElement(self, 0)

    @property
    def one(self):
        return FFElement(self, 1)

    @property
    def z(self):
        return self.from_coeffs([0, 1]) if self.n > 1 else self.zero

    def elements(self):
        return (FFElement(self, v) for v in range(self.q))

    def nonzero(self):
        return (FFElement(self, v) for v in range(1, self.q))

    # arithmetic on indices
    def _add(self, a, b):
        if self.n == 1:
            return (a + b) % self.ell
        da, db = self._digits(a), self._digits(b)
        return self._index([x + y for x, y in zip(da, db)])

    def _neg(self, a):
        if self.n == 1:
            return (-a) % self.ell
        return self._index([-x for x in self._digits(a)])

    def _mul_poly(self, a, b):
        return self._index(_pmulmod(self._digits(a), self._digits(b), self.modulus, self.ell))

    def _mul(self, a, b):
        if self.n == 1:
            return a * b % self.ell
        if not a or not b:
            return 0
        if self._tables is not None:
            exp, log = self._tables
            return exp[(log[a] + log[b]) % (self.q - 1)]
        return self._mul_poly(a, b)

    def _pow(self, a, k):
        if self.n == 1:
            if a == 0:
                if k < 0:
                    raise ZeroDivisionError("0 has no inverse")
                return 0 if k else 1
            return pow(a, k % (self.q - 1), self.ell)
        if a == 0:
            if k < 0:
                raise ZeroDivisionError("0 has no inverse")
            return 0 if k else 1
        if self._tables is not None:
            exp, log = self._tables
            return exp[log[a] * k % (self.q - 1)]
        k %= self.q - 1
        out, base = 1, a
        while k:
            if k & 1:
                out = self._mul_poly(out, base)
            base = self._mul_poly(base, base)
            k >>= 1
        return out

    def _inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._pow(a, -1)

    @cached_property
    def _order_primes(self):
        return sorted(factor(self.q - 1)) if self.q > 2 else []

    @cached_property
    def gen(self):
        """Smallest primitive element in the canonical enumeration."""
        for v in range(1, self.q):
            if all(self._pow_nt(v, (self.q - 1) // r) != 1 for r in self._order_primes):
                return FFElement(self, v)
        raise AssertionError("no primitive element")

    def _pow_nt(self, a, k):
        if self.n == 1:
            return pow(a, k, self.ell)
        out, base = 1, a
        while k:
            if k & 1:
                out = self._mul_poly(out, base)
            base = self._mul_poly(base, base)
            k >>= 1
        return out

    @cached_property
    def _tables(self):
        if self.n == 1 or self.q > TABLE_LIMIT:
            return None
        return self._build_tables()

    def _build_tables(self):
        g = self.gen.v
        exp = [0] * (self.q - 1)
        log = [0] * self.q
        x = 1
        for k in range(self.q - 1):
            exp[k] = x
            log[x] = k
            x = self._mul_poly(x, g)
        return exp, log

    @cached_property
    def _log_tables(self):
        if self._tables is not None:
            return self._tables
        if self.q > TABLE_LIMIT:
            raise ValueError("field too large for discrete-log tables")
        g = self.gen.v
        exp = [0] * (self.q - 1)
        log = [0] * self.q
        x = 1
        for k in range(self.q - 1):
            exp[k] = x
            log[x] = k
            x = x * g % self.ell
        return exp, log

    def log(self, x):
        """Discrete log of x to the base self.gen."""
        x = self(x) if not isinstance(x, FFElement) else x
        if x.v == 0:
            raise ValueError("log of zero")
        return self._log_tables[1][x.v]

    def exp(self, k):
        if self.n == 1:
            return FFElement(self, pow(self.gen.v, k % (self.q - 1), self.ell))
        return FFElement(self, self._log_tables[0][k % (self.q - 1)])

    def element_order(self, x):
        if not x:
            raise ValueError("zero has no multiplicative order")
        k = self.log(x)
        return (self.q - 1) // gcd(k, self.q - 1)

    def elements_of_order(self, w):
        """All elements of exact multiplicative order w, in canonical order."""
        if (self.q - 1) % w:
            return []
        step = (self.q - 1) // w
        return sorted(self.exp(step * k) for k in range(w) if gcd(k, w) == 1)

    def nth_roots(self, c, e):
        """All x with x^e = c, in canonical order."""
        c = self(c) if not isinstance(c, FFElement) else c
        if not c:
            return [self.zero]
        m = self.q - 1
        g = gcd(e, m)
        lc = self.log(c)
        if lc % g:
            return []
        # e/g is invertible mod m/g
        base = (lc // g) * pow(e // g, -1, m // g) % (m // g)
        return sorted(self.exp(base + t * (m // g)) for t in range(g))

    def is_square(self, x):
        return not x or self.log(x) % 2 == 0 or self.ell == 2

    def frobenius(self, x, k=1):
        return x ** (self.ell ** k)

    def norm_to_prime_field(self, x):
        return x ** ((self.q - 1) // (self.ell - 1))

    def contains_degree(self, d):
        return self.n % d == 0

    def embedding_root(self, poly):
        """Smallest root in self of a polynomial given by F_l coefficients (constant first)."""
        rts = poly_roots([self(c) for c in poly], self)
        if not rts:
            raise NoRootError(f"{poly} has no root in {self}")
        return rts[0]


class FieldEmbedding:
    """The embedding F_{l^n} -> F_{l^m} (n | m) sending z to the smallest root of F's modulus."""

    def __init__(self, source, target):
        if source.ell != target.ell or target.n % source.n:
            raise ValueError(f"{source} does not embed in {target}")
        self.source, self.target = source, target
        self.z_image = target.embedding_root(source.modulus)

    def __call__(self, x):
        acc = self.target.zero
        for c in reversed(x.coeffs()):
            acc = acc * self.z_image + c
        return acc


def _rat_mod(value, ell):
    if isinstance(value, int):
        return value % ell
    num, den = int(gmpy2.numer(mpq(value))), int(gmpy2.denom(mpq(value)))
    if den % ell == 0:
        raise ZeroDivisionError(f"{value} is not {ell}-integral")
    return num * pow(den, -1, ell) % ell


@lru_cache(maxsize=None)
def residue_field(ell, n=1):
    """F_{l^n} with the deterministic least modulus."""
    return ResidueField(ell, n)


def _peval(coeffs, x):
    acc = x.F.zero
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_roots(coeffs, F):
    """Roots in F of a polynomial with F-coefficients (constant first), canonical order."""
    coeffs = [F(c) if not isinstance(c, FFElement) else c for c in coeffs]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    d = len(coeffs) - 1
    if d < 1:
        return []
    if d == 1:
        return [-coeffs[0] / coeffs[1]]
    if all(not c for c in coeffs[1:-1]):
        return F.nth_roots(-coeffs[0] / coeffs[-1], d)
    if d == 2 and F.ell != 2:
        c0, c1, c2 = coeffs
        two_a = c2 * 2
        return sorted({(-c1 + s) / two_a for s in F.nth_roots(c1 * c1 - c0 * c2 * 4, 2)})
    return [x for x in F.elements() if not _peval(coeffs, x)]


# -------------------------------------------------------------- tower fields

class Layer:
    __slots__ = ("name", "kind", "degree", "poly", "data")

    def __init__(self, name, kind, poly, data=None):
        self.name = name
        self.kind = kind
        self.poly = poly  # monic, constant first, entries are lower-level elements
        self.degree = len(poly) - 1
        self.data = data

    def __eq__(self, other):
        return self is other or (isinstance(other, Layer) and self.kind == other.kind
                                 and self.poly == other.poly)

    def __hash__(self):
        return hash((self.kind, self.degree))

    def __repr__(self):
        return f"Layer({self.name}, {self.kind}, degree={self.degree})"


class TowerField:
    """Q extended by a sequence of layers, each verified irreducible over the previous field.

    Towers are immutable: the add_* methods return a new, larger tower whose
    first layers are shared with the old one, so elements of the old tower
    coerce into the new one.
    """

    def __init__(self, layers=(), zeta=None, omega=None, quad=None, certificates=(),
                 certify=True):
        self.layers = list(layers)
        self.certify = certify
        self.certificates = list(certificates)
        # zeta / omega are stored as (order or None, level, raw data at that level)
        self._zeta_raw = zeta if zeta is not None else (2, 0, mpq(-1))
        self._omega_raw = omega
        self.quad = quad

    def _extend(self, layer):
        cert = self._certify(layer) if self.certify else None
        return TowerField(self.layers + [layer], self._zeta_raw, self._omega_raw, self.quad,
                          self.certificates + [cert], self.certify)

    @classmethod
    def cyclotomic(cls, w, certify=True):
        return cls(certify=certify).add_cyclotomic(w)

    @classmethod
    def quadratic(cls, field, certify=True):
        """The field K itself, with the units of K as its roots of unity."""
        T = cls(certify=certify).add_quadratic(field)
        if field.delta in (-1, -3):
            T._zeta_raw = (4 if field.delta == -1 else 6, 1, T.gen(0).data)
        return T

    def add_cyclotomic(self, w):
        if self.layers:
            raise ValueError("the cyclotomic layer must come first")
        if w <= 2:
            return TowerField((), (2, 0, mpq(-1)), None, None, (), self.certify)
        coeffs = [mpq(int(c)) for c in reversed(cyclotomic_poly(w, polys=True).all_coeffs())]
        T = self._extend(Layer(f"zeta{w}", "cyclotomic", coeffs, data=w))
        T._zeta_raw = (w, 1, T.gen(0).data)
        return T

    def contains_quadratic(self, field):
        """True if K already lies in the cyclotomic base Q(zeta_w)."""
        if self.depth != 1 or self.layers[0].kind != "cyclotomic":
            return False
        w = self.zeta_order
        wp = w if w % 2 == 0 else 2 * w
        return wp % abs(field.disc) == 0

    def add_quadratic(self, field):
        """Adjoin w_K, or locate it via a Gauss sum when K is already inside."""
        if self.quad is not None:
            raise ValueError("quadratic field already present")
        if self.contains_quadratic(field):
            om = self._gauss_omega(field)
            return TowerField(self.layers, self._zeta_raw, (self.depth, om.data), field,
                              self.certificates, self.certify)
        lvl = self.depth
        poly = [self._lift(mpq(field.nw), lvl), self._lift(mpq(-field.s), lvl),
                self._lift(mpq(1), lvl)]
        T = self._extend(Layer("omega", "quadratic", poly, data=field))
        T.quad = field
        T._omega_raw = (T.depth, T.gen(T.depth - 1).data)
        return T

    def add_root(self, e, c, name=None):
        """Adjoin a root of y^e - c for c in the current field."""
        if e < 2:
            raise ValueError("root layers need exponent >= 2")
        lvl = self.depth
        c = self._coerce(c)
        zero = self._lift(mpq(0), lvl)
        poly = [self._neg(lvl, c.data)] + [zero] * (e - 1) + [self._lift(mpq(1), lvl)]
        return self._extend(Layer(name or f"y{lvl}", "root", poly, data=(e, c)))

    def _gauss_omega(self, field):
        D = field.disc
        w = self.zeta_order
        if w % 2 == 0:
            z = self.zeta ** (w // abs(D))
        else:
            z = (-(self.zeta ** ((w + 1) // 2))) ** (2 * w // abs(D))
        G = self.zero()
        zp = self.one()
        for a in range(1, abs(D)):
            zp = zp * z
            k = kronecker(D, a)
            if k:
                G = G + zp * k
        om = (G + field.s) * mpq(1, 2)
        if not (om * om - om * field.s + field.nw).is_zero():
            raise AssertionError("Gauss sum does not give a square root of the discriminant")
        return om

    # levels and raw operations
    @property
    def depth(self):
        return len(self.layers)

    @property
    def degree(self):
        d = 1
        for L in self.layers:
            d *= L.degree
        return d

    @property
    def zeta_order(self):
        return self._zeta_raw[0]

    def _lift(self, x, lvl, start=0):
        """Embed a level-`start` value into level lvl."""
        for k in range(start, lvl):
            d = self.layers[k].degree
            x = (x,) + (self._zero(k),) * (d - 1)
        return x

    def _zero(self, lvl):
        z = mpq(0)
        for k in range(lvl):
            z = (z,) * self.layers[k].degree
        return z

    def _is_zero(self, lvl, x):
        if lvl == 0:
            return x == 0
        return all(self._is_zero(lvl - 1, c) for c in x)

    def _add(self, lvl, x, y):
        if lvl == 0:
            return x + y
        return tuple(self._add(lvl - 1, a, b) for a, b in zip(x, y))

    def _neg(self, lvl, x):
        if lvl == 0:
            return -x
        return tuple(self._neg(lvl - 1, a) for a in x)

    def _scale(self, lvl, x, r):
        if lvl == 0:
            return x * r
        return tuple(self._scale(lvl - 1, a, r) for a in x)

    def _mul(self, lvl, x, y):
        if lvl == 0:
            return x * y
        L = self.layers[lvl - 1]
        d = L.degree
        sub = lvl - 1
        nzx = [(i, a) for i, a in enumerate(x) if not self._is_zero(sub, a)]
        nzy = [(j, b) for j, b in enumerate(y) if not self._is_zero(sub, b)]
        if not nzx or not nzy:
            return self._zero(lvl)
        prod = [None] * (2 * d - 1)
        for i, a in nzx:
            for j, b in nzy:
                t = self._mul(sub, a, b)
                prod[i + j] = t if prod[i + j] is None else self._add(sub, prod[i + j], t)
        for k in range(2 * d - 2, d - 1, -1):
            t = prod[k]
            if t is None or self._is_zero(sub, t):
                continue
            for i in range(d):
                pi = L.poly[i]
                if not self._is_zero(sub, pi):
                    u = self._neg(sub, self._mul(sub, t, pi))
                    prod[k - d + i] = u if prod[k - d + i] is None else self._add(sub, prod[k - d + i], u)
        z = self._zero(sub)
        return tuple(z if c is None else c for c in prod[:d])

    def _flatten(self, lvl, x):
        if lvl == 0:
            return [x]
        out = []
        for c in x:
            out.extend(self._flatten(lvl - 1, c))
        return out

    def _unflatten(self, lvl, vec):
        if lvl == 0:
            return mpq(vec[0])
        d = self.layers[lvl - 1].degree
        size = len(vec) // d
        return tuple(self._unflatten(lvl - 1, vec[i * size:(i + 1) * size]) for i in range(d))

    # public element constructors
    def element(self, data):
        return TowerElement(self, data)

    def zero(self):
        return TowerElement(self, self._zero(self.depth))

    def one(self):
        return self.from_rational(1)

    def from_rational(self, r):
        return TowerElement(self, self._lift(mpq(r), self.depth))

    def from_vector(self, vec):
        if len(vec) != self.degree:
            raise ValueError("wrong vector length")
        return TowerElement(self, self._unflatten(self.depth, [mpq(v) for v in vec]))

    def gen(self, k):
        """Generator of layer k as an element of the full tower."""
        d = self.layers[k].degree
        x = (self._zero(k), self._lift(mpq(1), k)) + (self._zero(k),) * (d - 2)
        return TowerElement(self, self._lift(x, self.depth, k + 1))

    def _coerce(self, x):
        if isinstance(x, TowerElement):
            if x.tower is self:
                return x
            return self._from_lower(x)
        if isinstance(x, QuadElement):
            return self.embed(x)
        return self.from_rational(x)

    def _from_lower(self, x):
        """Embed an element of a prefix tower into this one."""
        lvl = x.tower.depth
        if lvl > self.depth or any(a != b for a, b in zip(x.tower.layers, self.layers)):
            raise ValueError("incompatible towers")
        return TowerElement(self, self._lift(x.data, self.depth, lvl))

    @property
    def zeta(self):
        _, lvl, data = self._zeta_raw
        return TowerElement(self, self._lift(data, self.depth, lvl))

    @property
    def omega(self):
        if self._omega_raw is None:
            raise ValueError("tower does not contain a quadratic field")
        lvl, data = self._omega_raw
        return TowerElement(self, self._lift(data, self.depth, lvl))

    def embed(self, alpha):
        """Image of a QuadElement x + y*w."""
        if self.quad is None or alpha.field != self.quad:
            raise ValueError("element of a field not contained in this tower")
        return self.from_rational(alpha.x) + self.omega * mpq(alpha.y)

    def prefix(self, depth):
        """The tower made of the first `depth` layers."""
        zeta = self._zeta_raw if self._zeta_raw[1] <= depth else (2, 0, mpq(-1))
        omega, quad = (self._omega_raw, self.quad)
        if omega is not None and omega[0] > depth:
            omega, quad = None, None
        return TowerField(self.layers[:depth], zeta, omega, quad,
                          self.certificates[:depth], self.certify)

    # irreducibility certificates
    def _certify(self, layer):
        if layer.kind == "cyclotomic":
            return ("cyclotomic", layer.data)
        if layer.kind == "quadratic":
            field = layer.data
            return ("quadratic", self._find_prime(lambda m: kronecker(field.disc, m.target.ell) == -1))
        e, c = layer.data
        out = []
        for q in sorted(factor(e)):
            out.append((q, self._find_prime(lambda m, q=q: _not_power(m(c), q), q)))
        if e % 4 == 0:
            minus = c * mpq(-1, 4)
            out.append((4, self._find_prime(lambda m: _not_power(m(minus), 4), 4)))
        return ("root", e, tuple(out))

    def _find_prime(self, test, need=1, tries=300):
        """Smallest rational prime Q with a degree-one prime of this field where test holds."""
        w = self.zeta_order if self.depth and self.layers[0].kind == "cyclotomic" else 1
        step = w * need // gcd(w, need)
        Q = 1
        while tries:
            Q += step
            if not is_prime(Q) or (self.quad is not None and self.quad.disc % Q == 0):
                continue
            tries -= 1
            F = ResidueField(Q, 1)
            for m in _degree_one_maps(self, F):
                if test(m):
                    return Q
        raise ReducibleLayer("could not certify irreducibility of the layer")

    def __repr__(self):
        names = ", ".join(f"{L.name}:{L.degree}" for L in self.layers) or "Q"
        return f"TowerField({names})"


def _not_power(x, q):
    if not x:
        return False
    F = x.F
    if (F.q - 1) % q:
        return False
    return x ** ((F.q - 1) // q) != F.one


def _degree_one_maps(tower, F, limit=8):
    """A few homomorphisms tower -> F (F a prime field), enumerated layer by layer."""
    partial = [[]]
    for k, L in enumerate(tower.layers):
        nxt = []
        for imgs in partial:
            m = ReductionMap(tower.prefix(k), F, imgs, check=False)
            poly = [m(TowerElement(m.source, c)) for c in L.poly]
            if L.kind == "cyclotomic":
                rts = F.elements_of_order(L.data)
            else:
                rts = poly_roots(poly, F)
            for r in rts[:limit]:
                nxt.append(imgs + [r])
        partial = nxt
        if not partial:
            return []
    return [ReductionMap(tower, F, imgs, check=False) for imgs in partial]


class TowerElement:
    __slots__ = ("tower", "data")

    def __init__(self, tower, data):
        self.tower = tower
        self.data = data

    def _c(self, o):
        return self.tower._coerce(o)

    def __add__(self, o):
        o = self._c(o)
        return TowerElement(self.tower, self.tower._add(self.tower.depth, self.data, o.data))

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.tower, self.tower._neg(self.tower.depth, self.data))

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return self._c(o) - self

    def __mul__(self, o):
        T = self.tower
        if isinstance(o, _SCALARS):
            return TowerElement(T, T._scale(T.depth, self.data, mpq(o)))
        o = self._c(o)
        return TowerElement(T, T._mul(T.depth, self.data, o.data))

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = self.tower.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, o):
        try:
            return (self - o).is_zero()
        except (ValueError, TypeError):
            return False

    def __hash__(self):
        return hash(tuple(self.vector()))

    def is_zero(self):
        return self.tower._is_zero(self.tower.depth, self.data)

    def vector(self):
        return self.tower._flatten(self.tower.depth, self.data)

    def is_rational(self):
        v = self.vector()
        return all(c == 0 for c in v[1:])

    def rational(self):
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.vector()[0]

    def __repr__(self):
        v = self.vector()
        if all(c == 0 for c in v[1:]):
            return str(v[0])
        return f"<{self.tower!r} element {[str(c) for c in v]}>"


# ----------------------------------------------------------- reduction maps

class ReductionMap:
    """Homomorphism from a tower to a finite field, fixed by the images of the layer generators."""

    def __init__(self, source, target, images, check=True):
        self.source = source
        self.target = target
        self.images = list(images)
        if len(self.images) != source.depth:
            raise ValueError("one image per layer is required")
        if check:
            for k, L in enumerate(source.layers):
                sub = ReductionMap(source.prefix(k), target, self.images[:k], check=False)
                val = _peval([sub(TowerElement(sub.source, c)) for c in L.poly], self.images[k])
                if val:
                    raise ValueError(f"image of layer {L.name} is not a root")

    def _eval(self, lvl, x):
        if lvl == 0:
            return self.target(x)
        img = self.images[lvl - 1]
        acc = self.target.zero
        for c in reversed(x):
            acc = acc * img + self._eval(lvl - 1, c)
        return acc

    def __call__(self, x):
        if isinstance(x, TowerElement):
            if x.tower.depth > len(self.images):
                raise ValueError("element lies outside the source tower")
            return self._eval(x.tower.depth, x.data)
        if isinstance(x, QuadElement):
            return self.target(x.x) + self.omega_image * self.target(x.y)
        return self.target(x)

    @cached_property
    def omega_image(self):
        return self(self.source.omega)

    @cached_property
    def zeta_image(self):
        return self(self.source.zeta)

    @cached_property
    def residue_degree(self):
        F = self.target
        for d in range(1, F.n + 1):
            if F.n % d == 0 and all(x ** (F.ell ** d) == x for x in self.images):
                return d
        return F.n

    def __repr__(self):
        return f"ReductionMap({self.source!r} -> {self.target!r}, images={self.images})"


def _layer_roots(tower, k, F, images):
    L = tower.layers[k]
    sub = ReductionMap(tower.prefix(k), F, images, check=False)
    if L.kind == "cyclotomic":
        return F.elements_of_order(L.data)
    return poly_roots([sub(TowerElement(sub.source, c)) for c in L.poly], F)


def reduction_map(source, ell, choice=None, n=1):
    """Reduction of a tower (or quadratic field) modulo a prime above ell.

    `ell` may be a prime (the target is then F_{ell^n}) or a ResidueField.  `choice`
    is None (smallest roots), a list with one entry per layer (None, an FFElement,
    or an index into that layer's roots in canonical order), or a dict {"omega": x} or
    {"sqrt_delta": x} fixing the image of the quadratic field.
    """
    if not isinstance(source, TowerField):
        source = TowerField.quadratic(source)
    F = ell if isinstance(ell, ResidueField) else residue_field(ell, n)
    want_omega = None
    per_layer = [None] * source.depth
    if isinstance(choice, dict):
        if "omega" in choice:
            want_omega = F(choice["omega"]) if not isinstance(choice["omega"], FFElement) else choice["omega"]
        elif "sqrt_delta" in choice:
            sd = choice["sqrt_delta"]
            sd = sd if isinstance(sd, FFElement) else F(sd)
            if F.ell == 2:
                raise ValueError("use the omega image when ell = 2")
            want_omega = (sd + source.quad.s) / 2
        for k, v in choice.get("layers", {}).items():
            per_layer[int(k)] = v
    elif choice is not None:
        per_layer = list(choice) + [None] * (source.depth - len(choice))

    def options(k, images):
        rts = _layer_roots(source, k, F, images)
        if not rts:
            raise NoRootError(f"layer {source.layers[k].name} has no root in {F}")
        c = per_layer[k]
        if c is None:
            return rts
        if not isinstance(c, FFElement):
            if not 0 <= int(c) < len(rts):
                raise ValueError(f"layer {source.layers[k].name} has only {len(rts)} roots")
            return [rts[int(c)]]
        x = c
        if x not in rts:
            raise ValueError(f"{x} is not a root of layer {source.layers[k].name}")
        return [x]

    def search(k, images):
        if k == source.depth:
            m = ReductionMap(source, F, images, check=False)
            if want_omega is not None and m.omega_image != want_omega:
                return None
            return m
        rts = options(k, images)
        for r in rts:
            out = search(k + 1, images + [r])
            if out is not None:
                return out
            # only the layer carrying omega can fail later; stop early otherwise
            if want_omega is None:
                break
        return None

    m = search(0, [])
    if m is None:
        raise NoRootError("no reduction with the requested image of the quadratic field")
    return m


def teichmuller(rmap, x):
    """The root of unity of order dividing q - 1 in the source that reduces to x."""
    F = rmap.target
    if not isinstance(x, FFElement):
        x = F(x)
    if not x:
        raise ValueError("the Teichmuller lift of 0 is not defined")
    return rmap.source.zeta ** teichmuller_exponent(rmap, x)


def teichmuller_exponent(rmap, x):
    """j with reduction(zeta)^j = x, zeta the tower's distinguished root of unity."""
    F = rmap.target
    W = rmap.source.zeta_order
    m = F.q - 1
    if W % m:
        raise ValueError(f"source does not contain the {m}-th roots of unity")
    g = rmap.zeta_image
    lg = F.log(g)
    # g has order W' = m / gcd(lg, m); need g^j = x with W' = m
    if gcd(lg, m) != 1 and W == m:
        raise ValueError("zeta does not reduce to a generator")
    lx = F.log(x) if isinstance(x, FFElement) else x
    h = gcd(lg, m)
    if lx % h:
        raise ValueError("x is not a power of the reduced root of unity")
    return (lx // h) * pow(lg // h, -1, m // h) % (m // h)


def value_field(field, w, roots=(), certify=True):
    """Q(zeta_w), then w_K if K is not already inside, then the formal root layers."""
    T = TowerField(certify=certify).add_cyclotomic(w).add_quadratic(field)
    for e, c in roots:
        T = T.add_root(e, c)
    return T


def euler_phi(n):
    return int(totient(n))
