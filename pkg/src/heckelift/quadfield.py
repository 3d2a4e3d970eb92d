"""Imaginary quadratic fields: elements, ideals, prime splitting and class groups.

A field K = Q(sqrt(delta)) has ring of integers Z[w] with w = (s + sqrt(D))/2,
where D is the fundamental discriminant and s = D mod 2.  Elements are pairs of
rationals (x, y) standing for x + y*w.  Integral ideals are kept in Hermite
normal form (a, b + c*w) with c | a, c | b and 0 <= b < a, so two ideals are
equal exactly when their triples agree.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from math import gcd, isqrt

import numpy as np
from sympy.ntheory import sqrt_mod

from .arith import factor, is_prime, kronecker, squarefree_part, xgcd

__all__ = [
    "QuadField", "QuadElement", "QuadIdeal", "ClassGroup", "SplitType",
    "NotPrincipal", "split_type", "prime_ideals_above", "class_group",
    "principal_generator", "ideal_decompose", "ideals_of_norm",
    "reduce_form", "reduced_forms", "ideal_from_form", "form_of_ideal",
    "canonical_associate",
]


class NotPrincipal(ValueError):
    pass


class QuadField:
    """The field Q(sqrt(delta)) for a squarefree delta < 0."""

    def __init__(self, delta):
        delta = int(delta)
        if delta >= 0:
            raise ValueError("delta must be negative")
        if squarefree_part(delta) != delta:
            raise ValueError(f"delta = {delta} is not squarefree")
        self.delta = delta
        self.disc = delta if delta % 4 == 1 else 4 * delta
        self.s = self.disc % 2
        # w^2 = s*w - nw
        self.nw = (self.s - self.disc) // 4

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.delta == self.delta

    def __hash__(self):
        return hash(("QuadField", self.delta))

    def __repr__(self):
        return f"QuadField({self.delta})"

    def __call__(self, x, y=0):
        return QuadElement(self, x, y)

    @property
    def ring_basis(self):
        return (self(1), self(0, 1))

    @property
    def omega(self):
        return self(0, 1)

    @property
    def sqrt_delta(self):
        return self(-1, 2) if self.s else self(0, 1)

    def from_sqrt(self, u, v):
        """The element u + v*sqrt(delta)."""
        u, v = Fraction(u), Fraction(v)
        if self.s:
            return self(u - v, 2 * v)
        return self(u, v)

    # integer-coordinate kernels used by the ideal code
    def _mul(self, u, v):
        x1, y1 = u
        x2, y2 = v
        yy = y1 * y2
        return (x1 * x2 - self.nw * yy, x1 * y2 + x2 * y1 + self.s * yy)

    def _norm(self, u):
        x, y = u
        return x * x + self.s * x * y + self.nw * y * y

    def _conj(self, u):
        x, y = u
        return (x + self.s * y, -y)

    def _bilinear(self, u, v):
        """Twice the bilinear form attached to the norm form."""
        return (2 * u[0] * v[0] + self.s * (u[0] * v[1] + u[1] * v[0])
                + 2 * self.nw * u[1] * v[1])

    @cached_property
    def unit_coords(self):
        if self.delta == -1:
            return ((1, 0), (0, 1), (-1, 0), (0, -1))
        if self.delta == -3:
            return ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
        return ((1, 0), (-1, 0))

    def units(self):
        return [self(*u) for u in self.unit_coords]

    @property
    def unit_count(self):
        return len(self.unit_coords)

    def ideal(self, *gens):
        """The integral ideal generated by the given integral elements."""
        vecs = []
        for g in gens:
            g = g if isinstance(g, QuadElement) else self(g)
            if not g.is_integral():
                raise ValueError(f"{g} is not integral")
            u = g.int_coords()
            vecs.append(u)
            vecs.append(self._mul(u, (0, 1)))
        return QuadIdeal._from_vectors(self, vecs)

    def unit_ideal(self):
        return QuadIdeal(self, 1, 0, 1)

    def kronecker(self, p):
        return kronecker(self.disc, p)


class QuadElement:
    """x + y*w with rational x, y."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field, x, y=0):
        self.field = field
        self.x = Fraction(x)
        self.y = Fraction(y)

    @property
    def coords(self):
        return (self.x, self.y)

    def _coerce(self, other):
        if isinstance(other, QuadElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElement(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadElement(self.field, self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(self.field, -self.x, -self.y)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadElement(self.field, self.x - other.x, self.y - other.y)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        x, y = self.field._mul((self.x, self.y), (other.x, other.y))
        return QuadElement(self.field, x, y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero element")
        c = other.conj()
        x, y = self.field._mul((self.x, self.y), (c.x, c.y))
        return QuadElement(self.field, x / n, y / n)

    def __rtruediv__(self, other):
        return QuadElement(self.field, other) / self

    def __pow__(self, k):
        if k < 0:
            return (1 / self) ** (-k)
        out = QuadElement(self.field, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, QuadElement) else other
        if other is NotImplemented:
            return False
        return self.field == other.field and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.field.delta, self.x, self.y))

    def __bool__(self):
        return bool(self.x or self.y)

    def norm(self):
        return self.field._norm((self.x, self.y))

    def trace(self):
        return 2 * self.x + self.field.s * self.y

    def conj(self):
        x, y = self.field._conj((self.x, self.y))
        return QuadElement(self.field, x, y)

    def is_integral(self):
        return self.x.denominator == 1 and self.y.denominator == 1

    def int_coords(self):
        if not self.is_integral():
            raise ValueError(f"{self} is not integral")
        return (int(self.x), int(self.y))

    def denominator(self):
        """Smallest positive integer d with d*self integral."""
        d = self.x.denominator
        return d * self.y.denominator // gcd(d, self.y.denominator)

    def sqrt_coords(self):
        """(u, v) with self = u + v*sqrt(delta)."""
        if self.field.s:
            return (self.x + self.y / 2, self.y / 2)
        return (self.x, self.y)

    def is_rational(self):
        return self.y == 0

    def __repr__(self):
        u, v = self.sqrt_coords()
        if v == 0:
            return str(u)
        root = f"sqrt({self.field.delta})"
        vs = "" if v == 1 else "-" if v == -1 else f"{v}*"
        head = f"{vs}{root}"
        if u == 0:
            return head
        return f"{head} + {u}" if u > 0 else f"{head} - {-u}"


def canonical_associate(field, u):
    """Canonical unit multiple of integral coords u: minimise (|y|, |x|), then x > 0 (or y > 0)."""
    best = None
    for e in field.unit_coords:
        x, y = field._mul(u, e)
        key = (abs(y), abs(x), 0 if x > 0 or (x == 0 and y > 0) else 1)
        if best is None or key < best[0]:
            best = (key, (x, y))
    return best[1]


def _hnf(vectors):
    """Hermite basis (a, b, c) of the rank-2 lattice spanned by integer vectors."""
    a = 0
    cur = None
    for x, y in vectors:
        if y == 0:
            a = gcd(a, x)
            continue
        if cur is None:
            cur = (x, y)
            continue
        x0, y0 = cur
        g, u, v = xgcd(y0, y)
        a = gcd(a, (y // g) * x0 - (y0 // g) * x)
        cur = (u * x0 + v * x, g)
    if cur is None or a == 0:
        raise ValueError("vectors do not span a full lattice")
    x, y = cur
    if y < 0:
        x, y = -x, -y
    return a, x % a, y


class QuadIdeal:
    """Nonzero integral ideal with Hermite basis a, b + c*w."""

    __slots__ = ("field", "a", "b", "c")

    def __init__(self, field, a, b, c):
        self.field = field
        self.a, self.b, self.c = int(a), int(b), int(c)

    @classmethod
    def _from_vectors(cls, field, vecs):
        return cls(field, *_hnf(vecs))

    @property
    def gen2(self):
        return QuadElement(self.field, self.b, self.c)

    @property
    def norm(self):
        return self.a * self.c

    @property
    def content(self):
        return self.c

    def hnf(self):
        return (self.a, self.b, self.c)

    def __eq__(self, other):
        return (isinstance(other, QuadIdeal) and self.field == other.field
                and self.hnf() == other.hnf())

    def __hash__(self):
        return hash((self.field.delta, self.a, self.b, self.c))

    def __lt__(self, other):
        return (self.norm, self.hnf()) < (other.norm, other.hnf())

    def __repr__(self):
        return f"Ideal({self.a}, {self.gen2!r})"

    def _basis(self):
        return [(self.a, 0), (self.b, self.c)]

    def __mul__(self, other):
        if isinstance(other, (int, QuadElement)):
            other = self.field.ideal(other)
        f = self.field
        vecs = []
        for u in self._basis():
            for v in other._basis():
                w = f._mul(u, v)
                vecs.append(w)
                vecs.append(f._mul(w, (0, 1)))
        return QuadIdeal._from_vectors(f, vecs)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers of integral ideals are not integral")
        out = self.field.unit_ideal()
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __add__(self, other):
        """Ideal sum, i.e. the gcd."""
        f = self.field
        vecs = self._basis() + other._basis()
        vecs += [f._mul(v, (0, 1)) for v in vecs]
        return QuadIdeal._from_vectors(f, vecs)

    def conj(self):
        f = self.field
        vecs = [f._conj(v) for v in self._basis()]
        vecs += [f._mul(v, (0, 1)) for v in vecs]
        return QuadIdeal._from_vectors(f, vecs)

    def contains(self, elt):
        if isinstance(elt, int):
            elt = QuadElement(self.field, elt)
        if not elt.is_integral():
            return False
        x, y = elt.int_coords()
        if y % self.c:
            return False
        return (x - (y // self.c) * self.b) % self.a == 0

    __contains__ = contains

    def divides(self, other):
        """True if self | other, i.e. other is contained in self."""
        return all(self.contains(QuadElement(self.field, *v)) for v in other._basis())

    def is_coprime(self, other):
        if other is None:
            return True
        if isinstance(other, int):
            return gcd(self.norm, other) == 1
        if gcd(self.norm, other.norm) == 1:
            return True
        return (self + other).norm == 1

    def is_unit(self):
        return self.norm == 1

    def residue(self, elt):
        """Canonical representative (x, y) of an integral element modulo the ideal."""
        x, y = elt.int_coords() if isinstance(elt, QuadElement) else elt
        q = y // self.c
        y -= q * self.c
        x -= q * self.b
        return (x % self.a, y)

    def factor(self):
        """Prime factorisation as a dict prime ideal -> exponent."""
        return factor_ideal(self)

    def primes(self):
        return sorted(self.factor())


def _primitive_form_data(ideal):
    """For ideal = c*[A, B + w], return (c, A, B)."""
    c = ideal.c
    return c, ideal.a // c, ideal.b // c


@dataclass(frozen=True)
class SplitType:
    kind: str  # "split", "inert" or "ramified"
    p: int
    primes: tuple

    def __iter__(self):
        return iter(self.primes)


@lru_cache(maxsize=None)
def _split_type(delta, p):
    field = QuadField(delta)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    k = kronecker(field.disc, p)
    if k == -1:
        return SplitType("inert", p, (QuadIdeal(field, p, 0, p),))
    # roots of X^2 - s X + nw mod p; the prime (p, w - rho) has b = -rho mod p
    if p == 2:
        roots = [r for r in (0, 1) if (r * r - field.s * r + field.nw) % 2 == 0]
    else:
        roots = [(field.s + r) * pow(2, -1, p) % p
                 for r in sqrt_mod(field.disc % p, p, all_roots=True)]
    bs = sorted({(-r) % p for r in roots})
    primes = tuple(QuadIdeal(field, p, b, 1) for b in bs)
    return SplitType("split" if k == 1 else "ramified", p, primes)


def split_type(field, p):
    """Decomposition of the rational prime p in the field."""
    return _split_type(field.delta, int(p))


def prime_ideals_above(field, p):
    return list(split_type(field, p).primes)


def factor_ideal(ideal):
    field = ideal.field
    c, A, B = _primitive_form_data(ideal)
    out = {}
    if A > 1:
        for p, e in factor(A).items():
            st = split_type(field, p)
            if st.kind == "inert":
                raise AssertionError("inert prime in primitive part")
            # the prime containing B + w
            for P in st.primes:
                if (B - P.b) % p == 0 or st.kind == "ramified":
                    out[P] = out.get(P, 0) + e
                    break
    if c > 1:
        for p, e in factor(c).items():
            st = split_type(field, p)
            if st.kind == "split":
                for P in st.primes:
                    out[P] = out.get(P, 0) + e
            elif st.kind == "inert":
                P = st.primes[0]
                out[P] = out.get(P, 0) + e
            else:
                P = st.primes[0]
                out[P] = out.get(P, 0) + 2 * e
    return out


# ---------------------------------------------------------------- forms

def reduce_form(a, b, c):
    """Reduce a positive definite form (a, b, c) under SL2(Z)."""
    while True:
        if not -a < b <= a:
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * k * a
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return a, b, c


def reduced_forms(disc):
    """All reduced primitive forms of the given negative discriminant."""
    D = int(disc)
    amax = isqrt(-D // 3)
    a = np.arange(1, amax + 1, dtype=np.int64)[:, None]
    b = np.arange(-amax + 1, amax + 1, dtype=np.int64)[None, :]
    num = b * b - D
    ok = (np.abs(b) <= a) & (b > -a) & (num % (4 * a) == 0)
    c = np.where(ok, num // (4 * a), 0)
    ok &= c >= a
    ok &= ~((a == c) & (b < 0))
    ia, ib = np.nonzero(ok)
    out = []
    for i, j in zip(ia, ib):
        aa, bb = int(a[i, 0]), int(b[0, j])
        cc = (bb * bb - D) // (4 * aa)
        if gcd(gcd(aa, bb), cc) == 1:
            out.append((aa, bb, cc))
    out.sort()
    return out


def form_of_ideal(ideal):
    """Reduced form of the ideal class."""
    _, A, B = _primitive_form_data(ideal)
    field = ideal.field
    nb = B * B + field.s * B + field.nw
    return reduce_form(A, 2 * B + field.s, nb // A)


def ideal_from_form(field, form):
    a, b, _ = form
    return QuadIdeal(field, a, ((b - field.s) // 2) % a, 1)


def _gauss_reduce(field, v1, v2):
    n1, n2 = field._norm(v1), field._norm(v2)
    while True:
        if n2 < n1:
            v1, v2, n1, n2 = v2, v1, n2, n1
        t = field._bilinear(v1, v2)
        # m = round(t / (2 n1))
        m = (t + n1) // (2 * n1)
        if m == 0:
            return v1, v2
        v2 = (v2[0] - m * v1[0], v2[1] - m * v1[1])
        n2 = field._norm(v2)


def principal_generator(ideal):
    """Canonical generator of a principal ideal, or raise NotPrincipal."""
    field = ideal.field
    if ideal.is_unit():
        return field(1)
    v1, _ = _gauss_reduce(field, (ideal.a, 0), (ideal.b, ideal.c))
    if field._norm(v1) != ideal.norm:
        raise NotPrincipal(f"{ideal} is not principal")
    return field(*canonical_associate(field, v1))


def _snf(mat):
    """Smith form: returns (diag, V) with U*mat*V = diag(d) for some unimodular U."""
    m = [row[:] for row in mat]
    rows, cols = len(m), len(m[0]) if m else 0
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def col_op(j, k, q):  # col_j -= q col_k
        for r in m:
            r[j] -= q * r[k]
        for r in V:
            r[j] -= q * r[k]

    def col_swap(j, k):
        for r in m:
            r[j], r[k] = r[k], r[j]
        for r in V:
            r[j], r[k] = r[k], r[j]

    for t in range(min(rows, cols)):
        while True:
            piv = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if m[i][j] and (piv is None or abs(m[i][j]) < abs(m[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                break
            m[t], m[piv[0]] = m[piv[0]], m[t]
            col_swap(t, piv[1])
            p = m[t][t]
            done = True
            for i in range(t + 1, rows):
                q = m[i][t] // p
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                if m[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = m[t][j] // p
                if q:
                    col_op(j, t, q)
                if m[t][j]:
                    done = False
            if not done:
                continue
            bad = next((i for i in range(t + 1, rows)
                        if any(m[i][j] % p for j in range(t + 1, cols))), None)
            if bad is None:
                break
            m[t] = [x + y for x, y in zip(m[t], m[bad])]
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
    return [abs(m[i][i]) for i in range(min(rows, cols))], V


def _inverse_unimodular(V):
    n = len(V)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(V)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [[int(x) for x in row[n:]] for row in aug]


def _prime_ideal_stream(field, avoid):
    p = 1
    while True:
        p += 1
        if not is_prime(p) or avoid % p == 0:
            continue
        st = split_type(field, p)
        if st.kind == "split":
            yield from st.primes


class ClassGroup:
    """Class group of a field, with generators avoiding the primes dividing `avoid`.

    The class number comes straight from the reduced-form count; the group
    structure, the generators and the discrete-log table are built on first use.
    """

    def __init__(self, field, avoid=1):
        self.field = field
        self.avoid = abs(int(avoid)) or 1
        self.forms = reduced_forms(field.disc)
        self.h = len(self.forms)

    def __repr__(self):
        return f"ClassGroup({self.field.delta}, h={self.h}, structure={self.structure})"

    def class_of(self, ideal):
        return form_of_ideal(ideal)

    def _mul_forms(self, f, g):
        return form_of_ideal(ideal_from_form(self.field, f) * ideal_from_form(self.field, g))

    @cached_property
    def _data(self):
        field = self.field
        one = self.class_of(field.unit_ideal())
        # grow a subgroup H from successive prime classes; H maps class -> exponents
        H = {one: ()}
        cands, rels = [], []
        stream = _prime_ideal_stream(field, self.avoid)
        while len(H) < self.h:
            P = next(stream)
            g = self.class_of(P)
            if g in H:
                continue
            k = len(cands)
            powers = [one]
            x = g
            while x not in H:
                powers.append(x)
                x = self._mul_forms(x, g)
            order = len(powers)
            back = H[x]
            rels.append([-e for e in back] + [order])
            cands.append(P)
            newH = {}
            for cls, ex in H.items():
                y = cls
                for t in range(order):
                    newH[y] = ex + (0,) * (k - len(ex)) + (t,)
                    y = self._mul_forms(y, g)
            H = newH
        k = len(cands)
        if k == 0:
            return [], [], {one: ()}
        R = [r + [0] * (k - len(r)) for r in rels]
        diag, V = _snf(R)
        keep = [i for i, d in enumerate(diag) if d > 1]
        orders = [diag[i] for i in keep]

        def yvec(ex):
            ex = list(ex) + [0] * (k - len(ex))
            return tuple(sum(ex[j] * V[j][i] for j in range(k)) % diag[i] for i in keep)

        table = {cls: yvec(ex) for cls, ex in H.items()}
        # smallest prime ideal whose class generates each cyclic factor
        gens, units = [], []
        for idx, d in enumerate(orders):
            for P in _prime_ideal_stream(field, self.avoid):
                y = table[self.class_of(P)]
                if all(y[j] == 0 for j in range(len(orders)) if j != idx) and gcd(y[idx], d) == 1:
                    gens.append(P)
                    units.append(pow(y[idx], -1, d))
                    break
        dlog = {cls: tuple(y[i] * units[i] % orders[i] for i in range(len(orders)))
                for cls, y in table.items()}
        return list(zip(gens, orders)), orders, dlog

    @property
    def generators(self):
        return self._data[0]

    @property
    def structure(self):
        return self._data[1]

    def is_cyclic(self):
        return len(self.structure) <= 1

    def dlog(self, ideal):
        """Exponents n_i with ideal ~ prod p_i^{n_i} in the class group."""
        return self._data[2][self.class_of(ideal)]

    @cached_property
    def _conj_cache(self):
        return [{0: self.field.unit_ideal()} for _ in self.generators]

    def _conj_power(self, i, n):
        cache = self._conj_cache[i]
        if n not in cache:
            cache[n] = self.generators[i][0].conj() ** n
        return cache[n]

    @cached_property
    def generator_alphas(self):
        """alpha_i with p_i^{e_i} = (alpha_i), canonical associates."""
        return [principal_generator(P ** e) for P, e in self.generators]


@lru_cache(maxsize=64)
def _class_group(delta, avoid):
    return ClassGroup(QuadField(delta), avoid)


def class_group(field, avoid=1):
    """Class group of the field; generators are split primes not dividing `avoid`."""
    return _class_group(field.delta, abs(int(avoid)) or 1)


def ideal_decompose(ideal, cg):
    """Write ideal = prod p_i^{n_i} * (alpha) with 0 <= n_i < e_i."""
    exps = cg.dlog(ideal)
    J = ideal
    scale = 1
    for i, n in enumerate(exps):
        if n:
            J = J * cg._conj_power(i, n)
            scale *= cg.generators[i][0].norm ** n
    beta = principal_generator(J)
    return exps, beta / scale


def ideals_of_norm(field, n, coprime_to=None):
    """All integral ideals of norm n coprime to the given ideal (or integer)."""
    if n < 1:
        raise ValueError("norm must be positive")
    choices = []
    for p, e in sorted(factor(n).items()) if n > 1 else []:
        st = split_type(field, p)
        if st.kind == "inert":
            if e % 2:
                return []
            opts = [st.primes[0] ** (e // 2)]
        elif st.kind == "ramified":
            opts = [st.primes[0] ** e]
        else:
            P, Q = st.primes
            opts = [P ** i * Q ** (e - i) for i in range(e, -1, -1)]
        opts = [I for I in opts if I.is_coprime(coprime_to)]
        if not opts:
            return []
        choices.append(opts)
    out = []
    for combo in product(*choices):
        I = field.unit_ideal()
        for J in combo:
            I = I * J
        out.append(I)
    return out
