"""CM newforms attached to Hecke characters: level, q-expansions, coefficient fields."""

from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .arith import factor, primes_upto
from .characters import HeckeCharacter, nebentypus_is_trivial
from .quadfield import QuadElement, split_type

__all__ = [
    "CMFormSpec", "cm_level", "check_hermitian_modulus", "q_expansion", "prime_coefficients",
    "make_cm_form", "to_newform_data", "tower_to_quad", "NebentypusViolation", "psi_table",
    "format_psi_table",
]


class NebentypusViolation(ValueError):
    pass


def cm_level(psi):
    """Norm(m) |disc K|, the level of the theta series of psi."""
    return psi.modulus.norm * abs(psi.field.disc)


def check_hermitian_modulus(m):
    """True iff the ideal equals its conjugate."""
    return m == m.conj()


@dataclass
class CMFormSpec:
    psi: HeckeCharacter
    level: int
    value_field: object
    mode: str
    nebentypus_trivial: bool

    @property
    def field(self):
        return self.psi.field


def make_cm_form(psi, mode=None, sample_bound=200):
    mode = mode or psi.mode
    if mode == "exact":
        psi._need_exact()
    neb = nebentypus_is_trivial(psi, sample_bound)
    vf = psi.tower if mode == "exact" else psi.F
    return CMFormSpec(psi, cm_level(psi), vf, mode, neb)


def _value(psi, mode, ideal):
    return psi.prime_value(ideal) if mode == "exact" else psi.prime_residue(ideal)


def _zero(spec):
    return spec.value_field.zero() if spec.mode == "exact" else spec.value_field.zero


def _one(spec):
    return spec.value_field.one() if spec.mode == "exact" else spec.value_field.one


def _prime_power_coeffs(spec, p, kmax):
    """[b_1, b_p, ..., b_{p^kmax}] from the local Euler factor at p."""
    psi, mode = spec.psi, spec.mode
    zero, one = _zero(spec), _one(spec)
    st = split_type(psi.field, p)
    out = [one]
    if st.kind == "split":
        vals = []
        for P in st.primes:
            vals.append(_value(psi, mode, P) if P.is_coprime(psi.modulus) else None)
        x, y = vals
        if x is not None and y is not None and spec.nebentypus_trivial and mode == "exact":
            if x * y != psi.tower.from_rational(p):
                raise NebentypusViolation(f"psi(p) psi(pbar) != {p} at p = {p}")
        # b_{p^k} = sum_{i+j=k} x^i y^j, with missing primes contributing only i = 0 or j = 0
        xs, ys = [one], [one]
        for _ in range(kmax):
            xs.append(xs[-1] * x if x is not None else zero)
            ys.append(ys[-1] * y if y is not None else zero)
        for k in range(1, kmax + 1):
            acc = zero
            for i in range(k + 1):
                acc = acc + xs[i] * ys[k - i]
            out.append(acc)
    elif st.kind == "inert":
        P = st.primes[0]
        v = _value(psi, mode, P) if P.is_coprime(psi.modulus) else None
        for k in range(1, kmax + 1):
            if v is None or k % 2:
                out.append(zero)
            else:
                out.append(out[k - 2] * v)
    else:
        P = st.primes[0]
        v = _value(psi, mode, P) if P.is_coprime(psi.modulus) else None
        for k in range(1, kmax + 1):
            out.append(out[-1] * v if v is not None else zero)
    return out


def q_expansion(spec, bound):
    """Sparse coefficients {n: b_n} for 1 <= n <= bound; zero coefficients are omitted.

    b_n is the sum of psi(a) over ideals of norm n coprime to the modulus,
    assembled from the Euler factors at the primes dividing n.
    """
    if isinstance(spec, HeckeCharacter):
        spec = make_cm_form(spec)
    if bound < 1:
        raise ValueError("bound must be positive")
    local = {}
    for p in primes_upto(bound):
        k, q = 0, 1
        while q * p <= bound:
            q *= p
            k += 1
        local[p] = _prime_power_coeffs(spec, p, k)
    out = {}
    for n in range(1, bound + 1):
        val = None
        for p, e in (factor(n).items() if n > 1 else ()):
            b = local[p][e]
            if _is_zero(spec, b):
                val = None
                break
            val = b if val is None else val * b
        else:
            val = _one(spec) if val is None else val
        if val is not None and not _is_zero(spec, val):
            out[n] = val
    return out


def _is_zero(spec, x):
    return x.is_zero() if spec.mode == "exact" else not x


def prime_coefficients(spec, bound):
    """{p: b_p} for all primes p <= bound, zeros included."""
    if isinstance(spec, HeckeCharacter):
        spec = make_cm_form(spec)
    return {p: _prime_power_coeffs(spec, p, 1)[1] for p in primes_upto(bound)}


def tower_to_quad(x, field):
    """x as an element of the quadratic field, or None when x lies outside it."""
    T = x.tower
    om = T.omega
    basis = [T.one().vector(), om.vector()]
    v = x.vector()
    # solve v = a + b*omega using the first coordinate where omega is nonconstant
    j = next(i for i in range(1, len(v)) if basis[1][i] != 0)
    b = v[j] / basis[1][j]
    a = v[0] - b * basis[1][0]
    cand = T.from_rational(a) + om * b
    if cand != x:
        return None
    return QuadElement(field, Fraction(int(a.numerator), int(a.denominator)),
                       Fraction(int(b.numerator), int(b.denominator)))


# ----------------------------------------------------- coefficient fields

def _qq(x):
    x = mpq(x)
    return QQ(int(x.numerator), int(x.denominator))


def _span_solve(basis_vecs, v):
    """Rational coordinates of v in the span of basis_vecs, or None."""
    k = len(basis_vecs)
    n = len(v)
    rows = [[_qq(basis_vecs[j][i]) for j in range(k)] + [_qq(v[i])] for i in range(n)]
    M = DomainMatrix(rows, (n, k + 1), QQ)
    R, pivots = M.rref()
    if k in pivots:
        return None
    sol = [QQ(0)] * k
    R = R.to_Matrix()
    for r, c in enumerate(pivots):
        sol[c] = R[r, k]
    return [Fraction(int(s.p), int(s.q)) for s in sol]


def _minpoly_basis(theta):
    """Powers 1, theta, ..., theta^(d-1) and the monic minimal polynomial of theta."""
    powers = [theta.tower.one().vector()]
    cur = theta.tower.one()
    while True:
        cur = cur * theta
        v = cur.vector()
        sol = _span_solve(powers, v)
        if sol is not None:
            poly = [-c for c in sol] + [Fraction(1)]
            return powers, poly
        powers.append(v)


def coefficient_field(values):
    """Defining polynomial (integers, constant first) of Q(values) and each value's coordinates.

    Values must be algebraic integers in one tower.  A primitive element is
    grown as a small integer combination of the values.
    """
    values = list(values)
    nonrat = [x for x in values if not x.is_rational()]
    if not nonrat:
        return [0, 1], [[Fraction(int(x.rational().numerator), int(x.rational().denominator))]
                        for x in values]
    theta = nonrat[0]
    powers, poly = _minpoly_basis(theta)
    for x in nonrat:
        if _span_solve(powers, x.vector()) is None:
            theta, powers, poly = _enlarge(theta, x)
    return _finish(values, powers, poly)


def _enlarge(theta, x):
    for c in range(1, 50):
        cand = theta + x * c
        powers, poly = _minpoly_basis(cand)
        if all(_span_solve(powers, y.vector()) is not None for y in (theta, x)):
            return cand, powers, poly
    raise ValueError("no primitive element found among small combinations")


def _finish(values, powers, poly):
    if any(c.denominator != 1 for c in poly):
        raise ValueError("primitive element is not integral")
    out = []
    for x in values:
        sol = _span_solve(powers, x.vector())
        if sol is None:
            raise ValueError("coefficient outside the computed field")
        out.append(sol)
    return [int(c) for c in poly], out


def to_newform_data(spec, bound, label=None):
    """The prime coefficients up to bound as NewformData (fixture format of verify)."""
    from .verify import NewformData
    coeffs = prime_coefficients(spec, bound)
    primes = sorted(coeffs)
    if spec.mode == "exact":
        poly, vecs = coefficient_field([coeffs[p] for p in primes])
        table = dict(zip(primes, vecs))
    else:
        F = spec.value_field
        poly = list(F.modulus)
        table = {p: [Fraction(c) for c in coeffs[p].coeffs()] for p in primes}
    label = label or f"g-{spec.field.delta}-{spec.mode}"
    return NewformData(label, spec.level, poly, table, "synthesized")


def psi_table(spec, f=None, bound=67):
    """Rows (p, a_p, generator of p, psi(p), b_p) for a class-number-one field in exact mode.

    The prime listed at a split p is the first of split_type's pair; inert
    rows use (p) itself; primes dividing the modulus get psi = 0.
    """
    from .quadfield import principal_generator
    psi = spec.psi
    if spec.mode != "exact":
        raise ValueError("the table needs exact values")
    b = prime_coefficients(spec, bound)
    rows = []
    for p in primes_upto(bound):
        P = split_type(psi.field, p).primes[0]
        gen = principal_generator(P)
        if P.is_coprime(psi.modulus):
            val = tower_to_quad(psi.prime_value(P), psi.field)
        else:
            val = 0
        bp = tower_to_quad(b[p], psi.field)
        ap = f.value(p) if f is not None and p in f.coeffs else None
        rows.append((p, ap, gen, val, bp))
    return rows


def format_psi_table(rows):
    head = f"{'p':>4}  {'a_p':>10}  {'a with (a) = p':>22}  {'psi(p)':>22}  {'b_p':>5}"
    lines = [head, "-" * len(head)]
    for p, ap, gen, val, bp in rows:
        lines.append(f"{p:>4}  {str(ap if ap is not None else ''):>10}  {str(gen):>22}  "
                     f"{str(val):>22}  {str(bp):>5}")
    return "\n".join(lines)
