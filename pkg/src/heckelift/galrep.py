"""Induced representations from K, CM type mod l, and the group model behind X_G(5)."""

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import poly_roots, residue_field
from .arith import factor, fundamental_disc, is_prime, is_square, kronecker, primes_upto
from .quadfield import split_type
from .verify import CoverageError, _reduce_vec, prime_factors_mod

__all__ = [
    "induced_trace", "induced_det", "ProjectiveClass", "classify_projective",
    "classify_pairs", "detect_cm_type", "exceptional_primes", "forced_field",
    "frobenius_poly_reducible", "MatrixGroupModel", "xg5_group_model",
    "trace_zero_proportion", "dihedral_split_obstruction", "xg5_characters",
    "fundamental_discriminants",
]

log = logging.getLogger(__name__)


def _check_good(r, p):
    if p % r.target.ell == 0 or r.modulus.norm % p == 0:
        raise ValueError(f"p = {p} divides l Norm(m)")


def induced_trace(r, p):
    """Trace of Ind_K^Q(r) at Frob_p: 0 (inert), r(P) + r(Pbar) (split), r(P) (ramified)."""
    _check_good(r, p)
    st = split_type(r.field, p)
    if st.kind == "inert":
        return r.target.zero
    if st.kind == "split":
        P, Q = st.primes
        return r(P) + r(Q)
    log.warning("ramified p = %d: diagonal Frobenius convention", p)
    return r(st.primes[0])


def induced_det(r, p):
    """Determinant of Ind_K^Q(r) at Frob_p: r(P) r(Pbar) (split) or -r((p)) (inert)."""
    _check_good(r, p)
    st = split_type(r.field, p)
    if st.kind == "split":
        P, Q = st.primes
        return r(P) * r(Q)
    if st.kind == "inert":
        return -r(st.primes[0])
    raise ValueError("determinant at ramified primes is not defined here")


@dataclass
class ProjectiveClass:
    kind: str          # "Dihedral" or "C2"
    witness: object    # prime ideal with r(P) != r(Pbar), or None
    largest_prime: int


def classify_pairs(pairs):
    """Dihedral iff some pair (r(s), r(c s c)) has different entries."""
    for key, (x, y) in pairs:
        if x != y:
            return "Dihedral", key
    return "C2", None


def classify_projective(r, sample_bound=200):
    """Dihedral iff r != rbar on some split prime up to the bound, C2 otherwise (sampled)."""
    if r.target.ell == 2:
        raise ValueError("the classification needs l > 2")
    pairs, last = [], 0
    for p in primes_upto(sample_bound):
        if p % r.target.ell == 0 or r.modulus.norm % p == 0:
            continue
        st = split_type(r.field, p)
        if st.kind != "split":
            continue
        P, Q = st.primes
        pairs.append((P, (r(P), r(Q))))
        last = p
    kind, wit = classify_pairs(pairs)
    return ProjectiveClass(kind, wit, last)


def fundamental_discriminants(max_disc):
    """Negative fundamental discriminants D with |D| <= max_disc, smallest |D| first."""
    out = set()
    for m in range(1, max_disc + 1):
        D = fundamental_disc(-m) if _squarefree(m) else None
        if D is not None and -D <= max_disc:
            out.add(D)
    return sorted(out, reverse=True)


def _squarefree(m):
    return all(e == 1 for e in factor(m).values()) if m > 1 else True


def detect_cm_type(f, ell, max_disc, p_bound):
    """All (D, prime of E above l) with a_p = 0 mod that prime at every good inert p <= p_bound."""
    if p_bound < 50:
        raise ValueError("p_bound below 50 is too weak to mean anything")
    good = [p for p in primes_upto(p_bound) if p != ell and f.level % p]
    missing = [p for p in good if p not in f.coeffs]
    if missing:
        raise CoverageError(missing)
    discs = np.array(fundamental_discriminants(max_disc), dtype=np.int64)
    out = []
    for fac in prime_factors_mod(f, ell):
        F = residue_field(ell, fac.degree)
        root = poly_roots(list(fac.factor), F)[0]
        nonzero = [p for p in good if _reduce_vec(f.coeffs[p], root)]
        alive = np.ones(len(discs), dtype=bool)
        for p in nonzero:
            alive &= _kron_vec(discs, p) != -1
        out.extend((int(D), fac) for D in discs[alive])
    return out


def _kron_vec(D, p):
    """Kronecker symbol (D / p) for an array of discriminants and a prime p."""
    if p == 2:
        r = D % 8
        return np.where(D % 2 == 0, 0, np.where((r == 1) | (r == 7), 1, -1))
    x = np.arange(p, dtype=np.int64)
    sq = np.zeros(p, dtype=bool)
    sq[(x * x) % p] = True
    res = D % p
    return np.where(res == 0, 0, np.where(sq[res], 1, -1))


def exceptional_primes(d0):
    """Primes dividing d m, where d0 = d^2 m with m squarefree."""
    if d0 < 2:
        raise ValueError("d0 must be at least 2")
    if is_square(d0):
        raise ValueError("d0 is a perfect square")
    d, m = 1, 1
    for p, e in factor(d0).items():
        d *= p ** (e // 2)
        m *= p ** (e % 2)
    return set(factor(d * m))


def forced_field(ell):
    """l* = (-1)^((l-1)/2) l, the discriminant of the quadratic subfield of Q(zeta_l)."""
    if ell == 2 or not is_prime(ell):
        raise ValueError("l must be an odd prime")
    return ell if ell % 4 == 1 else -ell


def frobenius_poly_reducible(a_p, p, ell):
    """True iff x^2 - a_p x + p splits mod l."""
    d = (a_p * a_p - 4 * p) % ell
    if ell == 2:
        return any((x * x - a_p * x + p) % 2 == 0 for x in range(2))
    return d == 0 or pow(d, (ell - 1) // 2, ell) == 1


def dihedral_split_obstruction(D, L_disc):
    """True iff no prime dividing D splits in the quadratic field of discriminant L_disc."""
    return all(kronecker(L_disc, q) != 1 for q in factor(abs(D))) if abs(D) > 1 else True


# ----------------------------------------------------- the group G

def _mat_mul(x, y, p=5):
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    return (((a * e + b * g) % p, (a * f + b * h) % p), ((c * e + d * g) % p, (c * f + d * h) % p))


def _mat_pow(x, k):
    out = ((1, 0), (0, 1))
    for _ in range(k):
        out = _mat_mul(out, x)
    return out


@dataclass
class MatrixGroupModel:
    ell: int
    a: tuple
    b: tuple
    elements: list

    def generated(self, *gens):
        return _closure(gens)

    def relations(self):
        one = ((1, 0), (0, 1))
        return {
            "a^8 = 1": _mat_pow(self.a, 8) == one,
            "b^2 = 1": _mat_pow(self.b, 2) == one,
            "bab = a^5": _mat_mul(_mat_mul(self.b, self.a), self.b) == _mat_pow(self.a, 5),
        }


def _closure(gens):
    one = ((1, 0), (0, 1))
    seen = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _mat_mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def xg5_group_model():
    a = ((0, 1), (2, 0))
    b = ((4, 0), (0, 1))
    G = MatrixGroupModel(5, a, b, _closure([a, b]))
    if not all(G.relations().values()) or len(G.elements) != 16:
        raise AssertionError("matrix model does not satisfy the presentation")
    return G


def trace_zero_proportion(G=None):
    G = G or xg5_group_model()
    zero = sum(1 for (r0, r1) in G.elements if (r0[0] + r1[1]) % G.ell == 0)
    return Fraction(zero, len(G.elements))


def xg5_characters():
    """The characters r1 on <a> and r2 on <ab> with values in F_25.

    r1(a) = eta with eta^2 = 2 and r2(ab) = eta' with eta'^2 = 3; both square
    roots are recorded for each, with the relation eta' = +-eta^3.
    """
    F = residue_field(5, 2)
    etas = F.nth_roots(F(2), 2)
    etaps = F.nth_roots(F(3), 2)
    rel = {str(e): [str(x) for x in etaps if x == e ** 3 or x == -(e ** 3)] for e in etas}
    G = xg5_group_model()
    # conjugation by b sends a to a^5 and ab to (ab)^5; rbar(s) = r(b s b)
    r1 = [("a", (e, e ** 5)) for e in etas]
    r2 = [("ab", (e, e ** 5)) for e in etaps]
    return {
        "field": F, "eta": etas, "eta_prime": etaps, "relation": rel,
        "r1_class": [classify_pairs([pair])[0] for pair in r1],
        "r2_class": [classify_pairs([pair])[0] for pair in r2],
        "order_a": len(G.generated(G.a)), "order_ab": len(G.generated(_mat_mul(G.a, G.b))),
    }
