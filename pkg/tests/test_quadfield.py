import random
from fractions import Fraction
from math import isqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckelift.arith import is_prime, squarefree_part
from heckelift.quadfield import (
    NotPrincipal, QuadField, class_group, form_of_ideal, ideal_decompose,
    ideals_of_norm, principal_generator, reduce_form, split_type,
)

FIELDS = [-1, -2, -3, -5, -23, -31, -39, -71, -223, -1115]


def brute_form_count(D):
    """Reduced forms counted over b >= 0, doubling the (a, +-b) pairs."""
    amax = isqrt(-D // 3)
    a = np.arange(1, amax + 1)[:, None]
    b = np.arange(0, amax + 1)[None, :]
    num = b * b - D
    ok = (num % 4 == 0) & (b <= a)
    n = np.where(ok, num // 4, 0)
    ok &= (n % a == 0) & (a * a <= n)
    c = np.where(ok, n // np.where(a == 0, 1, a), 0)
    twice = ok & (b > 0) & (b < a) & (a < c)
    return int(ok.sum() + twice.sum())


def test_field_basics():
    K = QuadField(-3)
    assert K.disc == -3 and K.s == 1
    assert QuadField(-1).disc == -4
    assert QuadField(-5).disc == -20
    w = K.omega
    assert w * w == K.s * w - K.nw
    assert K.sqrt_delta ** 2 == K(-3)
    with pytest.raises(ValueError):
        QuadField(-12)
    with pytest.raises(ValueError):
        QuadField(5)


def test_split_types_small():
    K = QuadField(-3)
    st7 = split_type(K, 7)
    assert st7.kind == "split"
    assert principal_generator(st7.primes[0]) == K.from_sqrt(Fraction(5, 2), Fraction(1, 2))
    assert split_type(K, 5).kind == "inert"
    assert split_type(K, 3).kind == "ramified"
    with pytest.raises(ValueError):
        split_type(K, 9)


@pytest.mark.parametrize("delta", FIELDS)
def test_split_product(delta):
    K = QuadField(delta)
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]:
        st = split_type(K, p)
        assert {"split": 1, "inert": -1, "ramified": 0}[st.kind] == K.kronecker(p)
        prod = K.unit_ideal()
        for P in st.primes:
            prod = prod * P
        if st.kind == "ramified":
            prod = prod * st.primes[0]
        assert prod == K.ideal(p)
        if st.kind == "split":
            assert [P.norm for P in st.primes] == [p, p]
            assert st.primes[0].conj() == st.primes[1]


def test_class_numbers():
    expected = {-23: 3, -31: 3, -39: 4, -223: 7, -1115: 10, -31159: 117, -1: 1, -3: 1}
    for d, h in expected.items():
        cg = class_group(QuadField(d))
        assert cg.h == h
        if h > 1:
            assert cg.is_cyclic() and cg.structure == [h]


def test_31159_generated_over_11():
    K = QuadField(-31159)
    cg = class_group(K)
    (P, e), = cg.generators
    assert P.norm == 11 and e == 117
    gamma = principal_generator(P ** 117)
    assert gamma.norm() == 11 ** 117


def test_class_number_sweep():
    # every fundamental discriminant with |D| <= 40000
    for m in range(1, 40001):
        if squarefree_part(-m) != -m:
            continue
        D = -m if m % 4 == 3 else -4 * m
        if -D > 40000:
            continue
        assert class_group(QuadField(-m)).h == brute_form_count(D), D


@pytest.mark.parametrize("delta", [-5, -14, -21, -30, -105, -15015, -3 * 5 * 7 * 11 * 13 * 17])
def test_noncyclic_structure(delta):
    cg = class_group(QuadField(delta))
    s = cg.structure
    assert int(np.prod(s)) == cg.h
    assert all(s[i + 1] % s[i] == 0 for i in range(len(s) - 1))
    for (P, e), a in zip(cg.generators, cg.generator_alphas):
        assert (P ** e) == P.field.ideal(a)
        for d in range(1, e):
            if e % d == 0 and d < e:
                with pytest.raises(NotPrincipal):
                    principal_generator(P ** d)


def test_principal_generator_examples():
    K = QuadField(-3)
    assert principal_generator(K.unit_ideal()) == K(1)
    P = split_type(K, 7).primes[0]
    assert principal_generator(P) == K.from_sqrt(Fraction(5, 2), Fraction(1, 2))
    with pytest.raises(NotPrincipal):
        principal_generator(split_type(QuadField(-23), 2).primes[0])


def test_unit_groups():
    for d, n in [(-1, 4), (-3, 6), (-5, 2)]:
        K = QuadField(d)
        us = K.units()
        assert len(us) == n
        assert all(u.norm() == 1 for u in us)
        assert all(u ** n == K(1) for u in us)


def random_ideal(K, rng, bound=10 ** 6):
    while True:
        n = rng.randint(1, bound)
        ids = ideals_of_norm(K, n)
        if ids:
            return rng.choice(ids)


@pytest.mark.parametrize("delta", [-23, -39, -1115, -15015])
def test_decompose_roundtrip(delta):
    K = QuadField(delta)
    cg = class_group(K)
    rng = random.Random(delta)
    for _ in range(500):
        I = random_ideal(K, rng)
        exps, alpha = ideal_decompose(I, cg)
        assert all(0 <= n < e for n, (_, e) in zip(exps, cg.generators))
        d = alpha.denominator()
        lhs = K.ideal(alpha * d)
        for (P, _), n in zip(cg.generators, exps):
            lhs = lhs * P ** n
        assert lhs == I * d


def test_decompose_examples():
    K = QuadField(-23)
    cg = class_group(K)
    P, e = cg.generators[0]
    exps, alpha = ideal_decompose(P, cg)
    assert exps == (1,) and alpha == K(1)
    Q = split_type(K, 2).primes[1]
    exps, alpha = ideal_decompose(Q, cg)
    assert exps[0] in (0, 1, 2)
    a = K(3, 1)
    exps, alpha = ideal_decompose(K.ideal(a), cg)
    assert exps == (0,) and K.ideal(alpha) == K.ideal(a)


def test_ideals_of_norm():
    K = QuadField(-3)
    three = K.ideal(3)
    assert ideals_of_norm(K, 1) == [K.unit_ideal()]
    assert ideals_of_norm(K, 5, three) == []
    got = ideals_of_norm(K, 49, three)
    P, Q = split_type(K, 7).primes
    assert sorted(got) == sorted([P * P, P * Q, Q * Q])
    assert ideals_of_norm(K, 3, three) == []
    assert ideals_of_norm(K, 3) == [split_type(K, 3).primes[0]]


def test_ideals_of_norm_bruteforce():
    # oracle: every ideal of norm n has a Hermite basis (a, b, c) with ac = n
    K = QuadField(-23)
    for n in range(1, 120):
        brute = set()
        for c in range(1, n + 1):
            if n % c:
                continue
            a = n // c
            if a % c:
                continue
            for b in range(0, a, c):
                I = K.ideal(a, K(b, c))
                if I.norm == n and I.hnf() == (a, b, c):
                    brute.add(I)
        assert set(ideals_of_norm(K, n)) == brute, n


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(1, 3000), st.integers(1, 3000), st.data())
def test_norm_multiplicative_and_conj(delta, m, n, data):
    K = QuadField(delta)
    A = ideals_of_norm(K, m)
    B = ideals_of_norm(K, n)
    if not A or not B:
        return
    I = data.draw(st.sampled_from(A))
    J = data.draw(st.sampled_from(B))
    assert (I * J).norm == I.norm * J.norm
    assert I.conj().conj() == I
    assert I.conj().norm == I.norm
    assert (I * J).conj() == I.conj() * J.conj()
    assert I * J == J * I
    assert I.divides(I * J)


def test_factor_ideal():
    K = QuadField(-1115)
    rng = random.Random(3)
    for _ in range(100):
        I = random_ideal(K, rng, 10 ** 5)
        prod = K.unit_ideal()
        for P, e in I.factor().items():
            assert P.norm in (P.a, P.a ** 2) and is_prime(P.a)
            prod = prod * P ** e
        assert prod == I


def test_reduce_form():
    assert reduce_form(6, 5, 2) == (2, -1, 3)
    f = reduce_form(11, 49, 55)
    assert f[1] ** 2 - 4 * f[0] * f[2] == 49 ** 2 - 4 * 11 * 55
    K = QuadField(-23)
    assert form_of_ideal(K.unit_ideal()) == (1, 1, 6)
