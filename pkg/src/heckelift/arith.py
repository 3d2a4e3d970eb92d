"""Small integer helpers shared by the other modules."""

from fractions import Fraction
from math import gcd, isqrt

import gmpy2
from sympy import factorint, isprime, primerange

__all__ = [
    "kronecker", "legendre", "is_prime", "primes_upto", "factor",
    "squarefree_part", "fundamental_disc", "xgcd", "lcm", "parse_rational",
    "crt_pair", "divisors",
]


def kronecker(a, n):
    return int(gmpy2.kronecker(a, n))


def legendre(a, p):
    """Legendre symbol (a/p) for an odd prime p, via Euler's criterion."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def is_prime(n):
    return n >= 2 and bool(isprime(n))


def primes_upto(bound, start=2):
    return list(primerange(start, bound + 1))


def factor(n):
    """Factor a nonzero integer; returns a dict prime -> exponent (sign dropped)."""
    if n == 0:
        raise ValueError("cannot factor 0")
    return {int(p): int(e) for p, e in factorint(abs(n)).items()}


def divisors(n):
    out = [1]
    for p, e in factor(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def squarefree_part(n):
    """Signed squarefree kernel: n = squarefree_part(n) * m**2."""
    if n == 0:
        raise ValueError("0 has no squarefree part")
    s = -1 if n < 0 else 1
    for p, e in factor(n).items():
        if e % 2:
            s *= p
    return s


def fundamental_disc(d):
    """Discriminant of Q(sqrt(d)) for a nonzero non-square rational d."""
    d = Fraction(d)
    m = squarefree_part(d.numerator * d.denominator)
    if m == 1:
        raise ValueError(f"{d} is a square")
    return m if m % 4 == 1 else 4 * m


def xgcd(a, b):
    """Return (g, u, v) with u*a + v*b = g = gcd(a, b) >= 0."""
    g, u, v = gmpy2.gcdext(a, b)
    return int(g), int(u), int(v)


def lcm(*args):
    out = 1
    for a in args:
        out = out * a // gcd(out, a)
    return out


def crt_pair(r1, m1, r2, m2):
    """Solve x = r1 mod m1, x = r2 mod m2 for coprime moduli."""
    g, u, _ = xgcd(m1, m2)
    if g != 1:
        raise ValueError("moduli not coprime")
    return (r1 + (r2 - r1) * u * m1) % (m1 * m2)


def parse_rational(text):
    """Parse 'a/b' or 'a' into a Fraction, rejecting zero denominators."""
    text = str(text).strip()
    num, sep, den = text.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"not a rational number: {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def is_square(n):
    return n >= 0 and isqrt(n) ** 2 == n
