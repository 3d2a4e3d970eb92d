import io
import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heckelift.algebra import residue_field
from heckelift.data import path as data_path
from heckelift.verify import (
    CoverageError, FixtureError, NewformData, ingest, prime_factors_mod, reduce_coefficient, save,
    sturm_bound, verify_congruence,
)

B189 = {7: -1, 13: 5, 19: -7, 31: -4, 37: 11, 43: 8, 61: -1, 67: 5}
PRIMES67 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67]


def g27(perturb=None):
    coeffs = {p: [B189.get(p, 0)] for p in PRIMES67}
    if perturb:
        p, d = perturb
        coeffs[p] = [coeffs[p][0] + d]
    return NewformData("g27", 27, [0, 1], coeffs, "synthesized")


@pytest.fixture(scope="module")
def f189():
    return ingest(data_path("f189.json"))


def test_sturm_bound_examples():
    assert sturm_bound(7, 189, 27) == 220
    assert sturm_bound(2, 1, 1) == 1
    assert sturm_bound(5, 10 ** 6, 10 ** 6) < 10 ** 4
    # oracle: the formula evaluated directly
    assert sturm_bound(7, 189, 27) == math.ceil(2 * math.log(7 * 189 * 27) ** 2)
    assert sturm_bound(7, 189, 27, log=math.log10) == math.ceil(2 * math.log10(35721) ** 2)


def test_ingest_f189(f189):
    assert len(f189.coeffs) == 19
    assert f189.field_poly == [-7, 0, 1]
    assert f189.coeffs[2] == [0, 1] and f189.coeffs[23] == [0, -3]


def test_reduce_coefficient_examples(f189):
    x_factor = next(fc for fc in prime_factors_mod(f189, 7))
    assert x_factor.factor == (0, 1) and x_factor.multiplicity == 2
    assert reduce_coefficient(f189, 7, x_factor) == residue_field(7)(6)
    assert reduce_coefficient(f189, 2, x_factor) == 0
    assert reduce_coefficient(f189, 23, x_factor) == 0
    with pytest.raises(KeyError):
        reduce_coefficient(f189, 71, x_factor)


def test_reduce_is_ring_hom():
    # a_p a_q in Q(sqrt7) computed by hand, reduced mod a prime above 3 (x^2 - 7 = x^2 - 1 mod 3)
    f = NewformData("t", 1, [-7, 0, 1], {2: [1, 2], 3: [3, -1], 5: [1 * 3 + 2 * -1 * 7, 1 * -1 + 2 * 3]})
    for fac in prime_factors_mod(f, 3):
        a, b, ab = (reduce_coefficient(f, p, fac) for p in (2, 3, 5))
        assert ab == a * b


def test_golden_congruence(f189):
    rep = verify_congruence(f189, g27(), 7, 67)
    assert rep.verdict and rep.bound_kind == "user"
    assert rep.excluded == [3, 7]
    assert 31 in rep.checked and 61 in rep.checked
    pair = rep.passing_pairs[0]
    assert pair.f_factor.degree == 1 and pair.g_factor.degree == 1


def test_perturbed_fails_at_13(f189):
    rep = verify_congruence(f189, g27(perturb=(13, 1)), 7, 67)
    assert not rep.verdict
    for pair in rep.pairs:
        assert [p for p, *_ in pair.failures] == [13]


def test_reflexive_and_symmetric(f189):
    assert verify_congruence(f189, f189, 7, 67).verdict
    assert verify_congruence(f189, f189, 3, 67).verdict
    g = g27()
    for ell in (5, 7, 11):
        assert verify_congruence(f189, g, ell, 67).verdict == verify_congruence(g, f189, ell, 67).verdict


def test_coverage_error(f189):
    with pytest.raises(CoverageError) as err:
        verify_congruence(f189, g27(), 7, "auto")
    assert 71 in err.value.missing


def test_ingest_errors():
    base = {"label": "x", "level": 11, "field_poly": [0, 1], "coeffs": {"2": ["1/1"]}, "source": "fixture"}

    def load(**kw):
        return ingest(json.dumps(dict(base, **kw)))

    assert load().coeffs == {2: [Fraction(1)]}
    with pytest.raises(FixtureError, match="no coefficients"):
        load(coeffs={})
    with pytest.raises(FixtureError, match="reducible"):
        load(field_poly=[-4, 0, 1], coeffs={"2": ["1/1", "0/1"]})
    with pytest.raises(FixtureError, match="not prime"):
        load(coeffs={"4": ["1/1"]})
    with pytest.raises(FixtureError, match="coordinates"):
        load(coeffs={"2": ["1/1", "2/1"]})
    with pytest.raises(FixtureError, match="bad rational"):
        load(coeffs={"2": ["1/0"]})
    with pytest.raises(FixtureError, match="line"):
        ingest('{"label": "x",\n "level": }')
    with pytest.raises(FixtureError, match="missing field"):
        ingest(json.dumps({"label": "x"}))


def test_save_roundtrip(f189, tmp_path):
    out = tmp_path / "f.json"
    save(f189, out)
    back = ingest(str(out))
    assert back == f189
    assert ingest(io.StringIO(save(f189))) == f189
    raw = json.loads(out.read_text(encoding="utf-8"))
    assert raw["coeffs"]["23"] == ["0/1", "-3/1"]


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.sampled_from(PRIMES67),
                       st.lists(st.fractions(max_denominator=50), min_size=2, max_size=2), min_size=1))
def test_roundtrip_property(coeffs):
    f = NewformData("h", 7, [2, 0, 1], coeffs)
    assert ingest(save(f)) == f


def test_report_json_and_table(f189):
    rep = verify_congruence(f189, g27(), 7, 67)
    js = rep.to_json()
    assert js["verdict"] == "pass" and js["log"] == "natural"
    assert js["pairs"][0]["f_residue_degree"] == 1
    assert "verdict: pass" in rep.table()
