import json

import pytest
from hypothesis import given, settings, strategies as st

from heckelift.cli import main
from heckelift.config import ConfigError, RunConfig, expand_choices, find_generator, load_config, parse_ideal
from heckelift.data import listing, path as data_path
from heckelift.pipeline import StageError, run_pipeline
from heckelift.quadfield import QuadField, split_type
from heckelift.verify import ingest

component = st.one_of(
    st.just({"kind": "quadratic", "modulus": "sqrt_delta"}),
    st.builds(lambda d: {"kind": "norm", "kronecker": d}, st.sampled_from([-4, 8, -8, 5])),
    st.builds(lambda o, v: {"kind": "power", "modulus": 5, "gamma": "auto", "order": o, "value": v},
              st.sampled_from([2, 3, 4]), st.one_of(st.integers(0, 5), st.just("any"))),
)


@settings(max_examples=60)
@given(st.integers(-500, -1), st.sampled_from([2, 3, 5, 7]), st.lists(component, max_size=3),
       st.integers(0, 2 ** 31), st.one_of(st.just("auto"), st.integers(1, 5000)))
def test_config_roundtrip(delta, ell, eta, seed, bound):
    cfg = RunConfig(delta=delta, ell=ell, eta=eta, seed=seed, bound=bound,
                    f={"fixture": "f.json"}, kred={"sqrt_delta": 2})
    assert RunConfig.loads(cfg.dumps()) == cfg


def test_config_errors():
    with pytest.raises(ConfigError):
        RunConfig.loads('{"delta": -3}')
    with pytest.raises(ConfigError):
        RunConfig.loads('{"delta": -3, "ell": 7, "colour": 1}')


def test_parse_ideal_and_generator():
    K = QuadField(-31159)
    P5 = parse_ideal(K, {"prime": 5, "index": 0})
    assert P5 == split_type(K, 5).primes[0]
    assert parse_ideal(K, {"product": [5, "sqrt_delta"]}).norm == 25 * 31159
    assert parse_ideal(K, {"power": [{"prime": 5, "index": 1}, 2]}).norm == 25
    K = QuadField(-223)
    g = find_generator(K.ideal(5))
    # (O/5)* = F_25^* is cyclic of order 24
    assert K.ideal(5).norm == 25 and g is not None


def test_expand_choices():
    cfg = load_config(data_path("lift_223.json"))
    assert len(expand_choices(cfg)) == 4


def test_all_fixtures_load():
    for name in listing("char_") + listing("lift_"):
        load_config(data_path(name))
    assert len(listing("char_")) == 8


def test_classgroup_cli(capsys):
    assert main(["classgroup", "--disc", "-23"]) == 0
    assert capsys.readouterr().out.startswith("h=3, cyclic")
    assert main(["classgroup", "--disc", "-4"]) == 0
    assert capsys.readouterr().out.strip() == "h=1"
    assert main(["classgroup", "--disc", "-1115"]) == 0
    assert capsys.readouterr().out.startswith("h=10, cyclic")


def test_detect_cli(capsys, tmp_path):
    assert main(["detect", "--coeffs", data_path("e_t-4_5.json"), "--ell", "5",
                 "--max-disc", "1200", "--pbound", "500", "--json"]) == 0
    discs = {row["disc"] for row in json.loads(capsys.readouterr().out)}
    assert {-223, -1115} <= discs
    assert main(["detect", "--coeffs", data_path("f189.json"), "--ell", "7", "--pbound", "67"]) == 0
    assert "disc     -3" in capsys.readouterr().out
    from test_galrep import random_fixture
    from heckelift.verify import save
    save(random_fixture(0), tmp_path / "r.json")
    assert main(["detect", "--coeffs", str(tmp_path / "r.json"), "--ell", "5", "--pbound", "199"]) == 1
    assert "none" in capsys.readouterr().out


def test_lift_cli_189(capsys, tmp_path):
    code = main(["lift", "--config", data_path("lift_189.json"), "--output", str(tmp_path), "--table"])
    out = capsys.readouterr().out
    assert code == 0
    assert "g level 27" in out and "verdict: pass" in out
    g = ingest(str(tmp_path / "g27.json"))
    assert g.level == 27 and g.coeffs[13] == [5]
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["verdict"] == "pass" and rep["g_level"] == 27


def test_lift_1115():
    res = run_pipeline(load_config(data_path("lift_1115.json")))
    assert res.verdict
    assert res.level == (8 * 5 * 223) ** 2
    assert res.report.bound_kind == "sturm"
    assert res.psi.mode == "residual"
    assert any(p.f_factor.degree == 1 for p in res.report.passing_pairs)


def test_lift_223_resolves_eta3():
    res = run_pipeline(load_config(data_path("lift_223.json")))
    assert res.verdict
    ok = sorted((tuple(c.kred_choice), tuple(c.values)) for c in res.candidates if c.passed)
    bad = sorted((tuple(c.kred_choice), tuple(c.values)) for c in res.candidates if not c.passed)
    assert ok == [((0,), (2,)), ((1,), (1,))]
    assert bad == [((0,), (1,)), ((1,), (2,))]


def test_lift_ell2_experimental(capsys, caplog):
    assert main(["lift", "--config", data_path("char_23_2.json")]) == 0
    out = capsys.readouterr().out
    assert "experimental" in out
    assert any("experimental" in r.message for r in caplog.records)


def test_scan_xg5(capsys):
    assert main(["scan-xg5", "--t", "-4/5", "--pmax", "500", "--json"]) == 0
    row, = json.loads(capsys.readouterr().out)
    assert (row["K1"], row["K2"]) == (-223, -1115) and row["certified"]
    assert main(["scan-xg5", "--t", "0", "--pmax", "200"]) == 0
    assert main(["scan-xg5", "--t", "0", "--pmax", "200", "--fixed-model"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["scan-xg5", "--t", "1/0"])
    assert exc.value.code == 2


def test_sweep_threads(capsys, monkeypatch):
    monkeypatch.setenv("HECKELIFT_THREADS", "2")
    code = main(["scan-xg5", "--sweep", "2", "--pmax", "100", "--json"])
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) >= 5
    assert code == (0 if all(r["certified"] for r in rows) else 1)


def test_exit_codes(capsys, tmp_path):
    assert main(["lift", "--config", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"delta": -3, "ell": 7, "eta": [], "f": {"fixture": data_path("f189.json")},
                               "bound": 67, "p_bound": 67}))
    # the empty eta violates the unit condition for Q(sqrt-3) mod 7
    assert main(["lift", "--config", str(bad)]) == 4
    assert "[" in capsys.readouterr().err
