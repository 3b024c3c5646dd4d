import cmath
import json
import math
from fractions import Fraction

import pytest

import eldyn


def exp_g():
    lam, g = eldyn.disjoint_type_rescale(eldyn.FunctionFamily.exponential(), "domain")
    return lam, g


def test_version_and_family_round_trip():
    assert eldyn.__version__
    f = eldyn.FunctionFamily.exponential()
    assert (f.K, f.L) == (1.0, 3.0)
    assert f(1.0) == pytest.approx(math.e)
    assert f(800.0) is None
    pair = eldyn.FunctionFamily.exp_pair(1.0, 1.0)
    assert pair.is_pair
    back = eldyn.FunctionFamily.from_json(pair.to_json())
    assert back(0.3 + 0.2j) == pair(0.3 + 0.2j)


def test_rescaling_constant():
    lam, g = exp_g()
    assert lam.real == pytest.approx(1.0 / (3.0 * math.exp(8 * math.pi)), rel=1e-12)
    assert g(1.0) == pytest.approx(math.exp(lam.real))


def test_fixed_point_of_zero_address():
    lam, g = exp_g()
    # w = Log w - log lambda, iterated independently
    w = 30.0
    for _ in range(200):
        w = math.log(w) - math.log(lam.real)
    tr = eldyn.RayTracer(g)
    s = eldyn.ExternalAddress([], [0])
    p = tr.tail_point(s, 0.0)
    assert abs(p.position - w) < 1e-10
    tail = tr.trace_tail(s, 0.0, 1.0)
    ts = [x["t"] for x in tail]
    assert ts == sorted(ts) and len(ts) > 2
    assert max(x["error"] for x in tail) < 1e-10


def test_log_transform_inverse():
    F = eldyn.LogTransform(eldyn.FunctionFamily.exponential())
    w = 2.0 + 0.5j
    v, t = F(w)
    assert v == pytest.approx(cmath.exp(w))
    assert abs(F.inverse_branch(t, v) - w) < 1e-12
    bound, actual = F.expansion_bound(w)
    assert actual >= bound


def test_escape_verdicts():
    f = eldyn.FunctionFamily.exponential()
    assert eldyn.escape_test(f, 10 + 0.004j, 10.0, 8) == ("escaping", 0)
    assert eldyn.escape_test(f, 8 - 0.02j, 10.0, 8) == ("reentered", 3)


def test_brush_worked_instance():
    B = eldyn.AffineBrush.from_json(
        {
            "hairs": [
                {"id": "H1", "p": [0, 1], "q": [1, 1], "t": [10, 1]},
                {"id": "H2", "p": [1, 1], "q": [-1, 1], "t": [0, 1]},
            ],
            "sigma": {"H1": "H2", "H2": "H2"},
            "lambda": [2, 1],
            "Q": [3, 1],
        }
    )
    assert B.zn("H1", 0) == 10
    assert B.z_infinity("H1") == Fraction(23, 2)
    assert B.pi("H1", Fraction(51, 5)) == ("H1", Fraction(23, 2))
    assert B.axioms()["ok"]
    assert B.crossing_count(3) <= 1


def test_conjugacy_identity_and_report():
    f = eldyn.FunctionFamily.exponential()
    rep = eldyn.verify_conjugacy(f, lam=1.0, Q=5.0, samples=10)
    assert rep["max_residual"] == 0.0 and rep["valid"]
    rep = eldyn.verify_conjugacy(f, samples=100, seed=3)
    assert rep["valid"]
    assert rep["max_displacement"] <= rep["displacement_bound"]


def test_pipeline_real_seed():
    r = eldyn.criniferous_pipeline(eldyn.FunctionFamily.exponential(), 50.0, 10.0, 20)
    assert r["N"] == 0 and r["contained"] and r["monotone"]


def test_errors_carry_kind():
    _, g = exp_g()
    tr = eldyn.RayTracer(g)
    with pytest.raises(eldyn.AddressNotRealized):
        tr.tail_point(eldyn.ExternalAddress([], [40]), 0.0)
    with pytest.raises(eldyn.EldynError):
        eldyn.run("trace", {"bogus": 1}, "unused")


def test_run_brush_and_determinism(tmp_path):
    assert eldyn.run("brush", None, str(tmp_path / "a")) == 0
    assert eldyn.run("brush", None, str(tmp_path / "b")) == 0
    a = (tmp_path / "a" / "brush.json").read_bytes()
    assert a == (tmp_path / "b" / "brush.json").read_bytes()
    assert "H1,10.2,11.5,51/5,23/2" in (tmp_path / "a" / "pi_table.csv").read_text()
    assert json.loads(a)["meta"]["config_hash"] == eldyn.config_hash({})


def test_config_schema():
    jsonschema = pytest.importorskip("jsonschema")
    import pathlib

    schema = json.loads((pathlib.Path(__file__).parents[2] / "docs" / "config.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(eldyn.canonical_config(), schema)
    cfg = {
        "family": {"kind": "exp_pair", "a": [1, 0], "b": [1, 0]},
        "addresses": [{"prefix": [[-1, 2]], "period": [[1, 0]]}],
        "brush": {"instance": eldyn.AffineBrush.random(3, 1).to_json()},
        "pipeline": {"seeds": [50, [9.5, 0.001]]},
    }
    jsonschema.validate(cfg, schema)
    jsonschema.validate(eldyn.canonical_config(cfg), schema)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"trace": {"tol": 0}}, schema)
    with pytest.raises(eldyn.ConfigError):
        eldyn.canonical_config({"trace": {"tol": 0}})
