"""Ingestion and serialization: exactness, validation, determinism."""

import json
from fractions import Fraction as F

import pytest

from exactvc.enclosure import Approx
from exactvc.errors import InputError
from exactvc.io import (
    detect_csv_kind,
    dumps,
    emit_poly_text,
    float_with_bound,
    load_covariates_csv,
    load_oneway_csv,
    load_oneway_stats_json,
    load_twoway_csv,
    load_twoway_stats_json,
    parse_rational,
    ser_approx,
    ser_theta,
)
from exactvc.polynomials import UniPoly
from exactvc.roots import RootInterval
from exactvc.twoway import twoway_stats

from conftest import fixture_path


def test_parse_rational_is_exact():
    assert parse_rational("1.25") == F(5, 4)
    assert parse_rational(" -0.1 ") == F(-1, 10)
    assert parse_rational("3/7") == F(3, 7)
    assert parse_rational(4) == 4
    with pytest.raises(InputError):
        parse_rational(0.1)            # binary float would be inexact
    with pytest.raises(InputError):
        parse_rational("abc")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_detect_csv_kind(tmp_path):
    a = write(tmp_path, "a.csv", "group,value\nA,1\n")
    b = write(tmp_path, "b.csv", "group,y,x1,x2\nA,1,2,3\n")
    c = write(tmp_path, "c.csv", "row,col,rep,value\nr,c,1,0\n")
    d = write(tmp_path, "d.csv", "foo,bar\n1,2\n")
    assert detect_csv_kind(a) == "oneway"
    assert detect_csv_kind(b) == "covariates"
    assert detect_csv_kind(c) == "twoway"
    with pytest.raises(InputError):
        detect_csv_kind(d)


def test_load_oneway_csv_groups_by_appearance(tmp_path):
    p = write(tmp_path, "g.csv",
              "group,value\nB,1\nA,2.5\nB,3\nA,1\nA,4\n")
    s = load_oneway_csv(p)
    # group B has 2 observations, group A has 3
    assert s.sizes == (2, 3) and s.mults == (1, 1)
    assert s.means == (F(2), F(5, 2))
    with pytest.raises(InputError):
        load_oneway_csv(write(tmp_path, "bad.csv", "group,value\nA\n"))


def test_load_covariates_csv(tmp_path):
    p = write(tmp_path, "cov.csv",
              "group,y,x1\nA,1,2\nB,3,4\nA,2,0\nB,1,1\n")
    d = load_covariates_csv(p, add_intercept=True)
    assert d.group_sizes == (2, 2)
    assert d.y == (F(1), F(2), F(3), F(1))
    assert d.x[0] == (F(1), F(2))
    assert d.p == 2


def test_load_twoway_csv_matches_direct_stats(tmp_path):
    array = [[[1, 2], [3, 5]], [[2, 2], [0, 4]], [[7, 1], [2, 2]]]
    lines = ["row,col,rep,value"]
    for i, row in enumerate(array):
        for j, cell in enumerate(row):
            for k, v in enumerate(cell):
                lines.append(f"r{i},c{j},{k},{v}")
    p = write(tmp_path, "tw.csv", "\n".join(lines) + "\n")
    assert load_twoway_csv(p) == twoway_stats(array)
    # drop one record: incomplete layout
    q = write(tmp_path, "twbad.csv", "\n".join(lines[:-1]) + "\n")
    with pytest.raises(InputError):
        load_twoway_csv(q)


def test_stats_json_loaders(tmp_path):
    s = load_oneway_stats_json(fixture_path("trimodal.json"))
    assert s.q >= 2
    t = load_twoway_stats_json(fixture_path("penicillin.json"))
    assert (t.r, t.q, t.n) == (24, 6, 1) and t.SSA == F(953, 9)
    bad = write(tmp_path, "bad.json", json.dumps({"sizes": [2]}))
    with pytest.raises(InputError):
        load_oneway_stats_json(bad)


def test_float_with_bound_covers_enclosure():
    mid, half = F(1, 3), F(1, 10 ** 15)
    d = float_with_bound(mid, half)
    # the reported float ball must contain the whole exact interval
    assert abs(mid - F(d["value"])) + half <= F(d["error_bound"])


def test_ser_values():
    assert ser_approx(Approx.exact(F(3, 7))) == "3/7"
    assert ser_approx(None) is None
    d = ser_approx(Approx(F(1, 3), F(2, 3)))
    assert set(d) == {"value", "error_bound"}
    assert ser_theta(F(0)) == "0"
    assert ser_theta(RootInterval(F(1, 2), F(1, 2), 1, -1, 1)) == "1/2"


def test_dumps_deterministic_and_emit_poly():
    obj = {"b": [1, 2], "a": {"y": 1, "x": "3/7"}}
    assert dumps(obj) == dumps(json.loads(json.dumps(obj)))
    p = UniPoly([F(2), F(-4), F(6)], "theta")
    assert emit_poly_text(p) == "1\n-2\n3\n"
