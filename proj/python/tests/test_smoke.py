import json
import math

import pytest

import brwlab


def test_group_normal_forms():
    g = brwlab.Group("F2")
    assert g.normal_form("a b B") == "a"
    assert g.multiply("a b", "B A") == "e"
    assert g.inverse("a b") == "B A"
    assert g.sphere_sizes(3) == [1, 4, 12, 36]
    assert len(g.sphere(2)) == 12
    p = brwlab.Group("F2*Z3")
    assert p.word_length("a x x a") == 4


def test_unknown_generator_is_a_value_error():
    with pytest.raises(ValueError):
        brwlab.Group("F2").normal_form("a q")


def test_spectral_radius_of_f2():
    est = brwlab.spectral_radius(brwlab.Group("F2"), N=40)
    assert 0.860 <= est["rho_lower"] <= math.sqrt(3) / 2
    assert est["monotone"]


def test_green_matches_the_closed_form():
    r = 1.05
    F = (1 - math.sqrt(1 - 0.75 * r * r)) / (1.5 * r)
    G = 1 / (1 - r * F)
    v = brwlab.green(brwlab.Group("F2"), r, "a b", N=80)
    assert abs(v["value"] - G * F**2) <= v["tail_bound"] + 1e-8


def test_omega_endpoints():
    g = brwlab.Group("F2")
    at_one = brwlab.omega(g, 1.0)
    assert abs(at_one["omega_hat"]) < 0.02
    at_R = brwlab.omega(g, at_one["R_hat"])
    assert abs(at_R["omega_hat"] - 0.5 * math.log(3)) < 0.03


def test_config_round_trip_and_hash():
    text = brwlab.render_config("experiment: omega\ngroup: F2\n")
    assert brwlab.render_config(text) == text
    assert brwlab.config_hash(text) == brwlab.config_hash(text)
    with pytest.raises(ValueError):
        brwlab.render_config("lambda: 3\n")


def test_run_experiment_is_reproducible(tmp_path):
    cfg = 'experiment: omega\ngroup: F2\nr_grid: ["1", "1.05", "R"]\n'
    out = str(tmp_path / "omega")
    first = brwlab.run_experiment(cfg, out=out, check=True)
    assert first["exit_code"] == 0
    summary = (tmp_path / "omega" / "summary.json").read_text()
    second = brwlab.run_experiment(cfg, out=out, check=True)
    assert (tmp_path / "omega" / "summary.json").read_text() == summary
    assert first["summary"] == second["summary"]
    rows = json.loads(summary)["rows"]
    assert [row["r"] for row in rows][:2] == [1.0, 1.05]
    assert (tmp_path / "omega" / "omega.csv").read_text().count("\n") == 4
