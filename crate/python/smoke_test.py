"""Smoke test for the pyocokit extension. Run with pytest or as a script."""

import json
import math
from pathlib import Path

import pyocokit

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def load(name):
    return (INSTANCES / name).read_text()


def test_version():
    assert pyocokit.version().count(".") == 2


def test_entropy_prox_is_softmax():
    setup = {"kind": "simplex", "dim": 4}
    z = [0.25] * 4
    xi = [0.3, -1.0, 2.0, 0.0]
    got = pyocokit.prox(setup, z, xi)
    w = [math.exp(-v) for v in xi]
    want = [v / sum(w) for v in w]
    assert max(abs(a - b) for a, b in zip(got, want)) < 1e-12
    assert abs(pyocokit.set_width(setup) - math.log(4)) < 1e-12


def test_euclidean_prox_projects_onto_ball():
    setup = json.dumps({"kind": "ball", "dim": 2, "radius": 1.0})
    got = pyocokit.prox(setup, [0.0, 0.0], [-3.0, -4.0])
    assert abs(got[0] - 0.6) < 1e-12 and abs(got[1] - 0.8) < 1e-12
    assert abs(pyocokit.bregman(setup, [0.0, 0.0], got) - 0.5) < 1e-12


def test_strongly_convex_run_within_bound():
    r = pyocokit.run_oco(load("quadratic_stream.json"), "strongly-convex", 100)
    assert r["within_bound"]
    assert r["realized"] <= r["bound"] + 1e-6
    assert r["max_step_residual"] <= 1e-8
    assert len(r["iterates"]) == 100


def test_robust_planted_verdicts():
    for feasible in (True, False):
        inst = pyocokit.planted_robust(3, feasible)
        out = pyocokit.ro_solve(inst)
        assert out["run"]["verdict"]["outcome"] == ("feasible" if feasible else "infeasible")


def test_jeo_run():
    r = pyocokit.run_jeo(load("jeo_squared.json"), load("stream_from_g.json"), "strongly-convex", 100)
    assert r["regret"] <= r["regret_bound"] + 1e-6
    assert r["decomposition"]["slack"] >= -1e-6


def test_errors_are_value_errors():
    try:
        pyocokit.run_oco("{\"kind\": \"functions\"}", "smooth", 10)
    except ValueError as e:
        assert "missing field" in str(e)
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
