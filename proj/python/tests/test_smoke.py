import json
from fractions import Fraction

import pytest

import gmhg


def test_star_solves_and_verifies():
    game = gmhg.generate_star(5)
    out = gmhg.solve(game, "0.1")
    assert out["certified"]
    assert out["regret"]["max_regret"] <= Fraction(1, 10)
    for probs in out["strategies"]:
        assert sum(probs) == 1
    report = gmhg.verify(game, out["profile_json"], Fraction(1, 10))
    assert report["all_pass"]


def test_refined_and_normalform_paths():
    game = gmhg.generate_random_tree(4, 2, seed=3)
    refined = gmhg.solve(game, "0.25", variant="refined")
    assert refined["certified"]
    nf = gmhg.solve(game, "1/4", solver="normalform")
    assert nf["certified"]


def test_exact_regret_of_uniform_play():
    game = gmhg.generate_star(3)
    half = [Fraction(1, 2), Fraction(1, 2)]
    report = gmhg.exact_regret(game, [half, half, half])
    assert report["regret"] == [0, 0, 0]

    pure = [[1, 0], [1, 0], [1, 0]]
    report = gmhg.exact_regret(game, pure, "0.1", raw=True)
    assert report["regret"][1] == 1
    assert not report["all_pass"]


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        gmhg.solve(gmhg.generate_star(2), 0.1)


def test_errors_map_to_python_exceptions():
    with pytest.raises(gmhg.InputError):
        gmhg.solve(gmhg.generate_star(2), "0")
    with pytest.raises(gmhg.InputError):
        gmhg.canonical_game("{")
    assert issubclass(gmhg.InputError, gmhg.GmhgError)


def test_plan_sizes():
    # After normalization every player's payoff range is 1: s = ceil(12 / eps).
    plan = gmhg.plan(gmhg.generate_star(4), "0.25")
    assert [p["s"] for p in plan] == [48, 48, 48, 48]
    for p in gmhg.plan(gmhg.generate_star(4), "0.25", variant="refined"):
        assert p["tau"] > 0


def test_brute_force_contains_solver_output():
    game = gmhg.generate_random_tree(2, 2, seed=1)
    out = gmhg.solve(game, "0.5")
    doc = json.loads(out["profile_json"])
    picked = [p["numerators"] for p in doc["players"]]
    s = [p["grid_denominator"] for p in doc["players"]]
    found = gmhg.brute_force(game, s, "0.5")
    assert picked in found


def test_csp_solution_is_an_equilibrium():
    game = gmhg.generate_star(2)
    res = gmhg.csp_solve(game, "0.5")
    assert res["status"] == "satisfied"
    nums = res["numerators"]
    profile = [[Fraction(x, sum(row)) for x in row] for row in nums]
    assert gmhg.exact_regret(game, profile, "0.5")["all_pass"]
    assert json.loads(res["csp_json"])["variables"]


def test_generators_are_deterministic():
    assert gmhg.generate_random_tree(6, 3, 8) == gmhg.generate_random_tree(6, 3, 8)
    assert gmhg.generate_random_tree_normalform(4, 2, 1) == gmhg.generate_random_tree_normalform(4, 2, 1)
    assert json.loads(gmhg.generate_star(3, orientation="CL"))["metadata"]["orientation"] == "CL"


def test_bench_csv():
    res = gmhg.bench_star([2, 4], "0.5")
    assert res["csv"].startswith("k,median_seconds")
    assert res["slope"] is not None
