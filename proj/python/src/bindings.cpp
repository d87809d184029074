// Python bindings. Documents cross the boundary as JSON text;
// exact quantities come back as fractions.Fraction.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmhg/gmhg.hpp"

namespace py = pybind11;
using namespace gmhg;

namespace {

py::object fraction(const Rational& r) {
  return py::module_::import("fractions").attr("Fraction")(to_string(r));
}

// Exact inputs only: Fraction or int, or a string like "0.1" or "1/3".
Rational to_rational(const py::handle& h) {
  if (py::isinstance<py::str>(h)) return parse_rational(h.cast<std::string>());
  if (py::isinstance<py::int_>(h)) return parse_rational(py::str(h).cast<std::string>());
  if (py::hasattr(h, "numerator") && py::hasattr(h, "denominator") && !py::isinstance<py::float_>(h)) {
    return parse_rational(py::str(h.attr("numerator")).cast<std::string>() + "/" +
                          py::str(h.attr("denominator")).cast<std::string>());
  }
  throw py::type_error("expected a Fraction, int or decimal string; floats are not exact");
}

MixedProfile to_profile(const py::sequence& seq) {
  MixedProfile p;
  for (const auto& row : seq) {
    std::vector<Rational> dist;
    for (const auto& x : row.cast<py::sequence>()) dist.push_back(to_rational(x));
    p.push_back(std::move(dist));
  }
  return p;
}

py::dict regret_dict(const RegretReport& r) {
  py::list regret, payoff, best;
  for (std::size_t i = 0; i < r.regret.size(); ++i) {
    regret.append(fraction(r.regret[i]));
    payoff.append(fraction(r.payoff[i]));
    best.append(fraction(r.best[i]));
  }
  py::dict d;
  d["regret"] = regret;
  d["payoff"] = payoff;
  d["best"] = best;
  d["max_regret"] = fraction(r.max_regret());
  d["epsilon"] = fraction(r.epsilon);
  d["all_pass"] = r.all_pass;
  return d;
}

GameDefinition target_game(const std::string& game_json, bool raw) {
  const auto g = parse_game(game_json);
  return raw ? g : normalize_game(g).game;
}

py::dict solve(const std::string& game_json, const py::object& epsilon, const std::string& variant,
               const std::string& solver, int root) {
  if (solver != "normalform" && solver != "polymatrix") throw py::value_error("solver must be polymatrix or normalform");
  const auto game = parse_game(game_json);
  SolveRequest req{to_rational(epsilon), parse_variant(variant)};
  req.root = root;
  SolveOutcome out;
  {
    py::gil_scoped_release release;
    out = solver == "normalform" ? solve_normalform(game, req) : solve_polymatrix(game, req);
  }
  py::list strategies;
  for (const auto& g : out.profile.strategies) {
    py::list probs;
    for (const auto& p : g.probabilities()) probs.append(fraction(p));
    strategies.append(probs);
  }
  py::dict d;
  d["strategies"] = strategies;
  d["denominators"] = out.profile.s;
  d["s_prime"] = out.profile.s_prime;
  d["certified"] = out.profile.certified;
  if (out.profile.certificate) d["regret"] = regret_dict(*out.profile.certificate);
  d["profile_json"] = serialize_profile(profile_document(out.profile, solver));
  d["normalized_game_json"] = serialize_game(out.normalized.game);
  return d;
}

py::list plan(const std::string& game_json, const py::object& epsilon, const std::string& variant) {
  const auto norm = normalize_polymatrix(parse_game(game_json)).game;
  const auto st = validate_game(norm);
  const auto tree = build_rooted_tree(norm, st, 0);
  const auto p = plan_for_tree(norm, tree, to_rational(epsilon), parse_variant(variant));
  py::list out;
  for (const auto& pp : p.players) {
    py::dict d;
    d["s"] = pp.grid.s;
    d["s_prime"] = pp.lattice.intervals();
    d["tau"] = fraction(pp.lattice.tau);
    d["indifferent"] = pp.indifferent;
    out.append(d);
  }
  return out;
}

py::list brute_force(const std::string& game_json, const std::vector<int>& s, const py::object& epsilon, bool raw,
                     std::uint64_t cap) {
  const auto g = target_game(game_json, raw);
  py::list out;
  for (const auto& prof : brute_force_grid_equilibria(g, s, to_rational(epsilon), cap)) {
    py::list row;
    for (const auto& gs : prof) row.append(gs.numerators);
    out.append(row);
  }
  return out;
}

py::dict csp_solve(const std::string& game_json, const py::object& epsilon, const std::string& variant,
                   std::uint64_t node_limit) {
  const auto norm = normalize_polymatrix(parse_game(game_json)).game;
  const auto st = validate_game(norm);
  const auto tree = build_rooted_tree(norm, st, 0);
  const Rational eps = to_rational(epsilon);
  const Variant v = parse_variant(variant);
  const auto csp = build_csp(norm, plan_for_tree(norm, tree, eps, v), eps, v);
  const auto r = solve_backtracking(csp, node_limit);
  py::dict d;
  d["status"] = std::string(to_string(r.status));
  d["csp_json"] = serialize_csp(csp);
  if (r.status == SearchStatus::satisfied) {
    py::list nums;
    for (const auto& g : profile_from_assignment(csp, r.assignment)) nums.append(g.numerators);
    d["numerators"] = nums;
  }
  return d;
}

py::dict bench(const std::vector<int>& sizes, const py::object& epsilon, int repeats, const std::string& variant) {
  BenchResult r;
  {
    const Rational eps = to_rational(epsilon);
    py::gil_scoped_release release;
    r = bench_star(sizes, eps, repeats, parse_variant(variant));
  }
  py::dict d;
  d["csv"] = bench_csv(r);
  d["slope"] = r.slope ? py::cast(*r.slope) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_gmhg, m) {
  m.doc() = "epsilon-Nash equilibria of tree-structured graphical multi-hypermatrix games";

  // Later registrations are tried first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "GmhgError");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<InfeasibleAtRoot>(m, "InfeasibleAtRoot", base.ptr());
  py::register_exception<TooLarge>(m, "TooLarge", base.ptr());

  m.def("generate_star", [](int n, const std::string& orientation) {
    return serialize_game(gen_star_matching_pennies(parse_orientation_pattern(orientation, n)));
  }, py::arg("n"), py::arg("orientation") = "center-matches");
  m.def("generate_random_tree", [](int n, int m_, std::uint64_t seed) {
    return serialize_game(gen_random_tree_polymatrix(n, m_, seed));
  }, py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("generate_random_tree_normalform", [](int n, int m_, std::uint64_t seed, int max_degree) {
    return serialize_game(gen_random_tree_normalform(n, m_, seed, max_degree));
  }, py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("max_degree") = 2);

  m.def("canonical_game", [](const std::string& text) { return serialize_game(parse_game_document(text)); },
        py::arg("game_json"), "Parse, validate and re-serialize a game document in canonical order.");

  m.def("solve", &solve, py::arg("game_json"), py::arg("epsilon"), py::arg("variant") = "simple",
        py::arg("solver") = "polymatrix", py::arg("root") = 0);

  m.def("exact_regret", [](const std::string& game_json, const py::sequence& profile, const py::object& epsilon,
                           bool raw) {
    return regret_dict(exact_regret(target_game(game_json, raw), to_profile(profile), to_rational(epsilon)));
  }, py::arg("game_json"), py::arg("profile"), py::arg("epsilon") = 0, py::arg("raw") = false);

  m.def("verify", [](const std::string& game_json, const std::string& profile_json, const py::object& epsilon,
                     bool raw) {
    const auto doc = parse_profile(profile_json);
    return regret_dict(exact_regret(target_game(game_json, raw), doc.strategies, to_rational(epsilon)));
  }, py::arg("game_json"), py::arg("profile_json"), py::arg("epsilon"), py::arg("raw") = false);

  m.def("plan", &plan, py::arg("game_json"), py::arg("epsilon"), py::arg("variant") = "simple");
  m.def("brute_force", &brute_force, py::arg("game_json"), py::arg("s"), py::arg("epsilon"), py::arg("raw") = false,
        py::arg("cap") = kDefaultBruteForceCap);
  m.def("csp_solve", &csp_solve, py::arg("game_json"), py::arg("epsilon"), py::arg("variant") = "simple",
        py::arg("node_limit") = 10'000'000);
  m.def("bench_star", &bench, py::arg("sizes"), py::arg("epsilon"), py::arg("repeats") = 1,
        py::arg("variant") = "simple");
}
