#include <doctest.h>

#include <set>

#include "gmhg/gmhg.hpp"
#include "oracles.hpp"

using namespace gmhg;

namespace {

Rational q(const char* s) { return parse_rational(s); }

struct Built {
  GameDefinition game;
  StructureStats stats;
  RootedTree tree;
  DiscretizationPlan plan;
  CSPInstance csp;
};

Built build(const GameDefinition& raw, const Rational& eps, Variant v = Variant::simple) {
  Built b;
  b.game = normalize_polymatrix(raw).game;
  b.stats = validate_game(b.game);
  b.tree = build_rooted_tree(b.game, b.stats, 0);
  b.plan = plan_for_tree(b.game, b.tree, eps, v);
  b.csp = build_csp(b.game, b.plan, eps, v);
  return b;
}

const std::vector<Rational> kHalf{Rational(1, 2), Rational(1, 2)};

}  // namespace

TEST_CASE("clique ordering") {
  const auto star = gen_star_matching_pennies(5).game;
  const auto st = validate_game(star);
  const auto tree = build_rooted_tree(star, st, 0);
  const auto center = order_cliques(star, st, &tree, 0);
  REQUIRE(center.size() == 4);
  for (std::size_t l = 0; l < 4; ++l) CHECK(star.cliques[center[l]].members[1] == static_cast<int>(l) + 1);
  const auto leaf = order_cliques(star, st, &tree, 3);
  REQUIRE(leaf.size() == 1);
  CHECK(star.cliques[leaf[0]].members == std::vector<PlayerId>{3, 0});

  // Player with cliques {5,1} then {5,2,3}, zero-based: input order kept.
  GameDefinition g;
  g.actions.assign(5, 2);
  g.cliques.push_back({4, {4, 0}, std::vector<Rational>(4, 0)});
  g.cliques.push_back({4, {4, 1, 2}, std::vector<Rational>(8, 0)});
  const auto gs = validate_game(g);
  CHECK(order_cliques(g, gs, nullptr, 4) == std::vector<int>{0, 1});
}

TEST_CASE("variable counts") {
  auto pair = build(gen_star_matching_pennies(2).game, q("0.5"));
  CHECK(pair.csp.count(VarKind::probability) == 4);
  CHECK(pair.csp.count(VarKind::partial_sum) == 4);
  CHECK(pair.csp.variables.size() == 8);

  auto star = build(gen_star_matching_pennies(5).game, q("0.1"));
  CHECK(star.csp.count(VarKind::probability) == 10);
  CHECK(star.csp.count(VarKind::partial_sum) == 16);
  CHECK(star.csp.variables.size() == 26);
  CHECK(star.csp.count(ConstraintKind::normalization) == 5);
  CHECK(star.csp.count(ConstraintKind::best_response) == 10);  // one per player and action
}

TEST_CASE("isolated player only needs normalization") {
  GameDefinition g = gen_star_matching_pennies(2).game;
  g.actions.push_back(3);
  const auto b = build(g, q("0.5"));
  std::size_t touching = 0;
  for (const auto& c : b.csp.constraints) {
    if (c.player == 2) ++touching;
  }
  CHECK(b.csp.prob_vars[2].size() == 3);
  CHECK(touching == 4);  // normalization plus one always-true best-response check per action
  const auto r = solve_backtracking(b.csp, 1'000'000);
  CHECK(r.status == SearchStatus::satisfied);
}

TEST_CASE("plan mismatch") {
  const auto g = gen_star_matching_pennies(2).game;
  const auto st = validate_game(g);
  const auto plan = plan_simple(g, st, q("0.5"));
  CHECK_THROWS_AS(build_csp(g, plan, q("0.25"), Variant::simple), PlanMismatch);
  CHECK_THROWS_AS(build_csp(g, plan, q("0.5"), Variant::refined), PlanMismatch);
}

TEST_CASE("rounding an exact equilibrium satisfies the csp") {
  for (Variant v : {Variant::simple, Variant::refined}) {
    auto b = build(gen_star_matching_pennies(2).game, q("0.5"), v);
    const auto a = round_msne_to_assignment(b.csp, {kHalf, kHalf});
    const auto res = check_assignment(b.csp, a);
    CHECK(res.satisfied);
    const auto prof = profile_from_assignment(b.csp, a);
    CHECK(prof[0].numerators[0] * 2 == prof[0].denominator);
  }
}

TEST_CASE("on-grid profile is a rounding fixed point") {
  auto b = build(gen_random_tree_polymatrix(3, 2, 5).game, q("0.5"));
  MixedProfile p;
  for (int i = 0; i < 3; ++i) {
    const int s = b.plan.at(i).grid.s;
    p.push_back(oracle::grid_to_probs({1, s - 1}, s));
  }
  const auto a = round_msne_to_assignment(b.csp, p);
  const auto back = to_mixed(profile_from_assignment(b.csp, a));
  CHECK(back == p);
}

TEST_CASE("check_assignment reports violations") {
  auto b = build(gen_star_matching_pennies(3).game, q("0.25"));
  const auto good = round_msne_to_assignment(b.csp, {kHalf, kHalf, kHalf});
  REQUIRE(check_assignment(b.csp, good).satisfied);

  auto bad = good;
  bad.values[static_cast<std::size_t>(b.csp.prob_vars[1][0])] += 1;
  auto r = check_assignment(b.csp, bad);
  CHECK_FALSE(r.satisfied);
  REQUIRE(r.violated >= 0);
  CHECK(b.csp.constraints[static_cast<std::size_t>(r.violated)].kind == ConstraintKind::normalization);

  // One lattice step on a partial sum that sits strictly inside its domain.
  bool tried = false;
  for (std::size_t k = 0; k < b.csp.variables.size() && !tried; ++k) {
    const auto& var = b.csp.variables[k];
    if (var.kind != VarKind::partial_sum || good.values[k] >= var.hi) continue;
    bad = good;
    bad.values[k] += 1;
    r = check_assignment(b.csp, bad);
    CHECK_FALSE(r.satisfied);
    REQUIRE(r.violated >= 0);
    CHECK(b.csp.constraints[static_cast<std::size_t>(r.violated)].kind == ConstraintKind::partial_sum);
    tried = true;
  }
  CHECK(tried);
}

TEST_CASE("backtracking on matching pennies") {
  auto b = build(gen_star_matching_pennies(2).game, q("0.5"));
  const auto r = solve_backtracking(b.csp, 10'000'000);
  REQUIRE(r.status == SearchStatus::satisfied);
  CHECK(check_assignment(b.csp, r.assignment).satisfied);
  const auto p = profile_from_assignment(b.csp, r.assignment);
  CHECK(oracle::max_regret(b.game, to_mixed(p)) <= q("0.5"));

  CHECK(solve_backtracking(b.csp, 3).status == SearchStatus::limit_exceeded);
}

TEST_CASE("hand-built instances") {
  CSPInstance c;
  c.variables.push_back({VarKind::probability, 0, -1, 0, 0, {}, 2, 5, "x"});
  c.variables.push_back({VarKind::probability, 0, -1, 0, 1, {}, 0, 3, "y"});
  auto r = solve_backtracking(c, 100);
  REQUIRE(r.status == SearchStatus::satisfied);
  CHECK(r.assignment.values == std::vector<std::int64_t>{2, 0});

  CSPConstraint one{ConstraintKind::normalization, 0, {0}, -1,
                    [](std::span<const std::int64_t> v) { return v[0] == 3; }, nullptr, "x=3"};
  CSPConstraint two{ConstraintKind::normalization, 0, {0}, -1,
                    [](std::span<const std::int64_t> v) { return v[0] == 4; }, nullptr, "x=4"};
  c.constraints = {one, two};
  CHECK(solve_backtracking(c, 100).status == SearchStatus::infeasible);
  c.constraints = {one};
  const auto all = enumerate_solutions(c, 100);
  CHECK(all.complete);
  CHECK(all.solutions.size() == 4);
}

TEST_CASE("enumerated csp solutions are all approximate equilibria") {
  auto b = build(gen_random_tree_polymatrix(2, 2, 3).game, q("0.75"));
  const auto all = enumerate_solutions(b.csp, 50'000'000);
  REQUIRE(all.complete);
  CHECK_FALSE(all.solutions.empty());
  std::set<GridProfile> seen;
  for (const auto& a : all.solutions) {
    const auto p = profile_from_assignment(b.csp, a);
    CHECK(oracle::max_regret(b.game, to_mixed(p)) <= q("0.75"));
    seen.insert(p);
  }
  // Partial sums are functions of p, so p-parts never repeat.
  CHECK(seen.size() == all.solutions.size());
}
