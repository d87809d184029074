#include <doctest.h>

#include <set>

#include "gmhg/gmhg.hpp"
#include "oracles.hpp"

using namespace gmhg;

namespace {

Rational q(const char* s) { return parse_rational(s); }

std::set<std::vector<std::vector<int>>> as_numerators(const std::vector<GridProfile>& ps) {
  std::set<std::vector<std::vector<int>>> out;
  for (const auto& p : ps) {
    std::vector<std::vector<int>> row;
    for (const auto& g : p) row.push_back(g.numerators);
    out.insert(row);
  }
  return out;
}

}  // namespace

TEST_CASE("five-node star at 0.1") {
  const auto out = solve_polymatrix(gen_star_matching_pennies(5).game, {q("0.1")});
  CHECK(out.profile.certified);
  CHECK(oracle::max_regret(out.normalized.game, to_mixed(out.profile.strategies)) <= q("0.1"));
}

TEST_CASE("matching pennies pair against the grid oracle") {
  for (Variant v : {Variant::simple, Variant::refined}) {
    SolveRequest req{q("0.5"), v};
    const auto out = solve_polymatrix(gen_star_matching_pennies(2).game, req);
    const auto& g = out.normalized.game;
    PolymatrixTreeDP dp(g, out.tree, out.plan);
    dp.collect();
    const auto dp_set = as_numerators(dp.enumerate_all());
    const auto exact = oracle::grid_equilibria(g, out.profile.s, q("0.5"));
    const std::set<std::vector<std::vector<int>>> exact_set(exact.begin(), exact.end());
    CHECK_FALSE(dp_set.empty());
    for (const auto& p : dp_set) CHECK(exact_set.count(p) == 1);
    std::vector<std::vector<int>> picked;
    for (const auto& gs : out.profile.strategies) picked.push_back(gs.numerators);
    CHECK(dp_set.count(picked) == 1);
  }
}

TEST_CASE("single-node game gets the uniform strategy") {
  GameDefinition g;
  g.actions = {3};
  const auto out = solve_polymatrix(g, {q("0.1")});
  REQUIRE(out.profile.strategies.size() == 1);
  CHECK(out.profile.strategies[0].numerators == std::vector<int>{1, 1, 1});
  CHECK(out.profile.certificate->max_regret() == 0);
}

TEST_CASE("random trees certify for both variants") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto raw = gen_random_tree_polymatrix(5, 2, seed).game;
    for (Variant v : {Variant::simple, Variant::refined}) {
      const auto out = solve_polymatrix(raw, {q("0.25"), v});
      CHECK(out.profile.certified);
      CHECK(oracle::max_regret(out.normalized.game, to_mixed(out.profile.strategies)) <= q("0.25"));
    }
  }
}

TEST_CASE("root choice does not matter for certification") {
  const auto raw = gen_random_tree_polymatrix(6, 2, 9).game;
  for (int root = 0; root < 6; ++root) {
    SolveRequest req{q("0.25")};
    req.root = root;
    const auto out = solve_polymatrix(raw, req);
    CHECK(out.profile.certified);
    CHECK(out.tree.root == root);
  }
}

TEST_CASE("literal slack still solves small instances") {
  SolveRequest req{q("0.5")};
  req.slack = SlackMode::literal;
  req.certify = false;
  const auto out = solve_polymatrix(gen_random_tree_polymatrix(4, 2, 1).game, req);
  CHECK(out.profile.strategies.size() == 4);
}

TEST_CASE("reachable partial sums") {
  const auto out = solve_polymatrix(gen_star_matching_pennies(3).game, {q("0.5")});
  PolymatrixTreeDP dp(out.normalized.game, out.tree, out.plan);
  dp.collect();
  // Leaves have no children: only the zero vector.
  const auto leaf = dp.reachable_partial_sums(1, 0, 0);
  REQUIRE(leaf.size() == 1);
  CHECK(leaf[0] == std::vector<std::int64_t>{0, 0});
  const auto center0 = dp.reachable_partial_sums(0, 0, 0);
  CHECK(center0.size() == 1);
  // After the first child, one vector per distinct projected child contribution.
  const auto after1 = dp.reachable_partial_sums(0, 0, 1);
  CHECK(after1.size() >= 2);
  std::set<std::vector<std::int64_t>> uniq(after1.begin(), after1.end());
  CHECK(uniq.size() == after1.size());

  // A child whose strategies all look alike to the parent: zero edge matrix.
  GameDefinition g = gen_star_matching_pennies(2).game;
  g.cliques[0].payoffs.assign(4, 0);
  g.cliques.push_back({0, {0}, {0, 1}});
  const auto st = validate_game(g);
  const auto tree = build_rooted_tree(g, st, 0);
  const auto orders = order_all_cliques(g, st, &tree);
  const auto plan = plan_simple(g, st, q("0.5"), orders);
  CHECK_THROWS_AS(PolymatrixTreeDP(g, tree, plan), NotPolymatrix);
}

TEST_CASE("payoff-equivalent children collapse to one sum") {
  GameDefinition g = gen_star_matching_pennies(2).game;
  g.cliques[0].payoffs = {1, 1, 0, 0};  // center's payoff ignores the leaf
  const auto norm = normalize_polymatrix(g).game;
  const auto st = validate_game(norm);
  const auto tree = build_rooted_tree(norm, st, 0);
  const auto plan = plan_for_tree(norm, tree, q("0.5"), Variant::simple);
  PolymatrixTreeDP dp(norm, tree, plan);
  dp.collect();
  for (std::size_t p = 0; p < dp.space(0).size(); ++p) CHECK(dp.reachable_partial_sums(0, p, 1).size() == 1);
}

TEST_CASE("messages depend only on the subtree") {
  // Path 0 - 1 - 2 rooted at 0; changing player 0's own matrix leaves the
  // message of 2 untouched.
  auto raw = gen_random_tree_polymatrix(3, 2, 4).game;
  auto norm = normalize_polymatrix(raw).game;
  auto st = validate_game(norm);
  auto tree = build_rooted_tree(norm, st, 0);
  const auto plan = plan_for_tree(norm, tree, q("0.5"), Variant::simple);
  PolymatrixTreeDP a(norm, tree, plan);
  a.collect();
  PlayerId deep = -1;
  for (PlayerId i = 0; i < 3; ++i) {
    if (!tree.is_root(i) && tree.children[static_cast<std::size_t>(i)].empty()) deep = i;
  }
  REQUIRE(deep >= 0);
  for (auto& c : norm.cliques) {
    if (c.owner == 0) std::swap(c.payoffs.front(), c.payoffs.back());
  }
  PolymatrixTreeDP b(norm, tree, plan);
  b.collect();
  CHECK(a.message(deep) == b.message(deep));
}

TEST_CASE("dp rejects mismatched inputs") {
  GameDefinition cyc;
  cyc.actions = {2, 2, 2};
  cyc.cliques.push_back({0, {0, 1}, std::vector<Rational>(4, 0)});
  cyc.cliques.push_back({1, {1, 2}, std::vector<Rational>(4, 0)});
  cyc.cliques.push_back({2, {2, 0}, std::vector<Rational>(4, 0)});
  CHECK_THROWS_AS(solve_polymatrix(cyc, {q("0.1")}), NotTree);
  CHECK_THROWS_AS(solve_polymatrix(gen_star_matching_pennies(2).game, {0}), EpsilonNonpositive);
}

TEST_CASE("normal-form solver on matching pennies") {
  const auto pm = solve_polymatrix(gen_star_matching_pennies(2).game, {q("0.5")});
  const auto nf = solve_normalform(gen_star_matching_pennies(2).game, {q("0.5")});
  CHECK(pm.profile.certified);
  CHECK(nf.profile.certified);
  CHECK(oracle::max_regret(nf.normalized.game, to_mixed(nf.profile.strategies)) <= q("0.5"));
}

TEST_CASE("normal-form solver on a random three-player path") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gen_random_tree_normalform(3, 2, seed).game;
    const auto out = solve_normalform(g, {q("0.25")});
    CHECK(out.profile.certified);
    CHECK(oracle::max_regret(out.normalized.game, to_mixed(out.profile.strategies)) <= q("0.25"));
  }
}

TEST_CASE("constant local table makes every strategy feasible") {
  auto g = gen_random_tree_normalform(2, 2, 3).game;
  for (auto& c : g.cliques) {
    if (c.owner == 1) c.payoffs.assign(c.payoffs.size(), q("0.5"));
  }
  const auto norm = normalize_normal_form(g).game;
  const auto st = validate_game(norm);
  const auto tree = build_rooted_tree(norm, st, 0);
  const auto plan = plan_for_tree(norm, tree, q("0.5"), Variant::refined);
  NormalFormTreeDP dp(norm, tree, plan);
  dp.collect();
  for (std::size_t pp = 0; pp < dp.space(0).size(); ++pp) {
    for (std::size_t p = 0; p < dp.space(1).size(); ++p) CHECK(dp.feasible(1, p, pp));
  }
}

TEST_CASE("linear projector rounds half up") {
  LinearProjector proj({Rational(1, 2), Rational(1, 3)});
  CHECK(proj(std::vector<int>{1, 0}) == 1);
  CHECK(proj(std::vector<int>{0, 1}) == 0);
  CHECK(proj(std::vector<int>{-1, 0}) == 0);
  CHECK(proj(std::vector<int>{3, 3}) == 3);  // 2.5 -> 3
}
