#include <doctest.h>

#include <algorithm>
#include <random>

#include "gmhg/gmhg.hpp"
#include "oracles.hpp"

using namespace gmhg;

namespace {

Rational q(const char* s) { return parse_rational(s); }

const std::vector<Rational> kHalf{Rational(1, 2), Rational(1, 2)};
const std::vector<Rational> kFirst{1, 0};

// Player 0 matches, player 1 mismatches, 0/1 payoffs.
GameDefinition pennies() { return gen_star_matching_pennies(2).game; }

GridProfile grid(std::vector<std::vector<int>> nums, int s) {
  GridProfile out;
  for (std::size_t i = 0; i < nums.size(); ++i) out.push_back({static_cast<PlayerId>(i), s, nums[i]});
  return out;
}

}  // namespace

TEST_CASE("regret of matching pennies profiles") {
  auto r = exact_regret(pennies(), MixedProfile{kHalf, kHalf});
  CHECK(r.regret == std::vector<Rational>{0, 0});
  CHECK(r.all_pass);

  r = exact_regret(pennies(), MixedProfile{kFirst, kFirst});
  CHECK(r.regret[0] == 0);
  CHECK(r.regret[1] == 1);
  CHECK(r.payoff[1] == 0);
  CHECK(r.best[1] == 1);
}

TEST_CASE("regret matches the joint-enumeration oracle") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = seed % 2 ? gen_random_tree_polymatrix(4, 3, seed).game : gen_random_tree_normalform(4, 2, seed).game;
    MixedProfile p;
    for (int m : g.actions) {
      std::vector<int> w;
      for (int a = 0; a < m; ++a) w.push_back(static_cast<int>(rng() % 5));
      w[0] += 1;
      int tot = 0;
      for (int x : w) tot += x;
      p.push_back(oracle::grid_to_probs(w, tot));
    }
    CHECK(exact_regret(g, p).regret == oracle::regrets(g, p));
  }
}

TEST_CASE("bad profiles") {
  CHECK_THROWS_AS(exact_regret(pennies(), MixedProfile{kHalf}), DimensionMismatch);
  CHECK_THROWS_AS(exact_regret(pennies(), MixedProfile{kHalf, {Rational(1, 2)}}), DimensionMismatch);
  CHECK_THROWS_AS(exact_regret(pennies(), MixedProfile{kHalf, {Rational(1, 2), Rational(1, 3)}}),
                  UnnormalizedStrategy);
}

TEST_CASE("epsilon test is a weak inequality") {
  CHECK(is_eps_msne(pennies(), MixedProfile{kHalf, kHalf}, 0));
  // Mismatcher: action 1 pays 3/4, uniform pays 1/2, so regret 1/4.
  const MixedProfile p{{Rational(3, 4), Rational(1, 4)}, kHalf};
  CHECK(exact_regret(pennies(), p).max_regret() == Rational(1, 4));
  CHECK(is_eps_msne(pennies(), p, Rational(1, 4)));
  CHECK_FALSE(is_eps_msne(pennies(), p, Rational(24, 100)));
  CHECK_FALSE(is_eps_msne(pennies(), MixedProfile{kFirst, kFirst}, q("0.5")));
}

TEST_CASE("brute force grid equilibria") {
  const auto g = pennies();
  const auto half = brute_force_grid_equilibria(g, std::vector<int>{2, 2}, q("0.5"));
  CHECK(std::find(half.begin(), half.end(), grid({{1, 1}, {1, 1}}, 2)) != half.end());
  for (const auto& p : half) CHECK(oracle::max_regret(g, to_mixed(p)) <= q("0.5"));

  CHECK(brute_force_grid_equilibria(g, std::vector<int>{2, 2}, 1).size() == 9);
  const auto exact = brute_force_grid_equilibria(g, std::vector<int>{2, 2}, 0);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0] == grid({{1, 1}, {1, 1}}, 2));

  CHECK_THROWS_AS(brute_force_grid_equilibria(g, std::vector<int>{2000, 2000}, 0, 1000), TooLarge);
  CHECK(joint_grid_size(g, {2, 3}) == 12);
}

TEST_CASE("brute force equals the oracle as a set") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = normalize_polymatrix(gen_random_tree_polymatrix(3, 2, seed).game).game;
    const std::vector<int> s{3, 4, 2};
    const auto lib = brute_force_grid_equilibria(g, s, q("0.2"));
    const auto ref = oracle::grid_equilibria(g, s, q("0.2"));
    REQUIRE(lib.size() == ref.size());
    for (std::size_t k = 0; k < lib.size(); ++k) {
      for (std::size_t i = 0; i < 3; ++i) CHECK(lib[k][i].numerators == ref[k][i]);
    }
  }
}

TEST_CASE("dominant strategies give zero regret") {
  GameDefinition g;
  g.actions = {2, 2, 2};
  g.cliques.push_back({0, {0, 1}, {3, 3, 1, 1}});
  g.cliques.push_back({1, {1, 0}, {q("0.2"), q("0.2"), q("0.9"), q("0.9")}});
  g.cliques.push_back({1, {1, 2}, {0, 0, 1, 1}});
  g.cliques.push_back({2, {2, 1}, {5, 5, 6, 6}});
  const MixedProfile p{kFirst, {0, 1}, {0, 1}};
  const auto r = exact_regret(g, p);
  CHECK(r.max_regret() == 0);
}

TEST_CASE("regret scales with the payoff scale") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gen_random_tree_polymatrix(4, 2, seed).game;
    MixedProfile p(4, {Rational(1, 3), Rational(2, 3)});
    const auto base = exact_regret(g, p);
    for (const Rational& alpha : {Rational(3), Rational(2, 7)}) {
      auto scaled = g;
      for (auto& c : scaled.cliques) {
        if (c.owner != 1) continue;
        for (auto& x : c.payoffs) x = alpha * x + 5;
      }
      const auto r = exact_regret(scaled, p);
      CHECK(r.regret[1] == alpha * base.regret[1]);
      CHECK(r.regret[0] == base.regret[0]);
    }
  }
}
