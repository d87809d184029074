#include <doctest.h>

#include "gmhg/gmhg.hpp"
#include "oracles.hpp"

using namespace gmhg;

namespace {

Rational q(const char* s) { return parse_rational(s); }

LocalClique clique(PlayerId owner, std::vector<PlayerId> members, std::vector<Rational> payoffs) {
  return {owner, std::move(members), std::move(payoffs)};
}

std::vector<Rational> filled(std::size_t n, const Rational& v) { return std::vector<Rational>(n, v); }

// Five players, zero-based: structure of the primal-graph example.
GameDefinition five_player_structure() {
  GameDefinition g;
  g.actions.assign(5, 2);
  g.cliques.push_back(clique(0, {0, 1}, filled(4, 0)));
  g.cliques.push_back(clique(1, {1, 4}, filled(4, 0)));
  g.cliques.push_back(clique(2, {2, 4}, filled(4, 0)));
  g.cliques.push_back(clique(3, {3, 0}, filled(4, 0)));
  g.cliques.push_back(clique(3, {3, 4}, filled(4, 0)));
  g.cliques.push_back(clique(4, {4, 0}, filled(4, 0)));
  g.cliques.push_back(clique(4, {4, 1, 2}, filled(8, 0)));
  return g;
}

GameDefinition matching_pair() { return gen_star_matching_pennies(2).game; }

}  // namespace

TEST_CASE("structure stats of the five-player example") {
  const auto g = five_player_structure();
  const auto st = validate_game(g);
  CHECK(st.neighborhoods[4] == std::vector<PlayerId>{0, 1, 2, 4});
  CHECK(st.affected[4] == std::vector<PlayerId>{1, 2, 3});
  CHECK(st.kappa_i[4] == 2);
  CHECK(st.kappa_prime_i[4] == 3);
  CHECK(st.kappa == 2);
  CHECK(st.kappa_prime == 3);
  CHECK_FALSE(st.polymatrix);
}

TEST_CASE("single player with a singleton clique") {
  GameDefinition g;
  g.actions = {3};
  g.cliques.push_back(clique(0, {0}, {q("1"), q("2"), q("3")}));
  const auto st = validate_game(g);
  CHECK(st.neighborhoods[0] == std::vector<PlayerId>{0});
  CHECK(st.affected[0].empty());
  CHECK(st.kappa == 1);
  CHECK(st.kappa_prime == 1);
}

TEST_CASE("malformed games are rejected") {
  GameDefinition g;
  g.actions = {2, 2};
  g.cliques.push_back(clique(0, {1, 0}, filled(4, 0)));
  CHECK_THROWS_AS(validate_game(g), MalformedGame);

  g.cliques = {clique(0, {0, 1}, filled(3, 0))};
  CHECK_THROWS_AS(validate_game(g), MalformedGame);

  g.cliques = {clique(0, {0, 0}, filled(4, 0))};
  CHECK_THROWS_AS(validate_game(g), MalformedGame);

  g.cliques = {clique(0, {0, 5}, filled(4, 0))};
  CHECK_THROWS_AS(validate_game(g), MalformedGame);

  g.actions = {0, 2};
  g.cliques.clear();
  CHECK_THROWS_AS(validate_game(g), MalformedGame);
}

TEST_CASE("clique stats of the negative-entry example") {
  const auto doc = gen_example_player1(1, 1, q("0.1"));
  const auto& m12 = doc.game.cliques[0];
  CHECK(m12.payoffs == std::vector<Rational>{3, q("2.9"), q("-1.9"), -2});
  const auto s12 = clique_stats(m12);
  CHECK(s12.u == 3);
  CHECK(s12.l == -2);
  CHECK(s12.range == 5);
  // The matrix [[-b, -b-g], [c+g, c]] has minimum -b-g, so the range is
  // b + c + 2g rather than b + c + g.
  const auto s13 = clique_stats(doc.game.cliques[1]);
  CHECK(s13.u == q("1.1"));
  CHECK(s13.l == q("-1.1"));
  CHECK(s13.range == q("2.2"));
  const auto s14 = clique_stats(doc.game.cliques[2]);
  CHECK(s14.range == q("2.2"));

  const auto c = clique_stats(clique(0, {0, 1}, filled(4, 7)));
  CHECK(c.u == 7);
  CHECK(c.l == 7);
  CHECK(c.range == 0);
}

TEST_CASE("local payoff of the negative-entry example") {
  const auto g = gen_example_player1(1, 1, q("0.1")).game;
  const auto st = validate_game(g);
  const std::vector<int> all_first{0, 0, 0, 0}, all_second{1, 1, 1, 1};
  CHECK(exact_local_payoff(g, st, 0, all_first) == 1);
  CHECK(exact_local_payoff(g, st, 0, all_second) == 0);
  CHECK(exact_local_payoff(g, st, 0, all_first) == oracle::payoff(g, 0, all_first));

  GameDefinition lonely;
  lonely.actions = {2};
  const auto st2 = validate_game(lonely);
  CHECK(exact_local_payoff(lonely, st2, 0, std::vector<int>{1}) == 0);
}

TEST_CASE("local payoff agrees with the table oracle on every joint action") {
  const auto g = gen_random_tree_polymatrix(4, 3, 11).game;
  const auto st = validate_game(g);
  oracle::for_each_joint(g, [&](const std::vector<int>& joint) {
    for (PlayerId i = 0; i < 4; ++i) CHECK(exact_local_payoff(g, st, i, joint) == oracle::payoff(g, i, joint));
  });
}

TEST_CASE("expected clique payoff") {
  const auto g = matching_pair();
  const LocalClique& matcher = g.cliques[0];
  const Rational half(1, 2);
  std::vector<CliqueArgument> args{CliqueArgument::fixed(0), CliqueArgument::distribution({half, half})};
  CHECK(exact_expected_clique_payoff(g, matcher, args) == half);
  args[1] = CliqueArgument::distribution({1, 0});
  CHECK(exact_expected_clique_payoff(g, matcher, args) == 1);

  args[1] = CliqueArgument::distribution({half, Rational(1, 3)});
  CHECK_THROWS_AS(exact_expected_clique_payoff(g, matcher, args), UnnormalizedStrategy);

  GameDefinition three;
  three.actions = {2, 3, 2};
  three.cliques.push_back(clique(0, {0, 1, 2}, filled(12, q("0.7"))));
  const std::vector<CliqueArgument> mix{CliqueArgument::distribution({Rational(1, 4), Rational(3, 4)}),
                                        CliqueArgument::distribution({Rational(1, 3), Rational(1, 6), half}),
                                        CliqueArgument::fixed(1)};
  CHECK(exact_expected_clique_payoff(three, three.cliques[0], mix) == q("0.7"));
}

TEST_CASE("polymatrix bounds") {
  const auto ex = gen_example_player1(1, 1, q("0.1")).game;
  const auto st = validate_game(ex);
  CHECK(polymatrix_bounds(ex, st, 0) == std::pair<Rational, Rational>(1, 0));

  GameDefinition iso = matching_pair();
  iso.actions.push_back(2);
  const auto st_iso = validate_game(iso);
  CHECK(polymatrix_bounds(iso, st_iso, 2) == std::pair<Rational, Rational>(0, 0));

  const auto star = gen_star_matching_pennies(4).game;
  const auto st_star = validate_game(star);
  CHECK(polymatrix_bounds(star, st_star, 0) == std::pair<Rational, Rational>(3, 0));

  const auto nf = polymatrix_to_normal_form(star);
  CHECK_THROWS_AS(polymatrix_bounds(nf, validate_game(nf), 0), NotPolymatrix);
}

TEST_CASE("polymatrix normalization") {
  const auto ex = gen_example_player1(1, 1, q("0.1")).game;
  const auto norm = normalize_polymatrix(ex);
  for (std::size_t c = 0; c < 3; ++c) CHECK(norm.game.cliques[c].payoffs == ex.cliques[c].payoffs);
  // Neighbours have all-zero payoffs and are flagged.
  CHECK(norm.degenerate == std::vector<bool>{false, true, true, true});

  GameDefinition flat;
  flat.actions = {2, 2};
  flat.cliques.push_back(clique(0, {0, 1}, filled(4, 5)));
  flat.cliques.push_back(clique(1, {1, 0}, {0, 1, 1, 0}));
  const auto nf = normalize_polymatrix(flat);
  CHECK(nf.degenerate[0]);
  CHECK(nf.game.cliques[0].payoffs == filled(4, 0));

  const auto pair = matching_pair();
  CHECK(normalize_polymatrix(pair).game.cliques[0].payoffs == pair.cliques[0].payoffs);
}

TEST_CASE("normalized payoff spans exactly [0, 1] on random trees") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = gen_random_tree_polymatrix(4, 2, seed, -3, 5).game;
    const auto norm = normalize_polymatrix(g).game;
    for (PlayerId i = 0; i < 4; ++i) {
      Rational lo = 100, hi = -100;
      oracle::for_each_joint(norm, [&](const std::vector<int>& joint) {
        const Rational v = oracle::payoff(norm, i, joint);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      });
      CHECK(lo == 0);
      CHECK(hi == 1);
    }
  }
}

TEST_CASE("rooted tree") {
  const auto star = gen_star_matching_pennies(5).game;
  const auto st = validate_game(star);
  const auto t = build_rooted_tree(star, st, 0);
  CHECK(t.children[0] == std::vector<PlayerId>{1, 2, 3, 4});
  CHECK(t.parent[3] == 0);
  const auto t2 = build_rooted_tree(star, st, 2);
  CHECK(t2.parent[0] == 2);
  CHECK(t2.is_root(2));

  GameDefinition cyc;
  cyc.actions = {2, 2, 2};
  cyc.cliques.push_back(clique(0, {0, 1}, filled(4, 0)));
  cyc.cliques.push_back(clique(1, {1, 2}, filled(4, 0)));
  cyc.cliques.push_back(clique(2, {2, 0}, filled(4, 0)));
  CHECK_THROWS_AS(build_rooted_tree(cyc, validate_game(cyc), 0), NotTree);
}

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("0.1") == Rational(1, 10));
  CHECK(parse_rational("-2.5") == Rational(-5, 2));
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("1.5e-3") == Rational(3, 2000));
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK(to_string(Rational(1, 10)) == "0.1");
  CHECK(to_string(Rational(1, 3)) == "1/3");
  CHECK(round_half_up(Rational(1, 2)) == 1);
  CHECK(round_half_up(Rational(-1, 2)) == 0);
  CHECK(floor_to_int64(Rational(-7, 2)) == -4);
  CHECK(ceil_to_int64(Rational(7, 2)) == 4);
}
