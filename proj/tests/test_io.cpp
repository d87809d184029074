#include <doctest.h>

#include <random>
#include <set>

#include "gmhg/gmhg.hpp"

using namespace gmhg;

namespace {

Rational q(const char* s) { return parse_rational(s); }

// Random valid game with shuffled clique order and mixed payoff spellings.
std::string fuzz_document(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = 1 + static_cast<int>(rng() % 4);
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["players"] = nlohmann::json::array();
  std::vector<int> actions;
  for (int i = 0; i < n; ++i) {
    actions.push_back(1 + static_cast<int>(rng() % 3));
    doc["players"].push_back({{"id", i}, {"actions", actions.back()}});
  }
  doc["cliques"] = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const int count = static_cast<int>(rng() % 3);
    std::set<std::vector<int>> used;
    for (int c = 0; c < count; ++c) {
      std::vector<int> members{i};
      for (int j = 0; j < n; ++j) {
        if (j != i && rng() % 2) members.push_back(j);
      }
      if (!used.insert(members).second) continue;
      std::size_t volume = 1;
      for (int mbr : members) volume *= static_cast<std::size_t>(actions[static_cast<std::size_t>(mbr)]);
      nlohmann::json pay = nlohmann::json::array();
      for (std::size_t k = 0; k < volume; ++k) {
        const long num = static_cast<long>(rng() % 41) - 20;
        const long den = 1 + static_cast<long>(rng() % 8);
        pay.push_back(rng() % 2 ? std::to_string(num) + "/" + std::to_string(den) : std::to_string(num) + ".25");
      }
      doc["cliques"].push_back({{"owner", i}, {"members", members}, {"payoffs", pay}});
    }
  }
  std::shuffle(doc["cliques"].begin(), doc["cliques"].end(), rng);
  return doc.dump();
}

}  // namespace

TEST_CASE("round trip on fuzzed documents") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::string text = fuzz_document(seed);
    const GameDefinition g = parse_game(text);
    const std::string once = serialize_game(g);
    const GameDefinition back = parse_game(once);
    const GameDefinition canon = canonical_game(g);
    CHECK(back.actions == canon.actions);
    REQUIRE(back.cliques.size() == canon.cliques.size());
    for (std::size_t c = 0; c < canon.cliques.size(); ++c) {
      CHECK(back.cliques[c].owner == canon.cliques[c].owner);
      CHECK(back.cliques[c].members == canon.cliques[c].members);
      CHECK(back.cliques[c].payoffs == canon.cliques[c].payoffs);
    }
    CHECK(serialize_game(back) == once);
  }
}

TEST_CASE("decimal payoffs are exact") {
  const std::string text = R"({"schema_version":1,"players":[{"id":0,"actions":2}],
    "cliques":[{"owner":0,"members":[0],"payoffs":["0.1","1/3"]}]})";
  const auto g = parse_game(text);
  CHECK(g.cliques[0].payoffs[0] == Rational(1, 10));
  CHECK(g.cliques[0].payoffs[1] == Rational(1, 3));
  CHECK(serialize_game(g).find("\"0.1\"") != std::string::npos);
}

TEST_CASE("schema errors carry a path") {
  const std::string short_table = R"({"schema_version":1,"players":[{"id":0,"actions":2},{"id":1,"actions":2},
    {"id":2,"actions":2}],"cliques":[{"owner":0,"members":[0,1,2],"payoffs":["0","0","0","0","0","0","0"]}]})";
  try {
    parse_game(short_table);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.path().rfind("/cliques/0", 0) == 0);
  }
  CHECK_THROWS_AS(parse_game(R"({"schema_version":1,"players":[{"id":0,"actions":2}],
    "cliques":[{"owner":0,"members":[0],"payoffs":[0.5,1]}]})"), SchemaError);
  CHECK_THROWS_AS(parse_game("{"), SchemaError);
  CHECK_THROWS_AS(parse_game(R"({"schema_version":99,"players":[],"cliques":[]})"), SchemaError);
}

TEST_CASE("profile documents") {
  const auto out = solve_polymatrix(gen_star_matching_pennies(3).game, {q("0.25")});
  auto doc = profile_document(out.profile, "polymatrix");
  doc.seed = 5;
  const auto text = serialize_profile(doc);
  const auto back = parse_profile(text);
  CHECK(back.epsilon == q("0.25"));
  CHECK(back.strategies == out.profile.strategies);
  CHECK(back.seed == std::optional<std::uint64_t>(5));
  CHECK(back.regret.has_value());
  CHECK(serialize_profile(back) == text);

  auto j = nlohmann::json::parse(text);
  j["players"][0]["numerators"][0] = j["players"][0]["numerators"][0].get<int>() + 1;
  CHECK_THROWS_AS(parse_profile(j.dump()), UnnormalizedStrategy);
}

TEST_CASE("csp documents rebuild the instance") {
  const auto norm = normalize_polymatrix(gen_star_matching_pennies(3).game).game;
  const auto st = validate_game(norm);
  const auto tree = build_rooted_tree(norm, st, 0);
  const auto plan = plan_for_tree(norm, tree, q("0.5"), Variant::simple);
  const auto csp = build_csp(norm, plan, q("0.5"), Variant::simple);
  const auto back = parse_csp(serialize_csp(csp));
  CHECK(back.variables.size() == csp.variables.size());
  CHECK(back.constraints.size() == csp.constraints.size());
  // Indices follow the canonical clique order; the cliques themselves match.
  REQUIRE(back.clique_order.size() == csp.clique_order.size());
  for (std::size_t i = 0; i < csp.clique_order.size(); ++i) {
    REQUIRE(back.clique_order[i].size() == csp.clique_order[i].size());
    for (std::size_t l = 0; l < csp.clique_order[i].size(); ++l) {
      const auto& a = back.game.cliques[static_cast<std::size_t>(back.clique_order[i][l])];
      const auto& b = csp.game.cliques[static_cast<std::size_t>(csp.clique_order[i][l])];
      CHECK(a.owner == b.owner);
      CHECK(a.members == b.members);
    }
  }
}

TEST_CASE("star generator") {
  const auto five = gen_star_matching_pennies(5);
  CHECK(five.game.num_players() == 5);
  CHECK(five.game.cliques.size() == 8);
  CHECK(five.metadata["orientation"] == "center-matches");
  for (const auto& c : five.game.cliques) {
    for (const auto& x : c.payoffs) CHECK((x == 0 || x == 1));
  }
  const auto two = gen_star_matching_pennies(2).game;
  CHECK(two.cliques[0].payoffs == std::vector<Rational>{1, 0, 0, 1});
  CHECK(two.cliques[1].payoffs == std::vector<Rational>{0, 1, 1, 0});
  const auto flipped = gen_star_matching_pennies(2, Orientation::leaves_match).game;
  CHECK(flipped.cliques[0].payoffs == std::vector<Rational>{0, 1, 1, 0});
  CHECK(gen_star_matching_pennies(101).game.num_players() == 101);

  const auto mixed = gen_star_matching_pennies(parse_orientation_pattern("CL", 3));
  CHECK(mixed.metadata["orientation"] == "CL");
  CHECK(mixed.game.cliques[2].payoffs == std::vector<Rational>{0, 1, 1, 0});
  CHECK_THROWS_AS(parse_orientation_pattern("CX", 3), InputError);
  CHECK_THROWS_AS(gen_star_matching_pennies(1), ParameterOutOfRange);
}

TEST_CASE("random tree generator") {
  const auto one = gen_random_tree_polymatrix(1, 2, 0).game;
  CHECK(one.num_players() == 1);
  CHECK(one.cliques.empty());
  CHECK(serialize_game(gen_random_tree_polymatrix(6, 3, 8)) == serialize_game(gen_random_tree_polymatrix(6, 3, 8)));
  CHECK(serialize_game(gen_random_tree_polymatrix(6, 3, 8)) != serialize_game(gen_random_tree_polymatrix(6, 3, 9)));

  const auto g = gen_random_tree_polymatrix(5, 2, 42).game;
  CHECK(pruefer_tree(5, 42).size() == 4);
  CHECK(g.cliques.size() == 8);
  for (auto [u, v] : pruefer_tree(5, 42)) {
    int found = 0;
    for (const auto& c : g.cliques) {
      if ((c.owner == u && c.members[1] == v) || (c.owner == v && c.members[1] == u)) ++found;
    }
    CHECK(found == 2);
  }
  CHECK_NOTHROW(build_rooted_tree(g, validate_game(g), 0));
}

TEST_CASE("negative-entry example generator") {
  const auto doc = gen_example_player1(1, 1, q("0.1"));
  CHECK(clique_stats(doc.game.cliques[0]).range == 5);
  CHECK(clique_stats(doc.game.cliques[1]).range == q("2.2"));
  CHECK_THROWS_AS(gen_example_player1(1, 1, Rational(1, 3)), ParameterOutOfRange);
  CHECK_THROWS_AS(gen_example_player1(0, 1, q("0.1")), ParameterOutOfRange);

  for (const char* b : {"0.5", "2"}) {
    for (const char* c : {"0.3", "1.5"}) {
      for (const char* gm : {"0.05", "0.3"}) {
        const auto g = gen_example_player1(q(b), q(c), q(gm)).game;
        const auto st = validate_game(g);
        CHECK(polymatrix_bounds(g, st, 0) == std::pair<Rational, Rational>(1, 0));
      }
    }
  }
}

TEST_CASE("normal-form generator respects the degree cap") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = gen_random_tree_normalform(5, 2, seed, 2).game;
    const auto st = validate_game(g);
    CHECK(st.normal_form);
    CHECK(st.k <= 3);
  }
}

TEST_CASE("bench harness") {
  const auto one = bench_star({3}, q("0.5"), 3);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].timings.size() == 3);
  CHECK_FALSE(one.slope.has_value());
  const auto two = bench_star({2, 4}, q("0.5"), 1);
  CHECK(two.slope.has_value());
  const auto csv = bench_csv(two);
  CHECK(csv.rfind(std::string(kBenchHeader) + "\n", 0) == 0);
  CHECK(loglog_slope({1, 2, 4}, {1, 4, 16}).value() == doctest::Approx(2.0));
}

TEST_CASE("dp table export") {
  const auto out = solve_polymatrix(gen_star_matching_pennies(3).game, {q("0.5")});
  PolymatrixTreeDP dp(out.normalized.game, out.tree, out.plan);
  dp.collect();
  const auto doc = nlohmann::json::parse(serialize_dp_tables(dp, out.tree));
  REQUIRE(doc["players"].size() == 3);
  const auto& center = doc["players"][0];
  CHECK(center["parent"] == -1);
  REQUIRE(center["message"].size() == 1);
  // The chosen root strategy is feasible and has reachable sums listed.
  const auto picked = out.profile.strategies[0].numerators;
  bool listed = false;
  for (const auto& k : center["message"][0]) {
    if (center["strategies"][k.get<std::size_t>()].get<std::vector<int>>() == picked) listed = true;
  }
  CHECK(listed);
  CHECK_FALSE(center["reachable_sums"].empty());
  const auto& leaf = doc["players"][1];
  CHECK(leaf["message"].size() == dp.parent_classes(1));
  CHECK_FALSE(serialize_dp_tables(dp, out.tree, 0).empty());
}
