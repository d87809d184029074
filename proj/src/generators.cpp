#include "gmhg/generators.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <string>

#include "gmhg/errors.hpp"

namespace gmhg {

namespace {

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

LocalClique edge(PlayerId owner, PlayerId other, std::vector<Rational> payoffs) {
  return {owner, {owner, other}, std::move(payoffs)};
}

}  // namespace

const char* to_string(Orientation o) { return o == Orientation::center_matches ? "center-matches" : "leaves-match"; }

Orientation parse_orientation(std::string_view name) {
  if (name == "center-matches") return Orientation::center_matches;
  if (name == "leaves-match") return Orientation::leaves_match;
  throw InputError("unknown orientation '" + std::string(name) + "' (center-matches|leaves-match)");
}

GameDocument gen_star_matching_pennies(int n, Orientation orientation, const Rational& win, const Rational& lose) {
  if (n < 2) throw ParameterOutOfRange("star needs n >= 2");
  GameDocument doc = gen_star_matching_pennies(std::vector<Orientation>(static_cast<std::size_t>(n - 1), orientation),
                                               win, lose);
  doc.metadata["orientation"] = to_string(orientation);
  return doc;
}

GameDocument gen_star_matching_pennies(const std::vector<Orientation>& per_leaf, const Rational& win,
                                       const Rational& lose) {
  if (per_leaf.empty()) throw ParameterOutOfRange("star needs n >= 2");
  const int n = static_cast<int>(per_leaf.size()) + 1;
  const std::vector<Rational> match{win, lose, lose, win};
  const std::vector<Rational> differ{lose, win, win, lose};
  GameDocument doc;
  doc.game.actions.assign(static_cast<std::size_t>(n), 2);
  std::string pattern;
  for (int leaf = 1; leaf < n; ++leaf) {
    const bool center_matches = per_leaf[static_cast<std::size_t>(leaf - 1)] == Orientation::center_matches;
    pattern += center_matches ? 'C' : 'L';
    doc.game.cliques.push_back(edge(0, leaf, center_matches ? match : differ));
    doc.game.cliques.push_back(edge(leaf, 0, center_matches ? differ : match));
  }
  doc.metadata = {{"generator", "star-mp"},
                  {"name", "matching-pennies star, n=" + std::to_string(n)},
                  {"orientation", pattern},
                  {"reward", {to_string(win), to_string(lose)}}};
  return doc;
}

std::vector<Orientation> parse_orientation_pattern(std::string_view text, int n) {
  if (n < 2) throw ParameterOutOfRange("star needs n >= 2");
  if (text == "center-matches" || text == "leaves-match") {
    return std::vector<Orientation>(static_cast<std::size_t>(n - 1), parse_orientation(text));
  }
  if (text.size() != static_cast<std::size_t>(n - 1)) {
    throw InputError("orientation pattern needs one C/L letter per leaf");
  }
  std::vector<Orientation> out;
  for (char ch : text) {
    if (ch == 'C') {
      out.push_back(Orientation::center_matches);
    } else if (ch == 'L') {
      out.push_back(Orientation::leaves_match);
    } else {
      throw InputError("unknown orientation '" + std::string(text) + "'");
    }
  }
  return out;
}

std::vector<std::pair<int, int>> pruefer_tree(int n, std::uint64_t seed) {
  if (n < 1) throw ParameterOutOfRange("tree needs n >= 1");
  std::vector<std::pair<int, int>> edges;
  if (n == 1) return edges;
  if (n == 2) return {{0, 1}};
  std::mt19937_64 rng(seed);
  std::vector<int> code(static_cast<std::size_t>(n - 2));
  for (int& x : code) x = static_cast<int>(draw(rng, static_cast<std::uint64_t>(n)));
  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (int x : code) ++degree[static_cast<std::size_t>(x)];
  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (int v = 0; v < n; ++v) {
    if (degree[static_cast<std::size_t>(v)] == 1) leaves.push(v);
  }
  for (int x : code) {
    const int leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(std::min(leaf, x), std::max(leaf, x));
    if (--degree[static_cast<std::size_t>(x)] == 1) leaves.push(x);
  }
  const int a = leaves.top();
  leaves.pop();
  const int b = leaves.top();
  edges.emplace_back(std::min(a, b), std::max(a, b));
  std::sort(edges.begin(), edges.end());
  return edges;
}

GameDocument gen_random_tree_polymatrix(int n, int m, std::uint64_t seed, const Rational& lo, const Rational& hi,
                                        int steps) {
  if (n < 1) throw ParameterOutOfRange("n must be >= 1");
  if (m < 2) throw ParameterOutOfRange("m must be >= 2");
  if (steps < 1) throw ParameterOutOfRange("steps must be >= 1");
  if (hi < lo) throw ParameterOutOfRange("payoff range is empty");
  GameDocument doc;
  doc.game.actions.assign(static_cast<std::size_t>(n), m);
  const auto edges = pruefer_tree(n, seed);
  // Payoffs use an independent stream so the tree shape does not shift them.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto matrix = [&] {
    std::vector<Rational> out;
    for (int k = 0; k < m * m; ++k) {
      const auto step = static_cast<long>(draw(rng, static_cast<std::uint64_t>(steps) + 1));
      Rational v = lo + (hi - lo) * Rational(step, steps);
      v.canonicalize();
      out.push_back(v);
    }
    return out;
  };
  for (auto [u, v] : edges) {
    doc.game.cliques.push_back(edge(u, v, matrix()));
    doc.game.cliques.push_back(edge(v, u, matrix()));
  }
  doc.metadata = {{"generator", "random-tree"},
                  {"seed", seed},
                  {"n", n},
                  {"m", m},
                  {"payoff_range", {to_string(lo), to_string(hi)}},
                  {"steps", steps}};
  return doc;
}

GameDocument gen_example_player1(const Rational& b, const Rational& c, const Rational& gamma) {
  if (b <= 0) throw ParameterOutOfRange("b must be positive");
  if (c <= 0) throw ParameterOutOfRange("c must be positive");
  if (gamma <= 0 || gamma >= Rational(1, 3)) throw ParameterOutOfRange("gamma must lie in (0, 1/3)");
  GameDocument doc;
  doc.game.actions.assign(4, 2);
  const std::vector<Rational> m12{1 + 2 * b, 1 + 2 * b - gamma, -2 * c + gamma, -2 * c};
  const std::vector<Rational> m13{-b, -b - gamma, c + gamma, c};
  doc.game.cliques.push_back(edge(0, 1, m12));
  doc.game.cliques.push_back(edge(0, 2, m13));
  doc.game.cliques.push_back(edge(0, 3, m13));
  for (PlayerId j = 1; j <= 3; ++j) doc.game.cliques.push_back(edge(j, 0, std::vector<Rational>(4, 0)));
  for (LocalClique& cl : doc.game.cliques) {
    for (Rational& x : cl.payoffs) x.canonicalize();
  }
  doc.metadata = {{"generator", "example1"}, {"b", to_string(b)}, {"c", to_string(c)}, {"gamma", to_string(gamma)}};
  return doc;
}

GameDocument gen_random_tree_normalform(int n, int m, std::uint64_t seed, int max_degree, int steps) {
  if (n < 1) throw ParameterOutOfRange("n must be >= 1");
  if (m < 2) throw ParameterOutOfRange("m must be >= 2");
  if (max_degree < 1 || (n > 2 && max_degree < 2)) throw ParameterOutOfRange("max_degree too small for a tree");
  if (steps < 1) throw ParameterOutOfRange("steps must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int v = 1; v < n; ++v) {
    std::vector<int> open;
    for (int u = 0; u < v; ++u) {
      if (static_cast<int>(adj[static_cast<std::size_t>(u)].size()) < max_degree) open.push_back(u);
    }
    const int u = open[static_cast<std::size_t>(draw(rng, open.size()))];
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  GameDocument doc;
  doc.game.actions.assign(static_cast<std::size_t>(n), m);
  for (int i = 0; i < n; ++i) {
    LocalClique c;
    c.owner = i;
    c.members.push_back(i);
    auto nb = adj[static_cast<std::size_t>(i)];
    std::sort(nb.begin(), nb.end());
    c.members.insert(c.members.end(), nb.begin(), nb.end());
    std::size_t volume = 1;
    for (std::size_t k = 0; k < c.members.size(); ++k) volume *= static_cast<std::size_t>(m);
    for (std::size_t k = 0; k < volume; ++k) {
      Rational v(static_cast<long>(draw(rng, static_cast<std::uint64_t>(steps) + 1)), steps);
      v.canonicalize();
      c.payoffs.push_back(v);
    }
    doc.game.cliques.push_back(std::move(c));
  }
  doc.metadata = {{"generator", "random-tree-normalform"}, {"seed", seed}, {"n", n}, {"m", m}, {"max_degree", max_degree}};
  return doc;
}

}  // namespace gmhg
