#include "gmhg/game.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "gmhg/errors.hpp"

namespace gmhg {

namespace {

std::string clique_label(std::size_t index) { return "clique " + std::to_string(index); }

std::vector<std::size_t> member_dims(const GameDefinition& game, const LocalClique& clique) {
  std::vector<std::size_t> dims;
  dims.reserve(clique.members.size());
  for (PlayerId j : clique.members) dims.push_back(static_cast<std::size_t>(game.actions[static_cast<std::size_t>(j)]));
  return dims;
}

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) p *= d;
  return p;
}

// Advances a mixed-radix counter (last digit fastest). Returns false on wrap.
bool next_joint(std::vector<int>& digits, const std::vector<std::size_t>& dims) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (static_cast<std::size_t>(++digits[k]) < dims[k]) return true;
    digits[k] = 0;
  }
  return false;
}

}  // namespace

StructureStats validate_game(const GameDefinition& game) {
  const int n = game.num_players();
  if (n < 1) throw MalformedGame("game has no players");
  for (int i = 0; i < n; ++i) {
    if (game.actions[static_cast<std::size_t>(i)] < 1) {
      throw MalformedGame("player " + std::to_string(i) + " has no actions");
    }
  }

  StructureStats stats;
  stats.cliques_of.assign(static_cast<std::size_t>(n), {});
  std::set<std::pair<PlayerId, std::vector<PlayerId>>> seen;
  for (std::size_t c = 0; c < game.cliques.size(); ++c) {
    const LocalClique& clique = game.cliques[c];
    if (clique.owner < 0 || clique.owner >= n) throw MalformedGame(clique_label(c) + " has invalid owner");
    if (clique.members.empty() || clique.members.front() != clique.owner) {
      throw MalformedGame(clique_label(c) + ": owner must be the first member");
    }
    std::vector<PlayerId> sorted = clique.members;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw MalformedGame(clique_label(c) + " has duplicate members");
    }
    if (sorted.front() < 0 || sorted.back() >= n) throw MalformedGame(clique_label(c) + " references an unknown player");
    if (!seen.emplace(clique.owner, sorted).second) {
      throw MalformedGame(clique_label(c) + " repeats a member set already owned by player " +
                          std::to_string(clique.owner));
    }
    const std::size_t expected = product(member_dims(game, clique));
    if (clique.payoffs.size() != expected) {
      throw MalformedGame(clique_label(c) + " has " + std::to_string(clique.payoffs.size()) +
                          " payoff entries, expected " + std::to_string(expected));
    }
    stats.cliques_of[static_cast<std::size_t>(clique.owner)].push_back(static_cast<int>(c));
  }

  stats.kappa_i.assign(static_cast<std::size_t>(n), 0);
  stats.kappa_prime_i.assign(static_cast<std::size_t>(n), 0);
  stats.neighborhoods.assign(static_cast<std::size_t>(n), {});
  stats.affected.assign(static_cast<std::size_t>(n), {});
  stats.k_i.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    std::set<PlayerId> hood{i};
    for (int c : stats.cliques_of[ui]) {
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
      hood.insert(clique.members.begin(), clique.members.end());
      stats.kappa_prime_i[ui] = std::max(stats.kappa_prime_i[ui], static_cast<int>(clique.members.size()));
    }
    stats.kappa_i[ui] = static_cast<int>(stats.cliques_of[ui].size());
    stats.neighborhoods[ui].assign(hood.begin(), hood.end());
    stats.k_i[ui] = static_cast<int>(hood.size());
    stats.kappa = std::max(stats.kappa, stats.kappa_i[ui]);
    stats.kappa_prime = std::max(stats.kappa_prime, stats.kappa_prime_i[ui]);
    stats.k = std::max(stats.k, stats.k_i[ui]);
  }
  for (int j = 0; j < n; ++j) {
    for (PlayerId i : stats.neighborhoods[static_cast<std::size_t>(j)]) {
      if (i != j) stats.affected[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  for (auto& a : stats.affected) std::sort(a.begin(), a.end());

  stats.polymatrix = std::all_of(game.cliques.begin(), game.cliques.end(),
                                 [](const LocalClique& c) { return c.members.size() == 2; });
  stats.normal_form = std::all_of(stats.kappa_i.begin(), stats.kappa_i.end(), [](int k) { return k == 1; });
  return stats;
}

CliqueStats clique_stats(const LocalClique& clique) {
  CliqueStats s;
  if (clique.payoffs.empty()) return s;
  s.u = *std::max_element(clique.payoffs.begin(), clique.payoffs.end());
  s.l = *std::min_element(clique.payoffs.begin(), clique.payoffs.end());
  s.range = s.u - s.l;
  return s;
}

std::size_t clique_offset(const GameDefinition& game, const LocalClique& clique,
                          std::span<const int> member_actions) {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < clique.members.size(); ++k) {
    offset = offset * static_cast<std::size_t>(game.actions[static_cast<std::size_t>(clique.members[k])]) +
             static_cast<std::size_t>(member_actions[k]);
  }
  return offset;
}

Rational exact_local_payoff(const GameDefinition& game, const StructureStats& stats, PlayerId i,
                            std::span<const int> joint_action) {
  if (joint_action.size() != game.actions.size()) {
    throw DimensionMismatch("joint action must have one entry per player");
  }
  Rational total = 0;
  std::vector<int> local;
  for (int c : stats.cliques_of[static_cast<std::size_t>(i)]) {
    const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
    local.clear();
    for (PlayerId j : clique.members) {
      const int a = joint_action[static_cast<std::size_t>(j)];
      if (a < 0 || a >= game.actions[static_cast<std::size_t>(j)]) {
        throw DimensionMismatch("action out of range for player " + std::to_string(j));
      }
      local.push_back(a);
    }
    total += clique.payoffs[clique_offset(game, clique, local)];
  }
  return total;
}

Rational exact_expected_clique_payoff(const GameDefinition& game, const LocalClique& clique,
                                      std::span<const CliqueArgument> per_member) {
  if (per_member.size() != clique.members.size()) {
    throw DimensionMismatch("need one argument per clique member");
  }
  const std::vector<std::size_t> dims = member_dims(game, clique);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const CliqueArgument& arg = per_member[k];
    if (arg.action >= 0) {
      if (static_cast<std::size_t>(arg.action) >= dims[k]) throw DimensionMismatch("fixed action out of range");
      continue;
    }
    if (arg.mixed.size() != dims[k]) throw DimensionMismatch("mixed strategy has wrong length");
    Rational sum = 0;
    for (const Rational& p : arg.mixed) {
      if (p < 0) throw UnnormalizedStrategy("negative probability");
      sum += p;
    }
    if (sum != 1) throw UnnormalizedStrategy("probabilities sum to " + to_string(sum));
  }

  // Only the mixed members are enumerated; fixed ones stay pinned.
  std::vector<int> digits(dims.size(), 0);
  std::vector<std::size_t> free_dims(dims.size(), 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (per_member[k].action >= 0) {
      digits[k] = per_member[k].action;
    } else {
      free_dims[k] = dims[k];
    }
  }
  std::vector<int> counter(dims.size(), 0);
  Rational total = 0;
  Rational weight;
  do {
    weight = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (per_member[k].action >= 0) continue;
      digits[k] = counter[k];
      weight *= per_member[k].mixed[static_cast<std::size_t>(counter[k])];
      if (weight == 0) break;
    }
    if (weight != 0) total += weight * clique.payoffs[clique_offset(game, clique, digits)];
  } while (next_joint(counter, free_dims));
  return total;
}

std::pair<Rational, Rational> polymatrix_bounds(const GameDefinition& game, const StructureStats& stats,
                                                PlayerId i) {
  if (!stats.polymatrix) throw NotPolymatrix();
  const auto& mine = stats.cliques_of[static_cast<std::size_t>(i)];
  if (mine.empty()) return {Rational(0), Rational(0)};
  const int mi = game.actions[static_cast<std::size_t>(i)];
  std::optional<Rational> best_max, best_min;
  for (int a = 0; a < mi; ++a) {
    Rational hi = 0, lo = 0;
    for (int c : mine) {
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
      const int mj = game.actions[static_cast<std::size_t>(clique.members[1])];
      const auto row = static_cast<std::size_t>(a) * static_cast<std::size_t>(mj);
      auto first = clique.payoffs.begin() + static_cast<std::ptrdiff_t>(row);
      auto last = first + mj;
      hi += *std::max_element(first, last);
      lo += *std::min_element(first, last);
    }
    if (!best_max || hi > *best_max) best_max = hi;
    if (!best_min || lo < *best_min) best_min = lo;
  }
  return {*best_max, *best_min};
}

NormalizedGame normalize_polymatrix(const GameDefinition& game) {
  const StructureStats stats = validate_game(game);
  if (!stats.polymatrix) throw NotPolymatrix();
  const int n = game.num_players();
  NormalizedGame out;
  out.game = game;
  out.degenerate.assign(static_cast<std::size_t>(n), false);
  out.scale.assign(static_cast<std::size_t>(n), Rational(1));
  out.shift.assign(static_cast<std::size_t>(n), Rational(0));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto [u, l] = polymatrix_bounds(game, stats, i);
    out.shift[ui] = l;
    const auto& mine = stats.cliques_of[ui];
    if (u == l) {
      out.degenerate[ui] = true;
      for (int c : mine) {
        for (Rational& x : out.game.cliques[static_cast<std::size_t>(c)].payoffs) x = 0;
      }
      continue;
    }
    const Rational range = u - l;
    out.scale[ui] = range;
    const Rational per_edge_shift = l / Rational(static_cast<long>(mine.size()));
    for (int c : mine) {
      for (Rational& x : out.game.cliques[static_cast<std::size_t>(c)].payoffs) {
        x = (x - per_edge_shift) / range;
      }
    }
  }
  return out;
}

NormalizedGame normalize_normal_form(const GameDefinition& game) {
  const StructureStats stats = validate_game(game);
  if (!stats.normal_form) throw MalformedGame("normal-form normalization needs exactly one clique per player");
  const int n = game.num_players();
  NormalizedGame out;
  out.game = game;
  out.degenerate.assign(static_cast<std::size_t>(n), false);
  out.scale.assign(static_cast<std::size_t>(n), Rational(1));
  out.shift.assign(static_cast<std::size_t>(n), Rational(0));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    LocalClique& clique = out.game.cliques[static_cast<std::size_t>(stats.cliques_of[ui].front())];
    const CliqueStats cs = clique_stats(clique);
    out.shift[ui] = cs.l;
    if (cs.range == 0) {
      out.degenerate[ui] = true;
      for (Rational& x : clique.payoffs) x = 0;
      continue;
    }
    out.scale[ui] = cs.range;
    for (Rational& x : clique.payoffs) x = (x - cs.l) / cs.range;
  }
  return out;
}

NormalizedGame normalize_game(const GameDefinition& game) {
  const StructureStats stats = validate_game(game);
  if (stats.polymatrix) return normalize_polymatrix(game);
  if (stats.normal_form) return normalize_normal_form(game);
  const auto n = static_cast<std::size_t>(game.num_players());
  return {game, std::vector<bool>(n, false), std::vector<Rational>(n, Rational(1)), std::vector<Rational>(n, Rational(0))};
}

GameDefinition polymatrix_to_normal_form(const GameDefinition& game) {
  const StructureStats stats = validate_game(game);
  if (!stats.polymatrix) throw NotPolymatrix();
  GameDefinition out;
  out.actions = game.actions;
  for (int i = 0; i < game.num_players(); ++i) {
    const auto& mine = stats.cliques_of[static_cast<std::size_t>(i)];
    LocalClique merged;
    merged.owner = i;
    merged.members.push_back(i);
    std::vector<PlayerId> partners;
    for (int c : mine) partners.push_back(game.cliques[static_cast<std::size_t>(c)].members[1]);
    std::sort(partners.begin(), partners.end());
    merged.members.insert(merged.members.end(), partners.begin(), partners.end());
    std::vector<std::size_t> dims = member_dims(game, merged);
    merged.payoffs.assign(product(dims), Rational(0));
    std::vector<int> digits(dims.size(), 0);
    std::size_t offset = 0;
    do {
      Rational v = 0;
      for (int c : mine) {
        const LocalClique& edge = game.cliques[static_cast<std::size_t>(c)];
        const auto pos = std::lower_bound(partners.begin(), partners.end(), edge.members[1]) - partners.begin();
        const int pair[2] = {digits[0], digits[static_cast<std::size_t>(pos) + 1]};
        v += edge.payoffs[clique_offset(game, edge, pair)];
      }
      merged.payoffs[offset++] = v;
    } while (next_joint(digits, dims));
    out.cliques.push_back(std::move(merged));
  }
  return out;
}

RootedTree build_rooted_tree(const GameDefinition& game, const StructureStats& stats, PlayerId root) {
  const int n = game.num_players();
  if (root < 0 || root >= n) throw NotTree("root " + std::to_string(root) + " is not a player");
  std::vector<std::set<PlayerId>> adj(static_cast<std::size_t>(n));
  for (const LocalClique& clique : game.cliques) {
    for (std::size_t k = 1; k < clique.members.size(); ++k) {
      adj[static_cast<std::size_t>(clique.owner)].insert(clique.members[k]);
      adj[static_cast<std::size_t>(clique.members[k])].insert(clique.owner);
    }
  }
  (void)stats;
  RootedTree tree;
  tree.root = root;
  tree.parent.assign(static_cast<std::size_t>(n), -1);
  tree.children.assign(static_cast<std::size_t>(n), {});
  std::vector<bool> visited(static_cast<std::size_t>(n), false);

  auto grow = [&](PlayerId start) {
    std::deque<PlayerId> queue{start};
    visited[static_cast<std::size_t>(start)] = true;
    std::size_t nodes = 0, degree_sum = 0;
    std::vector<PlayerId> order;
    while (!queue.empty()) {
      PlayerId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      ++nodes;
      degree_sum += adj[static_cast<std::size_t>(v)].size();
      for (PlayerId w : adj[static_cast<std::size_t>(v)]) {
        if (visited[static_cast<std::size_t>(w)]) continue;
        visited[static_cast<std::size_t>(w)] = true;
        tree.parent[static_cast<std::size_t>(w)] = v;
        tree.children[static_cast<std::size_t>(v)].push_back(w);
        queue.push_back(w);
      }
    }
    if (degree_sum / 2 != nodes - 1) {
      throw NotTree("component of player " + std::to_string(start) + " contains a cycle");
    }
    // Depth-first preorder so each subtree is contiguous.
    std::vector<PlayerId> stack{start};
    while (!stack.empty()) {
      PlayerId v = stack.back();
      stack.pop_back();
      tree.preorder.push_back(v);
      const auto& ch = tree.children[static_cast<std::size_t>(v)];
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
  };

  grow(root);
  for (PlayerId v = 0; v < n; ++v) {
    if (!visited[static_cast<std::size_t>(v)]) grow(v);
  }
  return tree;
}

}  // namespace gmhg
