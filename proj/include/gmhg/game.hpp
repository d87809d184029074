#pragma once

// Graphical multi-hypermatrix games (GMhGs): each player's payoff is a sum of
// local-clique payoff hypermatrices. Polymatrix games (all cliques are pairs)
// and normal-form graphical games (one clique per player, equal to its
// neighborhood) are special cases.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gmhg/rational.hpp"

namespace gmhg {

using PlayerId = int;

struct LocalClique {
  PlayerId owner = 0;
  // members[0] == owner; no duplicates.
  std::vector<PlayerId> members;
  // Dense hypermatrix, row-major in member order (last member varies fastest).
  std::vector<Rational> payoffs;
};

struct GameDefinition {
  std::vector<int> actions;  // |A_i| per player, indexed by player id
  std::vector<LocalClique> cliques;

  int num_players() const { return static_cast<int>(actions.size()); }
};

struct StructureStats {
  std::vector<std::vector<int>> cliques_of;  // indices into game.cliques, input order
  std::vector<int> kappa_i;                  // |C_i|
  int kappa = 0;
  std::vector<int> kappa_prime_i;            // largest clique size of i (0 if none)
  int kappa_prime = 0;
  std::vector<std::vector<PlayerId>> neighborhoods;  // N_i, sorted, always contains i
  std::vector<std::vector<PlayerId>> affected;       // players j != i with i in N_j
  std::vector<int> k_i;
  int k = 0;
  bool polymatrix = false;   // every clique has exactly two members
  bool normal_form = false;  // every player owns exactly one clique, equal to N_i
};

// Throws MalformedGame naming the first violated invariant.
StructureStats validate_game(const GameDefinition& game);

struct CliqueStats {
  Rational u;
  Rational l;
  Rational range;
};

CliqueStats clique_stats(const LocalClique& clique);

// Row-major offset of a joint member action inside a clique hypermatrix.
std::size_t clique_offset(const GameDefinition& game, const LocalClique& clique,
                          std::span<const int> member_actions);

// M'_i(a) = sum over i's cliques. `joint_action` is indexed by player id; only
// entries of N_i are read.
Rational exact_local_payoff(const GameDefinition& game, const StructureStats& stats, PlayerId i,
                            std::span<const int> joint_action);

// One argument per clique member: either a fixed action or a mixed strategy.
struct CliqueArgument {
  int action = -1;
  std::vector<Rational> mixed;

  static CliqueArgument fixed(int a) { return {a, {}}; }
  static CliqueArgument distribution(std::vector<Rational> p) { return {-1, std::move(p)}; }
};

// Expected clique payoff with the fixed members pinned and the others mixing
// independently. Throws UnnormalizedStrategy / DimensionMismatch.
Rational exact_expected_clique_payoff(const GameDefinition& game, const LocalClique& clique,
                                      std::span<const CliqueArgument> per_member);

// (u_i, l_i) for a polymatrix player. Throws NotPolymatrix.
std::pair<Rational, Rational> polymatrix_bounds(const GameDefinition& game,
                                                const StructureStats& stats, PlayerId i);

struct NormalizedGame {
  GameDefinition game;
  std::vector<bool> degenerate;  // constant-payoff players, zeroed
  std::vector<Rational> scale;   // u_i - l_i (1 for degenerate players)
  std::vector<Rational> shift;   // l_i
};

// Affine per-player rescaling so that min M'_i = 0 and max M'_i = 1 exactly.
// The shift l_i is spread evenly over i's edge matrices.
NormalizedGame normalize_polymatrix(const GameDefinition& game);

// Same for normal-form graphical games: each local table becomes (M - l) / R.
NormalizedGame normalize_normal_form(const GameDefinition& game);

// Rewrites a polymatrix game as a normal-form graphical game whose single
// clique per player covers {i} plus every player it shares an edge with.
GameDefinition polymatrix_to_normal_form(const GameDefinition& game);

// Polymatrix normalization when applicable, normal-form otherwise. General
// GMhGs are taken as given.
NormalizedGame normalize_game(const GameDefinition& game);

// Rooted orientation of the owner-member interaction graph. Components not
// containing `root` are rooted at their smallest id.
struct RootedTree {
  PlayerId root = 0;
  std::vector<PlayerId> parent;                 // -1 for component roots
  std::vector<std::vector<PlayerId>> children;  // ascending id
  std::vector<PlayerId> preorder;               // parents before children

  bool is_root(PlayerId i) const { return parent[static_cast<std::size_t>(i)] < 0; }
};

// Throws NotTree when the interaction graph has a cycle.
RootedTree build_rooted_tree(const GameDefinition& game, const StructureStats& stats, PlayerId root = 0);

}  // namespace gmhg
