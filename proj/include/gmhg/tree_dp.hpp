#pragma once

// Two-pass dynamic programming on a rooted tree. The collection pass sends a
// feasibility message from every node to its parent; the assignment pass
// picks a root strategy and unwinds witnesses downwards.
//
// Polymatrix messages are keyed by "parent classes": parent strategies that
// induce the same projected contribution vector on the child's edge are
// interchangeable for the child, so T_{i->j}(p_i, p_j) is stored once per
// class instead of once per p_j.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "gmhg/discretize.hpp"
#include "gmhg/game.hpp"
#include "gmhg/verify.hpp"

namespace gmhg {

struct SolveOptions {
  SlackMode slack = SlackMode::proven;
  // Run the exact regret check on the returned profile. In proven mode a
  // failed check throws, since it can only mean an implementation bug.
  bool certify = true;
};

struct EquilibriumProfile {
  GridProfile strategies;
  Rational epsilon;
  Variant variant = Variant::simple;
  SlackMode slack = SlackMode::proven;
  PlayerId root = 0;
  std::vector<int> s;                  // grid denominators
  std::vector<std::int64_t> s_prime;   // lattice interval counts
  // Final partial-sum (or last partial-expectation) lattice indices chosen
  // for each player, one per action; empty for players without cliques.
  std::vector<std::vector<std::int64_t>> witnesses;
  std::optional<RegretReport> certificate;
  bool certified = false;
  std::size_t table_bytes = 0;
};

// Row-wise projection of a linear form: round_half_up(sum_b n_b * w_b) for
// integer vectors n. Uses 128-bit integers when the common denominator
// allows and falls back to GMP otherwise.
class LinearProjector {
 public:
  LinearProjector() = default;
  explicit LinearProjector(const std::vector<Rational>& weights);
  std::int64_t operator()(std::span<const int> n) const;

 private:
  bool fast_ = true;
  std::vector<__int128> num_;
  __int128 den_ = 1;
  std::vector<Integer> big_num_;
  Integer big_den_ = 1;
};

class PolymatrixTreeDP {
 public:
  // `game` must be polymatrix with a forest interaction graph; the plan's
  // clique orders must list child edges in tree order and the parent edge last.
  PolymatrixTreeDP(const GameDefinition& game, const RootedTree& tree, const DiscretizationPlan& plan,
                   SlackMode slack = SlackMode::proven);
  ~PolymatrixTreeDP();
  PolymatrixTreeDP(PolymatrixTreeDP&&) noexcept;
  PolymatrixTreeDP& operator=(PolymatrixTreeDP&&) noexcept;

  // Leaves to root. Idempotent.
  void collect();

  const StrategySpace& space(PlayerId i) const;
  std::size_t parent_classes(PlayerId i) const;
  // Class of a parent strategy index as seen by child i (0 for roots).
  std::size_t parent_class_of(PlayerId i, std::size_t parent_strategy) const;
  // T_{i->pa(i)}(p_i, class); for roots the class is 0.
  bool feasible(PlayerId i, std::size_t parent_class, std::size_t strategy) const;
  // The stored message of node i: one bit row per parent class.
  std::vector<std::vector<std::uint64_t>> message(PlayerId i) const;

  // Partial-sum vectors S_{o_l} reachable at node i for strategy p_i after
  // the first `prefix` child cliques (absolute lattice indices).
  std::vector<std::vector<std::int64_t>> reachable_partial_sums(PlayerId i, std::size_t strategy,
                                                                std::size_t prefix) const;

  // First feasible root strategy per component, witnesses unwound with the
  // lexicographically smallest choice. Isolated players get the uniform strategy.
  EquilibriumProfile assign() const;

  // Every profile obtainable by unwinding all witnesses from every feasible
  // root strategy. Throws TooLarge past `cap` profiles.
  std::vector<GridProfile> enumerate_all(std::uint64_t cap = 1'000'000) const;

  std::size_t table_bytes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Normalizes nothing: `game` must already be the scaled game the plan was
// built for. Collection, assignment and (optionally) exact certification.
EquilibriumProfile solve_polymatrix_tree(const GameDefinition& game, const RootedTree& tree,
                                         const DiscretizationPlan& plan, const SolveOptions& options = {});

class NormalFormTreeDP {
 public:
  // `game` must be normal-form (one clique per player) with local payoffs in
  // [0,1] and a forest interaction graph; plan must be the refined plan.
  NormalFormTreeDP(const GameDefinition& game, const RootedTree& tree, const DiscretizationPlan& plan,
                   SlackMode slack = SlackMode::proven);
  ~NormalFormTreeDP();
  NormalFormTreeDP(NormalFormTreeDP&&) noexcept;
  NormalFormTreeDP& operator=(NormalFormTreeDP&&) noexcept;

  void collect();
  const StrategySpace& space(PlayerId i) const;
  // T_{i->pa(i)}(p_i, p_pa); for roots pass parent_strategy = 0.
  bool feasible(PlayerId i, std::size_t strategy, std::size_t parent_strategy) const;
  // Reachable final partial-expectation tables of node i at strategy p_i.
  std::size_t reachable_tables(PlayerId i, std::size_t strategy) const;
  EquilibriumProfile assign() const;
  std::size_t table_bytes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EquilibriumProfile solve_normalform_tree(const GameDefinition& game, const RootedTree& tree,
                                         const DiscretizationPlan& plan, const SolveOptions& options = {});

// High-level entry points that normalize and plan before solving.
struct SolveRequest {
  Rational epsilon;
  Variant variant = Variant::simple;
  SlackMode slack = SlackMode::proven;
  PlayerId root = 0;
  bool certify = true;
};

struct SolveOutcome {
  NormalizedGame normalized;
  DiscretizationPlan plan;
  RootedTree tree;
  EquilibriumProfile profile;
};

// Polymatrix path: normalize_polymatrix, plan with tree clique orders, DP.
SolveOutcome solve_polymatrix(const GameDefinition& game, const SolveRequest& request);
// Normal-form path: accepts polymatrix input (converted) or normal-form input;
// always uses the refined plan, which is what the DP's E-chain needs.
SolveOutcome solve_normalform(const GameDefinition& game, const SolveRequest& request);

// Plan for a normalized polymatrix game with tree-consistent clique orders.
DiscretizationPlan plan_for_tree(const GameDefinition& normalized, const RootedTree& tree, const Rational& epsilon,
                                 Variant variant);

}  // namespace gmhg
