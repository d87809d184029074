#pragma once

// The game-induced constraint satisfaction problem in both variants. A small
// backtracking solver serves as an oracle; exact equilibria can be rounded
// straight into satisfying assignments.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gmhg/discretize.hpp"
#include "gmhg/game.hpp"

namespace gmhg {

enum class VarKind { probability, partial_sum, partial_expectation };
enum class ConstraintKind { normalization, partial_sum, partial_expectation, best_response };

const char* to_string(VarKind kind);
const char* to_string(ConstraintKind kind);

struct CSPVariable {
  VarKind kind = VarKind::probability;
  PlayerId player = 0;
  int clique = -1;            // game clique index (S and E variables)
  int position = 0;           // l (1-based) for S, t for E
  int action = -1;            // a_i for p and S
  std::vector<int> residual;  // E: joint action over the not yet eliminated members, owner first
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::string name;
};

struct CSPConstraint {
  ConstraintKind kind = ConstraintKind::normalization;
  PlayerId player = 0;
  std::vector<int> scope;
  // Position in `scope` of the variable this constraint determines from the
  // others, or -1 when it is a pure check.
  int defines = -1;
  std::function<bool(std::span<const std::int64_t>)> holds;
  // Value of scope[defines] given the others (that slot is ignored).
  std::function<std::int64_t(std::span<const std::int64_t>)> infer;
  std::string label;
};

inline constexpr std::int64_t kUnassigned = std::numeric_limits<std::int64_t>::min();

struct CSPAssignment {
  std::vector<std::int64_t> values;  // per variable; kUnassigned when open
};

struct CSPInstance {
  GameDefinition game;
  DiscretizationPlan plan;
  Rational epsilon;
  Variant variant = Variant::simple;
  SlackMode slack = SlackMode::proven;
  PlayerId root = 0;
  std::vector<std::vector<int>> clique_order;  // per player
  std::vector<CSPVariable> variables;          // declared order
  std::vector<CSPConstraint> constraints;
  std::vector<std::vector<int>> prob_vars;     // [player][action]
  std::vector<std::vector<std::vector<int>>> sum_vars;  // [player][l-1][action]

  std::size_t count(VarKind kind) const;
  std::size_t count(ConstraintKind kind) const;
};

// C_i^1..C_i^kappa_i. On a tree: singleton cliques, then edges to children in
// children order, then the parent edge, then anything else in input order.
// Without a tree the input order is kept.
std::vector<int> order_cliques(const GameDefinition& game, const StructureStats& stats, const RootedTree* tree,
                               PlayerId i);
std::vector<std::vector<int>> order_all_cliques(const GameDefinition& game, const StructureStats& stats,
                                                const RootedTree* tree);

// Throws PlanMismatch when the plan does not match the request.
CSPInstance build_csp(const GameDefinition& game, const DiscretizationPlan& plan, const Rational& epsilon,
                      Variant variant, SlackMode slack = SlackMode::proven, PlayerId root = 0);

// Rounds every strategy to its l_inf-nearest grid point, then fills the
// partial sums and expectations by their defining recursions.
CSPAssignment round_msne_to_assignment(const CSPInstance& csp, const MixedProfile& profile);

struct CheckResult {
  bool satisfied = false;
  int violated = -1;  // constraint index, or -1 for a domain violation / success
  std::string reason;
};

// Normalization constraints are evaluated first so a bad strategy is reported
// as such rather than through a dependent constraint.
CheckResult check_assignment(const CSPInstance& csp, const CSPAssignment& assignment);

enum class SearchStatus { satisfied, infeasible, limit_exceeded };
const char* to_string(SearchStatus status);

struct SolveResult {
  SearchStatus status = SearchStatus::infeasible;
  CSPAssignment assignment;
  std::uint64_t nodes = 0;
};

// Depth-first search in declared variable order. Functional constraints fix
// their defined variable and are forward-checked as soon as only that
// variable is open.
SolveResult solve_backtracking(const CSPInstance& csp, std::uint64_t node_limit);

struct EnumerationResult {
  std::vector<CSPAssignment> solutions;
  bool complete = false;  // false if the node limit or solution cap cut the search
  std::uint64_t nodes = 0;
};

EnumerationResult enumerate_solutions(const CSPInstance& csp, std::uint64_t node_limit,
                                      std::uint64_t max_solutions = std::numeric_limits<std::uint64_t>::max());

GridProfile profile_from_assignment(const CSPInstance& csp, const CSPAssignment& assignment);

}  // namespace gmhg
