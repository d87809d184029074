#pragma once

// Probability grids and payoff lattices. Probabilities are integer numerators
// over a per-player denominator s_i; payoff values are integer multiples of a
// per-player spacing tau'_i, so sums of lattice points stay on the lattice.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gmhg/game.hpp"
#include "gmhg/rational.hpp"

namespace gmhg {

struct ProbabilityGrid {
  int s = 1;

  int points() const { return s + 1; }
  Rational tau() const { return Rational(1, s); }
};

struct PayoffLattice {
  Rational tau = 1;
  std::int64_t lo_index = 0;
  std::int64_t hi_index = 0;

  Rational value(std::int64_t k) const { return tau * Rational(static_cast<long>(k)); }
  std::int64_t points() const { return hi_index - lo_index + 1; }
  // s'_i: number of lattice intervals covered.
  std::int64_t intervals() const { return hi_index - lo_index; }
};

enum class Variant { simple, refined };
enum class SlackMode { proven, literal };

const char* to_string(Variant v);
const char* to_string(SlackMode m);

struct PlayerPlan {
  ProbabilityGrid grid;
  PayoffLattice lattice;
  Rational tau_nominal;          // spacing demanded by the sizing rule
  bool indifferent = false;      // no payoff spread: any strategy is a best response
  std::vector<int> clique_order; // fixed order C_i^1..C_i^kappa_i (indices into game.cliques)
};

struct DiscretizationPlan {
  Rational epsilon;         // requested
  Rational sizing_epsilon;  // min(epsilon, admissibility bound)
  bool epsilon_clamped = false;
  Variant variant = Variant::simple;
  std::vector<PlayerPlan> players;

  const PlayerPlan& at(PlayerId i) const { return players[static_cast<std::size_t>(i)]; }
};

struct GridMixedStrategy {
  PlayerId player = 0;
  int denominator = 1;
  std::vector<int> numerators;

  std::vector<Rational> probabilities() const;
  friend bool operator==(const GridMixedStrategy&, const GridMixedStrategy&) = default;
  friend auto operator<=>(const GridMixedStrategy&, const GridMixedStrategy&) = default;
};

// One on-grid strategy per player, indexed by player id.
using GridProfile = std::vector<GridMixedStrategy>;
// Exact mixed strategies, one distribution per player.
using MixedProfile = std::vector<std::vector<Rational>>;

MixedProfile to_mixed(const GridProfile& profile);

// 2 * min_i sum_C R_{i,C}(|C|-1) / (kappa'_i - 1) over players where the ratio
// is defined; zero-spread players and singleton-only players impose no bound.
// Returns nullopt when no player imposes a bound.
std::optional<Rational> epsilon_admissibility_bound(const GameDefinition& game, const StructureStats& stats);

// s_i = ceil(6 |A_i| max_{j affected by i} sum_{C in C_j} R_{j,C}(|C|-1) / eps), at least 1.
int probability_grid_size(const GameDefinition& game, const StructureStats& stats, PlayerId i,
                          const Rational& sizing_epsilon);

// Clique orders default to the input order.
DiscretizationPlan plan_simple(const GameDefinition& game, const StructureStats& stats, const Rational& epsilon,
                               const std::vector<std::vector<int>>& clique_orders = {});

DiscretizationPlan plan_refined(const GameDefinition& game, const StructureStats& stats, const Rational& epsilon,
                                const std::vector<std::vector<int>>& clique_orders = {});

// Best-response slack in lattice value units, for the plan's variant.
Rational best_response_slack(const GameDefinition& game, const DiscretizationPlan& plan, PlayerId i,
                             SlackMode mode = SlackMode::proven);

// floor(s_i * slack / tau'_i): the integer budget used when both sides of a
// best-response inequality are scaled by s_i and expressed in lattice steps.
std::int64_t best_response_budget(const GameDefinition& game, const DiscretizationPlan& plan, PlayerId i,
                                  SlackMode mode = SlackMode::proven);

struct Claim1Row {
  PlayerId player = 0;
  int s = 0;
  std::int64_t s_prime = 0;
  Rational s_ratio;        // s_i * eps / (m kappa' kappa)
  Rational s_prime_ratio;  // s'_i * eps / kappa^2
  bool s_within_bound = false;
  bool s_prime_within_bound = false;
};

struct Claim1Report {
  Rational s_constant;        // 6 * range_bound
  Rational s_prime_constant;  // derived from the lattice construction
  std::vector<Claim1Row> rows;
  bool all_within_bounds = false;
};

// Checks the O(m kappa' kappa / eps) and O(kappa^2 / eps) size bounds with the
// explicit constants implied by the sizing formulas, given that every clique
// range and every |entry| is at most `range_bound`.
Claim1Report claim1_bounds(const GameDefinition& game, const StructureStats& stats, const DiscretizationPlan& plan,
                           const Rational& range_bound);

struct Projection {
  std::int64_t index = 0;
  bool clamped = false;
};

// Nearest lattice point; exact halves go to the larger value. Values outside
// the lattice are clamped to the nearest endpoint and flagged.
Projection project(const Rational& v, const PayoffLattice& lattice);

// All compositions of s into m non-negative parts, lexicographic order.
std::vector<GridMixedStrategy> enumerate_grid_strategies(int m, int s, PlayerId player = 0);

// Lexicographically ordered strategy set of one player with O(m) ranking.
class StrategySpace {
 public:
  StrategySpace(int actions, int denominator);

  int actions() const { return actions_; }
  int denominator() const { return s_; }
  std::size_t size() const { return count_; }
  std::span<const int> numerators(std::size_t index) const {
    return {flat_.data() + index * static_cast<std::size_t>(actions_), static_cast<std::size_t>(actions_)};
  }
  // Rank of a composition; the numerators must sum to the denominator.
  std::size_t index_of(std::span<const int> numerators) const;

 private:
  int actions_;
  int s_;
  std::size_t count_;
  std::vector<int> flat_;
};

// Number of compositions C(s+m-1, m-1), saturating at UINT64_MAX.
std::uint64_t composition_count(int m, int s);

// l_inf-nearest grid strategy to an exact distribution; among equally near
// candidates the lexicographically largest numerator vector wins.
std::vector<int> round_to_grid(std::span<const Rational> p, int s);

}  // namespace gmhg
