#pragma once

// Exact-arithmetic certification, independent of the solvers.

#include <cstdint>
#include <vector>

#include "gmhg/discretize.hpp"
#include "gmhg/game.hpp"

namespace gmhg {

struct RegretReport {
  std::vector<Rational> regret;   // per player, >= 0
  std::vector<Rational> payoff;   // expected payoff at the profile
  std::vector<Rational> best;     // best pure-deviation payoff
  Rational epsilon;
  std::vector<bool> pass;         // regret(i) <= epsilon
  bool all_pass = false;

  Rational max_regret() const;
};

// Throws DimensionMismatch / UnnormalizedStrategy on a malformed profile.
RegretReport exact_regret(const GameDefinition& game, const MixedProfile& profile, const Rational& epsilon = 0);
RegretReport exact_regret(const GameDefinition& game, const GridProfile& profile, const Rational& epsilon = 0);

bool is_eps_msne(const GameDefinition& game, const MixedProfile& profile, const Rational& epsilon);
bool is_eps_msne(const GameDefinition& game, const GridProfile& profile, const Rational& epsilon);

inline constexpr std::uint64_t kDefaultBruteForceCap = 1'000'000;

// Every joint grid profile (denominators s[i]) whose exact regret is at most
// epsilon for all players, in lexicographic order (player 0 slowest).
// Throws TooLarge when the joint grid exceeds `cap`.
std::vector<GridProfile> brute_force_grid_equilibria(const GameDefinition& game, const std::vector<int>& s,
                                                     const Rational& epsilon,
                                                     std::uint64_t cap = kDefaultBruteForceCap);
std::vector<GridProfile> brute_force_grid_equilibria(const GameDefinition& game, const DiscretizationPlan& plan,
                                                     const Rational& epsilon,
                                                     std::uint64_t cap = kDefaultBruteForceCap);

// Joint grid size prod_i C(s_i + m_i - 1, m_i - 1), saturating.
std::uint64_t joint_grid_size(const GameDefinition& game, const std::vector<int>& s);

}  // namespace gmhg
