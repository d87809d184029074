#include "gmhg/discretize.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "gmhg/errors.hpp"

namespace gmhg {

const char* to_string(Variant v) { return v == Variant::simple ? "simple" : "refined"; }
const char* to_string(SlackMode m) { return m == SlackMode::proven ? "proven" : "literal"; }

std::vector<Rational> GridMixedStrategy::probabilities() const {
  std::vector<Rational> p;
  p.reserve(numerators.size());
  for (int n : numerators) p.emplace_back(n, denominator);
  for (Rational& x : p) x.canonicalize();
  return p;
}

MixedProfile to_mixed(const GridProfile& profile) {
  MixedProfile out;
  out.reserve(profile.size());
  for (const GridMixedStrategy& g : profile) out.push_back(g.probabilities());
  return out;
}

namespace {

Rational weighted_range_sum(const GameDefinition& game, const StructureStats& stats, PlayerId j) {
  Rational total = 0;
  for (int c : stats.cliques_of[static_cast<std::size_t>(j)]) {
    const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
    total += clique_stats(clique).range * Rational(static_cast<long>(clique.members.size()) - 1);
  }
  return total;
}

Rational range_sum(const GameDefinition& game, const StructureStats& stats, PlayerId i) {
  Rational total = 0;
  for (int c : stats.cliques_of[static_cast<std::size_t>(i)]) total += clique_stats(game.cliques[static_cast<std::size_t>(c)]).range;
  return total;
}

std::vector<int> resolve_order(const StructureStats& stats, const std::vector<std::vector<int>>& orders, PlayerId i) {
  const auto& natural = stats.cliques_of[static_cast<std::size_t>(i)];
  if (orders.empty()) return natural;
  std::vector<int> given = orders.at(static_cast<std::size_t>(i));
  std::vector<int> a = given, b = natural;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw PlanMismatch("clique order of player " + std::to_string(i) + " is not a permutation of its cliques");
  return given;
}

Rational sizing_epsilon_for(const GameDefinition& game, const StructureStats& stats, const Rational& epsilon,
                            bool& clamped) {
  if (epsilon <= 0) throw EpsilonNonpositive();
  clamped = false;
  if (auto bound = epsilon_admissibility_bound(game, stats); bound && epsilon > *bound) {
    clamped = true;
    return *bound;
  }
  return epsilon;
}

}  // namespace

std::optional<Rational> epsilon_admissibility_bound(const GameDefinition& game, const StructureStats& stats) {
  std::optional<Rational> best;
  for (int i = 0; i < game.num_players(); ++i) {
    const int widest = stats.kappa_prime_i[static_cast<std::size_t>(i)];
    if (widest < 2) continue;
    const Rational weighted = weighted_range_sum(game, stats, i);
    if (weighted == 0) continue;
    Rational b = 2 * weighted / Rational(widest - 1);
    if (!best || b < *best) best = b;
  }
  return best;
}

int probability_grid_size(const GameDefinition& game, const StructureStats& stats, PlayerId i,
                          const Rational& sizing_epsilon) {
  Rational worst = 0;
  for (PlayerId j : stats.affected[static_cast<std::size_t>(i)]) {
    worst = std::max(worst, weighted_range_sum(game, stats, j));
  }
  const Rational raw = 6 * Rational(game.actions[static_cast<std::size_t>(i)]) * worst / sizing_epsilon;
  const std::int64_t s = ceil_to_int64(raw);
  if (s > std::numeric_limits<int>::max() / 4) throw TooLarge("probability grid for player " + std::to_string(i));
  return static_cast<int>(std::max<std::int64_t>(1, s));
}

DiscretizationPlan plan_simple(const GameDefinition& game, const StructureStats& stats, const Rational& epsilon,
                               const std::vector<std::vector<int>>& clique_orders) {
  DiscretizationPlan plan;
  plan.epsilon = epsilon;
  plan.sizing_epsilon = sizing_epsilon_for(game, stats, epsilon, plan.epsilon_clamped);
  plan.variant = Variant::simple;
  for (int i = 0; i < game.num_players(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    PlayerPlan pp;
    pp.grid.s = probability_grid_size(game, stats, i, plan.sizing_epsilon);
    pp.clique_order = resolve_order(stats, clique_orders, i);
    const int kappa = std::max(1, stats.kappa_i[ui]);
    pp.tau_nominal = plan.sizing_epsilon / Rational(3 * kappa);
    pp.lattice.tau = pp.tau_nominal;
    // Per-clique outer bounds so that every partial sum of projected clique
    // values stays inside the lattice.
    std::int64_t lo = 0, hi = 0;
    for (int c : stats.cliques_of[ui]) {
      const CliqueStats cs = clique_stats(game.cliques[static_cast<std::size_t>(c)]);
      lo += std::min<std::int64_t>(0, floor_to_int64(cs.l / pp.lattice.tau));
      hi += std::max<std::int64_t>(0, ceil_to_int64(cs.u / pp.lattice.tau));
    }
    pp.indifferent = range_sum(game, stats, i) == 0;
    if (pp.indifferent) hi = std::max(hi, lo + 1);
    pp.lattice.lo_index = lo;
    pp.lattice.hi_index = hi;
    plan.players.push_back(std::move(pp));
  }
  return plan;
}

DiscretizationPlan plan_refined(const GameDefinition& game, const StructureStats& stats, const Rational& epsilon,
                                const std::vector<std::vector<int>>& clique_orders) {
  DiscretizationPlan plan;
  plan.epsilon = epsilon;
  plan.sizing_epsilon = sizing_epsilon_for(game, stats, epsilon, plan.epsilon_clamped);
  plan.variant = Variant::refined;
  for (int i = 0; i < game.num_players(); ++i) {
    PlayerPlan pp;
    pp.grid.s = probability_grid_size(game, stats, i, plan.sizing_epsilon);
    pp.clique_order = resolve_order(stats, clique_orders, i);
    const long kappa = static_cast<long>(pp.clique_order.size());
    Rational weight = 0;
    for (long l = 1; l <= kappa; ++l) {
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(pp.clique_order[static_cast<std::size_t>(l - 1)])];
      weight += clique_stats(clique).range * Rational(static_cast<long>(clique.members.size()) + kappa - l);
    }
    pp.lattice.lo_index = 0;
    if (weight == 0) {
      pp.indifferent = true;
      pp.tau_nominal = 1;
      pp.lattice.tau = 1;
      pp.lattice.hi_index = 1;
    } else {
      pp.tau_nominal = plan.sizing_epsilon / (3 * weight);
      const std::int64_t s_prime = ceil_to_int64(1 / pp.tau_nominal);
      pp.lattice.tau = Rational(1, static_cast<unsigned long>(s_prime));
      pp.lattice.hi_index = s_prime;
    }
    plan.players.push_back(std::move(pp));
  }
  return plan;
}

Rational best_response_slack(const GameDefinition& game, const DiscretizationPlan& plan, PlayerId i,
                             SlackMode mode) {
  const Rational base = mode == SlackMode::proven ? Rational(2, 3) * plan.sizing_epsilon : plan.sizing_epsilon;
  if (plan.variant == Variant::simple) return base;
  if (plan.at(i).indifferent) return 1;
  const StructureStats stats = validate_game(game);
  return base / range_sum(game, stats, i);
}

std::int64_t best_response_budget(const GameDefinition& game, const DiscretizationPlan& plan, PlayerId i,
                                  SlackMode mode) {
  const PlayerPlan& pp = plan.at(i);
  return floor_to_int64(Rational(pp.grid.s) * best_response_slack(game, plan, i, mode) / pp.lattice.tau);
}

Claim1Report claim1_bounds(const GameDefinition& game, const StructureStats& stats, const DiscretizationPlan& plan,
                           const Rational& range_bound) {
  Claim1Report report;
  const Rational eps = plan.sizing_epsilon;
  const int m = *std::max_element(game.actions.begin(), game.actions.end());
  const long kappa = std::max(1, stats.kappa);
  const long kappa_prime = std::max(1, stats.kappa_prime);
  report.s_constant = 6 * range_bound;
  // Simple lattice: each clique adds at most 2B/tau' + 2 steps with tau' = eps/(3 kappa_i).
  // Refined lattice: s' = ceil(3 sum_l R_l(|C_l| + kappa_i - l) / eps) <= 3B kappa(kappa'+kappa)/eps + 1.
  report.s_prime_constant = plan.variant == Variant::simple ? Rational(6 * range_bound + 2 * eps) : Rational(3 * range_bound + eps);
  const Rational s_scale = Rational(static_cast<long>(m) * kappa_prime * kappa) / eps;
  const Rational sp_scale = plan.variant == Variant::simple ? Rational(kappa * kappa) / eps
                                                            : Rational(kappa * (kappa_prime + kappa)) / eps;
  report.all_within_bounds = true;
  for (int i = 0; i < game.num_players(); ++i) {
    const PlayerPlan& pp = plan.at(i);
    Claim1Row row;
    row.player = i;
    row.s = pp.grid.s;
    row.s_prime = pp.lattice.intervals();
    row.s_ratio = Rational(row.s) / s_scale;
    row.s_prime_ratio = Rational(static_cast<long>(row.s_prime)) / sp_scale;
    row.s_within_bound = row.s_ratio <= report.s_constant || row.s == 1;
    row.s_prime_within_bound = row.s_prime_ratio <= report.s_prime_constant || pp.indifferent;
    report.all_within_bounds = report.all_within_bounds && row.s_within_bound && row.s_prime_within_bound;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Projection project(const Rational& v, const PayoffLattice& lattice) {
  Projection p;
  p.index = round_half_up(v / lattice.tau);
  if (p.index < lattice.lo_index) {
    p.index = lattice.lo_index;
    p.clamped = true;
  } else if (p.index > lattice.hi_index) {
    p.index = lattice.hi_index;
    p.clamped = true;
  }
  return p;
}

std::uint64_t composition_count(int m, int s) {
  if (m <= 0 || s < 0) return 0;
  // C(s+m-1, m-1)
  unsigned __int128 r = 1;
  const std::uint64_t n = static_cast<std::uint64_t>(s) + static_cast<std::uint64_t>(m) - 1;
  const std::uint64_t k = static_cast<std::uint64_t>(m) - 1;
  for (std::uint64_t t = 1; t <= k; ++t) {
    r = r * (n - k + t) / t;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

std::vector<GridMixedStrategy> enumerate_grid_strategies(int m, int s, PlayerId player) {
  std::vector<GridMixedStrategy> out;
  if (m < 1 || s < 1) return out;
  StrategySpace space(m, s);
  out.reserve(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    auto nums = space.numerators(k);
    out.push_back({player, s, std::vector<int>(nums.begin(), nums.end())});
  }
  return out;
}

StrategySpace::StrategySpace(int actions, int denominator) : actions_(actions), s_(denominator) {
  if (actions < 1 || denominator < 1) throw ParameterOutOfRange("strategy space needs m >= 1 and s >= 1");
  const std::uint64_t count = composition_count(actions, denominator);
  if (count > 50'000'000ULL) throw TooLarge("strategy space of " + std::to_string(count) + " grid points");
  count_ = static_cast<std::size_t>(count);
  flat_.reserve(count_ * static_cast<std::size_t>(actions));
  std::vector<int> cur(static_cast<std::size_t>(actions), 0);
  // Lexicographic: the first coordinate is the slowest and starts at 0.
  auto emit = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == actions - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      flat_.insert(flat_.end(), cur.begin(), cur.end());
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  emit(emit, 0, denominator);
}

std::size_t StrategySpace::index_of(std::span<const int> numerators) const {
  // Hockey-stick identity: compositions whose coordinate k is below n_k.
  std::uint64_t rank = 0;
  int remaining = s_;
  for (int k = 0; k + 1 < actions_; ++k) {
    const int parts = actions_ - k - 1;
    const int n = numerators[static_cast<std::size_t>(k)];
    rank += composition_count(parts + 1, remaining) - composition_count(parts + 1, remaining - n);
    remaining -= n;
  }
  return static_cast<std::size_t>(rank);
}

std::vector<int> round_to_grid(std::span<const Rational> p, int s) {
  const std::size_t m = p.size();
  if (m == 0 || s < 1) throw ParameterOutOfRange("round_to_grid needs a non-empty distribution and s >= 1");
  const Rational S(s);
  std::vector<Rational> candidates;
  for (const Rational& x : p) {
    const std::int64_t centre = floor_to_int64(S * x);
    for (std::int64_t k = centre - 1; k <= centre + 2; ++k) {
      if (k < 0 || k > s) continue;
      Rational d = Rational(static_cast<long>(k), static_cast<unsigned long>(s)) - x;
      candidates.push_back(abs(d));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::int64_t> lo(m), hi(m);
  for (const Rational& delta : candidates) {
    std::int64_t sum_lo = 0, sum_hi = 0;
    bool ok = true;
    for (std::size_t a = 0; a < m; ++a) {
      lo[a] = std::max<std::int64_t>(0, ceil_to_int64(S * (p[a] - delta)));
      hi[a] = std::min<std::int64_t>(s, floor_to_int64(S * (p[a] + delta)));
      if (lo[a] > hi[a]) {
        ok = false;
        break;
      }
      sum_lo += lo[a];
      sum_hi += hi[a];
    }
    if (!ok || sum_lo > s || sum_hi < s) continue;
    std::vector<int> out(m);
    std::int64_t remaining = s;
    std::int64_t rest_lo = sum_lo, rest_hi = sum_hi;
    for (std::size_t a = 0; a < m; ++a) {
      rest_lo -= lo[a];
      rest_hi -= hi[a];
      // Largest value that still lets the remaining coordinates reach the total.
      std::int64_t v = std::min(hi[a], remaining - rest_lo);
      v = std::max(v, lo[a]);
      (void)rest_hi;
      out[a] = static_cast<int>(v);
      remaining -= v;
    }
    return out;
  }
  throw Error("round_to_grid: no feasible rounding (distribution not normalized?)");
}

}  // namespace gmhg
