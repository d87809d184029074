#include "gmhg/verify.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "gmhg/errors.hpp"

namespace gmhg {

Rational RegretReport::max_regret() const {
  Rational m = 0;
  for (const Rational& r : regret) m = std::max(m, r);
  return m;
}

RegretReport exact_regret(const GameDefinition& game, const MixedProfile& profile, const Rational& epsilon) {
  const StructureStats stats = validate_game(game);
  const int n = game.num_players();
  if (static_cast<int>(profile.size()) != n) throw DimensionMismatch("profile needs one strategy per player");
  for (int i = 0; i < n; ++i) {
    const auto& p = profile[static_cast<std::size_t>(i)];
    if (static_cast<int>(p.size()) != game.actions[static_cast<std::size_t>(i)]) {
      throw DimensionMismatch("strategy of player " + std::to_string(i) + " has wrong length");
    }
    Rational sum = 0;
    for (const Rational& x : p) {
      if (x < 0) throw UnnormalizedStrategy("negative probability for player " + std::to_string(i));
      sum += x;
    }
    if (sum != 1) throw UnnormalizedStrategy("player " + std::to_string(i) + " sums to " + to_string(sum));
  }

  RegretReport report;
  report.epsilon = epsilon;
  report.all_pass = true;
  std::vector<CliqueArgument> args;
  for (int i = 0; i < n; ++i) {
    const int mi = game.actions[static_cast<std::size_t>(i)];
    std::vector<Rational> value(static_cast<std::size_t>(mi), Rational(0));
    for (int c : stats.cliques_of[static_cast<std::size_t>(i)]) {
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
      args.assign(clique.members.size(), CliqueArgument{});
      for (std::size_t k = 1; k < clique.members.size(); ++k) {
        args[k] = CliqueArgument::distribution(profile[static_cast<std::size_t>(clique.members[k])]);
      }
      for (int a = 0; a < mi; ++a) {
        args[0] = CliqueArgument::fixed(a);
        value[static_cast<std::size_t>(a)] += exact_expected_clique_payoff(game, clique, args);
      }
    }
    Rational expected = 0;
    for (int a = 0; a < mi; ++a) expected += profile[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] * value[static_cast<std::size_t>(a)];
    const Rational best = *std::max_element(value.begin(), value.end());
    Rational r = best - expected;
    const bool ok = r <= epsilon;
    report.regret.push_back(r);
    report.payoff.push_back(expected);
    report.best.push_back(best);
    report.pass.push_back(ok);
    report.all_pass = report.all_pass && ok;
  }
  return report;
}

RegretReport exact_regret(const GameDefinition& game, const GridProfile& profile, const Rational& epsilon) {
  return exact_regret(game, to_mixed(profile), epsilon);
}

bool is_eps_msne(const GameDefinition& game, const MixedProfile& profile, const Rational& epsilon) {
  return exact_regret(game, profile, epsilon).all_pass;
}

bool is_eps_msne(const GameDefinition& game, const GridProfile& profile, const Rational& epsilon) {
  return exact_regret(game, profile, epsilon).all_pass;
}

std::uint64_t joint_grid_size(const GameDefinition& game, const std::vector<int>& s) {
  unsigned __int128 total = 1;
  for (int i = 0; i < game.num_players(); ++i) {
    total *= composition_count(game.actions[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i)]);
    if (total > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

namespace {

// Expected payoff of one clique for every owner action, tabulated over the
// joint strategy indices of the other members (last member fastest).
struct CliqueTable {
  std::vector<PlayerId> others;
  std::vector<std::size_t> radix;
  int owner_actions = 0;
  std::vector<Rational> values;  // [joint index][owner action]
};

}  // namespace

std::vector<GridProfile> brute_force_grid_equilibria(const GameDefinition& game, const std::vector<int>& s,
                                                     const Rational& epsilon, std::uint64_t cap) {
  const StructureStats stats = validate_game(game);
  const int n = game.num_players();
  if (static_cast<int>(s.size()) != n) throw DimensionMismatch("need one grid size per player");
  const std::uint64_t total = joint_grid_size(game, s);
  if (total > cap) throw TooLarge("joint grid of " + std::to_string(total) + " profiles exceeds cap " + std::to_string(cap));

  std::vector<StrategySpace> spaces;
  std::vector<std::vector<std::vector<Rational>>> probs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    spaces.emplace_back(game.actions[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i)]);
    const StrategySpace& sp = spaces.back();
    for (std::size_t k = 0; k < sp.size(); ++k) {
      auto nums = sp.numerators(k);
      std::vector<Rational> p;
      for (int x : nums) p.emplace_back(Rational(x, sp.denominator()));
      for (Rational& x : p) x.canonicalize();
      probs[static_cast<std::size_t>(i)].push_back(std::move(p));
    }
  }

  std::vector<std::vector<CliqueTable>> tables(static_cast<std::size_t>(n));
  std::vector<CliqueArgument> args;
  for (int i = 0; i < n; ++i) {
    for (int c : stats.cliques_of[static_cast<std::size_t>(i)]) {
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
      CliqueTable t;
      t.owner_actions = game.actions[static_cast<std::size_t>(i)];
      std::size_t joint = 1;
      for (std::size_t k = 1; k < clique.members.size(); ++k) {
        t.others.push_back(clique.members[k]);
        t.radix.push_back(spaces[static_cast<std::size_t>(clique.members[k])].size());
        joint *= t.radix.back();
      }
      t.values.resize(joint * static_cast<std::size_t>(t.owner_actions));
      std::vector<std::size_t> digit(t.others.size(), 0);
      args.assign(clique.members.size(), CliqueArgument{});
      for (std::size_t idx = 0; idx < joint; ++idx) {
        for (std::size_t k = 0; k < t.others.size(); ++k) {
          args[k + 1] = CliqueArgument::distribution(probs[static_cast<std::size_t>(t.others[k])][digit[k]]);
        }
        for (int a = 0; a < t.owner_actions; ++a) {
          args[0] = CliqueArgument::fixed(a);
          t.values[idx * static_cast<std::size_t>(t.owner_actions) + static_cast<std::size_t>(a)] =
              exact_expected_clique_payoff(game, clique, args);
        }
        for (std::size_t k = t.others.size(); k-- > 0;) {
          if (++digit[k] < t.radix[k]) break;
          digit[k] = 0;
        }
      }
      tables[static_cast<std::size_t>(i)].push_back(std::move(t));
    }
  }

  std::vector<GridProfile> out;
  std::vector<std::size_t> cur(static_cast<std::size_t>(n), 0);
  std::vector<Rational> value;
  for (std::uint64_t step = 0; step < total; ++step) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int mi = game.actions[ui];
      value.assign(static_cast<std::size_t>(mi), Rational(0));
      for (const CliqueTable& t : tables[ui]) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < t.others.size(); ++k) idx = idx * t.radix[k] + cur[static_cast<std::size_t>(t.others[k])];
        for (int a = 0; a < mi; ++a) value[static_cast<std::size_t>(a)] += t.values[idx * static_cast<std::size_t>(mi) + static_cast<std::size_t>(a)];
      }
      Rational expected = 0;
      const auto& p = probs[ui][cur[ui]];
      for (int a = 0; a < mi; ++a) expected += p[static_cast<std::size_t>(a)] * value[static_cast<std::size_t>(a)];
      ok = *std::max_element(value.begin(), value.end()) - expected <= epsilon;
    }
    if (ok) {
      GridProfile prof;
      for (int i = 0; i < n; ++i) {
        auto nums = spaces[static_cast<std::size_t>(i)].numerators(cur[static_cast<std::size_t>(i)]);
        prof.push_back({i, s[static_cast<std::size_t>(i)], std::vector<int>(nums.begin(), nums.end())});
      }
      out.push_back(std::move(prof));
    }
    for (int i = n; i-- > 0;) {
      if (++cur[static_cast<std::size_t>(i)] < spaces[static_cast<std::size_t>(i)].size()) break;
      cur[static_cast<std::size_t>(i)] = 0;
    }
  }
  return out;
}

std::vector<GridProfile> brute_force_grid_equilibria(const GameDefinition& game, const DiscretizationPlan& plan,
                                                     const Rational& epsilon, std::uint64_t cap) {
  std::vector<int> s;
  for (const PlayerPlan& pp : plan.players) s.push_back(pp.grid.s);
  return brute_force_grid_equilibria(game, s, epsilon, cap);
}

}  // namespace gmhg
