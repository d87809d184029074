#include "gmhg/csp.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "gmhg/errors.hpp"

namespace gmhg {

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::probability: return "probability";
    case VarKind::partial_sum: return "partial_sum";
    case VarKind::partial_expectation: return "partial_expectation";
  }
  return "?";
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::normalization: return "normalization";
    case ConstraintKind::partial_sum: return "partial_sum";
    case ConstraintKind::partial_expectation: return "partial_expectation";
    case ConstraintKind::best_response: return "best_response";
  }
  return "?";
}

const char* to_string(SearchStatus status) {
  switch (status) {
    case SearchStatus::satisfied: return "satisfied";
    case SearchStatus::infeasible: return "infeasible";
    case SearchStatus::limit_exceeded: return "limit_exceeded";
  }
  return "?";
}

std::size_t CSPInstance::count(VarKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(variables.begin(), variables.end(), [&](const CSPVariable& v) { return v.kind == kind; }));
}

std::size_t CSPInstance::count(ConstraintKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(constraints.begin(), constraints.end(), [&](const CSPConstraint& c) { return c.kind == kind; }));
}

std::vector<int> order_cliques(const GameDefinition& game, const StructureStats& stats, const RootedTree* tree,
                               PlayerId i) {
  const auto& mine = stats.cliques_of[static_cast<std::size_t>(i)];
  if (tree == nullptr) return mine;
  std::vector<int> out;
  std::vector<bool> used(mine.size(), false);
  auto take = [&](auto pred) {
    for (std::size_t k = 0; k < mine.size(); ++k) {
      if (!used[k] && pred(game.cliques[static_cast<std::size_t>(mine[k])])) {
        used[k] = true;
        out.push_back(mine[k]);
      }
    }
  };
  take([](const LocalClique& c) { return c.members.size() == 1; });
  for (PlayerId child : tree->children[static_cast<std::size_t>(i)]) {
    take([&](const LocalClique& c) { return c.members.size() == 2 && c.members[1] == child; });
  }
  const PlayerId parent = tree->parent[static_cast<std::size_t>(i)];
  if (parent >= 0) take([&](const LocalClique& c) { return c.members.size() == 2 && c.members[1] == parent; });
  take([](const LocalClique&) { return true; });
  return out;
}

std::vector<std::vector<int>> order_all_cliques(const GameDefinition& game, const StructureStats& stats,
                                                const RootedTree* tree) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < game.num_players(); ++i) out.push_back(order_cliques(game, stats, tree, i));
  return out;
}

namespace {

struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(x))) * 1099511628211ULL;
    return h;
  }
};

// Shared by all constraint closures of one instance.
struct Context {
  GameDefinition game;
  StructureStats stats;
  DiscretizationPlan plan;
  std::mutex cache_mutex;
  std::vector<std::unordered_map<std::vector<int>, std::vector<std::int64_t>, VectorHash>> cache;  // per clique

  // Projected expected clique payoff for every owner action; numerators of
  // the other members are concatenated in member order.
  std::vector<std::int64_t> projected_clique(int c, std::span<const std::int64_t> numerators, bool& valid) {
    const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
    std::vector<int> key(numerators.begin(), numerators.end());
    {
      std::lock_guard lock(cache_mutex);
      auto it = cache[static_cast<std::size_t>(c)].find(key);
      if (it != cache[static_cast<std::size_t>(c)].end()) {
        valid = true;
        return it->second;
      }
    }
    std::vector<CliqueArgument> args(clique.members.size());
    std::size_t pos = 0;
    for (std::size_t k = 1; k < clique.members.size(); ++k) {
      const PlayerId j = clique.members[k];
      const int mj = game.actions[static_cast<std::size_t>(j)];
      const int sj = plan.at(j).grid.s;
      std::vector<Rational> p;
      std::int64_t sum = 0;
      for (int a = 0; a < mj; ++a) {
        const std::int64_t x = numerators[pos++];
        if (x < 0) {
          valid = false;
          return {};
        }
        sum += x;
        p.emplace_back(Rational(static_cast<long>(x), static_cast<unsigned long>(sj)));
      }
      if (sum != sj) {
        valid = false;
        return {};
      }
      for (Rational& x : p) x.canonicalize();
      args[k] = CliqueArgument::distribution(std::move(p));
    }
    const PlayerId i = clique.owner;
    const PlayerPlan& pp = plan.at(i);
    std::vector<std::int64_t> out;
    for (int a = 0; a < game.actions[static_cast<std::size_t>(i)]; ++a) {
      args[0] = CliqueArgument::fixed(a);
      out.push_back(project(exact_expected_clique_payoff(game, clique, args), pp.lattice).index);
    }
    valid = true;
    std::lock_guard lock(cache_mutex);
    cache[static_cast<std::size_t>(c)].emplace(std::move(key), out);
    return out;
  }
};

CSPConstraint functional(ConstraintKind kind, PlayerId player, std::vector<int> scope, std::string label,
                         std::function<std::int64_t(std::span<const std::int64_t>, bool&)> compute) {
  CSPConstraint c;
  c.kind = kind;
  c.player = player;
  c.defines = static_cast<int>(scope.size()) - 1;
  c.scope = std::move(scope);
  c.label = std::move(label);
  c.infer = [compute](std::span<const std::int64_t> v) {
    bool ok = true;
    const std::int64_t r = compute(v, ok);
    return ok ? r : kUnassigned;
  };
  c.holds = [compute](std::span<const std::int64_t> v) {
    bool ok = true;
    const std::int64_t r = compute(v, ok);
    return ok && r == v.back();
  };
  return c;
}

std::string name_of(const std::string& head, std::initializer_list<int> parts) {
  std::string s = head;
  for (int p : parts) s += "[" + std::to_string(p) + "]";
  return s;
}

// Mixed-radix enumeration helper (last digit fastest).
std::vector<std::vector<int>> joint_actions(const GameDefinition& game, std::span<const PlayerId> members) {
  std::vector<std::vector<int>> out;
  std::vector<int> digit(members.size(), 0);
  while (true) {
    out.push_back(digit);
    std::size_t k = members.size();
    while (k > 0) {
      --k;
      if (++digit[k] < game.actions[static_cast<std::size_t>(members[k])]) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
    if (members.empty()) return out;
  }
}

}  // namespace

CSPInstance build_csp(const GameDefinition& game, const DiscretizationPlan& plan, const Rational& epsilon,
                      Variant variant, SlackMode slack, PlayerId root) {
  const StructureStats stats = validate_game(game);
  const int n = game.num_players();
  if (plan.variant != variant) throw PlanMismatch(std::string("plan is ") + to_string(plan.variant));
  if (static_cast<int>(plan.players.size()) != n) throw PlanMismatch("plan covers a different number of players");
  if (plan.epsilon != epsilon) throw PlanMismatch("plan was built for epsilon " + to_string(plan.epsilon));

  auto ctx = std::make_shared<Context>();
  ctx->game = game;
  ctx->stats = stats;
  ctx->plan = plan;
  ctx->cache.resize(game.cliques.size());

  CSPInstance csp;
  csp.game = game;
  csp.plan = plan;
  csp.epsilon = epsilon;
  csp.variant = variant;
  csp.slack = slack;
  csp.root = root;
  for (int i = 0; i < n; ++i) csp.clique_order.push_back(plan.at(i).clique_order);

  // Player order: tree preorder when the interaction graph is a forest.
  std::vector<PlayerId> player_order;
  try {
    player_order = build_rooted_tree(game, stats, root).preorder;
  } catch (const NotTree&) {
    player_order.resize(static_cast<std::size_t>(n));
    std::iota(player_order.begin(), player_order.end(), 0);
  }

  // Variables are created first with provisional ids, then placed in the
  // declared order once their dependencies are placed.
  std::vector<CSPVariable> pending;
  std::vector<std::vector<int>> deps;  // provisional ids
  csp.prob_vars.assign(static_cast<std::size_t>(n), {});
  csp.sum_vars.assign(static_cast<std::size_t>(n), {});
  std::vector<std::vector<int>> prob_pid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < game.actions[static_cast<std::size_t>(i)]; ++a) {
      CSPVariable v;
      v.kind = VarKind::probability;
      v.player = i;
      v.action = a;
      v.lo = 0;
      v.hi = plan.at(i).grid.s;
      v.name = name_of("p", {i, a});
      prob_pid[static_cast<std::size_t>(i)].push_back(static_cast<int>(pending.size()));
      pending.push_back(std::move(v));
      deps.emplace_back();
    }
  }

  std::vector<CSPConstraint> cons;  // scopes hold provisional ids until placement

  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int si = plan.at(i).grid.s;
    cons.push_back(functional(ConstraintKind::normalization, i, prob_pid[ui], name_of("normalization", {i}),
                              [si](std::span<const std::int64_t> v, bool&) {
                                std::int64_t rest = si;
                                for (std::size_t k = 0; k + 1 < v.size(); ++k) rest -= v[k];
                                return rest;
                              }));
  }

  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const PlayerPlan& pp = plan.at(i);
    const int mi = game.actions[ui];
    const auto& order = pp.clique_order;
    const std::int64_t s_prime = pp.lattice.hi_index;
    std::vector<std::vector<int>> s_pid(order.size());  // [l-1][a]
    std::vector<std::vector<int>> last_e_pid(order.size());  // refined: [l-1][a]
    Rational r_cum = 0;

    for (std::size_t l = 0; l < order.size(); ++l) {
      const int c = order[l];
      const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
      const CliqueStats cs = clique_stats(clique);
      const std::size_t others = clique.members.size() - 1;

      if (variant == Variant::refined) {
        // E chain: E_t lives over [i, o_{t+1}, ..., o_K].
        std::vector<int> prev_pid;      // E_{t-1} ids, indexed by residual offset
        std::vector<PlayerId> prev_members;
        const std::size_t t_start = others == 0 ? 0 : 1;
        for (std::size_t t = t_start; t <= others; ++t) {
          std::vector<PlayerId> resid{i};
          for (std::size_t k = t + 1; k <= others; ++k) resid.push_back(clique.members[k]);
          const auto combos = joint_actions(game, resid);
          const auto prev_combos = joint_actions(game, prev_members);
          std::vector<int> cur_pid;
          for (const auto& r : combos) {
            CSPVariable v;
            v.kind = VarKind::partial_expectation;
            v.player = i;
            v.clique = c;
            v.position = static_cast<int>(t);
            v.residual = r;
            v.lo = 0;
            v.hi = s_prime;
            v.name = "E[" + std::to_string(i) + "][" + std::to_string(c) + "][" + std::to_string(t) + "]";
            for (int x : r) v.name += "[" + std::to_string(x) + "]";
            const int pid = static_cast<int>(pending.size());
            cur_pid.push_back(pid);

            std::vector<int> scope;
            const PlayerId ot = t == 0 ? -1 : clique.members[t];
            if (ot >= 0) scope = prob_pid[static_cast<std::size_t>(ot)];
            if (t >= 2) {
              // E_{t-1} residual is [i, o_t, o_{t+1}, ...]; insert a_{o_t} after the owner.
              for (int a = 0; a < game.actions[static_cast<std::size_t>(ot)]; ++a) {
                std::vector<int> key{r[0], a};
                key.insert(key.end(), r.begin() + 1, r.end());
                const auto it = std::find(prev_combos.begin(), prev_combos.end(), key);
                scope.push_back(prev_pid[static_cast<std::size_t>(it - prev_combos.begin())]);
              }
            }
            deps.emplace_back(scope);
            scope.push_back(pid);
            pending.push_back(std::move(v));

            std::function<std::int64_t(std::span<const std::int64_t>, bool&)> fn;
            if (cs.range == 0) {
              fn = [](std::span<const std::int64_t>, bool&) { return std::int64_t{0}; };
            } else if (t == 0) {
              const Rational val = (clique.payoffs[static_cast<std::size_t>(r[0])] - cs.l) / cs.range;
              const std::int64_t idx = round_half_up(val * Rational(static_cast<long>(s_prime)));
              fn = [idx](std::span<const std::int64_t>, bool&) { return idx; };
            } else if (t == 1) {
              const int m1 = game.actions[static_cast<std::size_t>(ot)];
              const int s1 = plan.at(ot).grid.s;
              std::vector<Rational> column;
              for (int a = 0; a < m1; ++a) {
                std::vector<int> full{r[0], a};
                full.insert(full.end(), r.begin() + 1, r.end());
                column.push_back((clique.payoffs[clique_offset(game, clique, full)] - cs.l) / cs.range);
              }
              const Rational scale = Rational(static_cast<long>(s_prime), static_cast<unsigned long>(s1));
              fn = [column, scale, m1, s1](std::span<const std::int64_t> v, bool& ok) {
                Rational acc = 0;
                std::int64_t sum = 0;
                for (int a = 0; a < m1; ++a) {
                  if (v[static_cast<std::size_t>(a)] < 0) ok = false;
                  sum += v[static_cast<std::size_t>(a)];
                  acc += Rational(static_cast<long>(v[static_cast<std::size_t>(a)])) * column[static_cast<std::size_t>(a)];
                }
                if (sum != s1) ok = false;
                return round_half_up(acc * scale);
              };
            } else {
              const int mt = game.actions[static_cast<std::size_t>(ot)];
              const int st = plan.at(ot).grid.s;
              fn = [mt, st](std::span<const std::int64_t> v, bool& ok) {
                std::int64_t acc = 0, sum = 0;
                for (int a = 0; a < mt; ++a) {
                  const std::int64_t n_a = v[static_cast<std::size_t>(a)];
                  if (n_a < 0) ok = false;
                  sum += n_a;
                  acc += n_a * v[static_cast<std::size_t>(mt + a)];
                }
                if (sum != st) ok = false;
                return round_half_up(Rational(static_cast<long>(acc), static_cast<unsigned long>(st)));
              };
            }
            cons.push_back(functional(ConstraintKind::partial_expectation, i, std::move(scope),
                                      "partial_expectation" + pending[static_cast<std::size_t>(pid)].name.substr(1), fn));
          }
          prev_pid = std::move(cur_pid);
          prev_members = std::move(resid);
        }
        last_e_pid[l] = prev_pid;  // residual [i] only: indexed by a_i
      }

      const Rational r_before = r_cum;
      r_cum += cs.range;
      for (int a = 0; a < mi; ++a) {
        CSPVariable v;
        v.kind = VarKind::partial_sum;
        v.player = i;
        v.clique = c;
        v.position = static_cast<int>(l) + 1;
        v.action = a;
        v.lo = pp.lattice.lo_index;
        v.hi = pp.lattice.hi_index;
        v.name = name_of("S", {i, static_cast<int>(l) + 1, a});
        const int pid = static_cast<int>(pending.size());
        s_pid[l].push_back(pid);

        std::vector<int> scope;
        std::function<std::int64_t(std::span<const std::int64_t>, bool&)> fn;
        if (variant == Variant::simple) {
          for (std::size_t k = 1; k < clique.members.size(); ++k) {
            const auto& pv = prob_pid[static_cast<std::size_t>(clique.members[k])];
            scope.insert(scope.end(), pv.begin(), pv.end());
          }
          const std::size_t width = scope.size();
          const bool chained = l > 0;
          if (chained) scope.push_back(s_pid[l - 1][static_cast<std::size_t>(a)]);
          fn = [ctx, c, a, width, chained](std::span<const std::int64_t> v, bool& ok) {
            const auto proj = ctx->projected_clique(c, v.subspan(0, width), ok);
            if (!ok) return std::int64_t{0};
            return proj[static_cast<std::size_t>(a)] + (chained ? v[width] : 0);
          };
        } else {
          scope.push_back(last_e_pid[l][static_cast<std::size_t>(a)]);
          if (l == 0) {
            fn = [](std::span<const std::int64_t> v, bool&) { return v[0]; };
          } else {
            scope.push_back(s_pid[l - 1][static_cast<std::size_t>(a)]);
            const Rational r_l = cs.range;
            const Rational r_prev = r_before;
            const Rational r_now = r_cum;
            fn = [r_l, r_prev, r_now](std::span<const std::int64_t> v, bool&) {
              if (r_now == 0) return std::int64_t{0};
              return round_half_up((r_l * Rational(static_cast<long>(v[0])) + r_prev * Rational(static_cast<long>(v[1]))) / r_now);
            };
          }
        }
        deps.emplace_back(scope);
        scope.push_back(pid);
        pending.push_back(std::move(v));
        cons.push_back(functional(ConstraintKind::partial_sum, i, std::move(scope),
                                  name_of("partial_sum", {i, static_cast<int>(l) + 1, a}), fn));
      }
    }

    // Best response, one constraint per action.
    const std::int64_t budget = best_response_budget(game, plan, i, slack);
    const std::int64_t si = pp.grid.s;
    for (int a = 0; a < mi; ++a) {
      CSPConstraint c;
      c.kind = ConstraintKind::best_response;
      c.player = i;
      c.scope = prob_pid[ui];
      c.label = name_of("best_response", {i, a});
      if (order.empty()) {
        c.holds = [](std::span<const std::int64_t>) { return true; };
      } else {
        const auto& last = s_pid.back();
        c.scope.insert(c.scope.end(), last.begin(), last.end());
        c.holds = [mi, a, si, budget](std::span<const std::int64_t> v) {
          std::int64_t lhs = 0;
          for (int b = 0; b < mi; ++b) lhs += v[static_cast<std::size_t>(b)] * v[static_cast<std::size_t>(mi + b)];
          return lhs >= si * v[static_cast<std::size_t>(mi + a)] - budget;
        };
      }
      cons.push_back(std::move(c));
    }
    csp.sum_vars[ui] = std::move(s_pid);  // provisional ids, remapped below
  }

  // Declared order.
  std::vector<int> final_id(pending.size(), -1);
  std::vector<int> placed_order;
  auto place = [&](int pid) {
    final_id[static_cast<std::size_t>(pid)] = static_cast<int>(placed_order.size());
    placed_order.push_back(pid);
  };
  std::vector<int> waiting;
  for (std::size_t pid = 0; pid < pending.size(); ++pid) {
    if (pending[pid].kind != VarKind::probability) waiting.push_back(static_cast<int>(pid));
  }
  auto sweep = [&]() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto it = waiting.begin(); it != waiting.end();) {
        const auto& d = deps[static_cast<std::size_t>(*it)];
        if (std::all_of(d.begin(), d.end(), [&](int x) { return final_id[static_cast<std::size_t>(x)] >= 0; })) {
          place(*it);
          it = waiting.erase(it);
          progress = true;
        } else {
          ++it;
        }
      }
    }
  };
  sweep();
  for (PlayerId i : player_order) {
    for (int pid : prob_pid[static_cast<std::size_t>(i)]) place(pid);
    sweep();
  }
  if (!waiting.empty()) throw Error("csp construction left unplaced variables");

  for (int pid : placed_order) csp.variables.push_back(pending[static_cast<std::size_t>(pid)]);
  for (CSPConstraint& c : cons) {
    for (int& v : c.scope) v = final_id[static_cast<std::size_t>(v)];
  }
  csp.constraints = std::move(cons);
  for (int i = 0; i < n; ++i) {
    for (int pid : prob_pid[static_cast<std::size_t>(i)]) csp.prob_vars[static_cast<std::size_t>(i)].push_back(final_id[static_cast<std::size_t>(pid)]);
    for (auto& row : csp.sum_vars[static_cast<std::size_t>(i)]) {
      for (int& v : row) v = final_id[static_cast<std::size_t>(v)];
    }
  }
  return csp;
}

namespace {

std::vector<std::int64_t> gather(const CSPConstraint& c, const std::vector<std::int64_t>& values) {
  std::vector<std::int64_t> out;
  out.reserve(c.scope.size());
  for (int v : c.scope) out.push_back(values[static_cast<std::size_t>(v)]);
  return out;
}

struct Search {
  const CSPInstance& csp;
  std::uint64_t node_limit;
  std::uint64_t max_solutions;
  std::uint64_t nodes = 0;
  bool limit_hit = false;
  std::vector<std::int64_t> values;
  std::vector<int> defining;                   // var -> constraint
  std::vector<std::vector<int>> check_at;      // var -> constraints whose last var it is
  std::vector<std::vector<int>> touching;      // var -> constraints containing it
  std::vector<int> open_count;                 // constraint -> unassigned vars
  std::vector<CSPAssignment> solutions;
  std::vector<std::int64_t> scratch;

  Search(const CSPInstance& c, std::uint64_t limit, std::uint64_t cap)
      : csp(c), node_limit(limit), max_solutions(cap) {
    const std::size_t nv = csp.variables.size();
    values.assign(nv, kUnassigned);
    defining.assign(nv, -1);
    check_at.assign(nv, {});
    touching.assign(nv, {});
    open_count.assign(csp.constraints.size(), 0);
    for (std::size_t k = 0; k < csp.constraints.size(); ++k) {
      const CSPConstraint& con = csp.constraints[k];
      if (con.scope.empty()) continue;
      int last = *std::max_element(con.scope.begin(), con.scope.end());
      check_at[static_cast<std::size_t>(last)].push_back(static_cast<int>(k));
      for (int v : con.scope) touching[static_cast<std::size_t>(v)].push_back(static_cast<int>(k));
      open_count[k] = static_cast<int>(con.scope.size());
      if (con.defines >= 0) {
        const int target = con.scope[static_cast<std::size_t>(con.defines)];
        const bool others_first = std::all_of(con.scope.begin(), con.scope.end(), [&](int v) { return v <= target; });
        if (others_first && defining[static_cast<std::size_t>(target)] < 0) defining[static_cast<std::size_t>(target)] = static_cast<int>(k);
      }
    }
  }

  bool holds(int k) {
    const CSPConstraint& con = csp.constraints[static_cast<std::size_t>(k)];
    scratch = gather(con, values);
    return con.holds(scratch);
  }

  std::int64_t infer(int k) {
    const CSPConstraint& con = csp.constraints[static_cast<std::size_t>(k)];
    scratch = gather(con, values);
    return con.infer(scratch);
  }

  // Forward check: constraints that now define their only open variable must
  // produce an in-domain value.
  bool forward_ok(int var) {
    for (int k : touching[static_cast<std::size_t>(var)]) {
      if (open_count[static_cast<std::size_t>(k)] != 1) continue;
      const CSPConstraint& con = csp.constraints[static_cast<std::size_t>(k)];
      if (con.defines < 0) continue;
      const int target = con.scope[static_cast<std::size_t>(con.defines)];
      if (values[static_cast<std::size_t>(target)] != kUnassigned) continue;
      const std::int64_t v = infer(k);
      const CSPVariable& tv = csp.variables[static_cast<std::size_t>(target)];
      if (v == kUnassigned || v < tv.lo || v > tv.hi) return false;
    }
    return true;
  }

  void assign(int var, std::int64_t v) {
    values[static_cast<std::size_t>(var)] = v;
    for (int k : touching[static_cast<std::size_t>(var)]) --open_count[static_cast<std::size_t>(k)];
  }

  void unassign(int var) {
    values[static_cast<std::size_t>(var)] = kUnassigned;
    for (int k : touching[static_cast<std::size_t>(var)]) ++open_count[static_cast<std::size_t>(k)];
  }

  // Returns true to stop the search.
  bool dfs(std::size_t depth) {
    if (depth == csp.variables.size()) {
      solutions.push_back({values});
      return solutions.size() >= max_solutions;
    }
    const int var = static_cast<int>(depth);
    const CSPVariable& v = csp.variables[depth];
    std::int64_t lo = v.lo, hi = v.hi;
    const int def = defining[depth];
    if (def >= 0) {
      const std::int64_t x = infer(def);
      if (x == kUnassigned || x < lo || x > hi) return false;
      lo = hi = x;
    }
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (++nodes > node_limit) {
        limit_hit = true;
        return true;
      }
      assign(var, x);
      bool ok = true;
      for (int k : check_at[depth]) {
        if (k == def) continue;
        if (!holds(k)) {
          ok = false;
          break;
        }
      }
      if (ok) ok = forward_ok(var);
      if (ok && dfs(depth + 1)) {
        unassign(var);
        return true;
      }
      unassign(var);
    }
    return false;
  }
};

}  // namespace

CSPAssignment round_msne_to_assignment(const CSPInstance& csp, const MixedProfile& profile) {
  const int n = csp.game.num_players();
  if (static_cast<int>(profile.size()) != n) throw DimensionMismatch("profile needs one strategy per player");
  CSPAssignment out;
  out.values.assign(csp.variables.size(), kUnassigned);
  for (int i = 0; i < n; ++i) {
    const auto rounded = round_to_grid(profile[static_cast<std::size_t>(i)], csp.plan.at(i).grid.s);
    const auto& pv = csp.prob_vars[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < pv.size(); ++a) out.values[static_cast<std::size_t>(pv[a])] = rounded[a];
  }
  Search helper(csp, 0, 0);
  for (std::size_t v = 0; v < csp.variables.size(); ++v) {
    if (csp.variables[v].kind == VarKind::probability) continue;
    const int def = helper.defining[v];
    if (def < 0) throw Error("variable " + csp.variables[v].name + " has no defining constraint");
    const CSPConstraint& con = csp.constraints[static_cast<std::size_t>(def)];
    out.values[v] = con.infer(gather(con, out.values));
  }
  return out;
}

CheckResult check_assignment(const CSPInstance& csp, const CSPAssignment& assignment) {
  CheckResult r;
  if (assignment.values.size() != csp.variables.size()) {
    r.reason = "assignment covers " + std::to_string(assignment.values.size()) + " of " +
               std::to_string(csp.variables.size()) + " variables";
    return r;
  }
  for (std::size_t k = 0; k < csp.constraints.size(); ++k) {
    const CSPConstraint& con = csp.constraints[k];
    if (con.kind != ConstraintKind::normalization) continue;
    if (!con.holds(gather(con, assignment.values))) {
      r.violated = static_cast<int>(k);
      r.reason = con.label;
      return r;
    }
  }
  for (std::size_t v = 0; v < csp.variables.size(); ++v) {
    const CSPVariable& var = csp.variables[v];
    const std::int64_t x = assignment.values[v];
    if (x == kUnassigned || x < var.lo || x > var.hi) {
      r.reason = "domain of " + var.name;
      return r;
    }
  }
  for (std::size_t k = 0; k < csp.constraints.size(); ++k) {
    const CSPConstraint& con = csp.constraints[k];
    if (!con.holds(gather(con, assignment.values))) {
      r.violated = static_cast<int>(k);
      r.reason = con.label;
      return r;
    }
  }
  r.satisfied = true;
  return r;
}

SolveResult solve_backtracking(const CSPInstance& csp, std::uint64_t node_limit) {
  Search search(csp, node_limit, 1);
  search.dfs(0);
  SolveResult r;
  r.nodes = search.nodes;
  if (!search.solutions.empty()) {
    r.status = SearchStatus::satisfied;
    r.assignment = std::move(search.solutions.front());
  } else {
    r.status = search.limit_hit ? SearchStatus::limit_exceeded : SearchStatus::infeasible;
  }
  return r;
}

EnumerationResult enumerate_solutions(const CSPInstance& csp, std::uint64_t node_limit, std::uint64_t max_solutions) {
  Search search(csp, node_limit, max_solutions);
  const bool stopped = search.dfs(0);
  EnumerationResult r;
  r.nodes = search.nodes;
  r.complete = !stopped;
  r.solutions = std::move(search.solutions);
  return r;
}

GridProfile profile_from_assignment(const CSPInstance& csp, const CSPAssignment& assignment) {
  GridProfile out;
  for (int i = 0; i < csp.game.num_players(); ++i) {
    GridMixedStrategy g;
    g.player = i;
    g.denominator = csp.plan.at(i).grid.s;
    for (int v : csp.prob_vars[static_cast<std::size_t>(i)]) g.numerators.push_back(static_cast<int>(assignment.values[static_cast<std::size_t>(v)]));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace gmhg
