#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "gmhg/csp.hpp"
#include "gmhg/errors.hpp"
#include "gmhg/tree_dp.hpp"

namespace gmhg {

namespace {

using Table = std::vector<std::int32_t>;
using Bits = std::vector<std::uint64_t>;

bool bit(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1U; }
void set(Bits& b, std::size_t i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }

// Eliminates the fastest dimension (size m) of a table with weights n / s.
Table eliminate_last(const Table& t, std::span<const int> n, int s) {
  const std::size_t m = n.size();
  Table out(t.size() / m);
  const std::int64_t two_s = 2 * static_cast<std::int64_t>(s);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::int64_t acc = 0;
    for (std::size_t a = 0; a < m; ++a) acc += static_cast<std::int64_t>(n[a]) * t[r * m + a];
    out[r] = static_cast<std::int32_t>((2 * acc + s) / two_s);  // acc >= 0
  }
  return out;
}

}  // namespace

struct NormalFormTreeDP::Impl {
  struct Node {
    PlayerId id = 0;
    PlayerId parent = -1;
    int m = 1;
    int s = 1;
    bool isolated = false;
    bool parent_in_clique = false;
    std::vector<PlayerId> chain_children;  // members of i's clique, elimination order
    std::vector<PlayerId> plain_children;
    std::unique_ptr<StrategySpace> space;
    Table e0;                  // dims [i, parent?, o_c, ..., o_1]
    std::int64_t budget = 0;   // scaled by s_i * s_parent * s' (or s_i * s')
    bool parent_dependent = false;  // T depends on the parent strategy
    Bits feasible;             // [p_parent * |P_i| + p_i] or [p_i]
    std::size_t parent_size = 1;
  };

  GameDefinition game;
  StructureStats stats;
  RootedTree tree;
  DiscretizationPlan plan;
  SlackMode slack;
  std::vector<Node> nodes;
  bool collected = false;

  Impl(const GameDefinition& g, const RootedTree& t, const DiscretizationPlan& p, SlackMode sm)
      : game(g), stats(validate_game(g)), tree(t), plan(p), slack(sm) {
    const int n = game.num_players();
    if (!stats.normal_form) throw MalformedGame("normal-form solver needs exactly one clique per player covering N_i");
    if (plan.variant != Variant::refined) throw PlanMismatch("normal-form solver needs the refined plan");
    if (static_cast<int>(plan.players.size()) != n) throw PlanMismatch("plan covers a different number of players");
    if (static_cast<int>(tree.parent.size()) != n) throw NotTree("tree covers a different number of players");
    nodes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) setup(i);
  }

  Node& node(PlayerId i) { return nodes[static_cast<std::size_t>(i)]; }
  const Node& node(PlayerId i) const { return nodes[static_cast<std::size_t>(i)]; }

  void setup(PlayerId i) {
    Node& nd = node(i);
    const auto ui = static_cast<std::size_t>(i);
    nd.id = i;
    nd.parent = tree.parent[ui];
    nd.m = game.actions[ui];
    nd.s = plan.at(i).grid.s;
    nd.space = std::make_unique<StrategySpace>(nd.m, nd.s);
    nd.isolated = nd.parent < 0 && tree.children[ui].empty();
    const LocalClique& clique = game.cliques[static_cast<std::size_t>(stats.cliques_of[ui].front())];
    auto in_clique = [&](PlayerId j) {
      return std::find(clique.members.begin() + 1, clique.members.end(), j) != clique.members.end();
    };
    for (std::size_t k = 1; k < clique.members.size(); ++k) {
      const PlayerId j = clique.members[k];
      const auto& ch = tree.children[ui];
      if (j != nd.parent && std::find(ch.begin(), ch.end(), j) == ch.end()) {
        throw NotTree("player " + std::to_string(i) + " depends on non-neighbour " + std::to_string(j));
      }
    }
    nd.parent_in_clique = nd.parent >= 0 && in_clique(nd.parent);
    for (PlayerId o : tree.children[ui]) (in_clique(o) ? nd.chain_children : nd.plain_children).push_back(o);

    // Table in dims [i, parent?, o_c, ..., o_1] so o_1 varies fastest.
    std::vector<PlayerId> dims{i};
    if (nd.parent_in_clique) dims.push_back(nd.parent);
    for (auto it = nd.chain_children.rbegin(); it != nd.chain_children.rend(); ++it) dims.push_back(*it);
    std::size_t volume = 1;
    for (PlayerId d : dims) volume *= static_cast<std::size_t>(game.actions[static_cast<std::size_t>(d)]);
    const std::int64_t s_prime = plan.at(i).lattice.hi_index;
    nd.e0.assign(volume, 0);
    std::vector<int> joint(dims.size(), 0);
    std::vector<int> member_actions(clique.members.size(), 0);
    for (std::size_t flat = 0; flat < volume; ++flat) {
      std::size_t rem = flat;
      for (std::size_t d = dims.size(); d-- > 0;) {
        const auto md = static_cast<std::size_t>(game.actions[static_cast<std::size_t>(dims[d])]);
        joint[d] = static_cast<int>(rem % md);
        rem /= md;
      }
      for (std::size_t k = 0; k < clique.members.size(); ++k) {
        const auto pos = std::find(dims.begin(), dims.end(), clique.members[k]) - dims.begin();
        member_actions[k] = joint[static_cast<std::size_t>(pos)];
      }
      const Rational& v = clique.payoffs[clique_offset(game, clique, member_actions)];
      if (v < 0 || v > 1) throw InputError("normal-form solver needs local payoffs in [0,1]");
      nd.e0[flat] = static_cast<std::int32_t>(round_half_up(v * Rational(static_cast<long>(s_prime))));
    }

    nd.parent_dependent = nd.parent_in_clique;
    nd.parent_size = nd.parent_dependent ? node_space_size(nd.parent) : 1;
    const Rational sl = best_response_slack(game, plan, i, slack);
    Rational scale = Rational(nd.s) * Rational(static_cast<long>(s_prime));
    if (nd.parent_in_clique) scale *= Rational(plan.at(nd.parent).grid.s);
    nd.budget = floor_to_int64(sl * scale);
  }

  std::size_t node_space_size(PlayerId j) const {
    return static_cast<std::size_t>(composition_count(game.actions[static_cast<std::size_t>(j)], plan.at(j).grid.s));
  }

  bool feasible(const Node& nd, std::size_t p, std::size_t parent_p) const {
    const std::size_t row = nd.parent_dependent ? parent_p : 0;
    return bit(nd.feasible, row * nd.space->size() + p);
  }

  // Child strategies allowed under p_i.
  Bits column(const Node& ch, std::size_t p_parent) const {
    Bits out((ch.space->size() + 63) / 64, 0);
    for (std::size_t q = 0; q < ch.space->size(); ++q) {
      if (feasible(ch, q, p_parent)) set(out, q);
    }
    return out;
  }

  std::vector<std::set<Table>> layers(const Node& nd, const std::vector<Bits>& cols) const {
    std::vector<std::set<Table>> out;
    out.push_back({nd.e0});
    for (std::size_t l = 0; l < nd.chain_children.size(); ++l) {
      const Node& ch = node(nd.chain_children[l]);
      std::set<Table> next;
      for (const Table& t : out.back()) {
        for (std::size_t q = 0; q < ch.space->size(); ++q) {
          if (bit(cols[l], q)) next.insert(eliminate_last(t, ch.space->numerators(q), ch.s));
        }
      }
      out.push_back(std::move(next));
    }
    return out;
  }

  // BR with the final table over [i, parent] (or [i]) and given strategies.
  bool best_response(const Node& nd, const Table& e, std::span<const int> ni, std::span<const int> nj) const {
    const std::size_t m = static_cast<std::size_t>(nd.m);
    const std::size_t mj = nj.size();
    if (mj == 0) {
      std::int64_t lhs = 0;
      for (std::size_t a = 0; a < m; ++a) lhs += static_cast<std::int64_t>(ni[a]) * e[a];
      for (std::size_t a = 0; a < m; ++a) {
        if (lhs < static_cast<std::int64_t>(nd.s) * e[a] - nd.budget) return false;
      }
      return true;
    }
    std::int64_t lhs = 0;
    std::vector<std::int64_t> dev(m, 0);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < mj; ++b) {
        const std::int64_t w = static_cast<std::int64_t>(nj[b]) * e[a * mj + b];
        lhs += static_cast<std::int64_t>(ni[a]) * w;
        dev[a] += w;
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (lhs < static_cast<std::int64_t>(nd.s) * dev[a] - nd.budget) return false;
    }
    return true;
  }

  bool children_ok(const Node& nd, std::size_t p, std::vector<Bits>& cols) const {
    cols.clear();
    for (PlayerId o : nd.plain_children) {
      const Node& ch = node(o);
      bool any = false;
      for (std::size_t q = 0; q < ch.space->size() && !any; ++q) any = feasible(ch, q, p);
      if (!any) return false;
    }
    for (PlayerId o : nd.chain_children) {
      Bits c = column(node(o), p);
      if (std::all_of(c.begin(), c.end(), [](std::uint64_t w) { return w == 0; })) return false;
      cols.push_back(std::move(c));
    }
    return true;
  }

  void collect_node(PlayerId i) {
    Node& nd = node(i);
    const std::size_t P = nd.space->size();
    nd.feasible.assign((nd.parent_size * P + 63) / 64, 0);
    const StrategySpace* parent_space = nd.parent_in_clique ? node(nd.parent).space.get() : nullptr;
    const bool trivial = plan.at(i).indifferent;
    std::map<std::vector<Bits>, std::set<Table>> memo;
    std::vector<Bits> cols;
    for (std::size_t p = 0; p < P; ++p) {
      if (!children_ok(nd, p, cols)) continue;
      auto it = memo.find(cols);
      if (it == memo.end()) it = memo.emplace(cols, layers(nd, cols).back()).first;
      const std::set<Table>& finals = it->second;
      if (finals.empty()) continue;
      const auto ni = nd.space->numerators(p);
      for (std::size_t row = 0; row < nd.parent_size; ++row) {
        const std::span<const int> nj = parent_space ? parent_space->numerators(row) : std::span<const int>{};
        bool ok = trivial;
        for (auto t = finals.begin(); t != finals.end() && !ok; ++t) ok = best_response(nd, *t, ni, nj);
        if (ok) set(nd.feasible, row * P + p);
      }
    }
  }

  void collect() {
    if (collected) return;
    for (auto it = tree.preorder.rbegin(); it != tree.preorder.rend(); ++it) collect_node(*it);
    collected = true;
  }

  void require_collected() const {
    if (!collected) throw Error("collect() must run before querying messages");
  }

  void assign_subtree(PlayerId i, std::size_t p, std::size_t parent_p, std::vector<std::size_t>& choice,
                      std::vector<std::vector<std::int64_t>>& witness) const {
    const Node& nd = node(i);
    choice[static_cast<std::size_t>(i)] = p;
    std::vector<Bits> cols;
    if (!children_ok(nd, p, cols)) throw Error("assignment reached an infeasible strategy");
    const auto ls = layers(nd, cols);
    const std::span<const int> nj =
        nd.parent_in_clique ? node(nd.parent).space->numerators(parent_p) : std::span<const int>{};
    const auto ni = nd.space->numerators(p);
    const Table* cur = nullptr;
    for (const Table& t : ls.back()) {
      if (plan.at(i).indifferent || best_response(nd, t, ni, nj)) {
        cur = &t;
        break;
      }
    }
    if (cur == nullptr) throw Error("no witness for a feasible strategy of player " + std::to_string(i));
    witness[static_cast<std::size_t>(i)].assign(cur->begin(), cur->end());
    for (std::size_t l = nd.chain_children.size(); l-- > 0;) {
      const Node& ch = node(nd.chain_children[l]);
      const Table* prev = nullptr;
      std::size_t pick = 0;
      for (std::size_t q = 0; q < ch.space->size() && prev == nullptr; ++q) {
        if (!bit(cols[l], q)) continue;
        for (const Table& t : ls[l]) {
          if (eliminate_last(t, ch.space->numerators(q), ch.s) == *cur) {
            prev = &t;
            pick = q;
            break;
          }
        }
      }
      if (prev == nullptr) throw Error("witness unwinding failed at player " + std::to_string(ch.id));
      assign_subtree(ch.id, pick, p, choice, witness);
      cur = prev;
    }
    for (PlayerId o : nd.plain_children) {
      const Node& ch = node(o);
      for (std::size_t q = 0; q < ch.space->size(); ++q) {
        if (feasible(ch, q, p)) {
          assign_subtree(o, q, p, choice, witness);
          break;
        }
      }
    }
  }

  EquilibriumProfile assign() const {
    require_collected();
    const int n = game.num_players();
    std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<std::int64_t>> witness(static_cast<std::size_t>(n));
    for (PlayerId r : tree.preorder) {
      if (tree.parent[static_cast<std::size_t>(r)] >= 0) continue;
      const Node& nd = node(r);
      std::size_t p = nd.space->size();
      for (std::size_t q = 0; q < nd.space->size(); ++q) {
        if (feasible(nd, q, 0)) {
          p = q;
          break;
        }
      }
      if (p == nd.space->size()) {
        throw InfeasibleAtRoot("component rooted at player " + std::to_string(r) + ": all " +
                               std::to_string(nd.space->size()) + " grid strategies infeasible (s=" +
                               std::to_string(nd.s) + ")");
      }
      assign_subtree(r, p, 0, choice, witness);
    }
    EquilibriumProfile out;
    out.variant = Variant::refined;
    out.slack = slack;
    out.root = tree.root;
    out.epsilon = plan.epsilon;
    for (int i = 0; i < n; ++i) {
      const Node& nd = node(i);
      GridMixedStrategy g;
      g.player = i;
      if (nd.isolated) {
        g.denominator = nd.m;
        g.numerators.assign(static_cast<std::size_t>(nd.m), 1);
      } else {
        g.denominator = nd.s;
        const auto nums = nd.space->numerators(choice[static_cast<std::size_t>(i)]);
        g.numerators.assign(nums.begin(), nums.end());
      }
      out.strategies.push_back(std::move(g));
      out.s.push_back(nd.s);
      out.s_prime.push_back(plan.at(i).lattice.intervals());
      out.witnesses.push_back(nd.isolated ? std::vector<std::int64_t>{} : witness[static_cast<std::size_t>(i)]);
    }
    out.table_bytes = table_bytes();
    return out;
  }

  std::size_t table_bytes() const {
    std::size_t b = 0;
    for (const Node& nd : nodes) b += nd.feasible.size() * sizeof(std::uint64_t) + nd.e0.size() * sizeof(std::int32_t);
    return b;
  }
};

NormalFormTreeDP::NormalFormTreeDP(const GameDefinition& game, const RootedTree& tree, const DiscretizationPlan& plan,
                                   SlackMode slack)
    : impl_(std::make_unique<Impl>(game, tree, plan, slack)) {}
NormalFormTreeDP::~NormalFormTreeDP() = default;
NormalFormTreeDP::NormalFormTreeDP(NormalFormTreeDP&&) noexcept = default;
NormalFormTreeDP& NormalFormTreeDP::operator=(NormalFormTreeDP&&) noexcept = default;

void NormalFormTreeDP::collect() { impl_->collect(); }
const StrategySpace& NormalFormTreeDP::space(PlayerId i) const { return *impl_->node(i).space; }
bool NormalFormTreeDP::feasible(PlayerId i, std::size_t strategy, std::size_t parent_strategy) const {
  impl_->require_collected();
  return impl_->feasible(impl_->node(i), strategy, parent_strategy);
}
std::size_t NormalFormTreeDP::reachable_tables(PlayerId i, std::size_t strategy) const {
  impl_->require_collected();
  const auto& nd = impl_->node(i);
  std::vector<Bits> cols;
  if (!impl_->children_ok(nd, strategy, cols)) return 0;
  return impl_->layers(nd, cols).back().size();
}
EquilibriumProfile NormalFormTreeDP::assign() const { return impl_->assign(); }
std::size_t NormalFormTreeDP::table_bytes() const { return impl_->table_bytes(); }

EquilibriumProfile solve_normalform_tree(const GameDefinition& game, const RootedTree& tree,
                                         const DiscretizationPlan& plan, const SolveOptions& options) {
  NormalFormTreeDP dp(game, tree, plan, options.slack);
  dp.collect();
  EquilibriumProfile out = dp.assign();
  if (options.certify) {
    out.certificate = exact_regret(game, out.strategies, plan.epsilon);
    out.certified = out.certificate->all_pass;
    if (!out.certified && options.slack == SlackMode::proven) {
      throw Error("internal certification failed: max regret " + to_string(out.certificate->max_regret()) +
                  " exceeds epsilon " + to_string(plan.epsilon));
    }
  }
  return out;
}

DiscretizationPlan plan_for_tree(const GameDefinition& normalized, const RootedTree& tree, const Rational& epsilon,
                                 Variant variant) {
  const StructureStats stats = validate_game(normalized);
  const auto orders = order_all_cliques(normalized, stats, &tree);
  return variant == Variant::simple ? plan_simple(normalized, stats, epsilon, orders)
                                    : plan_refined(normalized, stats, epsilon, orders);
}

SolveOutcome solve_polymatrix(const GameDefinition& game, const SolveRequest& request) {
  if (request.epsilon <= 0) throw EpsilonNonpositive();
  const StructureStats raw = validate_game(game);
  if (!raw.polymatrix) throw NotPolymatrix();
  SolveOutcome out;
  out.normalized = normalize_polymatrix(game);
  const StructureStats stats = validate_game(out.normalized.game);
  out.tree = build_rooted_tree(out.normalized.game, stats, request.root);
  out.plan = plan_for_tree(out.normalized.game, out.tree, request.epsilon, request.variant);
  out.profile = solve_polymatrix_tree(out.normalized.game, out.tree, out.plan, {request.slack, request.certify});
  return out;
}

SolveOutcome solve_normalform(const GameDefinition& game, const SolveRequest& request) {
  if (request.epsilon <= 0) throw EpsilonNonpositive();
  const StructureStats raw = validate_game(game);
  const GameDefinition nf = raw.normal_form ? game : raw.polymatrix ? polymatrix_to_normal_form(game)
                                                                    : throw MalformedGame("game is neither polymatrix nor normal-form graphical");
  SolveOutcome out;
  out.normalized = normalize_normal_form(nf);
  const StructureStats stats = validate_game(out.normalized.game);
  out.tree = build_rooted_tree(out.normalized.game, stats, request.root);
  out.plan = plan_for_tree(out.normalized.game, out.tree, request.epsilon, Variant::refined);
  out.profile = solve_normalform_tree(out.normalized.game, out.tree, out.plan, {request.slack, request.certify});
  return out;
}

}  // namespace gmhg
