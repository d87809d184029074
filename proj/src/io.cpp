#include "gmhg/io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gmhg/errors.hpp"

namespace gmhg {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(path, key), "missing field");
  return *it;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  return v.get<std::int64_t>();
}

int small_int(const json& v, const std::string& path, std::int64_t lo, std::int64_t hi) {
  const std::int64_t x = integer(v, path);
  if (x < lo || x > hi) throw SchemaError(path, "value " + std::to_string(x) + " out of range");
  return static_cast<int>(x);
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  return v;
}

Rational exact(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a decimal string");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
}

void check_version(const json& doc) {
  const int v = small_int(field(doc, "", "schema_version"), "/schema_version", 0, 1 << 20);
  if (v != kSchemaVersion) throw SchemaError("/schema_version", "unsupported version " + std::to_string(v));
}

json game_json(const GameDefinition& game, const json& metadata) {
  const GameDefinition g = canonical_game(game);
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json players = json::array();
  for (int i = 0; i < g.num_players(); ++i) players.push_back({{"id", i}, {"actions", g.actions[static_cast<std::size_t>(i)]}});
  doc["players"] = players;
  json cliques = json::array();
  for (const LocalClique& c : g.cliques) {
    json pay = json::array();
    for (const Rational& x : c.payoffs) pay.push_back(to_string(x));
    cliques.push_back({{"owner", c.owner}, {"members", c.members}, {"payoffs", pay}});
  }
  doc["cliques"] = cliques;
  if (!metadata.empty()) doc["metadata"] = metadata;
  return doc;
}

GameDocument game_from_json(const json& doc, const std::string& base) {
  GameDocument out;
  if (!doc.is_object()) throw SchemaError(base, "expected an object");
  if (base.empty()) check_version(doc);
  const std::string ppath = child(base, "players");
  const json& players = array(field(doc, base, "players"), ppath);
  const int n = static_cast<int>(players.size());
  out.game.actions.assign(static_cast<std::size_t>(n), 0);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < players.size(); ++k) {
    const std::string p = child(ppath, k);
    const int id = small_int(field(players[k], p, "id"), child(p, "id"), 0, n - 1);
    if (seen[static_cast<std::size_t>(id)]) throw SchemaError(child(p, "id"), "duplicate player id " + std::to_string(id));
    seen[static_cast<std::size_t>(id)] = true;
    out.game.actions[static_cast<std::size_t>(id)] = small_int(field(players[k], p, "actions"), child(p, "actions"), 1, 1 << 20);
  }
  const std::string cpath = child(base, "cliques");
  const json& cliques = array(field(doc, base, "cliques"), cpath);
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    const std::string p = child(cpath, k);
    LocalClique c;
    c.owner = small_int(field(cliques[k], p, "owner"), child(p, "owner"), 0, std::max(n - 1, 0));
    const json& members = array(field(cliques[k], p, "members"), child(p, "members"));
    std::uint64_t volume = 1;
    for (std::size_t t = 0; t < members.size(); ++t) {
      const int j = small_int(members[t], child(child(p, "members"), t), 0, std::max(n - 1, 0));
      c.members.push_back(j);
      volume *= static_cast<std::uint64_t>(out.game.actions[static_cast<std::size_t>(j)]);
      if (volume > (std::uint64_t{1} << 32)) throw SchemaError(child(p, "members"), "hypermatrix too large");
    }
    if (c.members.empty() || c.members.front() != c.owner) {
      throw SchemaError(child(p, "members"), "first member must be the owner");
    }
    const std::string paypath = child(p, "payoffs");
    const json& pay = array(field(cliques[k], p, "payoffs"), paypath);
    if (pay.size() != volume) {
      throw SchemaError(paypath, "expected " + std::to_string(volume) + " entries, got " + std::to_string(pay.size()));
    }
    for (std::size_t t = 0; t < pay.size(); ++t) c.payoffs.push_back(exact(pay[t], child(paypath, t)));
    out.game.cliques.push_back(std::move(c));
  }
  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError(child(base, "metadata"), "expected an object");
    out.metadata = *it;
  }
  validate_game(out.game);
  return out;
}

json regret_json(const RegretReport& r) {
  json players = json::array();
  for (std::size_t i = 0; i < r.regret.size(); ++i) {
    players.push_back({{"id", i},
                       {"regret", to_string(r.regret[i])},
                       {"payoff", to_string(r.payoff[i])},
                       {"best_deviation", to_string(r.best[i])},
                       {"pass", static_cast<bool>(r.pass[i])}});
  }
  return {{"epsilon", to_string(r.epsilon)},
          {"max_regret", to_string(r.max_regret())},
          {"all_pass", r.all_pass},
          {"players", players}};
}

RegretReport regret_from_json(const json& v, const std::string& path) {
  RegretReport r;
  r.epsilon = exact(field(v, path, "epsilon"), child(path, "epsilon"));
  const json& all = field(v, path, "all_pass");
  if (!all.is_boolean()) throw SchemaError(child(path, "all_pass"), "expected a boolean");
  r.all_pass = all.get<bool>();
  const std::string ppath = child(path, "players");
  const json& players = array(field(v, path, "players"), ppath);
  for (std::size_t k = 0; k < players.size(); ++k) {
    const std::string p = child(ppath, k);
    r.regret.push_back(exact(field(players[k], p, "regret"), child(p, "regret")));
    r.payoff.push_back(exact(field(players[k], p, "payoff"), child(p, "payoff")));
    r.best.push_back(exact(field(players[k], p, "best_deviation"), child(p, "best_deviation")));
    const json& pass = field(players[k], p, "pass");
    if (!pass.is_boolean()) throw SchemaError(child(p, "pass"), "expected a boolean");
    r.pass.push_back(pass.get<bool>());
  }
  return r;
}

}  // namespace

GameDefinition canonical_game(const GameDefinition& game) {
  GameDefinition out = game;
  std::stable_sort(out.cliques.begin(), out.cliques.end(), [](const LocalClique& a, const LocalClique& b) {
    return std::tie(a.owner, a.members) < std::tie(b.owner, b.members);
  });
  return out;
}

GameDocument parse_game_document(std::string_view text) { return game_from_json(parse_json(text), ""); }
GameDefinition parse_game(std::string_view text) { return parse_game_document(text).game; }

std::string serialize_game(const GameDefinition& game, const json& metadata) {
  return game_json(game, metadata).dump(2) + "\n";
}
std::string serialize_game(const GameDocument& doc) { return serialize_game(doc.game, doc.metadata); }

Variant parse_variant(std::string_view name) {
  if (name == "simple") return Variant::simple;
  if (name == "refined") return Variant::refined;
  throw InputError("unknown variant '" + std::string(name) + "' (simple|refined)");
}

SlackMode parse_slack(std::string_view name) {
  if (name == "proven") return SlackMode::proven;
  if (name == "literal") return SlackMode::literal;
  throw InputError("unknown slack mode '" + std::string(name) + "' (proven|literal)");
}

ProfileDocument profile_document(const EquilibriumProfile& profile, const std::string& solver) {
  ProfileDocument d;
  d.epsilon = profile.epsilon;
  d.strategies = profile.strategies;
  d.regret = profile.certificate;
  d.solver = solver;
  d.variant = profile.variant;
  d.slack = profile.slack;
  d.root = profile.root;
  return d;
}

std::string serialize_profile(const ProfileDocument& d) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["epsilon"] = to_string(d.epsilon);
  json players = json::array();
  for (const GridMixedStrategy& g : d.strategies) {
    players.push_back({{"id", g.player}, {"grid_denominator", g.denominator}, {"numerators", g.numerators}});
  }
  doc["players"] = players;
  if (d.regret) doc["regret"] = regret_json(*d.regret);
  json prov = {{"solver", d.solver}, {"variant", to_string(d.variant)}, {"slack", to_string(d.slack)}, {"root", d.root}};
  prov["seed"] = d.seed ? json(*d.seed) : json(nullptr);
  doc["provenance"] = prov;
  return doc.dump(2) + "\n";
}

ProfileDocument parse_profile(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "expected an object");
  check_version(doc);
  ProfileDocument d;
  d.epsilon = exact(field(doc, "", "epsilon"), "/epsilon");
  const json& players = array(field(doc, "", "players"), "/players");
  const int n = static_cast<int>(players.size());
  d.strategies.resize(players.size());
  std::vector<bool> seen(players.size(), false);
  for (std::size_t k = 0; k < players.size(); ++k) {
    const std::string p = child("/players", k);
    GridMixedStrategy g;
    g.player = small_int(field(players[k], p, "id"), child(p, "id"), 0, n - 1);
    if (seen[static_cast<std::size_t>(g.player)]) throw SchemaError(child(p, "id"), "duplicate player id");
    seen[static_cast<std::size_t>(g.player)] = true;
    g.denominator = small_int(field(players[k], p, "grid_denominator"), child(p, "grid_denominator"), 1, 1 << 30);
    const std::string npath = child(p, "numerators");
    const json& nums = array(field(players[k], p, "numerators"), npath);
    std::int64_t sum = 0;
    for (std::size_t t = 0; t < nums.size(); ++t) {
      g.numerators.push_back(small_int(nums[t], child(npath, t), 0, 1 << 30));
      sum += g.numerators.back();
    }
    if (sum != g.denominator) {
      throw UnnormalizedStrategy("player " + std::to_string(g.player) + " numerators sum to " + std::to_string(sum) +
                                 ", grid denominator is " + std::to_string(g.denominator));
    }
    d.strategies[static_cast<std::size_t>(g.player)] = std::move(g);
  }
  if (auto it = doc.find("regret"); it != doc.end()) d.regret = regret_from_json(*it, "/regret");
  if (auto it = doc.find("provenance"); it != doc.end()) {
    const json& prov = *it;
    if (!prov.is_object()) throw SchemaError("/provenance", "expected an object");
    if (auto s = prov.find("solver"); s != prov.end() && s->is_string()) d.solver = s->get<std::string>();
    if (auto s = prov.find("variant"); s != prov.end() && s->is_string()) d.variant = parse_variant(s->get<std::string>());
    if (auto s = prov.find("slack"); s != prov.end() && s->is_string()) d.slack = parse_slack(s->get<std::string>());
    if (auto s = prov.find("root"); s != prov.end()) d.root = small_int(*s, "/provenance/root", 0, 1 << 30);
    if (auto s = prov.find("seed"); s != prov.end() && !s->is_null()) {
      if (!s->is_number_unsigned()) throw SchemaError("/provenance/seed", "expected an unsigned integer");
      d.seed = s->get<std::uint64_t>();
    }
  }
  return d;
}

std::string serialize_csp(const CSPInstance& csp) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "gmhg-csp";
  doc["game"] = game_json(csp.game, json::object());
  doc["epsilon"] = to_string(csp.epsilon);
  doc["variant"] = to_string(csp.variant);
  doc["slack"] = to_string(csp.slack);
  doc["root"] = csp.root;
  // The embedded game is written in canonical clique order; renumber the
  // stored orders to match.
  const GameDefinition canon = canonical_game(csp.game);
  std::vector<int> renumber(csp.game.cliques.size(), -1);
  for (std::size_t c = 0; c < csp.game.cliques.size(); ++c) {
    const LocalClique& lc = csp.game.cliques[c];
    for (std::size_t k = 0; k < canon.cliques.size(); ++k) {
      if (canon.cliques[k].owner == lc.owner && canon.cliques[k].members == lc.members) renumber[c] = static_cast<int>(k);
    }
  }
  json orders = json::array();
  for (const auto& row : csp.clique_order) {
    json r = json::array();
    for (int c : row) r.push_back(renumber[static_cast<std::size_t>(c)]);
    orders.push_back(r);
  }
  doc["clique_order"] = orders;
  json plan = json::array();
  for (std::size_t i = 0; i < csp.plan.players.size(); ++i) {
    const PlayerPlan& pp = csp.plan.players[i];
    plan.push_back({{"player", i},
                    {"s", pp.grid.s},
                    {"tau_prime", to_string(pp.lattice.tau)},
                    {"lattice_lo", pp.lattice.lo_index},
                    {"lattice_hi", pp.lattice.hi_index}});
  }
  doc["plan"] = plan;
  json vars = json::array();
  for (const CSPVariable& v : csp.variables) {
    vars.push_back({{"name", v.name}, {"kind", to_string(v.kind)}, {"player", v.player}, {"lo", v.lo}, {"hi", v.hi}});
  }
  doc["variables"] = vars;
  json cons = json::array();
  for (const CSPConstraint& c : csp.constraints) {
    cons.push_back({{"label", c.label}, {"kind", to_string(c.kind)}, {"player", c.player}, {"scope", c.scope}});
  }
  doc["constraints"] = cons;
  return doc.dump(2) + "\n";
}

CSPInstance parse_csp(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw SchemaError("", "expected an object");
  check_version(doc);
  const GameDefinition game = game_from_json(field(doc, "", "game"), "/game").game;
  const Rational eps = exact(field(doc, "", "epsilon"), "/epsilon");
  const json& var = field(doc, "", "variant");
  const json& sl = field(doc, "", "slack");
  if (!var.is_string()) throw SchemaError("/variant", "expected a string");
  if (!sl.is_string()) throw SchemaError("/slack", "expected a string");
  const Variant variant = parse_variant(var.get<std::string>());
  const SlackMode slack = parse_slack(sl.get<std::string>());
  const int n = game.num_players();
  const PlayerId root = small_int(field(doc, "", "root"), "/root", 0, std::max(n - 1, 0));
  const json& order = array(field(doc, "", "clique_order"), "/clique_order");
  if (static_cast<int>(order.size()) != n) throw SchemaError("/clique_order", "one entry per player expected");
  std::vector<std::vector<int>> orders;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string p = child("/clique_order", i);
    std::vector<int> row;
    for (std::size_t t = 0; t < array(order[i], p).size(); ++t) {
      row.push_back(small_int(order[i][t], child(p, t), 0, static_cast<std::int64_t>(game.cliques.size()) - 1));
    }
    orders.push_back(std::move(row));
  }
  const StructureStats stats = validate_game(game);
  const DiscretizationPlan plan =
      variant == Variant::simple ? plan_simple(game, stats, eps, orders) : plan_refined(game, stats, eps, orders);
  CSPInstance csp = build_csp(game, plan, eps, variant, slack, root);
  if (auto it = doc.find("variables"); it != doc.end()) {
    if (!it->is_array() || it->size() != csp.variables.size()) {
      throw SchemaError("/variables", "variable list does not match the rebuilt instance");
    }
  }
  return csp;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path + "'");
}

std::string serialize_dp_tables(const PolymatrixTreeDP& dp, const RootedTree& tree, std::size_t detail_cap) {
  nlohmann::json players = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.parent.size(); ++i) {
    const auto id = static_cast<PlayerId>(i);
    const auto& space = dp.space(id);
    nlohmann::json p;
    p["id"] = id;
    p["parent"] = tree.parent[i];
    p["grid_denominator"] = space.denominator();
    p["strategy_count"] = space.size();
    const auto rows = dp.message(id);
    nlohmann::json message = nlohmann::json::array();
    std::vector<bool> any(space.size(), false);
    for (const auto& row : rows) {
      nlohmann::json idx = nlohmann::json::array();
      for (std::size_t k = 0; k < space.size(); ++k) {
        if (row[k / 64] >> (k % 64) & 1U) {
          idx.push_back(k);
          any[k] = true;
        }
      }
      message.push_back(std::move(idx));
    }
    p["message"] = std::move(message);
    if (space.size() <= detail_cap) {
      nlohmann::json strategies = nlohmann::json::array();
      nlohmann::json sums = nlohmann::json::object();
      for (std::size_t k = 0; k < space.size(); ++k) {
        const auto n = space.numerators(k);
        strategies.push_back(std::vector<int>(n.begin(), n.end()));
        if (any[k]) sums[std::to_string(k)] = dp.reachable_partial_sums(id, k, std::numeric_limits<std::size_t>::max());
      }
      p["strategies"] = std::move(strategies);
      p["reachable_sums"] = std::move(sums);
    }
    players.push_back(std::move(p));
  }
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["root"] = tree.root;
  doc["players"] = std::move(players);
  return doc.dump(2) + "\n";
}

}  // namespace gmhg
