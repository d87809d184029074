#pragma once

// JSON documents for games and everything derived from them. Payoffs and other
// exact quantities travel as decimal strings ("0.1") or reduced fractions
// ("1/3"), never as binary floats.

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gmhg/csp.hpp"
#include "gmhg/game.hpp"
#include "gmhg/tree_dp.hpp"
#include "gmhg/verify.hpp"

namespace gmhg {

inline constexpr int kSchemaVersion = 1;

struct GameDocument {
  GameDefinition game;
  nlohmann::json metadata = nlohmann::json::object();  // free-form: name, seed, generator, ...
};

// Cliques sorted by (owner, members); payoffs permuted nowhere (order is part
// of the clique's member order).
GameDefinition canonical_game(const GameDefinition& game);

// Throws SchemaError with a JSON-pointer path for structural problems and
// MalformedGame (via validate_game) for semantic ones.
GameDocument parse_game_document(std::string_view text);
GameDefinition parse_game(std::string_view text);
std::string serialize_game(const GameDefinition& game, const nlohmann::json& metadata = nlohmann::json::object());
std::string serialize_game(const GameDocument& doc);

struct ProfileDocument {
  Rational epsilon;
  GridProfile strategies;
  std::optional<RegretReport> regret;
  std::string solver = "polymatrix";
  Variant variant = Variant::simple;
  SlackMode slack = SlackMode::proven;
  PlayerId root = 0;
  std::optional<std::uint64_t> seed;
};

ProfileDocument profile_document(const EquilibriumProfile& profile, const std::string& solver);
// Numerators must sum to the grid denominator (UnnormalizedStrategy otherwise).
ProfileDocument parse_profile(std::string_view text);
std::string serialize_profile(const ProfileDocument& doc);

// The CSP document embeds the game the instance was built from plus its
// parameters; variables and constraints are listed for inspection and are
// rebuilt (and cross-checked) on parse.
std::string serialize_csp(const CSPInstance& csp);
CSPInstance parse_csp(std::string_view text);

// Collection-pass tables of a polymatrix DP for inspection. Per player: the
// message as feasible strategy indices per parent class and, for players
// with at most `detail_cap` strategies, the strategies themselves and the
// reachable final partial sums of every strategy feasible in some class.
std::string serialize_dp_tables(const PolymatrixTreeDP& dp, const RootedTree& tree, std::size_t detail_cap = 200);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Variant parse_variant(std::string_view name);
SlackMode parse_slack(std::string_view name);

}  // namespace gmhg
