// Command-line front end. Machine output goes to --out files or stdout;
// diagnostics go to stderr.
//
// Exit codes: 0 ok, 1 verification failed, 2 input error, 3 infeasible,
// 4 resource limit.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "gmhg/gmhg.hpp"

namespace {

using namespace gmhg;

enum Exit { kOk = 0, kVerifyFailed = 1, kInput = 2, kInfeasible = 3, kResource = 4 };

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

Rational rational_arg(const std::string& text, const char* what) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("bad ") + what + ": " + e.what());
  }
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad size list entry '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("empty size list");
  return out;
}

void print_regret(std::ostream& os, const RegretReport& r) {
  os << "player,regret,payoff,best_deviation,pass\n";
  for (std::size_t i = 0; i < r.regret.size(); ++i) {
    os << i << "," << to_string(r.regret[i]) << "," << to_string(r.payoff[i]) << "," << to_string(r.best[i]) << ","
       << (r.pass[i] ? "yes" : "NO") << "\n";
  }
  os << "max_regret=" << to_string(r.max_regret()) << " epsilon=" << to_string(r.epsilon)
     << (r.all_pass ? " verified" : " FAILED") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epsilon-Nash equilibria of tree-structured graphical multi-hypermatrix games"};
  app.require_subcommand(1);

  // solve
  std::string game_path, out_path, profile_path, eps_text, variant_name = "simple", solver_name = "polymatrix",
                                                          slack_name = "proven";
  int root = 0;
  auto* solve = app.add_subcommand("solve", "compute an epsilon-MSNE with the tree DP");
  solve->add_option("--game", game_path, "game JSON")->required();
  solve->add_option("--epsilon", eps_text, "approximation target")->required();
  solve->add_option("--variant", variant_name, "simple|refined");
  solve->add_option("--solver", solver_name, "polymatrix|normalform");
  solve->add_option("--root", root, "root player");
  solve->add_option("--slack", slack_name, "proven|literal");
  solve->add_option("--out", out_path, "profile JSON (default stdout)");
  std::string tables_path;
  solve->add_option("--tables", tables_path, "also write the collection-pass tables (polymatrix solver)");

  // verify
  bool raw = false;
  auto* verify = app.add_subcommand("verify", "exact regret check of a profile");
  verify->add_option("--game", game_path, "game JSON")->required();
  verify->add_option("--profile", profile_path, "profile JSON")->required();
  verify->add_option("--epsilon", eps_text, "tolerance")->required();
  verify->add_flag("--raw", raw, "use the payoffs as given instead of the normalized game");

  // generate
  auto* generate = app.add_subcommand("generate", "write a generated game");
  generate->require_subcommand(1);
  int n = 5, m = 2, steps = 20, max_degree = 2;
  std::uint64_t seed = 0;
  std::string orientation = to_string(kDefaultOrientation), win = "1", lose = "0", lo = "0", hi = "1", b = "1",
              c = "1", gamma = "1/10";
  auto* g_star = generate->add_subcommand("star-mp", "matching-pennies star (center 0)");
  g_star->add_option("--n", n, "players");
  g_star->add_option("--orientation", orientation, "center-matches|leaves-match|per-leaf C/L pattern");
  g_star->add_option("--win", win, "matcher reward on a match");
  g_star->add_option("--lose", lose, "reward otherwise");
  auto* g_tree = generate->add_subcommand("random-tree", "random tree polymatrix game");
  g_tree->add_option("--n", n, "players");
  g_tree->add_option("--m", m, "actions per player");
  g_tree->add_option("--lo", lo, "smallest payoff");
  g_tree->add_option("--hi", hi, "largest payoff");
  g_tree->add_option("--steps", steps, "payoff grid steps");
  auto* g_nf = generate->add_subcommand("random-tree-nf", "random tree normal-form graphical game");
  g_nf->add_option("--n", n, "players");
  g_nf->add_option("--m", m, "actions per player");
  g_nf->add_option("--max-degree", max_degree, "degree cap");
  g_nf->add_option("--steps", steps, "payoff grid steps");
  auto* g_ex = generate->add_subcommand("example1", "player with edge matrices needing negative entries");
  g_ex->add_option("--b", b, "b > 0");
  g_ex->add_option("--c", c, "c > 0");
  g_ex->add_option("--gamma", gamma, "0 < gamma < 1/3");
  for (auto* sub : {g_star, g_tree, g_nf, g_ex}) {
    sub->add_option("--seed", seed, "generator seed");
    sub->add_option("--out", out_path, "game JSON (default stdout)");
  }

  // csp
  std::string csp_path;
  std::uint64_t node_limit = 10'000'000;
  auto* csp = app.add_subcommand("csp", "game-induced constraint satisfaction problem");
  csp->require_subcommand(1);
  auto* c_export = csp->add_subcommand("export", "build and write the CSP");
  c_export->add_option("--game", game_path, "game JSON")->required();
  c_export->add_option("--epsilon", eps_text, "approximation target")->required();
  c_export->add_option("--variant", variant_name, "simple|refined");
  c_export->add_option("--slack", slack_name, "proven|literal");
  c_export->add_option("--root", root, "root player for clique ordering");
  c_export->add_option("--out", out_path, "CSP JSON (default stdout)");
  auto* c_solve = csp->add_subcommand("solve", "backtracking search on an exported CSP");
  c_solve->add_option("--csp", csp_path, "CSP JSON")->required();
  c_solve->add_option("--node-limit", node_limit, "search node budget");
  c_solve->add_option("--out", out_path, "profile JSON (default stdout)");

  // bench
  std::string sizes_text = "10,25,50,100";
  int repeats = 3;
  auto* bench = app.add_subcommand("bench", "runtime benchmarks");
  bench->require_subcommand(1);
  auto* b_star = bench->add_subcommand("star", "matching-pennies stars with k leaves");
  b_star->add_option("--sizes", sizes_text, "comma-separated leaf counts");
  b_star->add_option("--epsilon", eps_text, "approximation target")->default_str("0.1");
  b_star->add_option("--repeats", repeats, "timings per size");
  b_star->add_option("--variant", variant_name, "simple|refined");
  b_star->add_option("--out", out_path, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (solve->parsed()) {
      const GameDefinition game = parse_game(read_text_file(game_path));
      const SolveRequest req{rational_arg(eps_text, "epsilon"), parse_variant(variant_name), parse_slack(slack_name),
                             root, true};
      if (solver_name != "polymatrix" && solver_name != "normalform") {
        throw InputError("unknown solver '" + solver_name + "' (polymatrix|normalform)");
      }
      const SolveOutcome res = solver_name == "polymatrix" ? solve_polymatrix(game, req) : solve_normalform(game, req);
      emit(out_path, serialize_profile(profile_document(res.profile, solver_name)));
      if (!tables_path.empty()) {
        if (solver_name != "polymatrix") throw InputError("--tables needs the polymatrix solver");
        PolymatrixTreeDP dp(res.normalized.game, res.tree, res.plan, req.slack);
        dp.collect();
        write_text_file(tables_path, serialize_dp_tables(dp, res.tree));
      }
      if (res.plan.epsilon_clamped) {
        std::cerr << "note: grid sized for epsilon " << to_string(res.plan.sizing_epsilon) << " (admissibility bound)\n";
      }
      print_regret(std::cerr, *res.profile.certificate);
      return res.profile.certified ? kOk : kVerifyFailed;
    }
    if (verify->parsed()) {
      const GameDefinition game = parse_game(read_text_file(game_path));
      const ProfileDocument prof = parse_profile(read_text_file(profile_path));
      const Rational eps = rational_arg(eps_text, "epsilon");
      if (eps < 0) throw EpsilonNonpositive();
      const GameDefinition target = raw ? game : normalize_game(game).game;
      const RegretReport r = exact_regret(target, prof.strategies, eps);
      print_regret(std::cout, r);
      return r.all_pass ? kOk : kVerifyFailed;
    }
    if (generate->parsed()) {
      GameDocument doc;
      if (g_star->parsed()) {
        const auto per_leaf = parse_orientation_pattern(orientation, n);
        const bool uniform = orientation == "center-matches" || orientation == "leaves-match";
        doc = uniform ? gen_star_matching_pennies(n, per_leaf.front(), rational_arg(win, "win"), rational_arg(lose, "lose"))
                      : gen_star_matching_pennies(per_leaf, rational_arg(win, "win"), rational_arg(lose, "lose"));
      } else if (g_tree->parsed()) {
        doc = gen_random_tree_polymatrix(n, m, seed, rational_arg(lo, "lo"), rational_arg(hi, "hi"), steps);
      } else if (g_nf->parsed()) {
        doc = gen_random_tree_normalform(n, m, seed, max_degree, steps);
      } else {
        doc = gen_example_player1(rational_arg(b, "b"), rational_arg(c, "c"), rational_arg(gamma, "gamma"));
      }
      emit(out_path, serialize_game(doc));
      return kOk;
    }
    if (csp->parsed()) {
      if (c_export->parsed()) {
        const GameDefinition game = parse_game(read_text_file(game_path));
        const Rational eps = rational_arg(eps_text, "epsilon");
        if (eps <= 0) throw EpsilonNonpositive();
        const Variant variant = parse_variant(variant_name);
        const GameDefinition norm = normalize_game(game).game;
        const StructureStats stats = validate_game(norm);
        std::vector<std::vector<int>> orders;
        try {
          const RootedTree tree = build_rooted_tree(norm, stats, root);
          orders = order_all_cliques(norm, stats, &tree);
        } catch (const NotTree&) {
          orders = order_all_cliques(norm, stats, nullptr);
        }
        const DiscretizationPlan plan =
            variant == Variant::simple ? plan_simple(norm, stats, eps, orders) : plan_refined(norm, stats, eps, orders);
        const CSPInstance inst = build_csp(norm, plan, eps, variant, parse_slack(slack_name), root);
        emit(out_path, serialize_csp(inst));
        std::cerr << inst.variables.size() << " variables, " << inst.constraints.size() << " constraints\n";
        return kOk;
      }
      const CSPInstance inst = parse_csp(read_text_file(csp_path));
      const SolveResult res = solve_backtracking(inst, node_limit);
      std::cerr << "status=" << to_string(res.status) << " nodes=" << res.nodes << "\n";
      if (res.status == SearchStatus::limit_exceeded) return kResource;
      if (res.status == SearchStatus::infeasible) return kInfeasible;
      ProfileDocument doc;
      doc.epsilon = inst.epsilon;
      doc.strategies = profile_from_assignment(inst, res.assignment);
      doc.regret = exact_regret(inst.game, doc.strategies, inst.epsilon);
      doc.solver = "csp";
      doc.variant = inst.variant;
      doc.slack = inst.slack;
      doc.root = inst.root;
      emit(out_path, serialize_profile(doc));
      return doc.regret->all_pass ? kOk : kVerifyFailed;
    }
    if (b_star->parsed()) {
      const Rational eps = rational_arg(eps_text.empty() ? "0.1" : eps_text, "epsilon");
      const BenchResult res = bench_star(int_list(sizes_text), eps, repeats, parse_variant(variant_name));
      emit(out_path, bench_csv(res));
      if (res.slope) std::cerr << "loglog_slope=" << *res.slope << "\n";
      return kOk;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const InfeasibleAtRoot& e) {
    std::cerr << e.what() << "\n";
    return kInfeasible;
  } catch (const TooLarge& e) {
    std::cerr << e.what() << "\n";
    return kResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource limit: out of memory\n";
    return kResource;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInfeasible;
  }
  return kInput;
}
