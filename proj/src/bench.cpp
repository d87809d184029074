#include "gmhg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gmhg/errors.hpp"
#include "gmhg/generators.hpp"
#include "gmhg/tree_dp.hpp"

namespace gmhg {

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-9));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

BenchResult bench_star(const std::vector<int>& sizes, const Rational& epsilon, int repeats, Variant variant) {
  if (repeats < 1) throw ParameterOutOfRange("repeats must be >= 1");
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ParameterOutOfRange("sizes must be ascending");
  BenchResult out;
  for (int k : sizes) {
    if (k < 1) throw ParameterOutOfRange("star sizes must be >= 1");
    const GameDefinition game = gen_star_matching_pennies(k + 1).game;
    BenchRow row;
    row.k = k;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const SolveOutcome res = solve_polymatrix(game, {epsilon, variant, SlackMode::proven, 0, true});
      const auto t1 = std::chrono::steady_clock::now();
      if (!res.profile.certified) throw Error("benchmark profile failed certification");
      row.timings.push_back(std::chrono::duration<double>(t1 - t0).count());
      row.s_center = res.plan.at(0).grid.s;
      row.s_leaf = res.plan.at(1).grid.s;
      row.table_bytes = res.profile.table_bytes;
    }
    std::vector<double> t = row.timings;
    std::sort(t.begin(), t.end());
    row.median_seconds = t.size() % 2 ? t[t.size() / 2] : (t[t.size() / 2 - 1] + t[t.size() / 2]) / 2;
    out.rows.push_back(std::move(row));
  }
  std::vector<double> xs, ys;
  for (const BenchRow& r : out.rows) {
    xs.push_back(r.k);
    ys.push_back(r.median_seconds);
  }
  out.slope = loglog_slope(xs, ys);
  return out;
}

std::string bench_csv(const BenchResult& result) {
  std::ostringstream ss;
  ss << kBenchHeader << "\n";
  ss.precision(6);
  for (const BenchRow& r : result.rows) {
    ss << r.k << "," << std::fixed << r.median_seconds << std::defaultfloat << "," << r.s_leaf << "," << r.s_center
       << "," << r.table_bytes << "\n";
  }
  return ss.str();
}

}  // namespace gmhg
