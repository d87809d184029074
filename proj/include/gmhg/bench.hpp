#pragma once

// Runtime harness for the matching-pennies star family.

#include <optional>
#include <string>
#include <vector>

#include "gmhg/discretize.hpp"

namespace gmhg {

struct BenchRow {
  int k = 0;  // number of leaves; the star has k + 1 players
  double median_seconds = 0;
  int s_leaf = 0;
  int s_center = 0;
  std::size_t table_bytes = 0;
  std::vector<double> timings;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::optional<double> slope;  // least-squares fit of log(time) on log(k); needs two sizes
};

inline constexpr const char* kBenchHeader = "k,median_seconds,s_leaf,s_center,table_bytes";

// Each repeat solves and certifies a freshly generated star. Sizes must be
// ascending and at least 1.
BenchResult bench_star(const std::vector<int>& sizes, const Rational& epsilon, int repeats,
                       Variant variant = Variant::simple);

std::string bench_csv(const BenchResult& result);

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gmhg
