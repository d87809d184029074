#pragma once

// Reference computations for tests. Everything here is deliberately naive,
// mostly full joint-action enumeration. Only the library's data types are
// shared.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gmhg/discretize.hpp"
#include "gmhg/game.hpp"

namespace oracle {

using gmhg::GameDefinition;
using gmhg::MixedProfile;
using gmhg::Rational;

// Payoff of `owner` at a full joint action, read straight from the tables.
inline Rational payoff(const GameDefinition& g, int owner, const std::vector<int>& joint) {
  Rational total = 0;
  for (const auto& c : g.cliques) {
    if (c.owner != owner) continue;
    std::size_t idx = 0;
    for (int member : c.members) {
      idx = idx * static_cast<std::size_t>(g.actions[static_cast<std::size_t>(member)]) +
            static_cast<std::size_t>(joint[static_cast<std::size_t>(member)]);
    }
    total += c.payoffs[idx];
  }
  return total;
}

// Calls f(joint) for every joint action of all players.
inline void for_each_joint(const GameDefinition& g, const std::function<void(const std::vector<int>&)>& f) {
  const std::size_t n = g.actions.size();
  std::vector<int> joint(n, 0);
  while (true) {
    f(joint);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++joint[k] < g.actions[k]) break;
      joint[k] = 0;
      if (k == 0) return;
    }
    if (n == 0) return;
  }
}

// Per-player regret by brute force over the whole joint action space.
inline std::vector<Rational> regrets(const GameDefinition& g, const MixedProfile& p) {
  const std::size_t n = g.actions.size();
  std::vector<Rational> expected(n, 0);
  std::vector<std::vector<Rational>> conditional(n);  // E[u_i | a_i = a] * p_i(a)
  for (std::size_t i = 0; i < n; ++i) conditional[i].assign(static_cast<std::size_t>(g.actions[i]), 0);
  for_each_joint(g, [&](const std::vector<int>& joint) {
    for (std::size_t i = 0; i < n; ++i) {
      Rational others = 1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) others *= p[j][static_cast<std::size_t>(joint[j])];
      }
      if (others == 0) continue;
      const Rational u = payoff(g, static_cast<int>(i), joint);
      conditional[i][static_cast<std::size_t>(joint[i])] += others * u;
      expected[i] += others * p[i][static_cast<std::size_t>(joint[i])] * u;
    }
  });
  std::vector<Rational> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = *std::max_element(conditional[i].begin(), conditional[i].end()) - expected[i];
  }
  return out;
}

inline Rational max_regret(const GameDefinition& g, const MixedProfile& p) {
  const auto r = regrets(g, p);
  return r.empty() ? Rational(0) : *std::max_element(r.begin(), r.end());
}

inline std::vector<Rational> grid_to_probs(const std::vector<int>& num, int s) {
  std::vector<Rational> out;
  for (int x : num) {
    Rational v(x, s);
    v.canonicalize();
    out.push_back(v);
  }
  return out;
}

// All non-negative integer vectors of length m summing to s, lexicographic.
inline std::vector<std::vector<int>> compositions(int m, int s) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int left, int rest) {
    if (left == 1) {
      cur.push_back(rest);
      out.push_back(cur);
      cur.pop_back();
      return;
    }
    for (int x = 0; x <= rest; ++x) {
      cur.push_back(x);
      rec(left - 1, rest - x);
      cur.pop_back();
    }
  };
  rec(m, s);
  return out;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Numerator profiles (one vector per player) on grids `s` whose exact
// regret is at most eps, by exhaustive search.
inline std::vector<std::vector<std::vector<int>>> grid_equilibria(const GameDefinition& g, const std::vector<int>& s,
                                                                  const Rational& eps) {
  const std::size_t n = g.actions.size();
  std::vector<std::vector<std::vector<int>>> options(n);
  for (std::size_t i = 0; i < n; ++i) options[i] = compositions(g.actions[i], s[i]);
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    MixedProfile p;
    std::vector<std::vector<int>> nums;
    for (std::size_t i = 0; i < n; ++i) {
      nums.push_back(options[i][pick[i]]);
      p.push_back(grid_to_probs(nums.back(), s[i]));
    }
    if (max_regret(g, p) <= eps) out.push_back(nums);
    std::size_t k = n;
    bool done = true;
    while (k > 0) {
      --k;
      if (++pick[k] < options[k].size()) {
        done = false;
        break;
      }
      pick[k] = 0;
    }
    if (done) break;
  }
  return out;
}

// Solves A x = b exactly; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Exact MSNE of a two-player game given as payoff matrices (row-major,
// A for the row player, B for the column player) by equal-size support
// enumeration. Returns the first equilibrium found.
inline std::optional<std::pair<std::vector<Rational>, std::vector<Rational>>> support_enumeration(
    const std::vector<Rational>& A, const std::vector<Rational>& B, int m1, int m2) {
  auto subsets = [](int m, int k) {
    std::vector<std::vector<int>> out;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      std::vector<int> s;
      for (int a = 0; a < m; ++a) {
        if (mask & (1u << a)) s.push_back(a);
      }
      out.push_back(s);
    }
    return out;
  };
  auto at = [](const std::vector<Rational>& M, int m2_, int r, int c) {
    return M[static_cast<std::size_t>(r * m2_ + c)];
  };
  for (int k = 1; k <= std::min(m1, m2); ++k) {
    for (const auto& s1 : subsets(m1, k)) {
      for (const auto& s2 : subsets(m2, k)) {
        // Column mix q on s2 makes the row player indifferent on s1.
        std::vector<std::vector<Rational>> a(static_cast<std::size_t>(k + 1),
                                             std::vector<Rational>(static_cast<std::size_t>(k + 1), 0));
        std::vector<Rational> rhs(static_cast<std::size_t>(k + 1), 0);
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < k; ++c) a[r][c] = at(A, m2, s1[r], s2[c]);
          a[r][k] = -1;
        }
        for (int c = 0; c < k; ++c) a[k][c] = 1;
        rhs[k] = 1;
        const auto q = solve_linear(a, rhs);
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < k; ++c) a[r][c] = at(B, m2, s1[c], s2[r]);
          a[r][k] = -1;
        }
        for (int c = 0; c < k; ++c) a[k][c] = 1;
        const auto p = solve_linear(a, rhs);
        if (!q || !p) continue;
        std::vector<Rational> x(static_cast<std::size_t>(m1), 0), y(static_cast<std::size_t>(m2), 0);
        bool ok = true;
        for (int t = 0; t < k; ++t) {
          if ((*p)[t] < 0 || (*q)[t] < 0) ok = false;
          x[static_cast<std::size_t>(s1[t])] = (*p)[t];
          y[static_cast<std::size_t>(s2[t])] = (*q)[t];
        }
        if (!ok) continue;
        // Best-response check over all pure actions.
        bool eq = true;
        for (int r = 0; r < m1 && eq; ++r) {
          Rational v = 0;
          for (int c = 0; c < m2; ++c) v += at(A, m2, r, c) * y[c];
          if (v > (*q)[k]) eq = false;
        }
        for (int c = 0; c < m2 && eq; ++c) {
          Rational v = 0;
          for (int r = 0; r < m1; ++r) v += at(B, m2, r, c) * x[r];
          if (v > (*p)[k]) eq = false;
        }
        if (eq) return std::make_pair(x, y);
      }
    }
  }
  return std::nullopt;
}

// First exact (regret zero) profile with every denominator dividing one of
// `denominators`; tried in ascending denominator order.
inline std::optional<MixedProfile> small_denominator_equilibrium(const GameDefinition& g,
                                                                 const std::vector<int>& denominators,
                                                                 std::uint64_t cap = 200000) {
  for (int d : denominators) {
    std::uint64_t count = 1;
    for (int m : g.actions) count *= binomial(static_cast<std::uint64_t>(d + m - 1), static_cast<std::uint64_t>(m - 1));
    if (count > cap) continue;
    const auto found = grid_equilibria(g, std::vector<int>(g.actions.size(), d), 0);
    if (!found.empty()) {
      MixedProfile p;
      for (const auto& nums : found.front()) p.push_back(grid_to_probs(nums, d));
      return p;
    }
  }
  return std::nullopt;
}

}  // namespace oracle
