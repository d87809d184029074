#pragma once

// Instance generators. Every generator is a pure function of its arguments;
// random ones draw from std::mt19937_64 with plain modulo reduction so that
// outputs are identical across standard libraries.

#include <cstdint>
#include <vector>

#include "gmhg/io.hpp"

namespace gmhg {

// center_matches: the center wants to copy each leaf, leaves want to differ.
enum class Orientation { center_matches, leaves_match };
inline constexpr Orientation kDefaultOrientation = Orientation::center_matches;

const char* to_string(Orientation o);
Orientation parse_orientation(std::string_view name);

// Star on n players with center 0. Every edge carries matching pennies: the
// matcher gets `win` on equal actions and `lose` otherwise, the other
// endpoint the reverse.
GameDocument gen_star_matching_pennies(int n, Orientation orientation = kDefaultOrientation, const Rational& win = 1,
                                       const Rational& lose = 0);

// Same star with one orientation per leaf (leaf j = per_leaf[j - 1]).
GameDocument gen_star_matching_pennies(const std::vector<Orientation>& per_leaf, const Rational& win = 1,
                                       const Rational& lose = 0);

// Parses "center-matches", "leaves-match", or a per-leaf pattern of 'C' and
// 'L' characters ("CCLC"). A uniform name yields n - 1 copies.
std::vector<Orientation> parse_orientation_pattern(std::string_view text, int n);

// Uniform labelled tree via a Pruefer sequence. Every edge gets one m x m
// matrix per endpoint with entries lo + (hi - lo) * k / steps, k uniform in
// [0, steps].
GameDocument gen_random_tree_polymatrix(int n, int m, std::uint64_t seed, const Rational& lo = 0,
                                        const Rational& hi = 1, int steps = 20);

// Player 0 with neighbours 1, 2, 3 whose edge matrices realise an affine
// normalization that needs negative entries. Neighbours get zero payoffs.
// Requires b, c > 0 and 0 < gamma < 1/3.
GameDocument gen_example_player1(const Rational& b, const Rational& c, const Rational& gamma);

// Random tree normal-form graphical game: each new node attaches to a random
// earlier node whose degree is below `max_degree`; every player owns one
// table over its closed neighbourhood with entries k / steps.
GameDocument gen_random_tree_normalform(int n, int m, std::uint64_t seed, int max_degree = 2, int steps = 20);

// Tree edges (parent, child) from a Pruefer decoding; exposed for tests.
std::vector<std::pair<int, int>> pruefer_tree(int n, std::uint64_t seed);

}  // namespace gmhg
