#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace gmhg {

using Rational = mpq_class;
using Integer = mpz_class;

// Parses "12", "-0.125", "1.5e-3" or "3/4" into an exact rational.
// Throws std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

// Terminating decimals are printed in plain decimal form ("0.1", "-2.5"),
// everything else as a reduced fraction ("1/3").
std::string to_string(const Rational& value);

std::int64_t floor_to_int64(const Rational& value);
std::int64_t ceil_to_int64(const Rational& value);

// floor(value + 1/2): nearest integer, exact halves go up.
std::int64_t round_half_up(const Rational& value);

std::int64_t to_int64(const Integer& value);

}  // namespace gmhg
