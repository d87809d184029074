#include "gmhg/rational.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace gmhg {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer pow10(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

Rational parse_decimal(std::string_view text) {
  bool negative = false;
  std::size_t pos = 0;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string_view body = text.substr(pos);
  long exponent = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = body.substr(e + 1);
    body = body.substr(0, e);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part[0] == '-' || exp_part[0] == '+')) {
      exp_negative = exp_part[0] == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) {
      throw std::invalid_argument("bad exponent in number: " + std::string(text));
    }
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
  }
  std::string digits;
  long frac_digits = 0;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = body.substr(0, dot);
    std::string_view frac_part = body.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw std::invalid_argument("not a decimal number: " + std::string(text));
    }
    digits = std::string(int_part) + std::string(frac_part);
    frac_digits = static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(body)) {
      throw std::invalid_argument("not a decimal number: " + std::string(text));
    }
    digits = std::string(body);
  }
  Integer mantissa(digits, 10);
  if (negative) mantissa = -mantissa;
  long shift = exponent - frac_digits;
  Rational r(mantissa);
  if (shift > 0) {
    r *= Rational(pow10(static_cast<unsigned long>(shift)));
  } else if (shift < 0) {
    r /= Rational(pow10(static_cast<unsigned long>(-shift)));
  }
  r.canonicalize();
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    Rational r = num / den;
    r.canonicalize();
    return r;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& value) {
  Integer den = value.get_den();
  unsigned long twos = 0, fives = 0;
  Integer rest = den;
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 2)) {
    rest /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 5)) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return value.get_str();
  unsigned long places = std::max(twos, fives);
  if (places == 0) return value.get_num().get_str();
  Integer scaled = value.get_num() * (pow10(places) / den);
  bool negative = scaled < 0;
  std::string digits = Integer(abs(scaled)).get_str();
  if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
  digits.insert(digits.size() - places, ".");
  return negative ? "-" + digits : digits;
}

std::int64_t to_int64(const Integer& value) {
  if (!value.fits_slong_p()) throw std::overflow_error("integer does not fit in 64 bits");
  return static_cast<std::int64_t>(value.get_si());
}

std::int64_t floor_to_int64(const Rational& value) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return to_int64(q);
}

std::int64_t ceil_to_int64(const Rational& value) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return to_int64(q);
}

std::int64_t round_half_up(const Rational& value) {
  return floor_to_int64(value + Rational(1, 2));
}

}  // namespace gmhg
