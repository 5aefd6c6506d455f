#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "cftp/common.hpp"

namespace cftp {

using Rational = mpq_class;

// Parses "p", "-p" or "p/q" with integer p, q. Returns nullopt on anything
// else (decimals are rejected on purpose; model inputs must be exact).
inline std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t slash = text.find('/');
  const std::string num = text.substr(0, slash == std::string::npos ? text.size() : slash);
  const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  auto is_int = [](const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  if (!is_int(num) || !is_int(den)) return std::nullopt;
  mpz_class n(num), d(den);
  if (d == 0) return std::nullopt;
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

// floor(r) as an integer, which must fit in int64.
inline std::int64_t floor_to_int(const Rational& r) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  CFTP_CHECK(q.fits_slong_p(), "rational floor does not fit in a machine integer");
  return static_cast<std::int64_t>(q.get_si());
}

// ceil(r) as an integer, which must fit in int64.
inline std::int64_t ceil_to_int(const Rational& r) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  CFTP_CHECK(q.fits_slong_p(), "rational ceiling does not fit in a machine integer");
  return static_cast<std::int64_t>(q.get_si());
}

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

}  // namespace cftp
