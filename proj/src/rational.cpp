#include "triagebench/rational.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace triagebench {

std::string format_fixed4(const Rational& r) {
  std::int64_t num = r.numerator();
  std::int64_t den = r.denominator();  // boost keeps den > 0
  bool negative = num < 0;
  if (negative) num = -num;

  // Scale to 1e4, then round the remainder half-to-even.
  std::int64_t scaled = num * 10000;
  std::int64_t q = scaled / den;
  std::int64_t rem = scaled % den;
  if (2 * rem > den || (2 * rem == den && (q % 2) == 1)) ++q;
  if (q == 0) negative = false;  // never print -0.0000

  std::int64_t whole = q / 10000;
  std::int64_t frac = q % 10000;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", negative ? "-" : "",
                static_cast<long long>(whole), static_cast<long long>(frac));
  return buf;
}

std::string format_fixed4(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace triagebench
