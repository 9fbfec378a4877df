#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

namespace triagebench {

// Metric arithmetic stays exact until render time; decimals appear only in
// emitted files.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) /
         static_cast<double>(r.denominator());
}

// Fixed 4-decimal rendering with half-even rounding, computed on the exact
// rational so goldens are platform-stable.
std::string format_fixed4(const Rational& r);

// Same rendering for floating statistics (kappa, correlations).
std::string format_fixed4(double v);

}  // namespace triagebench
