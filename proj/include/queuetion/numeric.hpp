#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace queuetion {

// Exact scalar for rational-arithmetic mode. Floating mode uses plain double.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Comparison policy per scalar. Exact scalars ignore the tolerance argument;
// doubles use a relative tolerance against max(1, |a|, |b|).
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static Rational default_tolerance() { return Rational(0); }
  static bool finite(const Rational&) { return true; }
  static bool close(const Rational& a, const Rational& b, const Rational&) {
    return a == b;
  }
  // a <= b up to tolerance
  static bool leq(const Rational& a, const Rational& b, const Rational&) {
    return a <= b;
  }
  // strictly positive beyond tolerance
  static bool positive(const Rational& a, const Rational&) { return a > 0; }
  static std::string str(const Rational& a) { return a.str(); }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double default_tolerance() { return 1e-9; }
  static bool finite(double a) { return std::isfinite(a); }
  static double span(double a, double b) {
    return std::max({1.0, std::fabs(a), std::fabs(b)});
  }
  static bool close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * span(a, b);
  }
  static bool leq(double a, double b, double tol) {
    return a <= b + tol * span(a, b);
  }
  static bool positive(double a, double tol) {
    return a > tol * std::max(1.0, std::fabs(a));
  }
  static std::string str(double a) { return std::to_string(a); }
};

// True when a whole-valued rational fits a JSON double exactly.
inline bool fits_json_int(const Rational& a) {
  if (denominator(a) != 1) return false;
  const BigInt n = numerator(a);
  static const BigInt lim = BigInt(1) << 53;
  return n <= lim && n >= -lim;
}

}  // namespace queuetion
