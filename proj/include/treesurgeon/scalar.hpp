#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>

namespace treesurgeon {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

enum class Arithmetic { exact, floating };

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr Arithmetic arithmetic = Arithmetic::exact;
  static constexpr bool exact = true;
  static std::string name() { return "exact"; }
};

template <>
struct ScalarTraits<double> {
  static constexpr Arithmetic arithmetic = Arithmetic::floating;
  static constexpr bool exact = false;
  static std::string name() { return "float"; }
};

template <class S>
concept Scalar = std::is_same_v<S, Rational> || std::is_same_v<S, double>;

template <Scalar S>
constexpr bool is_exact_v = ScalarTraits<S>::exact;

inline std::string to_string(const Rational& q) { return q.str(); }

inline std::string to_string(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline bool is_zero(const Rational& q) { return q.is_zero(); }
inline bool is_zero(double x) { return x == 0.0; }

inline Rational abs_value(const Rational& q) { return q < 0 ? Rational(-q) : q; }
inline double abs_value(double x) { return std::fabs(x); }

inline int sign_of(const Rational& q) { return q.sign(); }
inline int sign_of(double x) { return (x > 0) - (x < 0); }

/// Equality for identity checks: exact in rational mode, relative in float mode.
inline bool nearly_equal(const Rational& a, const Rational& b, double = 0.0) { return a == b; }
inline bool nearly_equal(double a, double b, double rel_tol = 1e-9) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) <= rel_tol * scale;
}

}  // namespace treesurgeon
