#ifndef HYPEROPT_RATIONAL_HPP
#define HYPEROPT_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace hyperopt {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Prints a rational in lowest terms as `p` or `p/q`.
std::string rat_to_string(const Rat &q);

/// Parses `p`, `p/q` or a decimal literal like `0.25` / `-3.5e2`.
/// Returns nullopt on malformed input.
std::optional<Rat> parse_rational(const std::string &text);

double rat_to_double(const Rat &q);

/// Rational with the smallest denominator in [lo, hi] (Stern-Brocot walk).
Rat simplest_rational_in(const Rat &lo, const Rat &hi);

/// 2^-k as a rational.
Rat pow2_inv(unsigned k);

} // namespace hyperopt

#endif
