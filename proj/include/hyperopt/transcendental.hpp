#ifndef HYPEROPT_TRANSCENDENTAL_HPP
#define HYPEROPT_TRANSCENDENTAL_HPP

#include "hyperopt/coeff.hpp"
#include "hyperopt/context.hpp"

#include <string>

namespace hyperopt {

enum class FuncKind { Sin, Cos, Exp, Log };

std::string func_name(FuncKind f);

/// F(a) at a standard coefficient. Rational mode computes to 64 decimal
/// digits and rationalizes; float mode uses binary64. Log requires a > 0.
Coeff func_value(const Context &ctx, FuncKind f, const Coeff &a);

/// j-th derivative F^(j)(a), j >= 0. Log derivatives for j >= 1 are exact
/// rationals.
Coeff func_derivative(const Context &ctx, FuncKind f, unsigned j,
                      const Coeff &a);

} // namespace hyperopt

#endif
