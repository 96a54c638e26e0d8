#ifndef HYPEROPT_EXPR_HPP
#define HYPEROPT_EXPR_HPP

#include "hyperopt/hyperreal.hpp"
#include "hyperopt/transcendental.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hyperopt {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression AST over the series field. Immutable; shared subtrees are
/// fine.
struct Expr {
    enum class Kind {
        RealConst,
        InfConst, // a named infinitesimal generator raised to an int power
        Var,      // 1-based variable index
        Add,
        Sub,
        Mul,
        Div,
        IntPow,
        Func
    };

    Kind kind;
    Rat value;       // RealConst
    std::string gen; // InfConst
    long ipow = 1;   // InfConst power (>= 1) or IntPow exponent
    std::size_t var = 0;
    FuncKind func = FuncKind::Sin;
    ExprPtr a, b;
};

// Smart constructors with constant folding.
ExprPtr make_const(Rat v);
ExprPtr make_gen(std::string name, long power = 1);
ExprPtr make_var(std::size_t index);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr a, long k);
ExprPtr make_func(FuncKind f, ExprPtr a);

/// Parses the expression grammar. Variables are x1..x<arity>; any other
/// identifier must name a registered generator or a function.
ExprPtr parse(const std::string &text, std::size_t arity, const Context &ctx);

std::string expr_to_string(const ExprPtr &e);

/// Symbolic partial derivative; infinitesimal constants are constants.
ExprPtr differentiate(const ExprPtr &e, std::size_t var);

/// Substitutes args[i] for variable i+1.
ExprPtr substitute_vars(const ExprPtr &e, const std::vector<ExprPtr> &args);

/// Generators -> 0 specialization (the body of st(f) for expression
/// bodies).
ExprPtr specialize_standard(const ExprPtr &e);

using Point = std::vector<Hyperreal>;

Point standard_point(const ContextPtr &ctx, const std::vector<Rat> &coords);

/// Evaluates the AST at a point of the series field. Transcendental
/// arguments are lifted through their Taylor jet around the standard
/// part.
Hyperreal eval_expr(const ExprPtr &e, const Point &p, const ContextPtr &ctx);

/// Exact rational evaluation at a standard point (transcendentals via the
/// rationalized 64-digit constants). Independent of the series
/// arithmetic; used by oracle-style checks.
Rat eval_expr_rat(const ExprPtr &e, const std::vector<Rat> &p);

/// Internal function: an expression body plus finitely many standard
/// points whose values are overridden by an infinitesimally deviating
/// amount.
class PerturbedFn {
  public:
    PerturbedFn(ExprPtr body, std::size_t arity, ContextPtr ctx);

    /// Adds a point-level override. The value must be infinitely close to
    /// the body's value there.
    void add_override(std::vector<Rat> point, Hyperreal value);

    const ExprPtr &body() const { return body_; }
    std::size_t arity() const { return arity_; }
    const ContextPtr &context() const { return ctx_; }
    const std::vector<std::pair<std::vector<Rat>, Hyperreal>> &
    overrides() const {
        return overrides_;
    }

    nlohmann::json to_json() const;
    static PerturbedFn from_json(const nlohmann::json &j,
                                 const ContextPtr &ctx);

  private:
    ExprPtr body_;
    std::size_t arity_;
    ContextPtr ctx_;
    std::vector<std::pair<std::vector<Rat>, Hyperreal>> overrides_;
};

/// Evaluates f at p; an override point (matched exactly on standard
/// coordinates) returns the override value.
Hyperreal evaluate(const PerturbedFn &f, const Point &p);

/// k-th derivative of f along var, evaluated at a. Overrides are
/// invisible to derivatives.
Hyperreal nth_derivative_at(const PerturbedFn &f, std::size_t var, unsigned k,
                            const Point &a);

/// Pointwise st(f) and its derivatives at a standard point.
Coeff st_function_value(const PerturbedFn &f, const std::vector<Rat> &a);
Coeff st_derivative(const PerturbedFn &f, std::size_t var, unsigned k,
                    const std::vector<Rat> &a);

} // namespace hyperopt

#endif
