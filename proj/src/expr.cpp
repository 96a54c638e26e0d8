#include "hyperopt/expr.hpp"

#include "hyperopt/errors.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace hyperopt {

namespace {

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

bool is_const(const ExprPtr &e, const Rat *v = nullptr) {
    return e->kind == Expr::Kind::RealConst && (!v || e->value == *v);
}

const Rat kZero(0), kOne(1);

} // namespace

ExprPtr make_const(Rat v) {
    Expr e;
    e.kind = Expr::Kind::RealConst;
    e.value = std::move(v);
    return node(std::move(e));
}

ExprPtr make_gen(std::string name, long power) {
    if (power < 1)
        throw Error("generator power must be >= 1");
    Expr e;
    e.kind = Expr::Kind::InfConst;
    e.gen = std::move(name);
    e.ipow = power;
    return node(std::move(e));
}

ExprPtr make_var(std::size_t index) {
    Expr e;
    e.kind = Expr::Kind::Var;
    e.var = index;
    return node(std::move(e));
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b))
        return make_const(a->value + b->value);
    if (is_const(a, &kZero))
        return b;
    if (is_const(b, &kZero))
        return a;
    Expr e;
    e.kind = Expr::Kind::Add;
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b))
        return make_const(a->value - b->value);
    if (is_const(b, &kZero))
        return a;
    Expr e;
    e.kind = Expr::Kind::Sub;
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b))
        return make_const(a->value * b->value);
    if (is_const(a, &kZero) || is_const(b, &kZero))
        return make_const(Rat(0));
    if (is_const(a, &kOne))
        return b;
    if (is_const(b, &kOne))
        return a;
    Expr e;
    e.kind = Expr::Kind::Mul;
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
    if (is_const(b) && b->value == 0)
        throw Error("division by the zero constant");
    if (is_const(a) && is_const(b))
        return make_const(a->value / b->value);
    if (is_const(a, &kZero))
        return make_const(Rat(0));
    if (is_const(b, &kOne))
        return a;
    Expr e;
    e.kind = Expr::Kind::Div;
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}

ExprPtr make_pow(ExprPtr a, long k) {
    if (k == 0)
        return make_const(Rat(1));
    if (k == 1)
        return a;
    if (is_const(a)) {
        if (a->value == 0 && k < 0)
            throw Error("zero raised to a negative power");
        Rat r(1);
        Rat base = k < 0 ? Rat(1) / a->value : a->value;
        for (long i = 0; i < (k < 0 ? -k : k); ++i)
            r *= base;
        return make_const(r);
    }
    if (a->kind == Expr::Kind::InfConst && k > 0)
        return make_gen(a->gen, a->ipow * k);
    Expr e;
    e.kind = Expr::Kind::IntPow;
    e.a = std::move(a);
    e.ipow = k;
    return node(std::move(e));
}

ExprPtr make_func(FuncKind f, ExprPtr a) {
    Expr e;
    e.kind = Expr::Kind::Func;
    e.func = f;
    e.a = std::move(a);
    return node(std::move(e));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string &text;
    std::size_t pos = 0;
    std::size_t arity;
    const Context &ctx;

    void skip_ws() {
        while (pos < text.size() &&
               std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    ExprPtr parse_expr() {
        skip_ws();
        bool neg = false;
        if (eat('-'))
            neg = true;
        else
            eat('+');
        ExprPtr e = parse_term();
        if (neg)
            e = make_sub(make_const(Rat(0)), e);
        for (;;) {
            if (eat('+'))
                e = make_add(e, parse_term());
            else if (eat('-'))
                e = make_sub(e, parse_term());
            else
                break;
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            if (eat('*'))
                e = make_mul(e, parse_factor());
            else if (eat('/'))
                e = make_div(e, parse_factor());
            else
                break;
        }
        return e;
    }

    ExprPtr parse_factor() {
        ExprPtr base = parse_base();
        if (eat('^')) {
            long k = parse_intlit();
            try {
                base = make_pow(base, k);
            } catch (const Error &err) {
                throw ParseError(err.what(), pos);
            }
        }
        return base;
    }

    long parse_intlit() {
        skip_ws();
        bool paren = eat('(');
        skip_ws();
        bool neg = eat('-');
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos == start)
            throw ParseError("expected integer exponent", start);
        long v = std::stol(text.substr(start, pos - start));
        if (paren && !eat(')'))
            throw ParseError("expected ')'", pos);
        return neg ? -v : v;
    }

    ExprPtr parse_base() {
        skip_ws();
        if (pos >= text.size())
            throw ParseError("unexpected end of expression", pos);
        char c = text[pos];
        if (c == '(') {
            ++pos;
            ExprPtr e = parse_expr();
            if (!eat(')'))
                throw ParseError("expected ')'", pos);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    ExprPtr parse_number() {
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '.'))
            ++pos;
        auto q = parse_rational(text.substr(start, pos - start));
        if (!q)
            throw ParseError("malformed number", start);
        return make_const(*q);
    }

    ExprPtr parse_ident() {
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '_'))
            ++pos;
        std::string name = text.substr(start, pos - start);
        static const std::pair<const char *, FuncKind> funcs[] = {
            {"sin", FuncKind::Sin},
            {"cos", FuncKind::Cos},
            {"exp", FuncKind::Exp},
            {"log", FuncKind::Log}};
        for (auto &[fname, fk] : funcs) {
            if (name == fname) {
                if (!eat('('))
                    throw ParseError("expected '(' after " + name, pos);
                ExprPtr arg = parse_expr();
                if (!eat(')'))
                    throw ParseError("expected ')'", pos);
                return make_func(fk, arg);
            }
        }
        if (ctx.generator_index(name) >= 0)
            return make_gen(name);
        if (name.size() >= 2 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(), [](char ch) {
                return std::isdigit(static_cast<unsigned char>(ch));
            })) {
            std::size_t idx = std::stoul(name.substr(1));
            if (idx == 0 || idx > arity)
                throw ParseError("variable " + name +
                                     " outside declared arity " +
                                     std::to_string(arity),
                                 start);
            return make_var(idx);
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

} // namespace

ExprPtr parse(const std::string &text, std::size_t arity, const Context &ctx) {
    Parser p{text, 0, arity, ctx};
    ExprPtr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        throw ParseError("trailing input", p.pos);
    return e;
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

int precedence(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
        return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
        return 2;
    case Expr::Kind::IntPow:
        return 3;
    default:
        return 4;
    }
}

void print_expr(const ExprPtr &e, std::string &out, int parent_prec) {
    int prec = precedence(*e);
    bool need_paren = prec < parent_prec;
    if (e->kind == Expr::Kind::RealConst && e->value < 0)
        need_paren = parent_prec > 1;
    if (need_paren)
        out += "(";
    switch (e->kind) {
    case Expr::Kind::RealConst:
        out += rat_to_string(e->value);
        break;
    case Expr::Kind::InfConst:
        out += e->gen;
        if (e->ipow != 1)
            out += "^" + std::to_string(e->ipow);
        break;
    case Expr::Kind::Var:
        out += "x" + std::to_string(e->var);
        break;
    case Expr::Kind::Add:
        print_expr(e->a, out, 1);
        out += " + ";
        print_expr(e->b, out, 2);
        break;
    case Expr::Kind::Sub:
        print_expr(e->a, out, 1);
        out += " - ";
        print_expr(e->b, out, 2);
        break;
    case Expr::Kind::Mul:
        print_expr(e->a, out, 2);
        out += "*";
        print_expr(e->b, out, 3);
        break;
    case Expr::Kind::Div:
        print_expr(e->a, out, 2);
        out += "/";
        print_expr(e->b, out, 3);
        break;
    case Expr::Kind::IntPow:
        print_expr(e->a, out, 4);
        if (e->ipow < 0)
            out += "^(" + std::to_string(e->ipow) + ")";
        else
            out += "^" + std::to_string(e->ipow);
        break;
    case Expr::Kind::Func:
        out += func_name(e->func) + "(";
        print_expr(e->a, out, 0);
        out += ")";
        break;
    }
    if (need_paren)
        out += ")";
}

} // namespace

std::string expr_to_string(const ExprPtr &e) {
    std::string out;
    print_expr(e, out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic differentiation
// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr &e, std::size_t var) {
    switch (e->kind) {
    case Expr::Kind::RealConst:
    case Expr::Kind::InfConst:
        return make_const(Rat(0));
    case Expr::Kind::Var:
        return make_const(Rat(e->var == var ? 1 : 0));
    case Expr::Kind::Add:
        return make_add(differentiate(e->a, var), differentiate(e->b, var));
    case Expr::Kind::Sub:
        return make_sub(differentiate(e->a, var), differentiate(e->b, var));
    case Expr::Kind::Mul:
        return make_add(make_mul(differentiate(e->a, var), e->b),
                        make_mul(e->a, differentiate(e->b, var)));
    case Expr::Kind::Div:
        return make_div(
            make_sub(make_mul(differentiate(e->a, var), e->b),
                     make_mul(e->a, differentiate(e->b, var))),
            make_pow(e->b, 2));
    case Expr::Kind::IntPow:
        return make_mul(
            make_mul(make_const(Rat(e->ipow)), make_pow(e->a, e->ipow - 1)),
            differentiate(e->a, var));
    case Expr::Kind::Func: {
        ExprPtr inner = differentiate(e->a, var);
        switch (e->func) {
        case FuncKind::Sin:
            return make_mul(make_func(FuncKind::Cos, e->a), inner);
        case FuncKind::Cos:
            return make_mul(
                make_sub(make_const(Rat(0)), make_func(FuncKind::Sin, e->a)),
                inner);
        case FuncKind::Exp:
            return make_mul(make_func(FuncKind::Exp, e->a), inner);
        case FuncKind::Log:
            return make_div(inner, e->a);
        }
    }
    }
    throw Error("unreachable expression kind");
}

ExprPtr substitute_vars(const ExprPtr &e, const std::vector<ExprPtr> &args) {
    switch (e->kind) {
    case Expr::Kind::RealConst:
    case Expr::Kind::InfConst:
        return e;
    case Expr::Kind::Var:
        if (e->var == 0 || e->var > args.size())
            throw Error("substitution arity mismatch");
        return args[e->var - 1];
    case Expr::Kind::Add:
        return make_add(substitute_vars(e->a, args),
                        substitute_vars(e->b, args));
    case Expr::Kind::Sub:
        return make_sub(substitute_vars(e->a, args),
                        substitute_vars(e->b, args));
    case Expr::Kind::Mul:
        return make_mul(substitute_vars(e->a, args),
                        substitute_vars(e->b, args));
    case Expr::Kind::Div:
        return make_div(substitute_vars(e->a, args),
                        substitute_vars(e->b, args));
    case Expr::Kind::IntPow:
        return make_pow(substitute_vars(e->a, args), e->ipow);
    case Expr::Kind::Func:
        return make_func(e->func, substitute_vars(e->a, args));
    }
    throw Error("unreachable expression kind");
}

ExprPtr specialize_standard(const ExprPtr &e) {
    switch (e->kind) {
    case Expr::Kind::RealConst:
    case Expr::Kind::Var:
        return e;
    case Expr::Kind::InfConst:
        return make_const(Rat(0));
    case Expr::Kind::Add:
        return make_add(specialize_standard(e->a), specialize_standard(e->b));
    case Expr::Kind::Sub:
        return make_sub(specialize_standard(e->a), specialize_standard(e->b));
    case Expr::Kind::Mul:
        return make_mul(specialize_standard(e->a), specialize_standard(e->b));
    case Expr::Kind::Div:
        return make_div(specialize_standard(e->a), specialize_standard(e->b));
    case Expr::Kind::IntPow:
        return make_pow(specialize_standard(e->a), e->ipow);
    case Expr::Kind::Func:
        return make_func(e->func, specialize_standard(e->a));
    }
    throw Error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Point standard_point(const ContextPtr &ctx, const std::vector<Rat> &coords) {
    Point p;
    p.reserve(coords.size());
    for (const auto &q : coords)
        p.push_back(Hyperreal::from_rat(ctx, q));
    return p;
}

namespace {

constexpr long kLiftCap = 256;

Hyperreal lift_function(FuncKind f, const Hyperreal &u, const ContextPtr &ctx) {
    if (u.magnitude_class() == MagnitudeClass::Infinite)
        throw EvalError("transcendental argument is infinite");
    Coeff a = u.standard_part();
    Hyperreal h = sub(u, Hyperreal::from_coeff(ctx, a));
    if (h.is_zero())
        return Hyperreal::from_coeff(ctx, func_value(*ctx, f, a));
    // Leading exponent of h is lexicographically positive; the jet stops
    // once j * (largest component magnitude) exceeds the exponent bound.
    Rat p(0);
    for (const auto &c : h.leading().exp.components()) {
        Rat m = c < 0 ? Rat(-c) : c;
        if (m > p)
            p = m;
    }
    Rat ratio = ctx->exp_bound() / p;
    long order = (numerator(ratio) / denominator(ratio)).convert_to<long>() + 1;
    if (order > kLiftCap)
        order = kLiftCap;
    // Horner over the jet coefficients F^(j)(a)/j!.
    Rat fact(1);
    for (long j = 2; j <= order; ++j)
        fact *= j;
    Hyperreal s = Hyperreal::zero(ctx);
    for (long j = order; j >= 0; --j) {
        Coeff cj =
            func_derivative(*ctx, f, static_cast<unsigned>(j), a) /
            Coeff::of(*ctx, fact);
        s = add(mul(s, h), Hyperreal::from_coeff(ctx, cj));
        if (j > 0)
            fact /= j;
    }
    return s;
}

} // namespace

Hyperreal eval_expr(const ExprPtr &e, const Point &p, const ContextPtr &ctx) {
    switch (e->kind) {
    case Expr::Kind::RealConst:
        return Hyperreal::from_rat(ctx, e->value);
    case Expr::Kind::InfConst: {
        int idx = ctx->generator_index(e->gen);
        if (idx < 0)
            throw EvalError("unregistered generator: " + e->gen);
        return Hyperreal::generator(ctx, static_cast<std::size_t>(idx),
                                    Rat(e->ipow));
    }
    case Expr::Kind::Var:
        if (e->var == 0 || e->var > p.size())
            throw EvalError("variable index outside the point arity");
        return p[e->var - 1];
    case Expr::Kind::Add:
        return add(eval_expr(e->a, p, ctx), eval_expr(e->b, p, ctx));
    case Expr::Kind::Sub:
        return sub(eval_expr(e->a, p, ctx), eval_expr(e->b, p, ctx));
    case Expr::Kind::Mul:
        return mul(eval_expr(e->a, p, ctx), eval_expr(e->b, p, ctx));
    case Expr::Kind::Div:
        return div(eval_expr(e->a, p, ctx), eval_expr(e->b, p, ctx));
    case Expr::Kind::IntPow:
        return pow_int(eval_expr(e->a, p, ctx), e->ipow);
    case Expr::Kind::Func:
        return lift_function(e->func, eval_expr(e->a, p, ctx), ctx);
    }
    throw Error("unreachable expression kind");
}

Rat eval_expr_rat(const ExprPtr &e, const std::vector<Rat> &p) {
    static const Context rational_ctx({"eps"}, Mode::Rational);
    switch (e->kind) {
    case Expr::Kind::RealConst:
        return e->value;
    case Expr::Kind::InfConst:
        throw EvalError("generator in a standard-only evaluation");
    case Expr::Kind::Var:
        if (e->var == 0 || e->var > p.size())
            throw EvalError("variable index outside the point arity");
        return p[e->var - 1];
    case Expr::Kind::Add:
        return eval_expr_rat(e->a, p) + eval_expr_rat(e->b, p);
    case Expr::Kind::Sub:
        return eval_expr_rat(e->a, p) - eval_expr_rat(e->b, p);
    case Expr::Kind::Mul:
        return eval_expr_rat(e->a, p) * eval_expr_rat(e->b, p);
    case Expr::Kind::Div: {
        Rat den = eval_expr_rat(e->b, p);
        if (den == 0)
            throw EvalError("division by zero");
        return eval_expr_rat(e->a, p) / den;
    }
    case Expr::Kind::IntPow: {
        Rat base = eval_expr_rat(e->a, p);
        long k = e->ipow;
        if (k < 0) {
            if (base == 0)
                throw EvalError("division by zero");
            base = Rat(1) / base;
            k = -k;
        }
        Rat r(1);
        for (long i = 0; i < k; ++i)
            r *= base;
        return r;
    }
    case Expr::Kind::Func:
        return func_value(rational_ctx, e->func,
                          Coeff::rational(eval_expr_rat(e->a, p)))
            .rat();
    }
    throw Error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// PerturbedFn
// ---------------------------------------------------------------------------

PerturbedFn::PerturbedFn(ExprPtr body, std::size_t arity, ContextPtr ctx)
    : body_(std::move(body)), arity_(arity), ctx_(std::move(ctx)) {
    if (arity_ == 0)
        throw Error("arity must be positive");
}

void PerturbedFn::add_override(std::vector<Rat> point, Hyperreal value) {
    if (point.size() != arity_)
        throw Error("override point arity mismatch");
    for (const auto &[existing, v] : overrides_)
        if (existing == point)
            throw Error("duplicate override point");
    Hyperreal base = eval_expr(body_, standard_point(ctx_, point), ctx_);
    if (!approx_eq(value, base))
        throw Error("override value must deviate only infinitesimally from "
                    "the body");
    overrides_.emplace_back(std::move(point), std::move(value));
}

nlohmann::json PerturbedFn::to_json() const {
    nlohmann::json ovs = nlohmann::json::array();
    for (const auto &[pt, val] : overrides_) {
        nlohmann::json pj = nlohmann::json::array();
        for (const auto &q : pt)
            pj.push_back(rat_to_string(q));
        ovs.push_back({{"point", pj}, {"value", val.to_json()}});
    }
    return {{"body", expr_to_string(body_)},
            {"arity", arity_},
            {"overrides", ovs}};
}

PerturbedFn PerturbedFn::from_json(const nlohmann::json &j,
                                   const ContextPtr &ctx) {
    std::size_t arity = j.at("arity").get<std::size_t>();
    ExprPtr body = parse(j.at("body").get<std::string>(), arity, *ctx);
    PerturbedFn f(std::move(body), arity, ctx);
    if (j.contains("overrides")) {
        for (const auto &ov : j.at("overrides")) {
            std::vector<Rat> pt;
            for (const auto &q : ov.at("point")) {
                auto r = parse_rational(q.get<std::string>());
                if (!r)
                    throw Error("bad override point in JSON");
                pt.push_back(*r);
            }
            f.add_override(std::move(pt),
                           Hyperreal::from_json(ctx, ov.at("value")));
        }
    }
    return f;
}

namespace {

std::optional<std::vector<Rat>> standard_coords(const Point &p) {
    std::vector<Rat> out;
    out.reserve(p.size());
    for (const auto &c : p) {
        if (!c.is_standard())
            return std::nullopt;
        Coeff sp = c.standard_part();
        if (!sp.is_rational())
            return std::nullopt;
        out.push_back(sp.rat());
    }
    return out;
}

} // namespace

Hyperreal evaluate(const PerturbedFn &f, const Point &p) {
    if (p.size() != f.arity())
        throw EvalError("point arity mismatch");
    if (!f.overrides().empty()) {
        if (auto coords = standard_coords(p)) {
            for (const auto &[pt, val] : f.overrides())
                if (pt == *coords)
                    return val;
        }
    }
    return eval_expr(f.body(), p, f.context());
}

Hyperreal nth_derivative_at(const PerturbedFn &f, std::size_t var, unsigned k,
                            const Point &a) {
    if (var == 0 || var > f.arity())
        throw EvalError("derivative variable outside arity");
    ExprPtr d = f.body();
    for (unsigned i = 0; i < k; ++i)
        d = differentiate(d, var);
    return eval_expr(d, a, f.context());
}

Coeff st_function_value(const PerturbedFn &f, const std::vector<Rat> &a) {
    return evaluate(f, standard_point(f.context(), a)).standard_part();
}

Coeff st_derivative(const PerturbedFn &f, std::size_t var, unsigned k,
                    const std::vector<Rat> &a) {
    return nth_derivative_at(f, var, k, standard_point(f.context(), a))
        .standard_part();
}

} // namespace hyperopt
