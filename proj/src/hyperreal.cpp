#include "hyperopt/hyperreal.hpp"

#include "hyperopt/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace hyperopt {

std::string magnitude_class_name(MagnitudeClass c) {
    switch (c) {
    case MagnitudeClass::Zero:
        return "Zero";
    case MagnitudeClass::Infinitesimal:
        return "Infinitesimal";
    case MagnitudeClass::Appreciable:
        return "Appreciable";
    case MagnitudeClass::Infinite:
        return "Infinite";
    }
    return "?";
}

std::string Coeff::str() const {
    if (is_rational())
        return rat_to_string(rat());
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, flt());
    return std::string(buf, res.ptr);
}

namespace {

// Sort, merge equal exponents, drop (near-)zeros and out-of-bound
// exponents, cap the term count. Returns true if anything was discarded.
bool normalize_terms(const Context &ctx, std::vector<Term> &terms,
                     const std::vector<Rat> *extended_bound = nullptr) {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term &a, const Term &b) { return a.exp < b.exp; });
    std::vector<Term> out;
    out.reserve(terms.size());
    bool discarded = false;
    for (auto &t : terms) {
        if (!out.empty() && out.back().exp == t.exp) {
            out.back().coef = out.back().coef + t.coef;
        } else {
            out.push_back(std::move(t));
        }
    }
    std::vector<Term> kept;
    kept.reserve(out.size());
    for (auto &t : out) {
        if (t.coef.is_negligible(ctx))
            continue;
        bool in_bounds = true;
        if (extended_bound) {
            for (std::size_t i = 0; i < t.exp.size(); ++i)
                if (t.exp[i] > (*extended_bound)[i] ||
                    t.exp[i] < -(*extended_bound)[i]) {
                    in_bounds = false;
                    break;
                }
        } else {
            in_bounds = t.exp.within_bound(ctx.exp_bound());
        }
        if (!in_bounds) {
            discarded = true;
            continue;
        }
        kept.push_back(std::move(t));
    }
    if (kept.size() > ctx.max_terms()) {
        kept.erase(kept.begin() + static_cast<long>(ctx.max_terms()),
                   kept.end()); // drop the most infinitesimal tail
        discarded = true;
    }
    terms = std::move(kept);
    return discarded;
}

std::vector<Rat> widened_bound(const Context &ctx, const Exponent &shift) {
    std::vector<Rat> b(ctx.num_generators(), ctx.exp_bound());
    for (std::size_t i = 0; i < shift.size(); ++i)
        b[i] += shift[i] < 0 ? -shift[i] : shift[i];
    return b;
}

std::vector<Term> raw_mul(const std::vector<Term> &a,
                          const std::vector<Term> &b) {
    std::vector<Term> out;
    out.reserve(a.size() * b.size());
    for (const auto &ta : a)
        for (const auto &tb : b)
            out.push_back({ta.exp + tb.exp, ta.coef * tb.coef});
    return out;
}

void check_same_context(const Hyperreal &x, const Hyperreal &y) {
    if (x.context() != y.context())
        throw Error("operands belong to different generator registries");
}

Coeff sqrt_coeff(const Context &ctx, const Coeff &c) {
    if (!c.is_rational())
        return Coeff::floating(std::sqrt(c.flt()));
    const Rat &q = c.rat();
    Int num = numerator(q), den = denominator(q);
    Int rn = sqrt(num), rd = sqrt(den);
    if (rn * rn == num && rd * rd == den)
        return Coeff::rational(Rat(rn, rd));
    using BigFloat = boost::multiprecision::number<
        boost::multiprecision::cpp_bin_float<64>>;
    BigFloat approx = sqrt(BigFloat(q));
    return Coeff::rational(Rat(approx));
}

constexpr int kSeriesCap = 2000;

} // namespace

Hyperreal::Hyperreal(ContextPtr ctx, std::vector<Term> terms, bool truncated)
    : ctx_(std::move(ctx)), terms_(std::move(terms)), truncated_(truncated) {}

Hyperreal Hyperreal::make(ContextPtr ctx,
                          std::vector<std::pair<Exponent, Rat>> in) {
    std::vector<Term> terms;
    terms.reserve(in.size());
    for (auto &[e, q] : in) {
        if (e.size() != ctx->num_generators())
            throw Error("exponent arity does not match the registry");
        if (!e.within_bound(ctx->exp_bound()))
            throw Error("exponent component out of bounds");
        terms.push_back({std::move(e), Coeff::of(*ctx, q)});
    }
    bool discarded = normalize_terms(*ctx, terms);
    return Hyperreal(std::move(ctx), std::move(terms), discarded);
}

Hyperreal Hyperreal::from_rat(ContextPtr ctx, const Rat &q) {
    return from_coeff(std::move(ctx), Coeff::of(*ctx, q));
}

Hyperreal Hyperreal::from_coeff(ContextPtr ctx, const Coeff &c) {
    if (c.is_negligible(*ctx))
        return zero(std::move(ctx));
    std::vector<Term> terms{{Exponent(ctx->num_generators()), c}};
    return Hyperreal(std::move(ctx), std::move(terms), false);
}

Hyperreal Hyperreal::generator(ContextPtr ctx, std::size_t index,
                               const Rat &power) {
    if (index >= ctx->num_generators())
        throw Error("generator index out of range");
    std::vector<Rat> comps(ctx->num_generators(), Rat(0));
    comps[index] = power;
    return monomial(std::move(ctx), Exponent(std::move(comps)),
                    Coeff::of(*ctx, Rat(1)));
}

Hyperreal Hyperreal::monomial(ContextPtr ctx, Exponent e, Coeff c) {
    if (e.size() != ctx->num_generators())
        throw Error("exponent arity does not match the registry");
    if (!e.within_bound(ctx->exp_bound()))
        throw Error("exponent component out of bounds");
    if (c.is_negligible(*ctx))
        return zero(std::move(ctx));
    std::vector<Term> terms{{std::move(e), std::move(c)}};
    return Hyperreal(std::move(ctx), std::move(terms), false);
}

MagnitudeClass Hyperreal::magnitude_class() const {
    if (terms_.empty())
        return MagnitudeClass::Zero;
    switch (terms_.front().exp.lex_sign()) {
    case 1:
        return MagnitudeClass::Infinitesimal;
    case 0:
        return MagnitudeClass::Appreciable;
    default:
        return MagnitudeClass::Infinite;
    }
}

Coeff Hyperreal::standard_part() const {
    if (magnitude_class() == MagnitudeClass::Infinite)
        throw NotNearstandard("standard part of an infinite number");
    for (const auto &t : terms_)
        if (t.exp.is_zero())
            return t.coef;
    return Coeff::zero(*ctx_);
}

bool Hyperreal::is_standard() const {
    return terms_.empty() ||
           (terms_.size() == 1 && terms_.front().exp.is_zero());
}

Hyperreal Hyperreal::operator-() const {
    std::vector<Term> t(terms_);
    for (auto &term : t)
        term.coef = -term.coef;
    return Hyperreal(ctx_, std::move(t), truncated_);
}

Hyperreal Hyperreal::abs_val() const {
    if (!terms_.empty() && terms_.front().coef.sign() < 0)
        return -*this;
    return *this;
}

Hyperreal add(const Hyperreal &x, const Hyperreal &y) {
    check_same_context(x, y);
    std::vector<Term> t(x.terms_);
    t.insert(t.end(), y.terms_.begin(), y.terms_.end());
    bool discarded = normalize_terms(*x.ctx_, t);
    return Hyperreal(x.ctx_, std::move(t),
                     discarded || x.truncated_ || y.truncated_);
}

Hyperreal sub(const Hyperreal &x, const Hyperreal &y) { return add(x, -y); }

Hyperreal mul(const Hyperreal &x, const Hyperreal &y) {
    check_same_context(x, y);
    std::vector<Term> t = raw_mul(x.terms_, y.terms_);
    bool discarded = normalize_terms(*x.ctx_, t);
    return Hyperreal(x.ctx_, std::move(t),
                     discarded || x.truncated_ || y.truncated_);
}

Hyperreal inverse(const Hyperreal &y) {
    if (y.terms_.empty())
        throw DivisionByZero();
    const Context &ctx = *y.ctx_;
    const Exponent lead_exp = y.terms_.front().exp;
    const Coeff lead_coef = y.terms_.front().coef;

    // Relative tail t with lexicographically positive exponents:
    // y = lead * (1 + t).
    std::vector<Term> tail;
    for (std::size_t i = 1; i < y.terms_.size(); ++i)
        tail.push_back(
            {y.terms_[i].exp - lead_exp, y.terms_[i].coef / lead_coef});

    // Neumann series for 1/(1+t) in relative exponents; the bound is
    // widened by |lead_exp| so that no term representable after the final
    // shift is lost.
    std::vector<Rat> bound = widened_bound(ctx, lead_exp);
    bool discarded = false;
    std::vector<Term> acc{{Exponent(ctx.num_generators()), Coeff::one(ctx)}};
    std::vector<Term> tk = acc;
    int k = 0;
    while (!tail.empty()) {
        if (++k > kSeriesCap) {
            discarded = true;
            break;
        }
        std::vector<Term> next = raw_mul(tk, tail);
        discarded |= normalize_terms(ctx, next, &bound);
        tk = std::move(next);
        if (tk.empty())
            break;
        for (const auto &t : tk)
            acc.push_back({t.exp, k % 2 == 1 ? -t.coef : t.coef});
    }
    std::vector<Term> result;
    result.reserve(acc.size());
    for (auto &t : acc)
        result.push_back({t.exp - lead_exp, t.coef / lead_coef});
    discarded |= normalize_terms(ctx, result);
    return Hyperreal(y.ctx_, std::move(result), discarded || y.truncated_);
}

Hyperreal div(const Hyperreal &x, const Hyperreal &y) {
    check_same_context(x, y);
    return mul(x, inverse(y));
}

Hyperreal pow_int(const Hyperreal &x, long k) {
    if (k < 0)
        return inverse(pow_int(x, -k));
    Hyperreal result = Hyperreal::from_rat(x.ctx_, Rat(1));
    Hyperreal base = x;
    unsigned long n = static_cast<unsigned long>(k);
    while (n > 0) {
        if (n & 1)
            result = mul(result, base);
        n >>= 1;
        if (n)
            base = mul(base, base);
    }
    return result;
}

Hyperreal sqrt_abs(const Hyperreal &x) {
    if (x.magnitude_class() == MagnitudeClass::Infinite)
        throw NotNearstandard("sqrt_abs of an infinite number");
    const Hyperreal a = x.abs_val();
    if (a.terms_.empty())
        return Hyperreal::zero(x.ctx_);
    const Context &ctx = *x.ctx_;
    const Exponent lead_exp = a.terms_.front().exp;
    const Coeff lead_coef = a.terms_.front().coef;
    const Exponent half_exp = lead_exp.scaled(Rat(1, 2));

    std::vector<Term> tail;
    for (std::size_t i = 1; i < a.terms_.size(); ++i)
        tail.push_back(
            {a.terms_[i].exp - lead_exp, a.terms_[i].coef / lead_coef});

    // Binomial series sqrt(1+t) = sum binom(1/2,k) t^k.
    std::vector<Rat> bound = widened_bound(ctx, half_exp);
    bool discarded = false;
    std::vector<Term> acc{{Exponent(ctx.num_generators()), Coeff::one(ctx)}};
    std::vector<Term> tk = acc;
    Rat binom(1);
    int k = 0;
    while (!tail.empty()) {
        if (++k > kSeriesCap) {
            discarded = true;
            break;
        }
        binom *= Rat(3 - 2 * k, 2 * k); // binom(1/2,k)/binom(1/2,k-1)
        std::vector<Term> next = raw_mul(tk, tail);
        discarded |= normalize_terms(ctx, next, &bound);
        tk = std::move(next);
        if (tk.empty())
            break;
        Coeff b = Coeff::of(ctx, binom);
        for (const auto &t : tk)
            acc.push_back({t.exp, b * t.coef});
    }
    Coeff s0 = sqrt_coeff(ctx, lead_coef);
    std::vector<Term> result;
    result.reserve(acc.size());
    for (auto &t : acc)
        result.push_back({t.exp + half_exp, s0 * t.coef});
    discarded |= normalize_terms(ctx, result);
    return Hyperreal(x.ctx_, std::move(result), discarded || x.truncated_);
}

int compare(const Hyperreal &x, const Hyperreal &y) {
    check_same_context(x, y);
    std::size_t i = 0, j = 0;
    const auto &a = x.terms_;
    const auto &b = y.terms_;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].exp < b[j].exp))
            return a[i].coef.sign();
        if (i == a.size() || b[j].exp < a[i].exp)
            return -b[j].coef.sign();
        if (a[i].coef != b[j].coef)
            return (b[j].coef < a[i].coef) ? 1 : -1;
        ++i;
        ++j;
    }
    return 0;
}

bool approx_eq(const Hyperreal &x, const Hyperreal &y) {
    auto c = sub(x, y).magnitude_class();
    return c == MagnitudeClass::Zero || c == MagnitudeClass::Infinitesimal;
}

bool maior(const Hyperreal &x, const Hyperreal &y) {
    return compare(x, y) >= 0 || approx_eq(x, y);
}

bool menor(const Hyperreal &x, const Hyperreal &y) {
    return compare(x, y) <= 0 || approx_eq(x, y);
}

bool gg(const Hyperreal &x, const Hyperreal &y) {
    return compare(x, y) > 0 && !approx_eq(x, y);
}

bool ll(const Hyperreal &x, const Hyperreal &y) {
    return compare(x, y) < 0 && !approx_eq(x, y);
}

namespace {

std::string exponent_power_string(const Rat &p) {
    if (denominator(p) == 1 && p > 0)
        return "^" + rat_to_string(p);
    return "^(" + rat_to_string(p) + ")";
}

std::string monomial_string(const Context &ctx, const Exponent &e) {
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0)
            continue;
        if (!s.empty())
            s += "*";
        s += ctx.generators()[i];
        if (e[i] != 1)
            s += exponent_power_string(e[i]);
    }
    return s;
}

} // namespace

std::string Hyperreal::str() const {
    if (terms_.empty())
        return "0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const Term &t = terms_[i];
        Coeff c = t.coef;
        if (i == 0) {
            if (c.sign() < 0) {
                out += "-";
                c = -c;
            }
        } else {
            if (c.sign() < 0) {
                out += " - ";
                c = -c;
            } else {
                out += " + ";
            }
        }
        std::string mono = monomial_string(*ctx_, t.exp);
        if (mono.empty()) {
            out += c.str();
        } else if (c == Coeff::one(*ctx_)) {
            out += mono;
        } else {
            out += c.str() + "*" + mono;
        }
    }
    return out;
}

nlohmann::json Hyperreal::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &t : terms_) {
        nlohmann::json exps = nlohmann::json::array();
        for (const auto &c : t.exp.components())
            exps.push_back(rat_to_string(c));
        terms.push_back({{"exps", exps}, {"coef", t.coef.str()}});
    }
    return terms;
}

Hyperreal Hyperreal::from_json(ContextPtr ctx, const nlohmann::json &j) {
    std::vector<std::pair<Exponent, Rat>> terms;
    for (const auto &tj : j) {
        std::vector<Rat> comps;
        for (const auto &ej : tj.at("exps")) {
            auto q = parse_rational(ej.get<std::string>());
            if (!q)
                throw Error("bad exponent in hyperreal JSON");
            comps.push_back(*q);
        }
        auto c = parse_rational(tj.at("coef").get<std::string>());
        if (!c)
            throw Error("bad coefficient in hyperreal JSON");
        terms.emplace_back(Exponent(std::move(comps)), *c);
    }
    return make(std::move(ctx), std::move(terms));
}

} // namespace hyperopt
