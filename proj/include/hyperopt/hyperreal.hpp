#ifndef HYPEROPT_HYPERREAL_HPP
#define HYPEROPT_HYPERREAL_HPP

#include "hyperopt/coeff.hpp"
#include "hyperopt/context.hpp"
#include "hyperopt/rational.hpp"

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hyperopt {

/// Monomial exponent: one exact rational per registered generator.
/// Exponents are compared lexicographically scanning from the last
/// component, which makes the first generator the dominant magnitude
/// scale: every positive power of a later generator is infinitesimal
/// relative to every positive power of an earlier one.
class Exponent {
  public:
    explicit Exponent(std::size_t n) : comps_(n, Rat(0)) {}
    explicit Exponent(std::vector<Rat> comps) : comps_(std::move(comps)) {}

    std::size_t size() const { return comps_.size(); }
    const Rat &operator[](std::size_t i) const { return comps_[i]; }
    const std::vector<Rat> &components() const { return comps_; }

    bool is_zero() const {
        for (const auto &c : comps_)
            if (c != 0)
                return false;
        return true;
    }
    /// -1 / 0 / +1 against the zero tuple (last component decides first).
    int lex_sign() const {
        for (auto it = comps_.rbegin(); it != comps_.rend(); ++it) {
            if (*it > 0)
                return 1;
            if (*it < 0)
                return -1;
        }
        return 0;
    }
    bool within_bound(const Rat &bound) const {
        for (const auto &c : comps_)
            if (c > bound || c < -bound)
                return false;
        return true;
    }

    Exponent operator+(const Exponent &o) const {
        std::vector<Rat> r(comps_);
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] += o.comps_[i];
        return Exponent(std::move(r));
    }
    Exponent operator-(const Exponent &o) const {
        std::vector<Rat> r(comps_);
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= o.comps_[i];
        return Exponent(std::move(r));
    }
    Exponent operator-() const {
        std::vector<Rat> r(comps_);
        for (auto &c : r)
            c = -c;
        return Exponent(std::move(r));
    }
    Exponent scaled(const Rat &k) const {
        std::vector<Rat> r(comps_);
        for (auto &c : r)
            c *= k;
        return Exponent(std::move(r));
    }

    std::strong_ordering operator<=>(const Exponent &o) const {
        for (std::size_t i = comps_.size(); i-- > 0;) {
            if (comps_[i] < o.comps_[i])
                return std::strong_ordering::less;
            if (comps_[i] > o.comps_[i])
                return std::strong_ordering::greater;
        }
        return std::strong_ordering::equal;
    }
    bool operator==(const Exponent &o) const { return comps_ == o.comps_; }

  private:
    std::vector<Rat> comps_;
};

enum class MagnitudeClass { Zero, Infinitesimal, Appreciable, Infinite };

std::string magnitude_class_name(MagnitudeClass c);

struct Term {
    Exponent exp;
    Coeff coef;
};

/// Truncated series over the registered infinitesimal generators, ordered
/// by the leading (smallest-exponent) term. The computable stand-in for a
/// hyperreal number.
class Hyperreal {
  public:
    /// Normalizing constructor. Throws on exponents outside
    /// [-exp_bound, exp_bound]; an over-long term list is truncated from
    /// the most-infinitesimal end and flagged.
    static Hyperreal make(ContextPtr ctx,
                          std::vector<std::pair<Exponent, Rat>> terms);

    static Hyperreal zero(ContextPtr ctx) { return Hyperreal(std::move(ctx)); }
    static Hyperreal from_rat(ContextPtr ctx, const Rat &q);
    static Hyperreal from_coeff(ContextPtr ctx, const Coeff &c);
    /// The monomial gen^power for a registered generator.
    static Hyperreal generator(ContextPtr ctx, std::size_t index,
                               const Rat &power = Rat(1));
    static Hyperreal monomial(ContextPtr ctx, Exponent e, Coeff c);

    const ContextPtr &context() const { return ctx_; }
    const std::vector<Term> &terms() const { return terms_; }
    bool truncated() const { return truncated_; }
    bool is_zero() const { return terms_.empty(); }
    const Term &leading() const { return terms_.front(); }

    MagnitudeClass magnitude_class() const;
    /// Coefficient at the zero exponent. Throws NotNearstandard on an
    /// Infinite argument.
    Coeff standard_part() const;
    bool is_standard() const;

    Hyperreal operator-() const;
    Hyperreal abs_val() const;

    friend Hyperreal add(const Hyperreal &x, const Hyperreal &y);
    friend Hyperreal sub(const Hyperreal &x, const Hyperreal &y);
    friend Hyperreal mul(const Hyperreal &x, const Hyperreal &y);
    friend Hyperreal div(const Hyperreal &x, const Hyperreal &y);
    friend Hyperreal inverse(const Hyperreal &y);
    friend Hyperreal pow_int(const Hyperreal &x, long k);
    friend Hyperreal sqrt_abs(const Hyperreal &x);

    /// Exact three-way comparison in the total (lexicographic valuation)
    /// order; independent of any further truncation.
    friend int compare(const Hyperreal &x, const Hyperreal &y);

    std::string str() const;
    nlohmann::json to_json() const;
    static Hyperreal from_json(ContextPtr ctx, const nlohmann::json &j);

  private:
    explicit Hyperreal(ContextPtr ctx) : ctx_(std::move(ctx)) {}
    Hyperreal(ContextPtr ctx, std::vector<Term> terms, bool truncated);

    ContextPtr ctx_;
    std::vector<Term> terms_; // ascending exponent order, no zero coefficients
    bool truncated_ = false;
};

inline bool operator==(const Hyperreal &x, const Hyperreal &y) {
    return compare(x, y) == 0 &&
           x.terms().size() == y.terms().size();
}

bool approx_eq(const Hyperreal &x, const Hyperreal &y);
/// x >= y or x ~ y (the relaxed >=).
bool maior(const Hyperreal &x, const Hyperreal &y);
bool menor(const Hyperreal &x, const Hyperreal &y);
/// x > y and x !~ y (strictly, non-infinitesimally greater).
bool gg(const Hyperreal &x, const Hyperreal &y);
bool ll(const Hyperreal &x, const Hyperreal &y);

} // namespace hyperopt

#endif
