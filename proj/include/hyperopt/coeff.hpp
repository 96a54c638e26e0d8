#ifndef HYPEROPT_COEFF_HPP
#define HYPEROPT_COEFF_HPP

#include "hyperopt/context.hpp"
#include "hyperopt/rational.hpp"

#include <cmath>
#include <string>

namespace hyperopt {

/// Series coefficient: an exact rational in rational mode, a binary64 in
/// float mode. Mixing modes in one operation is a programming error.
class Coeff {
  public:
    Coeff() : mode_(Mode::Rational), q_(0), d_(0) {}
    static Coeff rational(Rat q) {
        Coeff c;
        c.mode_ = Mode::Rational;
        c.q_ = std::move(q);
        return c;
    }
    static Coeff floating(double d) {
        Coeff c;
        c.mode_ = Mode::Float;
        c.d_ = d;
        return c;
    }
    static Coeff of(const Context &ctx, const Rat &q) {
        return ctx.mode() == Mode::Rational ? rational(q)
                                            : floating(rat_to_double(q));
    }
    static Coeff zero(const Context &ctx) { return of(ctx, Rat(0)); }
    static Coeff one(const Context &ctx) { return of(ctx, Rat(1)); }

    Mode mode() const { return mode_; }
    bool is_rational() const { return mode_ == Mode::Rational; }
    const Rat &rat() const { return q_; }
    double flt() const { return d_; }

    double to_double() const {
        return is_rational() ? rat_to_double(q_) : d_;
    }

    bool is_zero() const { return is_rational() ? q_ == 0 : d_ == 0.0; }
    /// Zero up to the context's float-mode tolerance; exact in rational mode.
    bool is_negligible(const Context &ctx) const {
        return is_rational() ? q_ == 0 : std::abs(d_) <= ctx.zero_tol();
    }
    int sign() const {
        if (is_rational())
            return q_ == 0 ? 0 : (q_ > 0 ? 1 : -1);
        return d_ == 0.0 ? 0 : (d_ > 0 ? 1 : -1);
    }

    Coeff operator-() const {
        return is_rational() ? rational(-q_) : floating(-d_);
    }
    Coeff operator+(const Coeff &o) const {
        return is_rational() ? rational(q_ + o.q_) : floating(d_ + o.d_);
    }
    Coeff operator-(const Coeff &o) const {
        return is_rational() ? rational(q_ - o.q_) : floating(d_ - o.d_);
    }
    Coeff operator*(const Coeff &o) const {
        return is_rational() ? rational(q_ * o.q_) : floating(d_ * o.d_);
    }
    Coeff operator/(const Coeff &o) const {
        return is_rational() ? rational(q_ / o.q_) : floating(d_ / o.d_);
    }
    bool operator==(const Coeff &o) const {
        return is_rational() ? q_ == o.q_ : d_ == o.d_;
    }
    bool operator!=(const Coeff &o) const { return !(*this == o); }
    bool operator<(const Coeff &o) const {
        return is_rational() ? q_ < o.q_ : d_ < o.d_;
    }

    Coeff abs() const {
        return sign() < 0 ? -*this : *this;
    }

    std::string str() const;

  private:
    Mode mode_;
    Rat q_;
    double d_;
};

} // namespace hyperopt

#endif
