#include "hyperopt/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace hyperopt {

std::string rat_to_string(const Rat &q) {
    if (denominator(q) == 1)
        return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

double rat_to_double(const Rat &q) { return q.convert_to<double>(); }

std::optional<Rat> parse_rational(const std::string &text) {
    if (text.empty())
        return std::nullopt;
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            Int num(text.substr(0, slash));
            Int den(text.substr(slash + 1));
            if (den == 0)
                return std::nullopt;
            return Rat(num, den);
        }
        if (text.find('.') == std::string::npos &&
            text.find('e') == std::string::npos &&
            text.find('E') == std::string::npos) {
            return Rat(Int(text));
        }
        // Decimal form: sign, digits, optional fraction, optional exponent.
        std::size_t i = 0;
        bool neg = false;
        if (text[i] == '+' || text[i] == '-') {
            neg = text[i] == '-';
            ++i;
        }
        Int mantissa = 0;
        long frac_digits = 0;
        bool any = false;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            mantissa = mantissa * 10 + (text[i] - '0');
            any = true;
        }
        if (i < text.size() && text[i] == '.') {
            ++i;
            for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
                mantissa = mantissa * 10 + (text[i] - '0');
                ++frac_digits;
                any = true;
            }
        }
        long exp10 = 0;
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            exp10 = std::strtol(text.c_str() + i + 1, nullptr, 10);
            while (i < text.size() && text[i] != ' ')
                ++i;
        } else if (i != text.size()) {
            return std::nullopt;
        }
        if (!any)
            return std::nullopt;
        Rat r(mantissa);
        long shift = exp10 - frac_digits;
        Int p10 = pow(Int(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
        if (shift < 0)
            r /= Rat(p10);
        else
            r *= Rat(p10);
        return neg ? -r : r;
    } catch (...) {
        return std::nullopt;
    }
}

Rat simplest_rational_in(const Rat &lo, const Rat &hi) {
    if (lo > hi)
        return simplest_rational_in(hi, lo);
    if (lo <= 0 && hi >= 0)
        return Rat(0);
    if (hi < 0)
        return -simplest_rational_in(-hi, -lo);
    // 0 < lo <= hi. Continued-fraction descent.
    Int a = numerator(lo), b = denominator(lo);
    Int c = numerator(hi), d = denominator(hi);
    Int fl = a / b;
    Int ceil_lo = (a % b == 0) ? fl : fl + 1;
    if (Rat(ceil_lo) <= hi)
        return Rat(ceil_lo);
    // No integer inside: recurse on the reciprocal fractional parts.
    Rat inner = simplest_rational_in(Rat(d, c - fl * d), Rat(b, a - fl * b));
    return Rat(fl) + Rat(denominator(inner), numerator(inner));
}

Rat pow2_inv(unsigned k) { return Rat(Int(1), pow(Int(2), k)); }

} // namespace hyperopt
