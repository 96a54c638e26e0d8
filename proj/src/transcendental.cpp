#include "hyperopt/transcendental.hpp"

#include "hyperopt/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace hyperopt {

namespace {

using BigFloat =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<64>>;

Rat eval_rationalized(FuncKind f, const Rat &a) {
    static std::mutex mtx;
    static std::map<std::pair<int, Rat>, Rat> cache;
    std::pair<int, Rat> key{static_cast<int>(f), a};
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
    }
    BigFloat x(a);
    BigFloat v;
    switch (f) {
    case FuncKind::Sin:
        v = sin(x);
        break;
    case FuncKind::Cos:
        v = cos(x);
        break;
    case FuncKind::Exp:
        v = exp(x);
        break;
    case FuncKind::Log:
        v = log(x);
        break;
    }
    Rat r(v);
    std::lock_guard<std::mutex> lock(mtx);
    cache.emplace(std::move(key), r);
    return r;
}

Int factorial(unsigned n) {
    Int r = 1;
    for (unsigned i = 2; i <= n; ++i)
        r *= i;
    return r;
}

} // namespace

std::string func_name(FuncKind f) {
    switch (f) {
    case FuncKind::Sin:
        return "sin";
    case FuncKind::Cos:
        return "cos";
    case FuncKind::Exp:
        return "exp";
    case FuncKind::Log:
        return "log";
    }
    return "?";
}

Coeff func_value(const Context &ctx, FuncKind f, const Coeff &a) {
    if (f == FuncKind::Log && a.sign() <= 0)
        throw EvalError("log of a non-positive standard part");
    if (ctx.mode() == Mode::Float) {
        double x = a.flt();
        switch (f) {
        case FuncKind::Sin:
            return Coeff::floating(std::sin(x));
        case FuncKind::Cos:
            return Coeff::floating(std::cos(x));
        case FuncKind::Exp:
            return Coeff::floating(std::exp(x));
        case FuncKind::Log:
            return Coeff::floating(std::log(x));
        }
    }
    return Coeff::rational(eval_rationalized(f, a.rat()));
}

Coeff func_derivative(const Context &ctx, FuncKind f, unsigned j,
                      const Coeff &a) {
    switch (f) {
    case FuncKind::Sin:
        switch (j % 4) {
        case 0:
            return func_value(ctx, FuncKind::Sin, a);
        case 1:
            return func_value(ctx, FuncKind::Cos, a);
        case 2:
            return -func_value(ctx, FuncKind::Sin, a);
        default:
            return -func_value(ctx, FuncKind::Cos, a);
        }
    case FuncKind::Cos:
        switch (j % 4) {
        case 0:
            return func_value(ctx, FuncKind::Cos, a);
        case 1:
            return -func_value(ctx, FuncKind::Sin, a);
        case 2:
            return -func_value(ctx, FuncKind::Cos, a);
        default:
            return func_value(ctx, FuncKind::Sin, a);
        }
    case FuncKind::Exp:
        return func_value(ctx, FuncKind::Exp, a);
    case FuncKind::Log:
        if (j == 0)
            return func_value(ctx, FuncKind::Log, a);
        if (a.sign() <= 0)
            throw EvalError("log derivative at a non-positive standard part");
        // d^j/dx^j log x = (-1)^(j-1) (j-1)! x^(-j), exact for rational a.
        if (ctx.mode() == Mode::Float) {
            double v = (j % 2 == 1 ? 1.0 : -1.0) *
                       factorial(j - 1).convert_to<double>() /
                       std::pow(a.flt(), static_cast<double>(j));
            return Coeff::floating(v);
        }
        {
            Rat aj = 1;
            for (unsigned i = 0; i < j; ++i)
                aj *= a.rat();
            Rat v = Rat(factorial(j - 1)) / aj;
            return Coeff::rational(j % 2 == 1 ? v : -v);
        }
    }
    throw EvalError("unknown function");
}

} // namespace hyperopt
