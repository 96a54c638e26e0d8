#ifndef HYPEROPT_ERRORS_HPP
#define HYPEROPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hyperopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by the zero element") {}
};

struct NotNearstandard : Error {
    explicit NotNearstandard(const std::string &what) : Error(what) {}
};

struct EvalError : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::size_t position;
    ParseError(const std::string &msg, std::size_t pos)
        : Error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

struct InapplicableChainRule : Error {
    explicit InapplicableChainRule(const std::string &what) : Error(what) {}
};

} // namespace hyperopt

#endif
