#ifndef HYPEROPT_CONTEXT_HPP
#define HYPEROPT_CONTEXT_HPP

#include "hyperopt/errors.hpp"
#include "hyperopt/rational.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hyperopt {

enum class Mode { Rational, Float };

/// Generator registry plus the arithmetic configuration shared by every
/// value built from it. Declaration order fixes the valuation hierarchy:
/// any positive power of a later generator is below every positive power
/// of an earlier one.
class Context {
  public:
    Context(std::vector<std::string> generators, Mode mode = Mode::Rational,
            Rat exp_bound = Rat(16), std::size_t max_terms = 64,
            double zero_tol = 1e-9)
        : generators_(std::move(generators)), mode_(mode),
          exp_bound_(std::move(exp_bound)), max_terms_(max_terms),
          zero_tol_(zero_tol) {
        if (generators_.empty())
            throw Error("at least one infinitesimal generator is required");
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            if (generators_[i].empty())
                throw Error("generator names must be nonempty");
            for (std::size_t j = i + 1; j < generators_.size(); ++j)
                if (generators_[i] == generators_[j])
                    throw Error("duplicate generator name: " + generators_[i]);
        }
    }

    const std::vector<std::string> &generators() const { return generators_; }
    std::size_t num_generators() const { return generators_.size(); }
    Mode mode() const { return mode_; }
    const Rat &exp_bound() const { return exp_bound_; }
    std::size_t max_terms() const { return max_terms_; }
    double zero_tol() const { return zero_tol_; }

    /// Index of a generator name, or -1 if unknown.
    int generator_index(const std::string &name) const {
        for (std::size_t i = 0; i < generators_.size(); ++i)
            if (generators_[i] == name)
                return static_cast<int>(i);
        return -1;
    }

  private:
    std::vector<std::string> generators_;
    Mode mode_;
    Rat exp_bound_;
    std::size_t max_terms_;
    double zero_tol_;
};

using ContextPtr = std::shared_ptr<const Context>;

inline ContextPtr make_context(std::vector<std::string> generators,
                               Mode mode = Mode::Rational,
                               Rat exp_bound = Rat(16),
                               std::size_t max_terms = 64,
                               double zero_tol = 1e-9) {
    return std::make_shared<const Context>(std::move(generators), mode,
                                           std::move(exp_bound), max_terms,
                                           zero_tol);
}

} // namespace hyperopt

#endif
