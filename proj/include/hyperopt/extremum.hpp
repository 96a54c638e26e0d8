#ifndef HYPEROPT_EXTREMUM_HPP
#define HYPEROPT_EXTREMUM_HPP

#include "hyperopt/expr.hpp"
#include "hyperopt/mucalc.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyperopt {

enum class VerdictKind {
    MMinimizer,
    MMaximizer,
    NeitherOddOrder,
    NecessaryFailed,
    Inconclusive
};

std::string verdict_kind_name(VerdictKind k);

struct DerivativeRecord {
    unsigned order; // derivative order, or variable index in gradient runs
    Hyperreal value;
    MagnitudeClass cls;
};

struct Verdict {
    VerdictKind kind;
    std::optional<unsigned> decisive_order;
    std::optional<Hyperreal> decisive_value;
    std::optional<Coeff> decisive_standard_part;
    std::vector<DerivativeRecord> trace;

    nlohmann::json to_json() const;
};

struct Candidate {
    Rat value;
    Rat bracket_lo;
    Rat bracket_hi;
    bool snapped = false;
};

struct CandidateSet {
    Rat lo, hi;
    unsigned grid_points;
    std::vector<Candidate> candidates;
};

/// Relaxed first-order necessary condition: every partial derivative at a
/// must be infinitely close to zero.
ProbeReport necessary_check(const PerturbedFn &f, const std::vector<Rat> &a);

/// Higher-order classification of a standard candidate in one dimension:
/// the first derivative not infinitely close to zero decides by parity
/// and (non-infinitesimal) sign.
Verdict classify_1d(const PerturbedFn &f, const Rat &a, unsigned max_order);

/// Multivariable test: the necessary condition can refute, never assert.
Verdict gradient_test(const PerturbedFn &f, const std::vector<Rat> &a);

/// Grid scan plus sign-change bisection on the standard part of f'.
CandidateSet find_candidates(const PerturbedFn &f, const Rat &lo,
                             const Rat &hi, unsigned grid_points);

/// Classical higher-order derivative test applied to the generators->0
/// specialization; the independent route used to cross-check
/// classify_1d.
Verdict st_oracle_classify(const PerturbedFn &f, const Rat &a,
                           unsigned max_order);

} // namespace hyperopt

#endif
