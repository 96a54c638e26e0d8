#ifndef HYPEROPT_MUCALC_HPP
#define HYPEROPT_MUCALC_HPP

#include "hyperopt/expr.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyperopt {

/// An infinitesimal sample offset coeff * gen1^e1 * ... * genk^ek used to
/// build monad samples.
struct SampleOffset {
    Rat coeff;
    Exponent exp;
};

struct ProbeConfig {
    /// The encompassing threshold is gen1^q.
    Rat delta_threshold_exponent = Rat(8);
    std::vector<SampleOffset> sample_offsets;
    unsigned max_taylor_order = 8;

    static ProbeConfig defaults(const Context &ctx);
    void validate(const Context &ctx) const;
    nlohmann::json to_json() const;
};

struct Witness {
    Point points;
    Hyperreal residual;
    MagnitudeClass residual_class;
};

struct ProbeReport {
    std::string probe;
    bool passed = false;
    nlohmann::json config;
    std::vector<Witness> witnesses;
    std::optional<std::size_t> failure_witness; // index into witnesses

    nlohmann::json to_json() const;
};

/// x ~ a implies f(x) ~ f(a), sampled over the config offsets applied to
/// each coordinate. A non-nearstandard a exercises the failure of
/// SU-continuity.
ProbeReport s_continuity_probe(const PerturbedFn &f, const Point &a,
                               const ProbeConfig &cfg);

/// The defining increment identity: for monad samples x, y of a with
/// |x-y| above the threshold, eta = (f(x)-f(y) - Df_x(x-y)) / |x-y| must
/// be infinitesimal.
ProbeReport mu_increment_check(const PerturbedFn &f,
                               const std::vector<Rat> &a,
                               const ProbeConfig &cfg);

/// Mean value form f(x)-f(y) = Df_c(x-y) + |x-y| eta. The standard part
/// of the residual is bracketed to a sign change (the classical theorem
/// locates c there); the infinitesimal part at the bracketed c must
/// vanish relative to |x-y|.
ProbeReport mvt_check(const PerturbedFn &f, const Point &x, const Point &y,
                      const ProbeConfig &cfg);

/// Taylor remainder: R / |y-a|^k infinitesimal for monad samples y.
ProbeReport taylor_check(const PerturbedFn &f, const std::vector<Rat> &a,
                         unsigned k, const ProbeConfig &cfg);

/// D(f o g)_a = Df_g(a) . Dg_a, scalar case. Throws InapplicableChainRule
/// unless g'(a) is Appreciable.
ProbeReport chain_rule_check(const PerturbedFn &f, const PerturbedFn &g,
                             const Rat &a, const ProbeConfig &cfg);

} // namespace hyperopt

#endif
