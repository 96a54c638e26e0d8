#include "hyperopt/extremum.hpp"

#include "hyperopt/errors.hpp"

#include <algorithm>
#include <functional>

namespace hyperopt {

namespace {

const Int kSnapMaxDenominator = 1000000;

bool approx_zero(const Hyperreal &v) {
    auto c = v.magnitude_class();
    return c == MagnitudeClass::Zero || c == MagnitudeClass::Infinitesimal;
}

} // namespace

std::string verdict_kind_name(VerdictKind k) {
    switch (k) {
    case VerdictKind::MMinimizer:
        return "MMinimizer";
    case VerdictKind::MMaximizer:
        return "MMaximizer";
    case VerdictKind::NeitherOddOrder:
        return "NeitherOddOrder";
    case VerdictKind::NecessaryFailed:
        return "NecessaryFailed";
    case VerdictKind::Inconclusive:
        return "Inconclusive";
    }
    return "?";
}

nlohmann::json Verdict::to_json() const {
    nlohmann::json trace_json = nlohmann::json::array();
    for (const auto &r : trace)
        trace_json.push_back({{"k", r.order},
                              {"value", r.value.str()},
                              {"class", magnitude_class_name(r.cls)}});
    nlohmann::json j{{"kind", verdict_kind_name(kind)},
                     {"trace", trace_json}};
    j["decisive_order"] =
        decisive_order ? nlohmann::json(*decisive_order) : nlohmann::json();
    j["decisive_value"] = decisive_value ? nlohmann::json(decisive_value->str())
                                         : nlohmann::json();
    j["standard_part"] = decisive_standard_part
                             ? nlohmann::json(decisive_standard_part->str())
                             : nlohmann::json();
    return j;
}

ProbeReport necessary_check(const PerturbedFn &f, const std::vector<Rat> &a) {
    ProbeReport report;
    report.probe = "necessary";
    report.config = nlohmann::json::object();
    Point pa = standard_point(f.context(), a);
    for (std::size_t i = 1; i <= f.arity(); ++i) {
        Hyperreal v = nth_derivative_at(f, i, 1, pa);
        report.witnesses.push_back({pa, v, v.magnitude_class()});
    }
    report.passed = true;
    for (std::size_t i = 0; i < report.witnesses.size(); ++i)
        if (!approx_zero(report.witnesses[i].residual)) {
            report.passed = false;
            if (!report.failure_witness)
                report.failure_witness = i;
        }
    return report;
}

Verdict classify_1d(const PerturbedFn &f, const Rat &a, unsigned max_order) {
    if (f.arity() != 1)
        throw Error("classify_1d is one-dimensional");
    if (max_order < 2)
        throw Error("max_order must be at least 2");
    const ContextPtr &ctx = f.context();
    Point pa = standard_point(ctx, {a});
    Hyperreal zero = Hyperreal::zero(ctx);

    Verdict verdict;
    verdict.kind = VerdictKind::Inconclusive;
    for (unsigned k = 1; k <= max_order; ++k) {
        Hyperreal v = nth_derivative_at(f, 1, k, pa);
        verdict.trace.push_back({k, v, v.magnitude_class()});
        if (approx_zero(v))
            continue;
        verdict.decisive_order = k;
        verdict.decisive_value = v;
        verdict.decisive_standard_part = v.standard_part();
        if (k == 1)
            verdict.kind = VerdictKind::NecessaryFailed;
        else if (k % 2 == 1)
            verdict.kind = VerdictKind::NeitherOddOrder;
        else if (gg(v, zero))
            verdict.kind = VerdictKind::MMinimizer;
        else
            verdict.kind = VerdictKind::MMaximizer;
        break;
    }
    return verdict;
}

Verdict gradient_test(const PerturbedFn &f, const std::vector<Rat> &a) {
    if (f.arity() < 2)
        throw Error("gradient_test needs arity >= 2");
    const ContextPtr &ctx = f.context();
    Point pa = standard_point(ctx, a);

    Verdict verdict;
    verdict.kind = VerdictKind::Inconclusive;
    for (std::size_t i = 1; i <= f.arity(); ++i) {
        Hyperreal v = nth_derivative_at(f, i, 1, pa);
        verdict.trace.push_back(
            {static_cast<unsigned>(i), v, v.magnitude_class()});
        if (!approx_zero(v) && verdict.kind == VerdictKind::Inconclusive) {
            verdict.kind = VerdictKind::NecessaryFailed;
            verdict.decisive_order = 1;
            verdict.decisive_value = v;
            verdict.decisive_standard_part = v.standard_part();
        }
    }
    return verdict;
}

CandidateSet find_candidates(const PerturbedFn &f, const Rat &lo,
                             const Rat &hi, unsigned grid_points) {
    if (f.arity() != 1)
        throw Error("find_candidates is one-dimensional");
    if (!(lo < hi) || grid_points < 2)
        throw Error("need lo < hi and at least two grid points");

    ExprPtr dst = specialize_standard(differentiate(f.body(), 1));
    auto deriv = [&](const Rat &t) { return eval_expr_rat(dst, {t}); };

    CandidateSet result{lo, hi, grid_points, {}};
    auto push_candidate = [&](Candidate c) {
        for (const auto &existing : result.candidates)
            if (existing.value == c.value)
                return;
        result.candidates.push_back(std::move(c));
    };

    Rat step = (hi - lo) / (grid_points - 1);
    std::vector<Rat> grid;
    for (unsigned i = 0; i < grid_points; ++i)
        grid.push_back(lo + step * i);

    // Bisects every sign change of g over the grid; reports each located
    // root (snapped to the simplest nearby rational when that rational is
    // an exact root of the reference derivative).
    auto scan = [&](const std::function<Rat(const Rat &)> &g,
                    bool require_deriv_root) {
        std::vector<Rat> vals;
        for (const auto &t : grid)
            vals.push_back(g(t));
        for (unsigned i = 0; i < grid_points; ++i)
            if (vals[i] == 0 && deriv(grid[i]) == 0)
                push_candidate({grid[i], grid[i], grid[i], false});
        for (unsigned i = 0; i + 1 < grid_points; ++i) {
            if (vals[i] == 0 || vals[i + 1] == 0)
                continue;
            if ((vals[i] > 0) == (vals[i + 1] > 0))
                continue;
            Rat a = grid[i], b = grid[i + 1];
            Rat va = vals[i];
            std::optional<Rat> exact;
            for (int it = 0; it < 80 && !exact; ++it) {
                Rat mid = (a + b) / 2;
                Rat vm = g(mid);
                if (vm == 0) {
                    exact = mid;
                } else if ((vm > 0) == (va > 0)) {
                    a = mid;
                    va = vm;
                } else {
                    b = mid;
                }
            }
            Rat mid = exact ? *exact : (a + b) / 2;
            // Snap to the simplest nearby rational when it is an exact
            // root of st(f').
            Rat tol = pow2_inv(40);
            Rat snapped = simplest_rational_in(mid - tol, mid + tol);
            if (denominator(snapped) <= kSnapMaxDenominator &&
                deriv(snapped) == 0) {
                push_candidate({snapped, a, b, snapped != mid});
            } else if (!require_deriv_root) {
                if (exact)
                    push_candidate({mid, a, b, false});
                else
                    push_candidate({mid, a, b, false});
            }
        }
    };

    // Odd-multiplicity roots of st(f') show up as its own sign changes;
    // even-multiplicity roots are flat crossings, visible instead as sign
    // changes of the next derivative that also zero out st(f').
    scan(deriv, false);
    ExprPtr dst2 = differentiate(dst, 1);
    scan([&](const Rat &t) { return eval_expr_rat(dst2, {t}); }, true);

    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const Candidate &x, const Candidate &y) {
                  return x.value < y.value;
              });
    return result;
}

Verdict st_oracle_classify(const PerturbedFn &f, const Rat &a,
                           unsigned max_order) {
    if (f.arity() != 1)
        throw Error("st_oracle_classify is one-dimensional");
    if (max_order < 2)
        throw Error("max_order must be at least 2");
    const ContextPtr &ctx = f.context();

    Verdict verdict;
    verdict.kind = VerdictKind::Inconclusive;
    ExprPtr d = specialize_standard(f.body());
    for (unsigned k = 1; k <= max_order; ++k) {
        d = differentiate(d, 1);
        Rat v = eval_expr_rat(d, {a});
        Hyperreal hv = Hyperreal::from_rat(ctx, v);
        verdict.trace.push_back({k, hv, hv.magnitude_class()});
        if (v == 0)
            continue;
        verdict.decisive_order = k;
        verdict.decisive_value = hv;
        verdict.decisive_standard_part = Coeff::of(*ctx, v);
        if (k == 1)
            verdict.kind = VerdictKind::NecessaryFailed;
        else if (k % 2 == 1)
            verdict.kind = VerdictKind::NeitherOddOrder;
        else if (v > 0)
            verdict.kind = VerdictKind::MMinimizer;
        else
            verdict.kind = VerdictKind::MMaximizer;
        break;
    }
    return verdict;
}

} // namespace hyperopt
