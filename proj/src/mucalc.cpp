#include "hyperopt/mucalc.hpp"

#include "hyperopt/errors.hpp"

#include <algorithm>

namespace hyperopt {

namespace {

Hyperreal offset_value(const ContextPtr &ctx, const SampleOffset &o) {
    return Hyperreal::monomial(ctx, o.exp, Coeff::of(*ctx, o.coeff));
}

Hyperreal delta_threshold(const ContextPtr &ctx, const ProbeConfig &cfg) {
    return Hyperreal::generator(ctx, 0, cfg.delta_threshold_exponent);
}

bool infinitesimal_or_zero(const Hyperreal &x) {
    auto c = x.magnitude_class();
    return c == MagnitudeClass::Zero || c == MagnitudeClass::Infinitesimal;
}

/// Euclidean distance; plain absolute value in one dimension.
Hyperreal point_distance(const Point &x, const Point &y) {
    const ContextPtr &ctx = x.front().context();
    if (x.size() == 1)
        return sub(x[0], y[0]).abs_val();
    Hyperreal sum = Hyperreal::zero(ctx);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Hyperreal d = sub(x[i], y[i]);
        sum = add(sum, mul(d, d));
    }
    return sqrt_abs(sum);
}

void finish(ProbeReport &r) {
    r.passed = true;
    for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
        if (!(r.witnesses[i].residual_class == MagnitudeClass::Zero ||
              r.witnesses[i].residual_class == MagnitudeClass::Infinitesimal)) {
            r.passed = false;
            if (!r.failure_witness)
                r.failure_witness = i;
        }
    }
}

Rat coeff_to_rat(const Coeff &c) {
    return c.is_rational() ? c.rat() : Rat(c.flt());
}

} // namespace

ProbeConfig ProbeConfig::defaults(const Context &ctx) {
    ProbeConfig cfg;
    std::size_t n = ctx.num_generators();
    auto eps = [&](const Rat &power) {
        std::vector<Rat> comps(n, Rat(0));
        comps[0] = power;
        return Exponent(std::move(comps));
    };
    for (Rat c : {Rat(1), Rat(-1)}) {
        cfg.sample_offsets.push_back({c, eps(Rat(1))});
        cfg.sample_offsets.push_back({2 * c, eps(Rat(1))});
        cfg.sample_offsets.push_back({c, eps(Rat(2))});
        cfg.sample_offsets.push_back({c, eps(Rat(1, 2))});
        if (n >= 2) {
            std::vector<Rat> comps(n, Rat(0));
            comps[1] = 1;
            cfg.sample_offsets.push_back({c, Exponent(std::move(comps))});
        }
    }
    return cfg;
}

void ProbeConfig::validate(const Context &ctx) const {
    if (delta_threshold_exponent <= 0 ||
        delta_threshold_exponent >= ctx.exp_bound())
        throw Error("threshold exponent must lie in (0, exp_bound)");
    std::vector<Rat> thr(ctx.num_generators(), Rat(0));
    thr[0] = delta_threshold_exponent;
    Exponent threshold(std::move(thr));
    for (const auto &o : sample_offsets) {
        if (o.coeff == 0 || o.exp.lex_sign() <= 0)
            throw Error("sample offsets must be nonzero infinitesimals");
        if (!o.exp.within_bound(ctx.exp_bound()))
            throw Error("sample offset exponent exceeds the bound");
        // Offsets on the dominant generator's scale must sit above the
        // encompassing threshold eps1^q. Later-generator offsets fall
        // below every eps1 power by construction; the probes exclude
        // them pairwise via the |x-y| > delta filter instead.
        bool dominant_scale = true;
        for (std::size_t i = 1; i < o.exp.size(); ++i)
            if (o.exp[i] != 0)
                dominant_scale = false;
        if (dominant_scale && !(o.exp < threshold))
            throw Error("sample offsets must dominate the threshold");
    }
}

nlohmann::json ProbeConfig::to_json() const {
    nlohmann::json offs = nlohmann::json::array();
    for (const auto &o : sample_offsets) {
        nlohmann::json exps = nlohmann::json::array();
        for (const auto &c : o.exp.components())
            exps.push_back(rat_to_string(c));
        offs.push_back({{"coeff", rat_to_string(o.coeff)}, {"exps", exps}});
    }
    return {{"delta_threshold_exponent",
             rat_to_string(delta_threshold_exponent)},
            {"sample_offsets", offs},
            {"max_taylor_order", max_taylor_order}};
}

nlohmann::json ProbeReport::to_json() const {
    nlohmann::json ws = nlohmann::json::array();
    for (const auto &w : witnesses) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto &p : w.points)
            pts.push_back(p.str());
        ws.push_back({{"points", pts},
                      {"residual", w.residual.str()},
                      {"class", magnitude_class_name(w.residual_class)}});
    }
    nlohmann::json j{{"probe", probe},
                     {"passed", passed},
                     {"config", config},
                     {"witnesses", ws}};
    if (failure_witness)
        j["failure_witness"] = *failure_witness;
    return j;
}

ProbeReport s_continuity_probe(const PerturbedFn &f, const Point &a,
                               const ProbeConfig &cfg) {
    const ContextPtr &ctx = f.context();
    cfg.validate(*ctx);
    ProbeReport report;
    report.probe = "scontinuity";
    report.config = cfg.to_json();
    Hyperreal fa = evaluate(f, a);
    for (std::size_t i = 0; i < f.arity(); ++i) {
        for (const auto &o : cfg.sample_offsets) {
            Point x = a;
            x[i] = add(x[i], offset_value(ctx, o));
            Hyperreal residual = sub(evaluate(f, x), fa);
            report.witnesses.push_back(
                {x, residual, residual.magnitude_class()});
        }
    }
    finish(report);
    return report;
}

ProbeReport mu_increment_check(const PerturbedFn &f, const std::vector<Rat> &a,
                               const ProbeConfig &cfg) {
    const ContextPtr &ctx = f.context();
    cfg.validate(*ctx);
    ProbeReport report;
    report.probe = "increment";
    report.config = cfg.to_json();

    Point base = standard_point(ctx, a);
    std::vector<Point> samples{base}; // a itself exercises overrides
    for (std::size_t i = 0; i < f.arity(); ++i)
        for (const auto &o : cfg.sample_offsets) {
            Point x = base;
            x[i] = add(x[i], offset_value(ctx, o));
            samples.push_back(std::move(x));
        }

    std::vector<ExprPtr> partials;
    for (std::size_t i = 1; i <= f.arity(); ++i)
        partials.push_back(differentiate(f.body(), i));

    Hyperreal delta = delta_threshold(ctx, cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const Point &x = samples[i];
            const Point &y = samples[j];
            Hyperreal dist = point_distance(x, y);
            if (compare(dist, delta) <= 0)
                continue;
            Hyperreal linear = Hyperreal::zero(ctx);
            for (std::size_t v = 0; v < f.arity(); ++v)
                linear = add(linear, mul(eval_expr(partials[v], x, ctx),
                                         sub(x[v], y[v])));
            Hyperreal eta =
                div(sub(sub(evaluate(f, x), evaluate(f, y)), linear), dist);
            Point pair(x);
            pair.insert(pair.end(), y.begin(), y.end());
            report.witnesses.push_back({pair, eta, eta.magnitude_class()});
        }
    }
    finish(report);
    return report;
}

ProbeReport mvt_check(const PerturbedFn &f, const Point &x, const Point &y,
                      const ProbeConfig &cfg) {
    if (f.arity() != 1 || x.size() != 1 || y.size() != 1)
        throw Error("mvt_check is one-dimensional");
    const ContextPtr &ctx = f.context();
    cfg.validate(*ctx);
    ProbeReport report;
    report.probe = "mvt";
    report.config = cfg.to_json();

    Hyperreal dist = sub(x[0], y[0]).abs_val();
    if (compare(dist, delta_threshold(ctx, cfg)) <= 0)
        throw Error("|x-y| must exceed the threshold");
    Hyperreal fdiff = sub(evaluate(f, x), evaluate(f, y));
    Hyperreal step = sub(x[0], y[0]);
    ExprPtr d1 = differentiate(f.body(), 1);

    auto residual_at = [&](const Rat &c) {
        Point pc = standard_point(ctx, {c});
        return sub(fdiff, mul(eval_expr(d1, pc, ctx), step));
    };
    auto record = [&](const Rat &c, const Hyperreal &res,
                      MagnitudeClass cls) {
        report.witnesses.push_back(
            {standard_point(ctx, {c}), res, cls});
    };
    auto finish_at = [&](const Rat &c, const Hyperreal &res) {
        Hyperreal scaled = div(res, dist);
        record(c, scaled, scaled.magnitude_class());
        finish(report);
        return report;
    };

    Rat sx = coeff_to_rat(x[0].standard_part());
    Rat sy = coeff_to_rat(y[0].standard_part());
    Rat lo = std::min(sx, sy), hi = std::max(sx, sy);
    if (lo == hi)
        return finish_at(lo, residual_at(lo));

    // Scan a grid for a sign change of the standard residual; the
    // classical theorem puts the mean-value point somewhere inside, but
    // not necessarily bracketed by the endpoints alone.
    auto st_sign = [&](const Hyperreal &r) { return r.standard_part().sign(); };
    constexpr int kGrid = 64;
    std::optional<std::pair<Rat, Rat>> bracket;
    Rat prev_c = lo;
    Hyperreal prev_r = residual_at(lo);
    int prev_s = st_sign(prev_r);
    if (prev_s == 0)
        return finish_at(lo, prev_r);
    for (int g = 1; g <= kGrid && !bracket; ++g) {
        Rat ck = lo + (hi - lo) * g / kGrid;
        Hyperreal rk = residual_at(ck);
        int sk = st_sign(rk);
        if (sk == 0)
            return finish_at(ck, rk);
        if (sk != prev_s)
            bracket = {prev_c, ck};
        prev_c = ck;
        prev_r = rk;
        prev_s = sk;
    }
    if (!bracket) {
        // No standard sign change anywhere on the grid.
        Hyperreal r1 = residual_at(lo), r2 = residual_at(hi);
        Hyperreal s1 = div(r1, dist), s2 = div(r2, dist);
        record(lo, s1, s1.magnitude_class());
        record(hi, s2, s2.magnitude_class());
        report.passed = false;
        report.failure_witness = 0;
        return report;
    }
    lo = bracket->first;
    hi = bracket->second;
    int slo = st_sign(residual_at(lo));
    for (int step_i = 0; step_i < 64; ++step_i) {
        Rat mid = (lo + hi) / 2;
        Hyperreal rm = residual_at(mid);
        int sm = st_sign(rm);
        if (sm == 0)
            return finish_at(mid, rm);
        if (sm == slo)
            lo = mid;
        else
            hi = mid;
    }
    // Sign change certified inside [lo,hi]; the standard part of the
    // residual vanishes at the bracketed point, so what remains to check
    // is the infinitesimal part.
    Rat mid = (lo + hi) / 2;
    Hyperreal rm = residual_at(mid);
    Hyperreal inf_part =
        sub(rm, Hyperreal::from_coeff(ctx, rm.standard_part()));
    return finish_at(mid, inf_part);
}

ProbeReport taylor_check(const PerturbedFn &f, const std::vector<Rat> &a,
                         unsigned k, const ProbeConfig &cfg) {
    if (f.arity() != 1)
        throw Error("taylor_check is one-dimensional");
    if (k > cfg.max_taylor_order)
        throw Error("order exceeds max_taylor_order");
    const ContextPtr &ctx = f.context();
    cfg.validate(*ctx);
    ProbeReport report;
    report.probe = "taylor";
    report.config = cfg.to_json();

    Point base = standard_point(ctx, a);
    Hyperreal f0 = evaluate(f, base);
    std::vector<Hyperreal> derivs;
    for (unsigned j = 1; j <= k; ++j)
        derivs.push_back(nth_derivative_at(f, 1, j, base));

    Hyperreal delta = delta_threshold(ctx, cfg);
    for (const auto &o : cfg.sample_offsets) {
        Hyperreal h = offset_value(ctx, o);
        if (compare(h.abs_val(), delta) <= 0)
            continue;
        Point yp{add(base[0], h)};
        Hyperreal taylor = f0;
        Hyperreal hpow = Hyperreal::from_rat(ctx, Rat(1));
        Rat fact(1);
        for (unsigned j = 1; j <= k; ++j) {
            hpow = mul(hpow, h);
            fact *= j;
            taylor = add(taylor,
                         div(mul(derivs[j - 1], hpow),
                             Hyperreal::from_rat(ctx, fact)));
        }
        Hyperreal remainder = sub(evaluate(f, yp), taylor);
        Hyperreal scaled = div(remainder, pow_int(h.abs_val(), k));
        report.witnesses.push_back({yp, scaled, scaled.magnitude_class()});
    }
    finish(report);
    return report;
}

ProbeReport chain_rule_check(const PerturbedFn &f, const PerturbedFn &g,
                             const Rat &a, const ProbeConfig &cfg) {
    if (f.arity() != 1 || g.arity() != 1)
        throw Error("chain_rule_check is one-dimensional");
    const ContextPtr &ctx = f.context();
    cfg.validate(*ctx);
    Point pa = standard_point(ctx, {a});
    Hyperreal gprime = nth_derivative_at(g, 1, 1, pa);
    if (gprime.magnitude_class() != MagnitudeClass::Appreciable)
        throw InapplicableChainRule(
            "g'(a) is " + magnitude_class_name(gprime.magnitude_class()) +
            "; the inverse of Dg_a is not finite");

    ProbeReport report;
    report.probe = "chain";
    report.config = cfg.to_json();
    ExprPtr composed = substitute_vars(f.body(), {g.body()});
    Hyperreal lhs = eval_expr(differentiate(composed, 1), pa, ctx);
    Point gp{evaluate(g, pa)};
    Hyperreal rhs = mul(eval_expr(differentiate(f.body(), 1), gp, ctx), gprime);
    Hyperreal residual = sub(lhs, rhs);
    report.witnesses.push_back(
        {pa, residual, residual.magnitude_class()});
    finish(report);
    return report;
}

} // namespace hyperopt
