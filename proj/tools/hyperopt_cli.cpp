// hyperopt: classify m-extremizers and probe mu-calculus theorems from the
// command line.
#include "hyperopt/errors.hpp"
#include "hyperopt/extremum.hpp"
#include "hyperopt/mucalc.hpp"
#include "hyperopt/tables.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProbeFailed = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string generators = "eps,delta";
    std::string mode = "rational";
    std::string exp_bound = "16";
    std::size_t max_terms = 64;
    double zero_tol = 1e-9;
    std::string config_path;
    std::string out_path;
};

std::vector<std::string> split_csv(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// Applies `key=value` lines from --config before building the context.
void apply_config_file(GlobalOptions &g) {
    if (g.config_path.empty())
        return;
    std::ifstream in(g.config_path);
    if (!in)
        throw Error("cannot open config file: " + g.config_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("malformed config line: " + line);
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "generators")
            g.generators = value;
        else if (key == "mode")
            g.mode = value;
        else if (key == "exp_bound")
            g.exp_bound = value;
        else if (key == "max_terms")
            g.max_terms = std::stoul(value);
        else if (key == "zero_tol")
            g.zero_tol = std::stod(value);
        else
            throw Error("unknown config key: " + key);
    }
}

ContextPtr build_context(GlobalOptions &g) {
    apply_config_file(g);
    Mode mode;
    if (g.mode == "rational")
        mode = Mode::Rational;
    else if (g.mode == "float")
        mode = Mode::Float;
    else
        throw Error("mode must be 'rational' or 'float'");
    auto bound = parse_rational(g.exp_bound);
    if (!bound || *bound <= 0)
        throw Error("bad --exp-bound value: " + g.exp_bound);
    return make_context(split_csv(g.generators), mode, *bound, g.max_terms,
                        g.zero_tol);
}

Rat parse_rat_arg(const std::string &s, const char *what) {
    auto q = parse_rational(s);
    if (!q)
        throw Error(std::string("bad ") + what + " value: " + s);
    return *q;
}

std::vector<Rat> parse_point(const std::vector<std::string> &coords) {
    std::vector<Rat> p;
    for (const auto &s : coords)
        p.push_back(parse_rat_arg(s, "--point"));
    return p;
}

void emit(const GlobalOptions &g, const nlohmann::json &report) {
    if (g.out_path.empty())
        return;
    std::ofstream out(g.out_path);
    if (!out)
        throw Error("cannot open output file: " + g.out_path);
    out << report.dump(2) << "\n";
}

PerturbedFn load_function(const ContextPtr &ctx, const std::string &expr,
                          const std::string &fn_path, std::size_t arity) {
    if (!fn_path.empty()) {
        std::ifstream in(fn_path);
        if (!in)
            throw Error("cannot open function file: " + fn_path);
        nlohmann::json j = nlohmann::json::parse(in);
        return PerturbedFn::from_json(j, ctx);
    }
    if (expr.empty())
        throw Error("either --expr or --fn is required");
    return PerturbedFn(parse(expr, arity, *ctx), arity, ctx);
}

void print_verdict(const Verdict &v) {
    std::cout << verdict_kind_name(v.kind);
    if (v.decisive_order)
        std::cout << "  order=" << *v.decisive_order;
    if (v.decisive_value)
        std::cout << "  value=" << v.decisive_value->str();
    if (v.decisive_standard_part)
        std::cout << "  st=" << v.decisive_standard_part->str();
    std::cout << "\n";
}

int run_classify(const GlobalOptions &g, const ContextPtr &ctx,
                 const std::string &expr, const std::string &fn_path,
                 const std::vector<std::string> &point_args,
                 const std::vector<std::string> &interval_args,
                 unsigned grid, unsigned max_order) {
    if (point_args.empty() == interval_args.empty())
        throw Error("classify needs exactly one of --point or --interval");

    if (!point_args.empty()) {
        std::vector<Rat> a = parse_point(point_args);
        PerturbedFn f = load_function(ctx, expr, fn_path, a.size());
        Verdict v = a.size() == 1 ? classify_1d(f, a[0], max_order)
                                  : gradient_test(f, a);
        print_verdict(v);
        emit(g, v.to_json());
        return kExitOk;
    }

    if (interval_args.size() != 2)
        throw Error("--interval takes LO HI");
    Rat lo = parse_rat_arg(interval_args[0], "--interval");
    Rat hi = parse_rat_arg(interval_args[1], "--interval");
    PerturbedFn f = load_function(ctx, expr, fn_path, 1);
    CandidateSet cs = find_candidates(f, lo, hi, grid);
    nlohmann::json results = nlohmann::json::array();
    for (const auto &cand : cs.candidates) {
        Verdict v = classify_1d(f, cand.value, max_order);
        // Bisection midpoints that did not snap to a simple rational are
        // easier to read as decimals.
        if (denominator(cand.value) > 1000000)
            std::cout << "x ~ " << rat_to_double(cand.value) << ": ";
        else
            std::cout << "x = " << rat_to_string(cand.value) << ": ";
        print_verdict(v);
        results.push_back({{"candidate", rat_to_string(cand.value)},
                           {"snapped", cand.snapped},
                           {"verdict", v.to_json()}});
    }
    if (cs.candidates.empty())
        std::cout << "no candidates in ["
                  << rat_to_string(lo) << ", " << rat_to_string(hi) << "]\n";
    emit(g, {{"interval", {rat_to_string(lo), rat_to_string(hi)}},
             {"grid", grid},
             {"results", results}});
    return kExitOk;
}

int run_eval_derive(const GlobalOptions &g, const ContextPtr &ctx, bool derive,
                    const std::string &expr, const std::string &fn_path,
                    const std::vector<std::string> &point_args,
                    std::size_t var, unsigned order, bool st_only) {
    if (point_args.empty())
        throw Error("--point is required");
    std::vector<Rat> a = parse_point(point_args);
    PerturbedFn f = load_function(ctx, expr, fn_path, a.size());
    Point p = standard_point(ctx, a);
    Hyperreal v = derive ? nth_derivative_at(f, var, order, p)
                         : evaluate(f, p);
    if (st_only) {
        Coeff st = v.standard_part();
        std::cout << st.str() << "\n";
        emit(g, {{"standard_part", st.str()}});
        return kExitOk;
    }
    std::cout << v.str() << "\n";
    std::cout << "class: " << magnitude_class_name(v.magnitude_class())
              << "\n";
    emit(g, {{"value", v.to_json()},
             {"string", v.str()},
             {"class", magnitude_class_name(v.magnitude_class())}});
    return kExitOk;
}

int run_probe(const GlobalOptions &g, const ContextPtr &ctx,
              const std::string &kind, const std::string &expr,
              const std::string &fn_path, const std::string &inner_expr,
              const std::vector<std::string> &point_args,
              const std::vector<std::string> &x_args,
              const std::vector<std::string> &y_args, unsigned order,
              bool at_infinite, const std::string &threshold_q) {
    ProbeConfig cfg = ProbeConfig::defaults(*ctx);
    cfg.delta_threshold_exponent = parse_rat_arg(threshold_q, "--threshold");
    ProbeReport report;

    if (kind == "scontinuity") {
        std::size_t arity = point_args.empty() ? 1 : point_args.size();
        PerturbedFn f = load_function(ctx, expr, fn_path, arity);
        Point a;
        if (at_infinite) {
            // The classic SU-continuity counterexample point omega = 1/eps.
            for (std::size_t i = 0; i < arity; ++i)
                a.push_back(Hyperreal::generator(ctx, 0, Rat(-1)));
        } else {
            a = standard_point(ctx, parse_point(point_args));
        }
        report = s_continuity_probe(f, a, cfg);
    } else if (kind == "increment") {
        std::vector<Rat> a = parse_point(point_args);
        PerturbedFn f = load_function(ctx, expr, fn_path, a.size());
        report = mu_increment_check(f, a, cfg);
    } else if (kind == "mvt") {
        if (x_args.size() != 1 || y_args.size() != 1)
            throw Error("probe mvt needs --x and --y (one coordinate each)");
        PerturbedFn f = load_function(ctx, expr, fn_path, 1);
        Point x = standard_point(ctx, {parse_rat_arg(x_args[0], "--x")});
        Point y = standard_point(ctx, {parse_rat_arg(y_args[0], "--y")});
        report = mvt_check(f, x, y, cfg);
    } else if (kind == "taylor") {
        std::vector<Rat> a = parse_point(point_args);
        if (a.size() != 1)
            throw Error("probe taylor is one-dimensional");
        PerturbedFn f = load_function(ctx, expr, fn_path, 1);
        report = taylor_check(f, a, order, cfg);
    } else if (kind == "chain") {
        if (inner_expr.empty())
            throw Error("probe chain needs --inner");
        std::vector<Rat> a = parse_point(point_args);
        if (a.size() != 1)
            throw Error("probe chain is one-dimensional");
        PerturbedFn f = load_function(ctx, expr, fn_path, 1);
        PerturbedFn gfn(parse(inner_expr, 1, *ctx), 1, ctx);
        report = chain_rule_check(f, gfn, a[0], cfg);
    } else {
        throw Error("unknown probe: " + kind);
    }

    nlohmann::json j = report.to_json();
    std::cout << j.dump(2) << "\n";
    emit(g, j);
    return report.passed ? kExitOk : kExitProbeFailed;
}

int run_table(const GlobalOptions &g, const ContextPtr &ctx,
              const std::string &which) {
    TableOp op;
    if (which == "add")
        op = TableOp::Add;
    else if (which == "mul")
        op = TableOp::Mul;
    else if (which == "div")
        op = TableOp::Div;
    else
        throw Error("table takes one of: add, mul, div");
    InteractionTable t = interaction_table(ctx, op);
    std::cout << t.render(ctx);
    emit(g, t.to_json(ctx));
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"computable hyperreal arithmetic, mu-calculus probes and "
                 "m-extremizer classification"};
    app.require_subcommand(1);
    // Let the global options (--out, --mode, ...) appear after the
    // subcommand as well.
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--generators", g.generators,
                   "comma-separated infinitesimal generators, most "
                   "significant first (default eps,delta)");
    app.add_option("--mode", g.mode, "coefficient mode: rational|float");
    app.add_option("--exp-bound", g.exp_bound,
                   "series exponent bound (rational)");
    app.add_option("--max-terms", g.max_terms, "maximum series terms");
    app.add_option("--zero-tol", g.zero_tol,
                   "coefficient zero tolerance (float mode)");
    app.add_option("--config", g.config_path, "key=value config file");
    app.add_option("--out", g.out_path, "write the JSON report here");

    std::string expr, fn_path, inner_expr, probe_kind, table_kind;
    std::vector<std::string> point_args, interval_args, x_args, y_args;
    unsigned grid = 64, max_order = 8, order = 1;
    std::size_t var = 1;
    bool st_only = false, at_infinite = false;
    std::string threshold_q = "8";

    CLI::App *classify = app.add_subcommand("classify",
                                            "classify candidate points");
    classify->add_option("--expr", expr, "function body");
    classify->add_option("--fn", fn_path, "perturbed-function JSON file");
    classify->add_option("--point", point_args, "standard candidate point");
    classify->add_option("--interval", interval_args,
                         "search interval LO HI")
        ->expected(2);
    classify->add_option("--grid", grid, "grid points for the search");
    classify->add_option("--max-order", max_order,
                         "highest derivative order to try");

    CLI::App *eval = app.add_subcommand("eval", "evaluate at a point");
    eval->add_option("--expr", expr, "function body");
    eval->add_option("--fn", fn_path, "perturbed-function JSON file");
    eval->add_option("--point", point_args, "standard evaluation point");
    eval->add_flag("--st", st_only, "print only the standard part");

    CLI::App *derive = app.add_subcommand("derive",
                                          "evaluate a derivative");
    derive->add_option("--expr", expr, "function body");
    derive->add_option("--fn", fn_path, "perturbed-function JSON file");
    derive->add_option("--point", point_args, "standard evaluation point");
    derive->add_option("--var", var, "variable index (1-based)");
    derive->add_option("--order", order, "derivative order");
    derive->add_flag("--st", st_only, "print only the standard part");

    CLI::App *probe = app.add_subcommand("probe", "run a theorem probe");
    probe->add_option("name", probe_kind,
                      "scontinuity|increment|mvt|taylor|chain")
        ->required();
    probe->add_option("--expr", expr, "function body");
    probe->add_option("--fn", fn_path, "perturbed-function JSON file");
    probe->add_option("--inner", inner_expr, "inner function g (chain)");
    probe->add_option("--point", point_args, "base point");
    probe->add_option("--x", x_args, "left endpoint (mvt)");
    probe->add_option("--y", y_args, "right endpoint (mvt)");
    probe->add_option("--order", order, "expansion order (taylor)");
    probe->add_flag("--at-infinite", at_infinite,
                    "probe at omega = 1/eps instead of a standard point");
    probe->add_option("--threshold", threshold_q,
                      "encompassing-delta exponent q (delta = eps^q)");

    CLI::App *table = app.add_subcommand("table",
                                         "print a class-interaction table");
    table->add_option("op", table_kind, "add|mul|div")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        ContextPtr ctx = build_context(g);
        if (classify->parsed())
            return run_classify(g, ctx, expr, fn_path, point_args,
                                interval_args, grid, max_order);
        if (eval->parsed())
            return run_eval_derive(g, ctx, false, expr, fn_path, point_args,
                                   var, order, st_only);
        if (derive->parsed())
            return run_eval_derive(g, ctx, true, expr, fn_path, point_args,
                                   var, order, st_only);
        if (probe->parsed())
            return run_probe(g, ctx, probe_kind, expr, fn_path, inner_expr,
                             point_args, x_args, y_args, order, at_infinite,
                             threshold_q);
        if (table->parsed())
            return run_table(g, ctx, table_kind);
    } catch (const ParseError &e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
