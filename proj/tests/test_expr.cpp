#include "hyperopt/expr.hpp"
#include "hyperopt/errors.hpp"

#include "support/random_gen.hpp"

#include <cmath>
#include <doctest.h>

using namespace hyperopt;
using namespace hyperopt::testing;

namespace {

ContextPtr ctx2() { return make_context({"eps", "delta"}); }

const char *kDeg7 =
    "1/7*x1^7 - 1/2*x1^6 + 2/5*x1^5 + eps*x1 + delta*x1^2";

Hyperreal series(const ContextPtr &c,
                 std::initializer_list<std::pair<std::pair<long, long>,
                                                 Rat>> terms) {
    std::vector<std::pair<Exponent, Rat>> t;
    for (const auto &[e, q] : terms)
        t.emplace_back(Exponent({Rat(e.first), Rat(e.second)}), q);
    return Hyperreal::make(c, std::move(t));
}

} // namespace

TEST_CASE("parser: grammar examples") {
    auto c = ctx2();
    ExprPtr sq = parse("x1^2", 1, *c);
    REQUIRE(sq->kind == Expr::Kind::IntPow);
    CHECK(sq->ipow == 2);
    CHECK(sq->a->kind == Expr::Kind::Var);

    ExprPtr eq2 = parse("sin(eps*x1)/eps + x2", 2, *c);
    REQUIRE(eq2->kind == Expr::Kind::Add);
    CHECK(eq2->a->kind == Expr::Kind::Div);
    CHECK(eq2->a->a->kind == Expr::Kind::Func);
    CHECK(eq2->a->a->func == FuncKind::Sin);
    CHECK(eq2->b->kind == Expr::Kind::Var);

    // The degree-7 body round-trips through evaluation below; here just
    // confirm it parses and prints back to an equivalent AST.
    ExprPtr f = parse(kDeg7, 1, *c);
    ExprPtr again = parse(expr_to_string(f), 1, *c);
    Point p = standard_point(c, {Rat(3, 2)});
    CHECK(eval_expr(f, p, c) == eval_expr(again, p, c));
}

TEST_CASE("parser: errors carry positions") {
    auto c = ctx2();
    CHECK_THROWS_AS(parse("x1 + ", 1, *c), ParseError);
    CHECK_THROWS_AS(parse("x1 + foo", 1, *c), ParseError);
    CHECK_THROWS_AS(parse("x2", 1, *c), ParseError); // arity violation
    CHECK_THROWS_AS(parse("sin x1", 1, *c), ParseError);
    CHECK_THROWS_AS(parse("x1 ^ x1", 1, *c), ParseError);
    try {
        parse("x1 + @", 1, *c);
        FAIL("expected ParseError");
    } catch (const ParseError &e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("evaluate: polynomial expansion at 3+eps") {
    auto c = ctx2();
    ExprPtr sq = parse("x1^2", 1, *c);
    Hyperreal eps = Hyperreal::generator(c, 0);
    Point p{add(Hyperreal::from_rat(c, Rat(3)), eps)};
    CHECK(eval_expr(sq, p, c) ==
          series(c, {{{0, 0}, Rat(9)}, {{1, 0}, Rat(6)}, {{2, 0}, Rat(1)}}));
}

TEST_CASE("evaluate: the piecewise-perturbed square") {
    auto c = ctx2();
    PerturbedFn f(parse("x1^2", 1, *c), 1, c);
    Hyperreal eps = Hyperreal::generator(c, 0);
    f.add_override({Rat(0)}, eps);

    Hyperreal at0 = evaluate(f, standard_point(c, {Rat(0)}));
    CHECK(at0 == eps);
    CHECK(at0.standard_part().rat() == 0);
    CHECK(st_function_value(f, {Rat(0)}).rat() == 0);
    // Away from the override the body rules.
    CHECK(evaluate(f, standard_point(c, {Rat(2)})) ==
          Hyperreal::from_rat(c, Rat(4)));
}

TEST_CASE("evaluate: eq2 standard part is x1 + x2") {
    auto c = ctx2();
    ExprPtr eq2 = parse("sin(eps*x1)/eps + x2", 2, *c);
    for (auto [a1, a2] : {std::pair{Rat(1), Rat(2)}, {Rat(-3), Rat(1, 2)},
                          {Rat(0), Rat(5)}}) {
        Hyperreal v = eval_expr(eq2, standard_point(c, {a1, a2}), c);
        // sin's jet coefficients at 0 are exact rationals, so this is
        // exact, not merely approximate.
        CHECK(approx_eq(v, Hyperreal::from_rat(c, a1 + a2)));
        CHECK(v.standard_part().rat() == a1 + a2);
    }
}

TEST_CASE("differentiate: symbolic rules") {
    auto c = ctx2();
    ExprPtr f = parse(kDeg7, 1, *c);
    ExprPtr fp = differentiate(f, 1);
    ExprPtr expected = parse("x1^6 - 3*x1^5 + 2*x1^4 + eps + 2*delta*x1",
                             1, *c);
    for (Rat a : {Rat(0), Rat(1), Rat(2), Rat(-3, 2), Rat(7, 3)}) {
        Point p = standard_point(c, {a});
        CHECK(eval_expr(fp, p, c) == eval_expr(expected, p, c));
    }

    ExprPtr lin = differentiate(parse("eps*x1", 1, *c), 1);
    CHECK(eval_expr(lin, standard_point(c, {Rat(5)}), c) ==
          Hyperreal::generator(c, 0));
}

TEST_CASE("differentiate: finite-difference oracle for sin(eps*x)") {
    auto c = ctx2();
    ExprPtr f = parse("sin(eps*x1)", 1, *c);
    ExprPtr fp = differentiate(f, 1); // eps*cos(eps*x1)
    Rat h(1, 10000);
    for (Rat a : {Rat(0), Rat(1), Rat(-2), Rat(5, 3)}) {
        Hyperreal num = div(
            sub(eval_expr(f, standard_point(c, {a + h}), c),
                eval_expr(f, standard_point(c, {a - h}), c)),
            Hyperreal::from_rat(c, 2 * h));
        Hyperreal sym = eval_expr(fp, standard_point(c, {a}), c);
        CHECK(std::abs(num.standard_part().to_double() -
                       sym.standard_part().to_double()) < 1e-6);
        // Compare the eps^1 coefficients too: both are ~cos(0*a)=d/du.
        auto coeff_at = [&](const Hyperreal &x, long e) {
            for (const auto &t : x.terms())
                if (t.exp == Exponent({Rat(e), Rat(0)}))
                    return t.coef.to_double();
            return 0.0;
        };
        CHECK(std::abs(coeff_at(num, 1) - coeff_at(sym, 1)) < 1e-6);
    }
}

TEST_CASE("nth_derivative_at: the degree-7 example, exact") {
    auto c = ctx2();
    PerturbedFn f(parse(kDeg7, 1, *c), 1, c);
    auto d = [&](unsigned k, long a) {
        return nth_derivative_at(f, 1, k, standard_point(c, {Rat(a)}));
    };
    CHECK(d(1, 0) == series(c, {{{1, 0}, Rat(1)}}));
    CHECK(d(1, 1) == series(c, {{{1, 0}, Rat(1)}, {{0, 1}, Rat(2)}}));
    CHECK(d(1, 2) == series(c, {{{1, 0}, Rat(1)}, {{0, 1}, Rat(4)}}));
    CHECK(d(2, 0) == series(c, {{{0, 1}, Rat(2)}}));
    CHECK(d(2, 1) == series(c, {{{0, 0}, Rat(-1)}, {{0, 1}, Rat(2)}}));
    CHECK(d(2, 2) == series(c, {{{0, 0}, Rat(16)}, {{0, 1}, Rat(2)}}));
    CHECK(d(5, 0) == Hyperreal::from_rat(c, Rat(48)));

    PerturbedFn five(parse("5", 1, *c), 1, c);
    CHECK(nth_derivative_at(five, 1, 1, standard_point(c, {Rat(7)}))
              .is_zero());
}

TEST_CASE("derivatives ignore overrides") {
    auto c = ctx2();
    PerturbedFn f(parse(kDeg7, 1, *c), 1, c);
    PerturbedFn g(parse(kDeg7, 1, *c), 1, c);
    Hyperreal eps = Hyperreal::generator(c, 0);
    g.add_override({Rat(1)},
                   add(evaluate(f, standard_point(c, {Rat(1)})), eps));
    for (unsigned k = 1; k <= 3; ++k)
        CHECK(nth_derivative_at(f, 1, k, standard_point(c, {Rat(1)})) ==
              nth_derivative_at(g, 1, k, standard_point(c, {Rat(1)})));
}

TEST_CASE("st_function_value / st_derivative") {
    auto c = ctx2();
    PerturbedFn ex1(parse("x1^2", 1, *c), 1, c);
    ex1.add_override({Rat(0)}, Hyperreal::generator(c, 0));
    CHECK(st_function_value(ex1, {Rat(0)}).rat() == 0);

    PerturbedFn eq2(parse("sin(eps*x1)/eps + x2", 2, *c), 2, c);
    for (auto [a1, a2] : {std::pair{Rat(0), Rat(0)}, {Rat(2), Rat(-1)},
                          {Rat(-5, 2), Rat(3)}})
        CHECK(st_derivative(eq2, 1, 1, {a1, a2}).rat() == 1);

    PerturbedFn f(parse(kDeg7, 1, *c), 1, c);
    CHECK(st_derivative(f, 1, 2, {Rat(2)}).rat() == 16);
}

TEST_CASE("evaluation homomorphism over random ASTs") {
    auto c = ctx2();
    Rng rng(1234);
    for (int i = 0; i < 100; ++i) {
        ExprPtr e1 = add_infinitesimal_terms(c, random_polynomial(rng), rng);
        ExprPtr e2 = random_polynomial(rng);
        Point p = standard_point(c, {random_rat(rng, 5, 4)});
        Hyperreal v1 = eval_expr(e1, p, c), v2 = eval_expr(e2, p, c);
        CHECK(eval_expr(make_add(e1, e2), p, c) == add(v1, v2));
        CHECK(eval_expr(make_sub(e1, e2), p, c) == sub(v1, v2));
        CHECK(eval_expr(make_mul(e1, e2), p, c) == mul(v1, v2));
        if (!v2.is_zero())
            CHECK(eval_expr(make_div(e1, e2), p, c) == div(v1, v2));
        CHECK(eval_expr(make_pow(e1, 3), p, c) == pow_int(v1, 3));
    }
}

TEST_CASE("derivative / standard-part commutation") {
    auto c = ctx2();
    Rng rng(777);
    for (int i = 0; i < 100; ++i) {
        ExprPtr body =
            add_infinitesimal_terms(c, random_polynomial(rng), rng);
        PerturbedFn f(body, 1, c);
        Rat a = random_rat(rng, 4, 3);
        unsigned k = 1 + static_cast<unsigned>(i % 3);
        // Classical route: specialize generators to zero, differentiate
        // symbolically, evaluate exactly over the rationals.
        ExprPtr st_body = specialize_standard(body);
        for (unsigned j = 0; j < k; ++j)
            st_body = differentiate(st_body, 1);
        Rat classical = eval_expr_rat(st_body, {a});
        CHECK(st_derivative(f, 1, k, {a}).rat() == classical);
    }
}

TEST_CASE("transcendental lifting matches an independent jet") {
    auto c = ctx2();
    Hyperreal eps = Hyperreal::generator(c, 0);
    struct Case {
        FuncKind fk;
        double (*f)(double);
        double a;
    };
    auto d_sin = +[](double x) { return std::sin(x); };
    auto d_cos = +[](double x) { return std::cos(x); };
    auto d_exp = +[](double x) { return std::exp(x); };
    auto d_log = +[](double x) { return std::log(x); };
    for (const Case &cs : {Case{FuncKind::Sin, d_sin, 0.5},
                           Case{FuncKind::Cos, d_cos, -1.0},
                           Case{FuncKind::Exp, d_exp, 0.25},
                           Case{FuncKind::Log, d_log, 2.0}}) {
        Rat a(Rat(cs.a * 4) / 4); // exact quarter-integer
        // u = a + 3*eps - eps^2/2
        Hyperreal u = add(Hyperreal::from_rat(c, a),
                          add(mul(Hyperreal::from_rat(c, Rat(3)), eps),
                              mul(Hyperreal::from_rat(c, Rat(-1, 2)),
                                  mul(eps, eps))));
        Hyperreal v =
            eval_expr(make_func(cs.fk, make_var(1)), Point{u}, c);
        CHECK(std::abs(v.standard_part().to_double() -
                       cs.f(rat_to_double(a))) < 1e-15);
        // Independent jet oracle: numerically propagate the Taylor jet
        // of F around a through h = 3e - e^2/2 up to order 4 in eps.
        double fa = cs.f(rat_to_double(a));
        double d1, d2, d3, d4; // F', F'', F''', F'''' at a
        double av = rat_to_double(a);
        switch (cs.fk) {
        case FuncKind::Sin:
            d1 = std::cos(av); d2 = -std::sin(av);
            d3 = -std::cos(av); d4 = std::sin(av);
            break;
        case FuncKind::Cos:
            d1 = -std::sin(av); d2 = -std::cos(av);
            d3 = std::sin(av); d4 = std::cos(av);
            break;
        case FuncKind::Exp:
            d1 = d2 = d3 = d4 = std::exp(av);
            break;
        default:
            d1 = 1 / av; d2 = -1 / (av * av);
            d3 = 2 / (av * av * av); d4 = -6 / (av * av * av * av);
            break;
        }
        // h^j coefficients in eps: h = 3e - e^2/2.
        // h^2 = 9e^2 - 3e^3 + e^4/4; h^3 = 27e^3 - 27/2 e^4; h^4 = 81e^4.
        double want[5] = {fa,
                          3 * d1,
                          -0.5 * d1 + 9.0 / 2 * d2,
                          -3.0 / 2 * d2 + 27.0 / 6 * d3,
                          (1.0 / 4) / 2 * d2 - (27.0 / 2) / 6 * d3 +
                              81.0 / 24 * d4};
        for (long e = 0; e <= 4; ++e) {
            double got = 0;
            for (const auto &t : v.terms())
                if (t.exp == Exponent({Rat(e), Rat(0)}))
                    got = t.coef.to_double();
            CHECK(std::abs(got - want[e]) < 1e-9);
        }
    }
}

TEST_CASE("override locality") {
    auto c = ctx2();
    Rng rng(55);
    for (int i = 0; i < 30; ++i) {
        ExprPtr body = random_polynomial(rng);
        PerturbedFn f(body, 1, c);
        add_random_overrides(f, rng);
        for (int s = 0; s < 10; ++s) {
            Rat a = random_rat(rng, 4, 4);
            Point p = standard_point(c, {a});
            Hyperreal with = evaluate(f, p);
            Hyperreal without = eval_expr(body, p, c);
            bool is_override = false;
            for (const auto &[pt, val] : f.overrides())
                if (pt == std::vector<Rat>{a})
                    is_override = true;
            if (is_override) {
                Hyperreal diff = sub(with, without);
                CHECK((diff.is_zero() ||
                       diff.magnitude_class() ==
                           MagnitudeClass::Infinitesimal));
            } else {
                CHECK(with == without);
            }
        }
    }
}

TEST_CASE("override validation rejects appreciable deviations") {
    auto c = ctx2();
    PerturbedFn f(parse("x1^2", 1, *c), 1, c);
    CHECK_THROWS_AS(f.add_override({Rat(0)}, Hyperreal::from_rat(c, Rat(1))),
                    Error);
    f.add_override({Rat(0)}, Hyperreal::generator(c, 0));
    CHECK_THROWS_AS(f.add_override({Rat(0)}, Hyperreal::generator(c, 1)),
                    Error); // duplicate point
}

TEST_CASE("chain rule property on random compositions") {
    auto c = ctx2();
    Rng rng(2024);
    int used = 0;
    for (int i = 0; i < 200 && used < 60; ++i) {
        ExprPtr fb = add_infinitesimal_terms(c, random_polynomial(rng, 4),
                                             rng, 2);
        ExprPtr gb = add_infinitesimal_terms(c, random_polynomial(rng, 3),
                                             rng, 2);
        Rat a = random_rat(rng, 3, 2);
        Hyperreal ga = eval_expr(gb, standard_point(c, {a}), c);
        if (ga.magnitude_class() == MagnitudeClass::Infinite)
            continue;
        ExprPtr composed = substitute_vars(fb, {gb});
        Hyperreal lhs = eval_expr(differentiate(composed, 1),
                                  standard_point(c, {a}), c);
        Hyperreal rhs =
            mul(eval_expr(differentiate(fb, 1), Point{ga}, c),
                eval_expr(differentiate(gb, 1), standard_point(c, {a}), c));
        CHECK(approx_eq(lhs, rhs));
        ++used;
    }
    CHECK(used >= 60);
}

TEST_CASE("PerturbedFn JSON round trip") {
    auto c = ctx2();
    PerturbedFn f(parse(kDeg7, 1, *c), 1, c);
    f.add_override({Rat(0)}, Hyperreal::generator(c, 0));
    f.add_override({Rat(1)},
                   add(evaluate(f, standard_point(c, {Rat(1)})),
                       Hyperreal::generator(c, 1)));
    nlohmann::json j = f.to_json();
    PerturbedFn back = PerturbedFn::from_json(j, c);
    CHECK(back.arity() == 1);
    REQUIRE(back.overrides().size() == 2);
    for (Rat a : {Rat(0), Rat(1), Rat(1, 3), Rat(-2)})
        CHECK(evaluate(back, standard_point(c, {a})) ==
              evaluate(f, standard_point(c, {a})));
    CHECK(back.to_json() == j);
}
