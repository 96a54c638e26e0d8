#include "hyperopt/hyperreal.hpp"
#include "hyperopt/errors.hpp"
#include "hyperopt/tables.hpp"

#include "support/naive_series.hpp"
#include "support/random_gen.hpp"

#include <doctest.h>

using namespace hyperopt;
using namespace hyperopt::testing;

namespace {

ContextPtr ctx2() { return make_context({"eps", "delta"}); }
ContextPtr ctx1() { return make_context({"eps"}); }

Hyperreal mono1(const ContextPtr &c, Rat power, Rat coef = Rat(1)) {
    return Hyperreal::make(c, {{Exponent({std::move(power)}), std::move(coef)}});
}

} // namespace

TEST_CASE("make: embedding, cancellation, infinite element") {
    auto c = ctx1();
    Hyperreal three =
        Hyperreal::make(c, {{Exponent({Rat(0)}), Rat(3)}});
    CHECK(three.magnitude_class() == MagnitudeClass::Appreciable);
    CHECK(three.standard_part().rat() == 3);

    Hyperreal z = Hyperreal::make(
        c, {{Exponent({Rat(1)}), Rat(1)}, {Exponent({Rat(1)}), Rat(-1)}});
    CHECK(z.is_zero());
    CHECK(z.magnitude_class() == MagnitudeClass::Zero);

    Hyperreal omega = mono1(c, Rat(-1));
    CHECK(omega.magnitude_class() == MagnitudeClass::Infinite);

    CHECK_THROWS_AS(
        Hyperreal::make(c, {{Exponent({Rat(17)}), Rat(1)}}), Error);
}

TEST_CASE("add/sub/mul: interaction-table examples") {
    auto c = ctx1();
    Hyperreal eps = Hyperreal::generator(c, 0);
    Hyperreal omega = mono1(c, Rat(-1));

    Hyperreal s = add(eps, eps);
    CHECK(s == mono1(c, Rat(1), Rat(2)));
    CHECK(s.magnitude_class() == MagnitudeClass::Infinitesimal);

    CHECK(add(Hyperreal::from_rat(c, Rat(3)), omega).magnitude_class() ==
          MagnitudeClass::Infinite);

    CHECK(mul(eps, omega) == Hyperreal::from_rat(c, Rat(1)));
    CHECK(mul(eps, omega).magnitude_class() == MagnitudeClass::Appreciable);
    CHECK(mul(mul(eps, eps), omega) == eps);
    CHECK(mul(mul(eps, eps), omega).magnitude_class() ==
          MagnitudeClass::Infinitesimal);
}

TEST_CASE("div: worked quotients and the geometric-series oracle") {
    auto c = ctx1();
    Hyperreal eps = Hyperreal::generator(c, 0);
    Hyperreal one = Hyperreal::from_rat(c, Rat(1));

    CHECK(div(mul(eps, eps), eps) == eps);
    CHECK(div(eps, eps) == one);
    CHECK_THROWS_AS(div(one, Hyperreal::zero(c)), DivisionByZero);

    // 1/(1+eps): multiply back with an independent convolution; the
    // residual must consist only of terms beyond the truncation bound.
    Hyperreal q = div(one, add(one, eps));
    NaiveSeries prod = naive_mul(naive_from(q), naive_from(add(one, eps)));
    NaiveSeries residual = naive_sub(prod, naive_from(one));
    CHECK(naive_beyond_bound(residual, c->exp_bound()));
    // Leading terms are the alternating geometric series.
    REQUIRE(q.terms().size() >= 3);
    CHECK(q.terms()[0].coef.rat() == 1);
    CHECK(q.terms()[1].exp == Exponent({Rat(1)}));
    CHECK(q.terms()[1].coef.rat() == -1);
    CHECK(q.terms()[2].exp == Exponent({Rat(2)}));
    CHECK(q.terms()[2].coef.rat() == 1);
}

TEST_CASE("magnitude_class basics") {
    auto c = ctx2();
    Hyperreal eps = Hyperreal::generator(c, 0);
    Hyperreal delta = Hyperreal::generator(c, 1);
    Hyperreal x = add(mul(Hyperreal::from_rat(c, Rat(2)), eps),
                      Hyperreal::from_rat(c, Rat(5)));
    CHECK(x.magnitude_class() == MagnitudeClass::Appreciable);

    Hyperreal y = add(add(Hyperreal::make(c, {{Exponent({Rat(-1), Rat(0)}),
                                               Rat(1)}}),
                          Hyperreal::from_rat(c, Rat(7))),
                      eps);
    CHECK(y.magnitude_class() == MagnitudeClass::Infinite);

    CHECK(delta.magnitude_class() == MagnitudeClass::Infinitesimal);
    // Lexicographic valuation: delta is below every positive power of eps.
    CHECK(compare(delta, Hyperreal::make(c, {{Exponent({Rat(3), Rat(0)}),
                                              Rat(1)}})) < 0);
}

TEST_CASE("standard_part") {
    auto c = ctx2();
    Hyperreal eps = Hyperreal::generator(c, 0);
    Hyperreal delta = Hyperreal::generator(c, 1);
    Hyperreal x = add(Hyperreal::from_rat(c, Rat(3)),
                      sub(eps, mul(Hyperreal::from_rat(c, Rat(4)), delta)));
    CHECK(x.standard_part().rat() == 3);
    CHECK(eps.standard_part().rat() == 0);
    CHECK_THROWS_AS(
        Hyperreal::make(c, {{Exponent({Rat(-1), Rat(0)}), Rat(1)}})
            .standard_part(),
        NotNearstandard);
}

TEST_CASE("standard-part homomorphism (rational mode, random)") {
    auto c = ctx2();
    Rng rng(20260826);
    for (int i = 0; i < 200; ++i) {
        Hyperreal x = random_hyperreal(c, rng, /*finite_only=*/true);
        Hyperreal y = random_hyperreal(c, rng, true);
        Rat sx = x.standard_part().rat(), sy = y.standard_part().rat();
        CHECK(add(x, y).standard_part().rat() == sx + sy);
        CHECK(sub(x, y).standard_part().rat() == sx - sy);
        CHECK(mul(x, y).standard_part().rat() == sx * sy);
        if (sy != 0)
            CHECK(div(x, y).standard_part().rat() == sx / sy);
        CHECK(approx_eq(x, y) == (sx == sy ? approx_eq(x, y) : false));
        if (approx_eq(x, y))
            CHECK(sx == sy);
    }
}

TEST_CASE("standard-part homomorphism (float mode, 1e-12 relative)") {
    auto c = make_context({"eps", "delta"}, Mode::Float);
    Rng rng(7);
    auto rel_close = [](double a, double b) {
        double scale = std::max({std::abs(a), std::abs(b), 1.0});
        return std::abs(a - b) <= 1e-12 * scale;
    };
    for (int i = 0; i < 200; ++i) {
        Hyperreal x = random_hyperreal(c, rng, true);
        Hyperreal y = random_hyperreal(c, rng, true);
        double sx = x.standard_part().flt(), sy = y.standard_part().flt();
        CHECK(rel_close(add(x, y).standard_part().flt(), sx + sy));
        CHECK(rel_close(mul(x, y).standard_part().flt(), sx * sy));
        if (std::abs(sy) > 0.5)
            CHECK(rel_close(div(x, y).standard_part().flt(), sx / sy));
    }
}

TEST_CASE("relaxed relations") {
    auto c = ctx2();
    Hyperreal eps = Hyperreal::generator(c, 0);
    Hyperreal delta = Hyperreal::generator(c, 1);
    Hyperreal zero = Hyperreal::zero(c);

    CHECK(approx_eq(add(eps, mul(Hyperreal::from_rat(c, Rat(2)), delta)),
                    zero));
    CHECK(gg(add(Hyperreal::from_rat(c, Rat(16)),
                 mul(Hyperreal::from_rat(c, Rat(2)), delta)),
             zero));
    CHECK(ll(add(Hyperreal::from_rat(c, Rat(-1)),
                 mul(Hyperreal::from_rat(c, Rat(2)), delta)),
             zero));

    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        Hyperreal x = random_hyperreal(c, rng);
        Hyperreal y = random_hyperreal(c, rng);
        CHECK(maior(x, x));
        if (gg(x, y)) {
            CHECK(maior(x, y));
            CHECK(!approx_eq(x, y));
            CHECK(!maior(y, x) == !approx_eq(x, y));
        }
        // maior is total on the relaxed order.
        CHECK((maior(x, y) || maior(y, x)));
    }
}

TEST_CASE("sqrt_abs") {
    auto c = ctx1();
    Hyperreal eps = Hyperreal::generator(c, 0);
    CHECK(sqrt_abs(mul(eps, eps)) == eps);
    CHECK(sqrt_abs(Hyperreal::from_rat(c, Rat(4))) ==
          Hyperreal::from_rat(c, Rat(2)));

    Hyperreal r = sqrt_abs(eps);
    REQUIRE(!r.is_zero());
    CHECK(r.leading().exp == Exponent({Rat(1, 2)}));
    // eps^(1/2) dominates eps by an order of magnitude: the quotient is
    // infinite in valuation, i.e. its leading exponent is strictly lower.
    CHECK(r.leading().exp < eps.leading().exp);
    CHECK(div(r, eps).magnitude_class() == MagnitudeClass::Infinite);
    // Oracle: square via independent convolution, residual beyond bound.
    NaiveSeries sq = naive_mul(naive_from(r), naive_from(r));
    CHECK(naive_beyond_bound(naive_sub(sq, naive_from(eps)),
                             c->exp_bound()));

    // Non-square appreciable value: sqrt(2) is rationalized from a
    // 64-digit constant, so h*h - x has coefficients ~1e-64 rather than
    // exactly zero. Check every residual coefficient is below 1e-50.
    Hyperreal x = add(Hyperreal::from_rat(c, Rat(2)), eps);
    Hyperreal h = sqrt_abs(x);
    for (const auto &t : sub(mul(h, h), x).terms())
        CHECK(std::abs(t.coef.to_double()) < 1e-50);
    CHECK(std::abs(h.standard_part().to_double() - std::sqrt(2.0)) < 1e-15);

    CHECK_THROWS_AS(sqrt_abs(mono1(c, Rat(-2))), Error);
}

TEST_CASE("field laws on non-truncated results") {
    auto c = ctx2();
    Rng rng(4242);
    for (int i = 0; i < 120; ++i) {
        Hyperreal x = random_hyperreal(c, rng, true);
        Hyperreal y = random_hyperreal(c, rng, true);
        Hyperreal z = random_hyperreal(c, rng, true);
        CHECK(add(x, y) == add(y, x));
        CHECK(mul(x, y) == mul(y, x));
        CHECK(add(add(x, y), z) == add(x, add(y, z)));
        Hyperreal lhs = mul(x, add(y, z));
        Hyperreal rhs = add(mul(x, y), mul(x, z));
        if (!lhs.truncated() && !rhs.truncated())
            CHECK(lhs == rhs);
        Hyperreal m1 = mul(mul(x, y), z), m2 = mul(x, mul(y, z));
        if (!m1.truncated() && !m2.truncated())
            CHECK(m1 == m2);
    }
}

TEST_CASE("x * (1/x) = 1 up to terms beyond the bound") {
    // Single generator keeps the Neumann series under max_terms, so the
    // only information loss is beyond the exponent bound. For infinite x
    // (negative leading exponent m) the representable inverse necessarily
    // stops at the bound, so the product residual starts at bound + m
    // rather than at the bound itself.
    auto c = ctx1();
    Rng rng(4243);
    int inverses = 0, finite_leads = 0;
    for (int i = 0; i < 150; ++i) {
        Hyperreal x = random_hyperreal(c, rng);
        if (x.is_zero())
            continue;
        Hyperreal inv = inverse(x);
        if (inv.terms().size() >= c->max_terms())
            continue; // max_terms overflow: exactness not promised
        Hyperreal p = mul(x, inv);
        NaiveSeries res = naive_sub(
            naive_from(p), naive_from(Hyperreal::from_rat(c, Rat(1))));
        Rat lead = x.leading().exp[0];
        Rat eff = c->exp_bound() + (lead < 0 ? lead : Rat(0));
        for (const auto &[e, coef] : res)
            CHECK(e[0] > eff);
        if (lead >= 0) {
            CHECK(naive_beyond_bound(res, c->exp_bound()));
            ++finite_leads;
        }
        ++inverses;
    }
    CHECK(inverses > 80);
    CHECK(finite_leads > 20);
}

TEST_CASE("order compatibility") {
    auto c = ctx2();
    Rng rng(31337);
    Hyperreal zero = Hyperreal::zero(c);
    int used = 0;
    for (int i = 0; i < 1500 && used < 100; ++i) {
        Hyperreal x = random_hyperreal(c, rng);
        Hyperreal y = random_hyperreal(c, rng);
        if (compare(x, zero) > 0 && compare(y, zero) > 0) {
            CHECK(compare(add(x, y), zero) > 0);
            Hyperreal p = mul(x, y);
            if (!p.truncated())
                CHECK(compare(p, zero) > 0);
            ++used;
        }
    }
    CHECK(used >= 50);
}

TEST_CASE("truncation soundness") {
    auto c = ctx1();
    Hyperreal e10 = mono1(c, Rat(10));
    Hyperreal p = mul(e10, e10); // exponent 20 > bound 16
    CHECK(p.truncated());
    CHECK(p.is_zero());

    Hyperreal small = mul(mono1(c, Rat(3)), mono1(c, Rat(4)));
    CHECK(!small.truncated());
    CHECK(small == mono1(c, Rat(7)));

    // Exactness whenever no flag is set, against the naive convolution.
    Rng rng(5150);
    for (int i = 0; i < 100; ++i) {
        Hyperreal x = random_hyperreal(c, rng);
        Hyperreal y = random_hyperreal(c, rng);
        Hyperreal p2 = mul(x, y);
        if (!p2.truncated())
            CHECK(naive_sub(naive_from(p2),
                            naive_mul(naive_from(x), naive_from(y)))
                      .empty());
    }
}

TEST_CASE("interaction tables reproduce the 3x3 class grids") {
    auto c = ctx2();
    using MC = MagnitudeClass;
    auto cls = [](const TableCell &cell) { return cell.cls; };

    InteractionTable addt = interaction_table(c, TableOp::Add);
    // rows/cols: 0=Infinitesimal, 1=Appreciable, 2=Infinite
    CHECK(cls(addt.cells[0][0]) == MC::Infinitesimal);
    CHECK(cls(addt.cells[0][1]) == MC::Appreciable);
    CHECK(cls(addt.cells[0][2]) == MC::Infinite);
    CHECK(cls(addt.cells[1][0]) == MC::Appreciable);
    CHECK(!addt.cells[1][1].cls.has_value()); // a + a can cancel
    CHECK(cls(addt.cells[1][2]) == MC::Infinite);
    CHECK(cls(addt.cells[2][0]) == MC::Infinite);
    CHECK(cls(addt.cells[2][1]) == MC::Infinite);
    CHECK(!addt.cells[2][2].cls.has_value());

    InteractionTable mult = interaction_table(c, TableOp::Mul);
    CHECK(cls(mult.cells[0][0]) == MC::Infinitesimal);
    CHECK(cls(mult.cells[0][1]) == MC::Infinitesimal);
    CHECK(!mult.cells[0][2].cls.has_value()); // eps * infinite
    CHECK(!mult.cells[2][0].cls.has_value());
    CHECK(cls(mult.cells[1][1]) == MC::Appreciable);
    CHECK(cls(mult.cells[2][2]) == MC::Infinite);

    InteractionTable divt = interaction_table(c, TableOp::Div);
    CHECK(!divt.cells[0][0].cls.has_value()); // eps / eps
    CHECK(cls(divt.cells[0][1]) == MC::Infinitesimal);
    CHECK(cls(divt.cells[0][2]) == MC::Infinitesimal);
    CHECK(cls(divt.cells[1][0]) == MC::Infinite);
    CHECK(cls(divt.cells[1][1]) == MC::Appreciable);
    CHECK(cls(divt.cells[1][2]) == MC::Infinitesimal);
    CHECK(cls(divt.cells[2][0]) == MC::Infinite);
    CHECK(cls(divt.cells[2][1]) == MC::Infinite);
    CHECK(!divt.cells[2][2].cls.has_value());

    // Every ambiguous cell carries two witnesses of different classes.
    for (const auto *t : {&addt, &mult, &divt})
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 3; ++col) {
                const TableCell &cell = t->cells[r][col];
                REQUIRE(!cell.witness_classes.empty());
                if (!cell.cls) {
                    bool mixed = false;
                    for (auto wc : cell.witness_classes)
                        if (wc != cell.witness_classes.front())
                            mixed = true;
                    CHECK(mixed);
                }
            }
}

TEST_CASE("canonical string form") {
    auto c = ctx2();
    Hyperreal x = Hyperreal::make(
        c, {{Exponent({Rat(0), Rat(0)}), Rat(-1)},
            {Exponent({Rat(1), Rat(0)}), Rat(2)},
            {Exponent({Rat(1, 2), Rat(2)}), Rat(3)}});
    CHECK(x.str() == "-1 + 2*eps + 3*eps^(1/2)*delta^2");
    CHECK(Hyperreal::zero(c).str() == "0");
    CHECK(Hyperreal::generator(c, 0).str() == "eps");
    CHECK(mono1(ctx1(), Rat(-1)).str() == "eps^(-1)");
    CHECK(Hyperreal::from_rat(c, Rat(-3, 7)).str() == "-3/7");
}

TEST_CASE("JSON round trip") {
    auto c = ctx2();
    Rng rng(8675309);
    for (int i = 0; i < 50; ++i) {
        Hyperreal x = random_hyperreal(c, rng);
        Hyperreal back = Hyperreal::from_json(c, x.to_json());
        CHECK(back == x);
    }
    nlohmann::json j = Hyperreal::make(c, {{Exponent({Rat(1, 2), Rat(0)}),
                                            Rat(3, 4)}})
                           .to_json();
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 1);
    CHECK(j[0]["exps"][0] == "1/2");
    CHECK(j[0]["exps"][1] == "0");
    CHECK(j[0]["coef"] == "3/4");
}
