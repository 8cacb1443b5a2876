#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ndde/envelope.hpp"
#include "test_support.hpp"

using namespace ndde;

namespace {

SampledEquation sampled(const NeutralEquation& eq) { return SampledEquation(eq, default_norm_window(eq)); }

// p(t) written out directly from the definition.
double p_direct(const NeutralEquation& eq, double lambda, double t) {
    double v = lambda * eq.a(t) * std::exp(lambda * eq.g_lag(t)) - lambda;
    for (const auto& term : eq.terms) v += std::exp(lambda * term.lag(t)) * term.coeff(t);
    return v;
}

NeutralEquation random_equation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    NeutralEquation eq;
    const double a_amp = 0.3 * u(rng);
    eq.a = ScalarFn(Expr::number(a_amp) * Expr::call(Function::Cos, {Expr::number(1.0 + u(rng)) * Expr::variable()}));
    const double sigma = 0.2 + u(rng);
    eq.g_lag = LagFn(Expr::number(sigma) + Expr::number(0.1) * Expr::call(Function::Sin, {Expr::variable()}),
                     sigma + 0.1, sigma - 0.1);
    const int m = 1 + static_cast<int>(u(rng) * 3.0);
    for (int k = 0; k < m; ++k) {
        const double b0 = 0.5 + u(rng);
        const double tau = 0.2 + 0.5 * u(rng);
        eq.terms.push_back({ScalarFn(Expr::number(b0) + Expr::number(0.3 * u(rng)) *
                                                             Expr::call(Function::Sin, {Expr::number(u(rng) * 3.0) * Expr::variable()})),
                            LagFn(Expr::number(tau) + Expr::number(0.05) * Expr::call(Function::Cos, {Expr::variable()}),
                                  tau + 0.05, tau - 0.05)});
    }
    return eq;
}

} // namespace

TEST_CASE("p at small and moderate rates") {
    const auto s = sampled(test::sine_lag_equation(0.5));
    CHECK(p_inf(s, 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p_inf(s, 0.1) == doctest::Approx(0.9429190329202469).epsilon(1e-6));
}

TEST_CASE("M1 closed form for an ordinary delay equation") {
    // a = 0, b = 1, tau = 0.3, lambda = 0.2:
    // (0.2 + e^{0.06}) * 0.3 e^{0.06} / (e^{0.06} - 0.2).
    const auto s = sampled(test::constant_equation(0.0, 0.3, {{1.0, 0.3}}));
    CHECK(compute_M1(s, 0.2) == doctest::Approx(0.46639847181901634).epsilon(1e-12));
}

TEST_CASE("feasibility of the reference problems") {
    SUBCASE("constant neutral lag at 0.1") {
        const auto s = sampled(test::sine_lag_equation(0.5));
        const auto f = check_feasible(s, 0.1);
        CHECK(f.feasible);
        CHECK(f.failing_clause.empty());
        CHECK(f.M1 == doctest::Approx(0.960944881986051).epsilon(1e-5));
    }
    SUBCASE("variable neutral lag at 0.06") {
        const auto s = sampled(test::variable_neutral_lag_equation());
        const auto f = check_feasible(s, 0.06);
        CHECK(f.feasible);
        CHECK(f.M1 == doctest::Approx(0.96057).epsilon(1e-4));
    }
    SUBCASE("fast rates violate a clause") {
        const auto s = sampled(test::sine_lag_equation(0.5));
        const auto f = check_feasible(s, 10.0);
        CHECK_FALSE(f.feasible);
        CHECK_FALSE(f.failing_clause.empty());
        CHECK((std::isnan(f.M1) || f.M1 >= 1.0));
    }
    SUBCASE("non-positive rate") {
        const auto s = sampled(test::sine_lag_equation(0.5));
        CHECK_FALSE(check_feasible(s, 0.0).feasible);
    }
}

TEST_CASE("compute_M1 names the failed precondition") {
    const auto s = sampled(test::constant_equation(0.6, 1.0, {{1.0, 0.3}}));
    // e^{lambda} 0.6 >= 1 once lambda >= log(1/0.6).
    CHECK_THROWS_WITH_AS((void)compute_M1(s, 0.6), doctest::Contains("||a||"), std::domain_error);
    const auto slow = sampled(test::constant_equation(0.0, 1.0, {{0.1, 0.3}}));
    CHECK_THROWS_WITH_AS((void)compute_M1(slow, 5.0), doctest::Contains("inf p"), std::domain_error);
}

TEST_CASE("optimized rate") {
    SUBCASE("constant neutral lag") {
        const auto s = sampled(test::sine_lag_equation(0.5));
        const auto lambda = optimize_lambda(s, 0.5, 1e-6);
        REQUIRE(lambda);
        CHECK(*lambda >= 0.1);
        CHECK(check_feasible(s, *lambda).feasible);
        CHECK(check_feasible(s, *lambda / 2.0).feasible);
    }
    SUBCASE("variable neutral lag") {
        const auto s = sampled(test::variable_neutral_lag_equation());
        const auto lambda = optimize_lambda(s, 0.5, 1e-6);
        REQUIRE(lambda);
        CHECK(*lambda >= 0.06);
        CHECK(check_feasible(s, *lambda).feasible);
    }
    SUBCASE("no rate when M1 never drops below one") {
        const auto s = sampled(test::constant_equation(0.99, 0.5, {{1.0, 0.3}}));
        CHECK_FALSE(optimize_lambda(s, 1.0, 1e-6));
    }
    SUBCASE("bad arguments") {
        const auto s = sampled(test::sine_lag_equation(0.5));
        CHECK_THROWS_AS((void)optimize_lambda(s, 0.0, 1e-6), std::invalid_argument);
    }
}

TEST_CASE("M1 approaches the multi-delay left side as the rate vanishes") {
    const auto s = sampled(test::sine_lag_equation(0.5));
    CHECK(std::abs(compute_M1(s, 1e-6) - multi_delay_lhs(s)) < 1e-3);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> a(0.0, 0.4), b(0.2, 2.0), bt(0.01, 0.5), sigma(0.1, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double bv = b(rng);
        const auto r = sampled(test::constant_equation(a(rng), sigma(rng), {{bv, bt(rng) / bv}}));
        CHECK(std::abs(compute_M1(r, 1e-6) - multi_delay_lhs(r)) < 1e-3);
    }
}

TEST_CASE("transform at zero rate reproduces the equation") {
    const auto eq = test::sine_lag_equation(0.5);
    const auto geq = transform_to_general(eq, 0.0);
    REQUIRE(geq.terms.size() == 2);
    for (double t : {0.0, 0.7, 3.1, 11.0}) {
        CHECK(geq.a0(t) == eq.a(t));
        CHECK(geq.c(t) == 0.0);
        CHECK(geq.terms[0].coeff(t) == 0.0);
        CHECK(geq.terms[1].coeff(t) == eq.terms[0].coeff(t));
        CHECK(geq.terms[1].lag(t) == eq.terms[0].lag(t));
    }
}

TEST_CASE("property: transformed delay coefficients minus c equal p") {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 10; ++i) {
        const auto eq = random_equation(rng);
        const NormWindow w = test::short_window(20.0, 1e-2);
        const SampledEquation s(eq, w);
        for (double lambda : {0.01, 0.1, 0.5}) {
            const auto geq = transform_to_general(eq, lambda);
            double worst = 0.0;
            double min_direct = std::numeric_limits<double>::infinity();
            for (double t : sample_nodes(w.window, w.step)) {
                double d = 0.0;
                for (const auto& term : geq.terms) d += term.coeff(t);
                const double direct = p_direct(eq, lambda, t);
                worst = std::max(worst, std::abs(d - geq.c(t) - direct));
                min_direct = std::min(min_direct, direct);
            }
            CHECK(worst < 1e-10);
            CHECK(std::abs(p_inf(s, lambda) - min_direct) < 1e-10);
        }
    }
}

TEST_CASE("kernel bound of the transformed equation stays below M1") {
    const auto eq = test::sine_lag_equation(0.5);
    const auto norm = default_norm_window(eq);
    const SampledEquation s(eq, norm);
    for (double lambda : {0.02, 0.05, 0.1}) {
        const auto k = kernel_bound(transform_to_general(eq, lambda), norm);
        CHECK(k.K0 <= compute_M1(s, lambda) + 1e-9);
    }
}

TEST_CASE("certificate constants") {
    const auto s = sampled(test::sine_lag_equation(0.5));
    SUBCASE("reference history") {
        const auto c = certificate(s, 0.1, test::cosine_history());
        CHECK(c.M0 == doctest::Approx(1.0 / (1.0 - c.M1)).epsilon(1e-14));
        CHECK(c.M0 == doctest::Approx(25.604838772804065).epsilon(1e-4));
        CHECK(c.C == doctest::Approx(44.66721984937155).epsilon(1e-4));
        CHECK(c.forcing_gain == doctest::Approx(301.2333973271066).epsilon(1e-4));
        CHECK(c.C >= c.M0 * std::abs(c.initial_value_part));
        REQUIRE(c.norm_phi.size() == 1);
        CHECK(c.norm_phi[0] == 1.0);
        CHECK(c.norm_psi == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(c.bound(0.0) == c.C);
        CHECK(c.bound(10.0) == doctest::Approx(c.C * std::exp(-1.0)));
    }
    SUBCASE("zero data gives zero constant") {
        InitialData zero{ScalarFn::constant(0.0), ScalarFn::constant(0.0), 0.0};
        const auto c = certificate(s, 0.1, zero);
        CHECK(c.C == 0.0);
        CHECK(c.bound(5.0, 2.0) == doctest::Approx(2.0 * c.forcing_gain));
    }
    SUBCASE("infeasible rate throws with diagnostics") {
        try {
            (void)certificate(s, 10.0, test::cosine_history());
            FAIL("expected an infeasible rate");
        } catch (const InfeasibleError& e) {
            CHECK_FALSE(e.diagnostics().feasible);
            CHECK(e.diagnostics().lambda == 10.0);
        }
    }
}
