#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ndde/solver.hpp"
#include "test_support.hpp"

using namespace ndde;

namespace {

const ScalarFn kZero = ScalarFn::constant(0.0);

// On [0, 0.25] both delayed arguments of the reference problem lie in the
// history, so x(t) = 1 + integral of 0.15 psi(s - 0.5) - phi(s - h(s)).
double first_interval_oracle(double t) {
    auto integrand = [](double s) {
        const double lag = 1.0 / std::numbers::e + 0.1 * std::sin(s);
        return 0.15 * (std::sin(2.0 * (s - 0.5)) + 2.0) - std::cos(s - lag);
    };
    return 1.0 + boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, t, 0, 1e-15);
}

} // namespace

TEST_CASE("ramp on the first interval") {
    // x' = -x(t - 1) with x = 1 before 0 gives x = 1 - t on [0, 1].
    const auto eq = test::constant_equation(0.0, 1.0, {{1.0, 1.0}});
    const InitialData init{ScalarFn::constant(1.0), kZero, 1.0};
    const auto traj = integrate(eq, init, kZero, 1.0, 1e-2);
    REQUIRE(traj.size() == 101);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(std::abs(traj.x()[i] - (1.0 - traj.time(i))) < 1e-10);
        CHECK(std::abs(traj.dx()[i] + 1.0) < 1e-10);
    }
}

TEST_CASE("reference problem matches quadrature on the first interval") {
    const auto traj = integrate(test::sine_lag_equation(0.5), test::cosine_history(), kZero, 0.25, 1e-3);
    CHECK(traj.frontier() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(traj.x().back() - first_interval_oracle(0.25)) < 1e-8);
    CHECK(std::abs(traj.eval_x(0.1234) - first_interval_oracle(0.1234)) < 1e-8);
}

TEST_CASE("zero data stays zero") {
    const InitialData zero{kZero, kZero, 0.0};
    const auto traj = integrate(test::sine_lag_equation(0.5), zero, kZero, 10.0, 1e-2);
    for (double x : traj.x()) CHECK(x == 0.0);
    for (double dx : traj.dx()) CHECK(dx == 0.0);
}

TEST_CASE("history lookups") {
    const auto init = test::cosine_history();
    const auto traj = integrate(test::sine_lag_equation(0.5), init, kZero, 1.0, 1e-2);
    const auto [x, dx] = history_eval(init, traj, -0.25);
    CHECK(x == std::cos(-0.25));
    CHECK(dx == std::sin(-0.5) + 2.0);
    CHECK(history_eval(init, traj, 0.0).first == init.x0);
    for (std::size_t i : {std::size_t{0}, std::size_t{7}, std::size_t{100}}) {
        CHECK(traj.eval_x(traj.time(i)) == traj.x()[i]);
        CHECK(traj.eval_dx(traj.time(i)) == traj.dx()[i]);
    }
    CHECK_THROWS_AS((void)history_eval(init, traj, 1.5), CausalityError);
    CHECK_THROWS_AS((void)traj.eval_x(1.0 + 1e-3), CausalityError);
}

TEST_CASE("step must not exceed the neutral lag") {
    const auto eq = test::constant_equation(0.15, 0.01, {{1.0, 0.3}});
    CHECK_THROWS_AS((void)integrate(eq, test::cosine_history(), kZero, 1.0, 0.02), SolverError);
    auto zero_lag = eq;
    zero_lag.g_lag = LagFn::constant(0.0);
    CHECK_THROWS_AS((void)integrate(zero_lag, test::cosine_history(), kZero, 1.0, 0.001), SolverError);
}

TEST_CASE("fundamental solution starts at one") {
    const auto traj = fundamental_solution(test::sine_lag_equation(0.5), 2.0, 5.0, 1e-2);
    CHECK(traj.t0() == 2.0);
    CHECK(traj.x().front() == 1.0);
    // Before the first delay reaches s the solution is flat: x' = -b x(h) with zero history.
    CHECK(traj.dx().front() == 0.0);
}

TEST_CASE("fourth order on smooth problems") {
    SUBCASE("ordinary decay with an instantaneous lag") {
        const auto eq = test::constant_equation(0.0, 1.0, {{1.0, 0.0}});
        const InitialData init{ScalarFn::constant(1.0), kZero, 1.0};
        const auto traj = integrate(eq, init, kZero, 1.0, 0.05);
        CHECK(std::abs(traj.x().back() - std::exp(-1.0)) < 1e-6);
        CHECK(std::abs(convergence_order(eq, init, kZero, 1.0, 0.1) - 4.0) < 0.3);
    }
    SUBCASE("reference problem on its first interval") {
        const double p = convergence_order(test::sine_lag_equation(0.5), test::cosine_history(), kZero, 0.25, 0.05);
        CHECK(std::abs(p - 4.0) < 0.5);
    }
    SUBCASE("second order across breakpoints that miss the grid") {
        const double p = convergence_order(test::sine_lag_equation(0.5), test::cosine_history(), kZero, 10.0, 0.1);
        CHECK(p >= 1.5);
    }
}

TEST_CASE("property: solutions depend linearly on data and forcing") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.2, 3.0);
    const auto eq = test::sine_lag_equation(0.5);
    auto random_fn = [&]() {
        return Expr::number(u(rng)) * Expr::call(Function::Cos, {Expr::number(w(rng)) * Expr::variable()}) +
               Expr::number(u(rng));
    };
    for (int i = 0; i < 50; ++i) {
        const Expr phi1 = random_fn(), psi1 = random_fn(), f1 = random_fn();
        const Expr phi2 = random_fn(), psi2 = random_fn(), f2 = random_fn();
        const double alpha = u(rng), beta = u(rng);
        const Expr A = Expr::number(alpha), B = Expr::number(beta);
        const auto i1 = InitialData::consistent(ScalarFn(phi1), ScalarFn(psi1), 0.0);
        const auto i2 = InitialData::consistent(ScalarFn(phi2), ScalarFn(psi2), 0.0);
        const auto i3 = InitialData::consistent(ScalarFn(A * phi1 + B * phi2), ScalarFn(A * psi1 + B * psi2), 0.0);
        const auto x1 = integrate(eq, i1, ScalarFn(f1), 3.0, 1e-2);
        const auto x2 = integrate(eq, i2, ScalarFn(f2), 3.0, 1e-2);
        const auto x3 = integrate(eq, i3, ScalarFn(A * f1 + B * f2), 3.0, 1e-2);
        double worst = 0.0;
        double scale = 1.0;
        for (std::size_t k = 0; k < x3.size(); ++k) {
            const double combo = alpha * x1.x()[k] + beta * x2.x()[k];
            worst = std::max(worst, std::abs(x3.x()[k] - combo));
            scale = std::max(scale, std::abs(combo));
        }
        CHECK(worst <= 1e-10 * scale);
    }
}

TEST_CASE("agrees with an independent Euler integration") {
    // No neutral term, so the first-order reference is trustworthy.
    auto eq = test::sine_lag_equation(0.5);
    eq.a = ScalarFn::constant(0.0);
    const auto init = test::cosine_history();
    const ScalarFn f = ScalarFn::from_source("0.3*sin(t)");
    const double h = 1e-2;
    const auto traj = integrate(eq, init, f, 5.0, h);
    const auto oracle = test::euler_oracle(eq, init, f, 5.0, h / 100.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) worst = std::max(worst, std::abs(traj.x()[i] - oracle.at(oracle.x, traj.time(i))));
    CHECK(worst < 1e-4);
}

TEST_CASE("one-sided derivatives at a propagated jump") {
    // x'(0-) = psi(0) = 2 differs from x'(0+), so x' jumps at the neutral lag 0.5.
    const auto eq = test::sine_lag_equation(0.5);
    const auto init = test::cosine_history();
    const auto traj = integrate(eq, init, kZero, 1.0, 0.1);
    const auto i = std::size_t{5};
    // Only the neutral term differs between the two sides.
    CHECK(traj.dx()[i] - traj.dx_left()[i] == doctest::Approx(0.15 * (traj.dx()[0] - 2.0)).epsilon(1e-12));
    CHECK(traj.dx()[4] == traj.dx_left()[4]);
    CHECK(traj.eval_dx_left(0.5) == traj.dx_left()[i]);
    CHECK(traj.eval_dx(0.5) == traj.dx()[i]);
}

TEST_CASE("node derivatives satisfy the equation") {
    const auto eq = test::sine_lag_equation(0.5);
    const auto init = test::cosine_history();
    const ScalarFn f = ScalarFn::from_source("0.1*cos(3*t)");
    const auto traj = integrate(eq, init, f, 20.0, 1e-2);
    CHECK(self_consistency_residual(eq, init, f, traj) < 1e-10);
}
