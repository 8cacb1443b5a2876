#pragma once

// Shared fixtures and test-only oracles. Nothing here calls into the solver or
// the envelope code; the oracles are independent re-derivations.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "ndde/model.hpp"

namespace ndde::test {

inline LagFn sine_delay_lag() {
    return LagFn(parse("1/e + 0.1*sin(t)"), 1.0 / std::numbers::e + 0.1, 1.0 / std::numbers::e - 0.1);
}

/// x'(t) - 0.15 x'(t - sigma) = -x(t - 1/e - 0.1 sin t)
inline NeutralEquation sine_lag_equation(double sigma) {
    NeutralEquation eq;
    eq.t0 = 0.0;
    eq.a = ScalarFn::constant(0.15);
    eq.g_lag = LagFn::constant(sigma);
    eq.terms.push_back({ScalarFn::constant(1.0), sine_delay_lag()});
    return eq;
}

/// Same, neutral lag 2.7 + 0.3 cos t in [2.4, 3].
inline NeutralEquation variable_neutral_lag_equation() {
    NeutralEquation eq = sine_lag_equation(0.5);
    eq.g_lag = LagFn(parse("2.7 + 0.3*cos(t)"), 3.0, 2.4);
    return eq;
}

/// x(t) = cos t, x'(t) = sin 2t + 2 before 0, x(0) = 1.
inline InitialData cosine_history() {
    return InitialData::consistent(ScalarFn(parse("cos(t)")), ScalarFn(parse("sin(2*t) + 2")), 0.0);
}

/// Constant coefficients and constant lags.
inline NeutralEquation constant_equation(double a, double sigma, const std::vector<std::pair<double, double>>& b_tau) {
    NeutralEquation eq;
    eq.a = ScalarFn::constant(a);
    eq.g_lag = LagFn::constant(sigma);
    for (const auto& [b, tau] : b_tau) eq.terms.push_back({ScalarFn::constant(b), LagFn::constant(tau)});
    return eq;
}

inline NormWindow short_window(double width = 4.0 * std::numbers::pi, double step = 1e-3) {
    return {{0.0, width}, step};
}

/// Forward Euler on a uniform grid with piecewise-linear history for both x
/// and x'. First order, used only as a coarse independent reference.
struct EulerOracle {
    double t0, h;
    std::vector<double> x, dx;

    double at(const std::vector<double>& v, double t) const {
        const double r = (t - t0) / h;
        const auto i = static_cast<std::size_t>(std::floor(r));
        if (i + 1 >= v.size()) return v.back();
        const double w = r - static_cast<double>(i);
        return (1.0 - w) * v[i] + w * v[i + 1];
    }
};

inline EulerOracle euler_oracle(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double t_end,
                                double h) {
    EulerOracle o{eq.t0, h, {}, {}};
    const auto n = static_cast<std::size_t>(std::llround((t_end - eq.t0) / h));
    auto rhs = [&](double t) {
        double v = f(t);
        const double g = t - eq.g_lag(t);
        v += eq.a(t) * (g < eq.t0 ? init.psi(g) : o.at(o.dx, g));
        for (const auto& term : eq.terms) {
            const double q = t - term.lag(t);
            v -= term.coeff(t) * (q < eq.t0 ? init.phi(q) : o.at(o.x, q));
        }
        return v;
    };
    o.x.push_back(init.x0);
    o.dx.push_back(0.0);
    o.dx[0] = rhs(eq.t0);
    for (std::size_t i = 0; i < n; ++i) {
        o.x.push_back(o.x[i] + h * o.dx[i]);
        o.dx.push_back(0.0);
        o.dx[i + 1] = rhs(eq.t0 + static_cast<double>(i + 1) * h);
    }
    return o;
}

} // namespace ndde::test
