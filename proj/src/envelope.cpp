#include "ndde/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace ndde {

namespace {

std::vector<double> p_samples(const SampledEquation& s, double lambda) {
    const std::size_t n = s.size();
    std::vector<double> p(n);
    const auto& a = s.a();
    const auto& g = s.g_lag();
    for (std::size_t i = 0; i < n; ++i) {
        double v = lambda * a[i] * std::exp(lambda * g[i]) - lambda;
        for (std::size_t k = 0; k < s.term_count(); ++k) {
            v += std::exp(lambda * s.h_lag(k)[i]) * s.b(k)[i];
        }
        p[i] = v;
    }
    return p;
}

double segment_norm(const ScalarFn& f, double t0, double length, double step) {
    if (!(length > 0.0)) return 0.0;
    return estimate_norm(f, Interval{t0 - length, t0}, std::min(step, length / 1000.0)).value;
}

std::string infeasible_message(const Feasibility& f) {
    return fmt::format("lambda = {} is not certified: {}", f.lambda, f.failing_clause);
}

} // namespace

double p_inf(const SampledEquation& s, double lambda) {
    const auto p = p_samples(s, lambda);
    return *std::min_element(p.begin(), p.end());
}

double neutral_growth(const SampledEquation& s, double lambda) {
    return std::exp(lambda * s.sigma()) * s.norm_a();
}

double compute_M1(const SampledEquation& s, double lambda) {
    const auto p = p_samples(s, lambda);
    const double alpha = *std::min_element(p.begin(), p.end());
    if (!(alpha > 0.0)) throw std::domain_error(fmt::format("inf p = {} is not positive", alpha));
    const double growth = neutral_growth(s, lambda);
    if (!(growth < 1.0)) throw std::domain_error(fmt::format("e^(lambda sigma) ||a|| = {} >= 1", growth));

    const double sigma = s.sigma();
    const double e_sigma = std::exp(lambda * sigma);
    double numerator = lambda + lambda * growth;
    double bracket = ratio_norm(s.a(), p) * (1.0 + lambda * sigma) * e_sigma;
    for (std::size_t k = 0; k < s.term_count(); ++k) {
        const double tau = s.tau(k);
        const double e_tau = std::exp(lambda * tau);
        numerator += e_tau * s.norm_b(k);
        bracket += ratio_norm(s.b(k), p) * e_tau * tau;
    }
    return numerator / (1.0 - growth) * bracket;
}

Feasibility check_feasible(const SampledEquation& s, double lambda) {
    Feasibility f;
    f.lambda = lambda;
    f.M1 = std::numeric_limits<double>::quiet_NaN();
    if (!(lambda > 0.0)) {
        f.failing_clause = "lambda must be positive";
        return f;
    }
    f.alpha = p_inf(s, lambda);
    f.neutral_growth = neutral_growth(s, lambda);
    if (!(f.alpha > 0.0)) {
        f.failing_clause = fmt::format("inf p = {:.6g} <= 0", f.alpha);
        return f;
    }
    if (!(f.neutral_growth < 1.0)) {
        f.failing_clause = fmt::format("e^(lambda sigma) ||a|| = {:.6g} >= 1", f.neutral_growth);
        return f;
    }
    f.M1 = compute_M1(s, lambda);
    if (!(f.M1 < 1.0)) {
        f.failing_clause = fmt::format("M1 = {:.6g} >= 1", f.M1);
        return f;
    }
    f.feasible = true;
    return f;
}

std::optional<double> optimize_lambda(const SampledEquation& s, double lambda_hi, double tol) {
    if (!(lambda_hi > 0.0) || !(tol > 0.0)) throw std::invalid_argument("lambda_hi and tol must be positive");
    constexpr int kScan = 200;
    int best = 0;
    for (int i = 1; i <= kScan; ++i) {
        if (check_feasible(s, lambda_hi * i / kScan).feasible) best = i;
    }
    if (best == 0) return std::nullopt;
    double lo = lambda_hi * best / kScan;
    if (best == kScan) return lo;
    double hi = lambda_hi * (best + 1) / kScan;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (check_feasible(s, mid).feasible) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

GeneralEquation transform_to_general(const NeutralEquation& eq, double lambda) {
    const Expr rate = Expr::number(lambda);
    const Expr neutral_weight = exp(rate * eq.g_lag.body);
    GeneralEquation geq;
    geq.t0 = eq.t0;
    geq.a0 = ScalarFn(eq.a.body * neutral_weight);
    geq.g_lag = eq.g_lag;
    geq.c = ScalarFn::constant(lambda);
    geq.terms.push_back({ScalarFn(rate * eq.a.body * neutral_weight), eq.g_lag});
    for (const auto& term : eq.terms) {
        geq.terms.push_back({ScalarFn(exp(rate * term.lag.body) * term.coeff.body), term.lag});
    }
    return geq;
}

double EnvelopeCertificate::bound(double t) const { return bound(t, f_bound); }

double EnvelopeCertificate::bound(double t, double f_norm) const {
    return C * std::exp(-lambda * (t - t0)) + forcing_gain * f_norm;
}

InfeasibleError::InfeasibleError(Feasibility f) : std::runtime_error(infeasible_message(f)), f_(std::move(f)) {}

EnvelopeCertificate certificate(const SampledEquation& s, double lambda, const InitialData& init, double f_bound) {
    const Feasibility f = check_feasible(s, lambda);
    if (!f.feasible) throw InfeasibleError(f);

    const NeutralEquation& eq = s.equation();
    const double step = s.norm_window().step;
    const double norm_a = s.norm_a();
    const double scale = lambda * (1.0 - norm_a);

    EnvelopeCertificate c;
    c.t0 = eq.t0;
    c.lambda = lambda;
    c.alpha = f.alpha;
    c.M1 = f.M1;
    c.M0 = 1.0 / (1.0 - f.M1);
    c.f_bound = f_bound;
    c.forcing_gain = c.M0 / scale;

    c.initial_value_part = std::abs(init.x0);
    const double sigma = s.sigma();
    c.norm_psi = segment_norm(init.psi, eq.t0, sigma, step);
    c.neutral_history_part = std::expm1(lambda * sigma) / scale * norm_a * c.norm_psi;
    for (std::size_t k = 0; k < s.term_count(); ++k) {
        const double tau = s.tau(k);
        const double norm_phi = segment_norm(init.phi, eq.t0, tau, step);
        c.norm_phi.push_back(norm_phi);
        c.delay_history_part += std::expm1(lambda * tau) / scale * s.norm_b(k) * norm_phi;
    }
    c.C = c.M0 * (c.initial_value_part + c.neutral_history_part + c.delay_history_part);
    return c;
}

} // namespace ndde
