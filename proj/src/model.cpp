#include "ndde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace ndde {

namespace {

void check_window(Interval window, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("sampling step must be positive");
    if (!(window.hi > window.lo)) {
        throw std::invalid_argument(fmt::format("degenerate window [{}, {}]", window.lo, window.hi));
    }
}

double declared_norm(const ScalarFn& f) {
    return std::max(std::abs(*f.declared_sup), std::abs(*f.declared_inf));
}

} // namespace

std::vector<double> sample_nodes(Interval window, double step) {
    check_window(window, step);
    const double half = step / 2.0;
    const auto count = static_cast<std::size_t>(std::floor(window.length() / half));
    std::vector<double> nodes;
    nodes.reserve(count + 2);
    for (std::size_t k = 0; k <= count; ++k) {
        const double t = window.lo + static_cast<double>(k) * half;
        if (t > window.hi) break;
        nodes.push_back(t);
    }
    if (nodes.back() < window.hi) nodes.push_back(window.hi);
    return nodes;
}

NormEstimate estimate_sup(const ScalarFn& f, Interval window, double step) {
    check_window(window, step);
    if (f.declared_sup) return {*f.declared_sup, NormMethod::Declared, window, step};
    double best = -std::numeric_limits<double>::infinity();
    for (double t : sample_nodes(window, step)) best = std::max(best, f(t));
    return {best, NormMethod::Sampled, window, step};
}

NormEstimate estimate_inf(const ScalarFn& f, Interval window, double step) {
    check_window(window, step);
    if (f.declared_inf) return {*f.declared_inf, NormMethod::Declared, window, step};
    double best = std::numeric_limits<double>::infinity();
    for (double t : sample_nodes(window, step)) best = std::min(best, f(t));
    return {best, NormMethod::Sampled, window, step};
}

NormEstimate estimate_norm(const ScalarFn& f, Interval window, double step) {
    check_window(window, step);
    if (f.declared_sup && f.declared_inf) return {declared_norm(f), NormMethod::Declared, window, step};
    double best = 0.0;
    for (double t : sample_nodes(window, step)) best = std::max(best, std::abs(f(t)));
    return {best, NormMethod::Sampled, window, step};
}

LagFn LagFn::sampled(Expr e, Interval window, double step) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (double t : sample_nodes(window, step)) {
        const double v = e.eval(t);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    return LagFn(std::move(e), hi, lo);
}

double NeutralEquation::max_delay() const noexcept {
    double m = g_lag.lag_sup;
    for (const auto& term : terms) m = std::max(m, term.lag.lag_sup);
    return m;
}

InitialData InitialData::consistent(ScalarFn phi, ScalarFn psi, double t0) {
    const double x0 = phi(t0);
    return InitialData{std::move(phi), std::move(psi), x0};
}

NormWindow default_norm_window(const NeutralEquation& eq, std::optional<double> width,
                               std::optional<double> step) {
    const double w = width.value_or(20.0 * std::max(eq.max_delay(), 2.0 * std::numbers::pi));
    if (!(w > 0.0)) throw std::invalid_argument("norm window width must be positive");
    const double s = step.value_or(1e-3 * w);
    return {Interval{eq.t0, eq.t0 + w}, s};
}

std::vector<Violation> validate(const NeutralEquation& eq, Interval window, double step) {
    std::vector<Violation> out;
    const auto nodes = sample_nodes(window, step);
    // Sampling tolerance for declared bounds.
    auto slack = [](double bound) { return 1e-9 * (1.0 + std::abs(bound)); };

    if (eq.terms.empty()) out.push_back({"terms", eq.t0, 0.0, "at least one delayed term is required"});

    const NormEstimate a_norm = estimate_norm(eq.a, window, step);
    if (!(a_norm.value < 1.0)) {
        double where = eq.t0;
        for (double t : nodes) {
            if (std::abs(eq.a(t)) >= 1.0) {
                where = t;
                break;
            }
        }
        out.push_back({"a", where, a_norm.value, "||a|| >= 1"});
    }

    auto check_declared = [&](const ScalarFn& f, const std::string& name) {
        for (double t : nodes) {
            const double v = f(t);
            if (f.declared_sup && v > *f.declared_sup + slack(*f.declared_sup)) {
                out.push_back({name, t, v, fmt::format("value exceeds declared sup {}", *f.declared_sup)});
                return;
            }
            if (f.declared_inf && v < *f.declared_inf - slack(*f.declared_inf)) {
                out.push_back({name, t, v, fmt::format("value below declared inf {}", *f.declared_inf)});
                return;
            }
        }
    };

    auto check_lag = [&](const LagFn& lag, const std::string& name) {
        if (lag.lag_inf < 0.0) {
            out.push_back({name, eq.t0, lag.lag_inf, "negative lag"});
        }
        if (lag.lag_inf > lag.lag_sup) {
            out.push_back({name, eq.t0, lag.lag_inf, "lag inf exceeds lag sup"});
        }
        for (double t : nodes) {
            const double v = lag(t);
            if (v < 0.0) {
                out.push_back({name, t, v, "negative lag"});
                return;
            }
            if (v > lag.lag_sup + slack(lag.lag_sup) || v < lag.lag_inf - slack(lag.lag_inf)) {
                out.push_back({name, t, v,
                               fmt::format("lag outside [{}, {}]", lag.lag_inf, lag.lag_sup)});
                return;
            }
        }
    };

    check_declared(eq.a, "a");
    check_lag(eq.g_lag, "g_lag");
    for (std::size_t k = 0; k < eq.terms.size(); ++k) {
        check_declared(eq.terms[k].coeff, fmt::format("b[{}]", k));
        check_lag(eq.terms[k].lag, fmt::format("h_lag[{}]", k));
    }
    return out;
}

SampledEquation::SampledEquation(NeutralEquation eq, NormWindow norm)
    : eq_(std::move(eq)), norm_(norm), nodes_(sample_nodes(norm.window, norm.step)) {
    const std::size_t n = nodes_.size();
    const std::size_t m = eq_.terms.size();
    a_.resize(n);
    g_lag_.resize(n);
    b_sum_.assign(n, 0.0);
    b_.assign(m, std::vector<double>(n));
    h_lag_.assign(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = nodes_[i];
        a_[i] = eq_.a(t);
        g_lag_[i] = eq_.g_lag(t);
        for (std::size_t k = 0; k < m; ++k) {
            b_[k][i] = eq_.terms[k].coeff(t);
            h_lag_[k][i] = eq_.terms[k].lag(t);
            b_sum_[i] += b_[k][i];
        }
    }

    auto sampled_abs = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };
    auto sampled_min = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
    auto sampled_max = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };

    const ScalarFn& a = eq_.a;
    norm_a_ = (a.declared_sup && a.declared_inf) ? declared_norm(a) : sampled_abs(a_);
    inf_a_ = a.declared_inf.value_or(sampled_min(a_));
    for (std::size_t k = 0; k < m; ++k) {
        const ScalarFn& b = eq_.terms[k].coeff;
        norm_b_.push_back((b.declared_sup && b.declared_inf) ? declared_norm(b) : sampled_abs(b_[k]));
        inf_b_.push_back(b.declared_inf.value_or(sampled_min(b_[k])));
        sup_b_.push_back(b.declared_sup.value_or(sampled_max(b_[k])));
    }
    inf_b_sum_ = m == 0 ? 0.0 : sampled_min(b_sum_);
}

double ratio_norm(const std::vector<double>& num, const std::vector<double>& den) {
    double s = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (num[i] == 0.0) continue;
        if (den[i] == 0.0) return std::numeric_limits<double>::infinity();
        s = std::max(s, std::abs(num[i] / den[i]));
    }
    return s;
}

} // namespace ndde
