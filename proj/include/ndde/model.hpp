#pragma once

// Problem data for scalar linear neutral equations
//
//   x'(t) - a(t) x'(g(t)) + sum_k b_k(t) x(h_k(t)) = f(t),   t >= t0
//   x(t) = phi(t), t <= t0;   x'(t) = psi(t), t < t0
//
// and sampled estimates of the essential suprema/infima the stability
// criteria and envelope constants consume. Lags are stored as
// d(t) = t - g(t) and d_k(t) = t - h_k(t).

#include <optional>
#include <string>
#include <vector>

#include "ndde/expr.hpp"

namespace ndde {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const noexcept { return hi - lo; }
};

/// Evaluable function of time with optional declared bounds.
struct ScalarFn {
    Expr body;
    std::optional<double> declared_sup;
    std::optional<double> declared_inf;

    ScalarFn() = default;
    explicit ScalarFn(Expr e, std::optional<double> sup = std::nullopt,
                      std::optional<double> inf = std::nullopt)
        : body(std::move(e)), declared_sup(sup), declared_inf(inf) {}

    static ScalarFn constant(double value) { return ScalarFn(Expr::number(value), value, value); }
    static ScalarFn from_source(std::string_view source) { return ScalarFn(parse(source)); }

    [[nodiscard]] double operator()(double t) const { return body.eval(t); }
    [[nodiscard]] bool is_constant() const { return !body.depends_on_t(); }
};

/// A lag t - g(t) together with its bounds over [t0, inf).
struct LagFn {
    Expr body;
    double lag_sup = 0.0;
    double lag_inf = 0.0;

    LagFn() = default;
    LagFn(Expr e, double sup, double inf) : body(std::move(e)), lag_sup(sup), lag_inf(inf) {}

    static LagFn constant(double lag) { return LagFn(Expr::number(lag), lag, lag); }
    /// Bounds are taken from sampling `body` on `window`.
    static LagFn sampled(Expr e, Interval window, double step);

    [[nodiscard]] double operator()(double t) const { return body.eval(t); }
};

struct DelayTerm {
    ScalarFn coeff;
    LagFn lag;
};

struct NeutralEquation {
    double t0 = 0.0;
    ScalarFn a;
    LagFn g_lag;
    std::vector<DelayTerm> terms;

    [[nodiscard]] double sigma() const noexcept { return g_lag.lag_sup; }
    [[nodiscard]] double max_delay() const noexcept;
};

struct InitialData {
    ScalarFn phi;
    ScalarFn psi;
    double x0 = 0.0;

    /// x0 taken as phi(t0), so that x is continuous at the start time.
    static InitialData consistent(ScalarFn phi, ScalarFn psi, double t0);
};

enum class NormMethod { Declared, Sampled };

struct NormEstimate {
    double value = 0.0;
    NormMethod method = NormMethod::Sampled;
    Interval window;
    double step = 0.0;
};

/// Sample nodes lo + k*step/2 for k = 0, 1, ... plus hi. Halving `step`
/// yields a superset of nodes, so sampled extrema are monotone under refinement.
std::vector<double> sample_nodes(Interval window, double step);

NormEstimate estimate_sup(const ScalarFn& f, Interval window, double step);
NormEstimate estimate_inf(const ScalarFn& f, Interval window, double step);
/// Sampled (or declared) essential supremum of |f|.
NormEstimate estimate_norm(const ScalarFn& f, Interval window, double step);

/// Finite window and step on which half-line norms are approximated.
struct NormWindow {
    Interval window;
    double step = 0.0;
};

/// [t0, t0 + W] with W = 20 max(sigma, tau_k, 2 pi) and step 1e-3 W, unless overridden.
NormWindow default_norm_window(const NeutralEquation& eq, std::optional<double> width = std::nullopt,
                               std::optional<double> step = std::nullopt);

struct Violation {
    std::string field;
    double t = 0.0;
    double value = 0.0;
    std::string message;
};

std::vector<Violation> validate(const NeutralEquation& eq, Interval window, double step);

/// Coefficients and lags of an equation tabulated once on a norm window.
/// Everything here is independent of the decay rate, so the envelope search
/// only recombines these samples.
class SampledEquation {
public:
    SampledEquation(NeutralEquation eq, NormWindow norm);

    [[nodiscard]] const NeutralEquation& equation() const noexcept { return eq_; }
    [[nodiscard]] const NormWindow& norm_window() const noexcept { return norm_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t term_count() const noexcept { return b_.size(); }

    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<double>& a() const noexcept { return a_; }
    [[nodiscard]] const std::vector<double>& g_lag() const noexcept { return g_lag_; }
    [[nodiscard]] const std::vector<double>& b(std::size_t k) const { return b_.at(k); }
    [[nodiscard]] const std::vector<double>& h_lag(std::size_t k) const { return h_lag_.at(k); }
    /// sum_k b_k at each node.
    [[nodiscard]] const std::vector<double>& b_sum() const noexcept { return b_sum_; }

    /// ||a||, declared bound preferred.
    [[nodiscard]] double norm_a() const noexcept { return norm_a_; }
    [[nodiscard]] double inf_a() const noexcept { return inf_a_; }
    [[nodiscard]] double norm_b(std::size_t k) const { return norm_b_.at(k); }
    [[nodiscard]] double inf_b(std::size_t k) const { return inf_b_.at(k); }
    [[nodiscard]] double sup_b(std::size_t k) const { return sup_b_.at(k); }
    [[nodiscard]] double inf_b_sum() const noexcept { return inf_b_sum_; }
    [[nodiscard]] double sigma() const noexcept { return eq_.g_lag.lag_sup; }
    [[nodiscard]] double tau(std::size_t k) const { return eq_.terms.at(k).lag.lag_sup; }

private:
    NeutralEquation eq_;
    NormWindow norm_;
    std::vector<double> nodes_, a_, g_lag_, b_sum_;
    std::vector<std::vector<double>> b_, h_lag_;
    double norm_a_ = 0.0, inf_a_ = 0.0, inf_b_sum_ = 0.0;
    std::vector<double> norm_b_, inf_b_, sup_b_;
};

/// max over samples of |num_i / den_i|; +inf when a denominator vanishes.
double ratio_norm(const std::vector<double>& num, const std::vector<double>& den);

} // namespace ndde
