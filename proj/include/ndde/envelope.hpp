#pragma once

// Exponential envelope certificates.
//
// For a decay rate lambda > 0 let
//
//   p(t) = sum_k e^{lambda (t - h_k(t))} b_k(t) + lambda a(t) e^{lambda (t - g(t))} - lambda.
//
// If inf p = alpha > 0, e^{lambda sigma} ||a|| < 1 and M1 < 1, then the
// fundamental function obeys |X(t,s)| <= M0 e^{-lambda (t - s)}, M0 = 1/(1 - M1),
// and every solution obeys
//
//   |x(t)| <= C e^{-lambda (t - t0)} + forcing_gain ||f||_[t0,t].

#include <optional>
#include <string>

#include "ndde/criteria.hpp"
#include "ndde/model.hpp"

namespace ndde {

/// Sampled infimum of p over the norm window.
double p_inf(const SampledEquation& s, double lambda);

/// e^{lambda sigma} ||a||; must stay below 1.
double neutral_growth(const SampledEquation& s, double lambda);

/// Throws std::domain_error naming the failed precondition
/// (p_inf <= 0 or e^{lambda sigma} ||a|| >= 1).
double compute_M1(const SampledEquation& s, double lambda);

struct Feasibility {
    bool feasible = false;
    /// Empty when feasible; otherwise the first failing clause.
    std::string failing_clause;
    double lambda = 0.0;
    double alpha = 0.0;
    double neutral_growth = 0.0;
    /// NaN if not reached.
    double M1 = 0.0;
};

Feasibility check_feasible(const SampledEquation& s, double lambda);

/// Scans 200 points of (0, lambda_hi], then bisects between the largest
/// feasible point and its infeasible neighbour down to `tol`.
/// Returns the largest rate actually verified feasible, or nothing.
std::optional<double> optimize_lambda(const SampledEquation& s, double lambda_hi, double tol);

/// Substitution x(t) = e^{-lambda (t - t0)} z(t), written as an equation with a
/// non-delay term: a0 = a e^{lambda (t-g)}, c = lambda, d_0 = lambda a e^{lambda (t-g)}
/// on the neutral lag, d_k = e^{lambda (t-h_k)} b_k.
GeneralEquation transform_to_general(const NeutralEquation& eq, double lambda);

struct EnvelopeCertificate {
    double t0 = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    double M1 = 0.0;
    double M0 = 0.0;
    /// Coefficient of e^{-lambda (t - t0)}.
    double C = 0.0;
    double forcing_gain = 0.0;
    // Bracketed summands of C / M0.
    double initial_value_part = 0.0;
    double neutral_history_part = 0.0;
    double delay_history_part = 0.0;
    double norm_psi = 0.0;
    std::vector<double> norm_phi;
    /// Bound on ||f|| used by bound(t).
    double f_bound = 0.0;

    /// C e^{-lambda (t - t0)} + forcing_gain * f_bound.
    [[nodiscard]] double bound(double t) const;
    /// Same with an explicit ||f||_[t0,t].
    [[nodiscard]] double bound(double t, double f_norm) const;
};

class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(Feasibility f);
    [[nodiscard]] const Feasibility& diagnostics() const noexcept { return f_; }

private:
    Feasibility f_;
};

/// Throws InfeasibleError when the rate is not certified. Initial-function norms
/// are sampled on [t0 - sigma, t0] and [t0 - tau_k, t0].
EnvelopeCertificate certificate(const SampledEquation& s, double lambda, const InitialData& init,
                                double f_bound = 0.0);

} // namespace ndde
