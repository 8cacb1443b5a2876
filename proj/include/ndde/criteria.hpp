#pragma once

// Explicit sufficient conditions for uniform exponential stability of
//
//   x'(t) - a(t) x'(g(t)) = -sum_k b_k(t) x(h_k(t)).
//
// Every test is a strict inequality lhs < threshold. Tests that have
// additional gating clauses report lhs = +inf when a gate fails; the gate
// values are kept in the intermediates.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ndde/model.hpp"

namespace ndde {

namespace criterion_id {
inline constexpr const char* lambert_delay = "lambert_delay";
inline constexpr const char* truncated_coefficient = "truncated_coefficient";
inline constexpr const char* delay_excess = "delay_excess";
inline constexpr const char* neutral_lag = "neutral_lag";
inline constexpr const char* multi_delay = "multi_delay";
inline constexpr const char* constant_coefficients = "constant_coefficients";
inline constexpr const char* single_delay = "single_delay";
} // namespace criterion_id

struct CriterionVerdict {
    std::string id;
    bool applicable = false;
    bool holds = false;
    double lhs = 0.0;
    double threshold = 0.0;
    std::vector<std::pair<std::string, double>> intermediates;

    /// Named intermediate; throws std::out_of_range if absent.
    [[nodiscard]] double at(std::string_view name) const;
};

struct StabilityReport {
    std::vector<CriterionVerdict> verdicts;
    bool overall = false;

    [[nodiscard]] const CriterionVerdict& find(std::string_view id) const;
};

struct CriteriaOptions {
    /// A sampled infimum counts as "bounded away from zero" only above this.
    double positivity_margin = 1e-12;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

// Single delayed term (m = 1); inapplicable otherwise.

/// inf b > 0, ||b|| tau <= 1/e and ||a|| + ||b|| ||a/b|| < 1.
CriterionVerdict test_lambert_delay(const SampledEquation& s, const CriteriaOptions& opt = {});
/// With b1 = min(b, 1/(tau e)):  ||a/b1|| ||b|| / (1 - ||a||) + ||(b - b1)/b1|| < 1.
CriterionVerdict test_truncated_coefficient(const SampledEquation& s, const CriteriaOptions& opt = {});
/// ||b|| (||a/b|| + ||(t - h(t) - 1/(||b|| e))^+||) < 1 - ||a||.
CriterionVerdict test_delay_excess(const SampledEquation& s, const CriteriaOptions& opt = {});
/// 0 <= a0 <= a <= A0 < 1, 0 < b0 <= b <= B0 and
/// tau B0 + sigma A0 B0^2 (1 - a0) / ((1 - A0)^2 b0) < 1 - A0.
CriterionVerdict test_neutral_lag(const SampledEquation& s, const CriteriaOptions& opt = {});
/// Largest neutral lag bound sigma for which test_neutral_lag can hold.
/// +inf when A0 = 0; non-positive when the sigma-free part already fails.
/// Throws std::domain_error when the test is inapplicable.
double neutral_lag_threshold(const SampledEquation& s, const CriteriaOptions& opt = {});
/// (||a/b|| + tau) ||b|| < 1 - ||a||, b bounded away from zero.
CriterionVerdict test_single_delay(const SampledEquation& s, const CriteriaOptions& opt = {});

// Any number of delayed terms.

/// b = sum b_k >= alpha > 0 and
/// (sum ||b_k|| / (1 - ||a||)) (||a/b|| + sum tau_k ||b_k/b||) < 1.
CriterionVerdict test_multi_delay(const SampledEquation& s, const CriteriaOptions& opt = {});
/// Left side of test_multi_delay, regardless of applicability.
double multi_delay_lhs(const SampledEquation& s);
/// Constant b_k > 0, ||a|| < 1/2 and sum b_k tau_k < 1 - 2 ||a||.
CriterionVerdict test_constant_coefficients(const SampledEquation& s, const CriteriaOptions& opt = {});

StabilityReport run_all(const SampledEquation& s, const CriteriaOptions& opt = {});
/// Validates first; throws ValidationError listing every violation.
StabilityReport run_all(const NeutralEquation& eq, const NormWindow& norm, const CriteriaOptions& opt = {});

/// y'(t) - a0(t) y'(g(t)) = c(t) y(t) - sum_{k=0..m} d_k(t) y(h_k(t)).
struct GeneralEquation {
    double t0 = 0.0;
    ScalarFn a0;
    LagFn g_lag;
    ScalarFn c;
    std::vector<DelayTerm> terms;
};

/// Uniform bound |Y(t,s)| <= K = 1/(1 - K0) on the fundamental function of a
/// GeneralEquation, available when d - c stays positive and K0 < 1.
struct KernelBound {
    double K0 = 0.0;
    std::optional<double> K;
    /// inf (d - c) over the window.
    double alpha0 = 0.0;
    /// First sample where d - c fails to be positive.
    std::optional<double> positivity_witness;
    double derivative_gain = 0.0;
    double integral_gain = 0.0;
};

KernelBound kernel_bound(const GeneralEquation& geq, const NormWindow& norm, const CriteriaOptions& opt = {});

} // namespace ndde
