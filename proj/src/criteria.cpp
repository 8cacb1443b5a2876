#include "ndde/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace ndde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CriterionVerdict inapplicable(const char* id, std::string reason_key, double reason_value) {
    CriterionVerdict v;
    v.id = id;
    v.applicable = false;
    v.holds = false;
    v.lhs = kInf;
    v.threshold = 0.0;
    v.intermediates.emplace_back(std::move(reason_key), reason_value);
    return v;
}

CriterionVerdict decide(const char* id, double lhs, double threshold,
                        std::vector<std::pair<std::string, double>> intermediates) {
    CriterionVerdict v;
    v.id = id;
    v.applicable = true;
    v.lhs = lhs;
    v.threshold = threshold;
    v.holds = lhs < threshold;
    v.intermediates = std::move(intermediates);
    return v;
}

std::string message_for(const std::vector<Violation>& violations) {
    std::string out = "equation failed validation:";
    for (const auto& v : violations) {
        out += fmt::format("\n  {}: {} (t = {}, value = {})", v.field, v.message, v.t, v.value);
    }
    return out;
}

} // namespace

double CriterionVerdict::at(std::string_view name) const {
    for (const auto& [key, value] : intermediates) {
        if (key == name) return value;
    }
    throw std::out_of_range(fmt::format("criterion {} has no intermediate '{}'", id, name));
}

const CriterionVerdict& StabilityReport::find(std::string_view id) const {
    for (const auto& v : verdicts) {
        if (v.id == id) return v;
    }
    throw std::out_of_range(fmt::format("no criterion '{}'", id));
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(message_for(violations)), violations_(std::move(violations)) {}

CriterionVerdict test_lambert_delay(const SampledEquation& s, const CriteriaOptions& opt) {
    if (s.term_count() != 1) return inapplicable(criterion_id::lambert_delay, "m", s.term_count());
    const double inf_b = s.inf_b(0);
    const double norm_b = s.norm_b(0);
    const double tau = s.tau(0);
    const double b_tau = norm_b * tau;
    const double a_over_b = ratio_norm(s.a(), s.b(0));
    const double third = s.norm_a() + norm_b * a_over_b;
    const bool gates = inf_b > opt.positivity_margin && b_tau <= 1.0 / std::numbers::e;
    return decide(criterion_id::lambert_delay, gates ? third : kInf, 1.0,
                  {{"inf_b", inf_b},
                   {"norm_b_tau", b_tau},
                   {"inv_e", 1.0 / std::numbers::e},
                   {"norm_a_over_b", a_over_b},
                   {"third_clause", third}});
}

CriterionVerdict test_truncated_coefficient(const SampledEquation& s, const CriteriaOptions&) {
    if (s.term_count() != 1) return inapplicable(criterion_id::truncated_coefficient, "m", s.term_count());
    const auto& b = s.b(0);
    const double cap = 1.0 / (s.tau(0) * std::numbers::e);
    std::vector<double> b1(b.size());
    std::vector<double> excess(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        b1[i] = std::min(b[i], cap);
        excess[i] = b[i] - b1[i];
    }
    const double a_over_b1 = ratio_norm(s.a(), b1);
    const double first = a_over_b1 * s.norm_b(0) / (1.0 - s.norm_a());
    const double second = ratio_norm(excess, b1);
    return decide(criterion_id::truncated_coefficient, first + second, 1.0,
                  {{"b1_cap", cap}, {"norm_a_over_b1", a_over_b1}, {"first_term", first}, {"second_term", second}});
}

CriterionVerdict test_delay_excess(const SampledEquation& s, const CriteriaOptions&) {
    if (s.term_count() != 1) return inapplicable(criterion_id::delay_excess, "m", s.term_count());
    const double norm_b = s.norm_b(0);
    const double a_over_b = ratio_norm(s.a(), s.b(0));
    // (t - h(t) - 1/(||b|| e))^+ as an expression, sampled like any other function.
    const Expr shifted = s.equation().terms[0].lag.body - Expr::number(1.0 / (norm_b * std::numbers::e));
    const ScalarFn positive_part(Expr::call(Function::Max, {shifted, Expr::number(0.0)}));
    const NormWindow& w = s.norm_window();
    const double excess = estimate_sup(positive_part, w.window, w.step).value;
    const double lhs = norm_b * (a_over_b + excess);
    return decide(criterion_id::delay_excess, lhs, 1.0 - s.norm_a(),
                  {{"norm_b", norm_b}, {"norm_a_over_b", a_over_b}, {"lag_excess", excess}});
}

namespace {

struct NeutralLagData {
    double a0, A0, b0, B0, tau, sigma;
};

std::optional<NeutralLagData> neutral_lag_data(const SampledEquation& s, const CriteriaOptions& opt) {
    if (s.term_count() != 1) return std::nullopt;
    NeutralLagData d{s.inf_a(), s.norm_a(), s.inf_b(0), s.sup_b(0), s.tau(0), s.sigma()};
    if (d.a0 < 0.0 || !(d.A0 < 1.0) || !(d.b0 > opt.positivity_margin)) return std::nullopt;
    return d;
}

} // namespace

CriterionVerdict test_neutral_lag(const SampledEquation& s, const CriteriaOptions& opt) {
    const auto d = neutral_lag_data(s, opt);
    if (!d) {
        if (s.term_count() != 1) return inapplicable(criterion_id::neutral_lag, "m", s.term_count());
        auto v = inapplicable(criterion_id::neutral_lag, "inf_a", s.inf_a());
        v.intermediates.emplace_back("inf_b", s.inf_b(0));
        return v;
    }
    const double sigma_term = d->sigma * d->A0 * d->B0 * d->B0 * (1.0 - d->a0) /
                              ((1.0 - d->A0) * (1.0 - d->A0) * d->b0);
    const double lhs = d->tau * d->B0 + sigma_term;
    return decide(criterion_id::neutral_lag, lhs, 1.0 - d->A0,
                  {{"a0", d->a0},
                   {"A0", d->A0},
                   {"b0", d->b0},
                   {"B0", d->B0},
                   {"tau", d->tau},
                   {"sigma", d->sigma},
                   {"sigma_term", sigma_term}});
}

double neutral_lag_threshold(const SampledEquation& s, const CriteriaOptions& opt) {
    const auto d = neutral_lag_data(s, opt);
    if (!d) throw std::domain_error("neutral-lag test is not applicable to this equation");
    if (d->A0 == 0.0) return kInf;
    const double slack = (1.0 - d->A0) - d->tau * d->B0;
    return slack * (1.0 - d->A0) * (1.0 - d->A0) * d->b0 / (d->A0 * d->B0 * d->B0 * (1.0 - d->a0));
}

CriterionVerdict test_single_delay(const SampledEquation& s, const CriteriaOptions& opt) {
    if (s.term_count() != 1) return inapplicable(criterion_id::single_delay, "m", s.term_count());
    if (!(s.inf_b(0) > opt.positivity_margin)) return inapplicable(criterion_id::single_delay, "inf_b", s.inf_b(0));
    const double a_over_b = ratio_norm(s.a(), s.b(0));
    const double lhs = (a_over_b + s.tau(0)) * s.norm_b(0);
    return decide(criterion_id::single_delay, lhs, 1.0 - s.norm_a(),
                  {{"norm_a_over_b", a_over_b}, {"tau", s.tau(0)}, {"norm_b", s.norm_b(0)}});
}

namespace {

struct MultiDelayParts {
    double gain, a_over_b, delay_part;
};

MultiDelayParts multi_delay_parts(const SampledEquation& s) {
    double sum_norm_b = 0.0;
    double delay_part = 0.0;
    for (std::size_t k = 0; k < s.term_count(); ++k) {
        sum_norm_b += s.norm_b(k);
        delay_part += s.tau(k) * ratio_norm(s.b(k), s.b_sum());
    }
    return {sum_norm_b / (1.0 - s.norm_a()), ratio_norm(s.a(), s.b_sum()), delay_part};
}

} // namespace

double multi_delay_lhs(const SampledEquation& s) {
    const auto p = multi_delay_parts(s);
    return p.gain * (p.a_over_b + p.delay_part);
}

CriterionVerdict test_multi_delay(const SampledEquation& s, const CriteriaOptions& opt) {
    if (s.term_count() == 0) return inapplicable(criterion_id::multi_delay, "m", 0.0);
    if (!(s.inf_b_sum() > opt.positivity_margin)) {
        return inapplicable(criterion_id::multi_delay, "inf_b_sum", s.inf_b_sum());
    }
    const auto p = multi_delay_parts(s);
    return decide(criterion_id::multi_delay, p.gain * (p.a_over_b + p.delay_part), 1.0,
                  {{"inf_b_sum", s.inf_b_sum()},
                   {"gain", p.gain},
                   {"norm_a_over_b", p.a_over_b},
                   {"delay_part", p.delay_part}});
}

CriterionVerdict test_constant_coefficients(const SampledEquation& s, const CriteriaOptions& opt) {
    if (s.term_count() == 0) return inapplicable(criterion_id::constant_coefficients, "m", 0.0);
    double b_tau = 0.0;
    for (std::size_t k = 0; k < s.term_count(); ++k) {
        const auto& coeff = s.equation().terms[k].coeff;
        if (!coeff.is_constant()) {
            return inapplicable(criterion_id::constant_coefficients, fmt::format("b[{}]_varies", k), 1.0);
        }
        const double value = coeff(s.equation().t0);
        if (!(value > opt.positivity_margin)) {
            return inapplicable(criterion_id::constant_coefficients, fmt::format("b[{}]", k), value);
        }
        b_tau += value * s.tau(k);
    }
    return decide(criterion_id::constant_coefficients, b_tau, 1.0 - 2.0 * s.norm_a(),
                  {{"sum_b_tau", b_tau}, {"norm_a", s.norm_a()}});
}

StabilityReport run_all(const SampledEquation& s, const CriteriaOptions& opt) {
    StabilityReport r;
    r.verdicts = {test_lambert_delay(s, opt),     test_truncated_coefficient(s, opt),
                  test_delay_excess(s, opt),      test_neutral_lag(s, opt),
                  test_multi_delay(s, opt),       test_constant_coefficients(s, opt),
                  test_single_delay(s, opt)};
    r.overall = std::any_of(r.verdicts.begin(), r.verdicts.end(),
                            [](const CriterionVerdict& v) { return v.applicable && v.holds; });
    return r;
}

StabilityReport run_all(const NeutralEquation& eq, const NormWindow& norm, const CriteriaOptions& opt) {
    auto violations = validate(eq, norm.window, norm.step);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return run_all(SampledEquation(eq, norm), opt);
}

KernelBound kernel_bound(const GeneralEquation& geq, const NormWindow& norm, const CriteriaOptions& opt) {
    const auto nodes = sample_nodes(norm.window, norm.step);
    const std::size_t n = nodes.size();
    const std::size_t m = geq.terms.size();

    std::vector<double> a0(n), c(n), d_minus_c(n);
    std::vector<std::vector<double>> d(m, std::vector<double>(n));
    KernelBound out;
    out.alpha0 = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = nodes[i];
        a0[i] = geq.a0(t);
        c[i] = geq.c(t);
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            d[k][i] = geq.terms[k].coeff(t);
            sum += d[k][i];
        }
        d_minus_c[i] = sum - c[i];
        out.alpha0 = std::min(out.alpha0, d_minus_c[i]);
        if (!out.positivity_witness && !(d_minus_c[i] > opt.positivity_margin)) out.positivity_witness = t;
    }
    if (out.positivity_witness) {
        out.K0 = kInf;
        return out;
    }

    auto sup_abs = [](const std::vector<double>& v) {
        double r = 0.0;
        for (double x : v) r = std::max(r, std::abs(x));
        return r;
    };
    const double norm_a0 = sup_abs(a0);
    double coefficient_sum = sup_abs(c);
    double delay_sum = ratio_norm(a0, d_minus_c);
    for (std::size_t k = 0; k < m; ++k) {
        coefficient_sum += sup_abs(d[k]);
        delay_sum += geq.terms[k].lag.lag_sup * ratio_norm(d[k], d_minus_c);
    }
    out.derivative_gain = coefficient_sum / (1.0 - norm_a0);
    out.integral_gain = delay_sum;
    out.K0 = norm_a0 < 1.0 ? out.derivative_gain * out.integral_gain : kInf;
    if (out.K0 < 1.0) out.K = 1.0 / (1.0 - out.K0);
    return out;
}

} // namespace ndde
