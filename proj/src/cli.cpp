#include "ndde/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ndde/criteria.hpp"

namespace ndde::cli {

ConfigOverrides Options::overrides() const {
    ConfigOverrides o;
    o.window = window;
    o.norm_step = step;
    o.solver_h = h;
    o.t_end = t_end;
    return o;
}

std::string csv_number(double v) { return fmt::format("{:.17g}", v); }

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,dx\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << csv_number(traj.time(i)) << ',' << csv_number(traj.x()[i]) << ',' << csv_number(traj.dx()[i]) << '\n';
    }
}

namespace {

/// Running sup of |f| over the trajectory nodes.
std::vector<double> running_forcing_norm(const Trajectory& traj, const ScalarFn& f) {
    std::vector<double> out(traj.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        sup = std::max(sup, std::abs(f(traj.time(i))));
        out[i] = sup;
    }
    return out;
}

double envelope_at(const Trajectory& traj, std::size_t i, double lambda, double C, double gain, double f_norm) {
    return C * std::exp(-lambda * (traj.time(i) - traj.t0())) + gain * f_norm;
}

void print_violations(std::ostream& err, const std::vector<Violation>& violations) {
    err << "error: equation failed validation\n";
    for (const auto& v : violations) {
        fmt::print(err, "  {}: {} (t = {:.6g}, value = {:.6g})\n", v.field, v.message, v.t, v.value);
    }
}

std::optional<std::ofstream> open_out(const Options& opt) {
    if (!opt.out) return std::nullopt;
    std::ofstream f(*opt.out, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", *opt.out));
    return f;
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.6g}", v);
}

/// Runs a command body, mapping input and runtime errors to exit code 1.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        print_violations(err, e.violations());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitInputError;
}

ProblemConfig load_valid(const Options& opt, const ConfigOverrides& overrides) {
    ProblemConfig cfg = load_config(opt.config, overrides);
    auto violations = validate(cfg.equation, cfg.numerics.norm.window, cfg.numerics.norm.step);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return cfg;
}

} // namespace

DominanceResult dominance(const Trajectory& traj, const ScalarFn& f, double lambda, double C, double forcing_gain) {
    DominanceResult d{lambda, C, forcing_gain, 0.0, traj.t0()};
    const auto f_norm = running_forcing_norm(traj, f);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double x = std::abs(traj.x()[i]);
        if (x == 0.0) continue;
        const double bound = envelope_at(traj, i, lambda, C, forcing_gain, f_norm[i]);
        const double r = bound > 0.0 ? x / bound : std::numeric_limits<double>::infinity();
        if (r > d.ratio) {
            d.ratio = r;
            d.worst_t = traj.time(i);
        }
    }
    return d;
}

void write_dominance_csv(std::ostream& os, const Trajectory& traj, const ScalarFn& f, const DominanceResult& d) {
    const auto f_norm = running_forcing_norm(traj, f);
    os << "t,x,envelope\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << csv_number(traj.time(i)) << ',' << csv_number(traj.x()[i]) << ','
           << csv_number(envelope_at(traj, i, d.lambda, d.C, d.forcing_gain, f_norm[i])) << '\n';
    }
}

int cmd_check(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemConfig cfg = load_valid(opt, opt.overrides());
        const StabilityReport report = run_all(SampledEquation(cfg.equation, cfg.numerics.norm));
        fmt::print(out, "{:<24}{:<12}{:<7}{:<14}{:<14}{}\n", "criterion", "applicable", "holds", "lhs", "threshold",
                   "intermediates");
        std::vector<std::string> certified;
        for (const auto& v : report.verdicts) {
            std::string details;
            for (const auto& [name, value] : v.intermediates) {
                if (!details.empty()) details += ' ';
                details += name + '=' + format_value(value);
            }
            fmt::print(out, "{:<24}{:<12}{:<7}{:<14}{:<14}{}\n", v.id, v.applicable ? "yes" : "no",
                       v.holds ? "yes" : "no", v.applicable ? format_value(v.lhs) : "-",
                       v.applicable ? format_value(v.threshold) : "-", details);
            if (v.applicable && v.holds) certified.push_back(v.id);
        }
        if (report.overall) {
            std::string list;
            for (const auto& id : certified) list += (list.empty() ? "" : ", ") + id;
            fmt::print(out, "overall: uniformly exponentially stable (certified by {})\n", list);
            return kExitOk;
        }
        out << "overall: inconclusive (no applicable criterion holds)\n";
        return kExitInconclusive;
    });
}

int cmd_envelope(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemConfig cfg = load_valid(opt, opt.overrides());
        const SampledEquation sampled(cfg.equation, cfg.numerics.norm);
        double lambda = 0.0;
        if (opt.lambda) {
            lambda = *opt.lambda;
        } else {
            const auto best = optimize_lambda(sampled, cfg.numerics.lambda_hi, cfg.numerics.tol);
            if (!best) {
                fmt::print(out, "no feasible decay rate in (0, {}]\n", cfg.numerics.lambda_hi);
                return kExitInconclusive;
            }
            lambda = *best;
        }
        EnvelopeCertificate cert;
        try {
            cert = certificate(sampled, lambda, cfg.initial, cfg.f_bound);
        } catch (const InfeasibleError& e) {
            fmt::print(out, "infeasible at lambda = {}: {}\n", lambda, e.diagnostics().failing_clause);
            return kExitInconclusive;
        }
        fmt::print(out, "lambda        {:.10g}\n", cert.lambda);
        fmt::print(out, "alpha         {:.10g}\n", cert.alpha);
        fmt::print(out, "M1            {:.10g}\n", cert.M1);
        fmt::print(out, "M0            {:.10g}\n", cert.M0);
        fmt::print(out, "C             {:.10g}\n", cert.C);
        fmt::print(out, "forcing_gain  {:.10g}\n", cert.forcing_gain);
        fmt::print(out, "breakdown     M0 * [ |x0| = {:.6g} + neutral history = {:.6g} + delay history = {:.6g} ]\n",
                   cert.initial_value_part, cert.neutral_history_part, cert.delay_history_part);
        fmt::print(out, "bound         |x(t)| <= {:.6g} exp(-{:.6g} (t - {:.6g})) + {:.6g} ||f||\n", cert.C, cert.lambda,
                   cert.t0, cert.forcing_gain);
        if (auto file = open_out(opt)) {
            constexpr int kSamples = 1000;
            *file << "t,envelope\n";
            const double t0 = cfg.equation.t0;
            const double span = cfg.numerics.t_end - t0;
            for (int i = 0; i <= kSamples; ++i) {
                const double t = t0 + span * i / kSamples;
                *file << csv_number(t) << ',' << csv_number(cert.C * std::exp(-cert.lambda * (t - t0))) << '\n';
            }
        }
        return kExitOk;
    });
}

int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemConfig cfg = load_valid(opt, opt.overrides());
        const Trajectory traj =
            integrate(cfg.equation, cfg.initial, cfg.forcing, cfg.numerics.t_end, cfg.numerics.solver_h);
        if (auto file = open_out(opt)) {
            write_trajectory_csv(*file, traj);
            fmt::print(out, "wrote {} rows to {}\n", traj.size(), *opt.out);
        } else {
            write_trajectory_csv(out, traj);
        }
        return kExitOk;
    });
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.C && !opt.lambda) throw std::invalid_argument("--C requires --lambda");
        const ProblemConfig cfg = load_valid(opt, opt.overrides());
        const SampledEquation sampled(cfg.equation, cfg.numerics.norm);

        double lambda = 0.0;
        if (opt.lambda) {
            lambda = *opt.lambda;
        } else {
            const auto best = optimize_lambda(sampled, cfg.numerics.lambda_hi, cfg.numerics.tol);
            if (!best) {
                fmt::print(out, "no feasible decay rate in (0, {}]\n", cfg.numerics.lambda_hi);
                return kExitInconclusive;
            }
            lambda = *best;
        }

        std::optional<EnvelopeCertificate> cert;
        const Feasibility feas = check_feasible(sampled, lambda);
        if (feas.feasible) cert = certificate(sampled, lambda, cfg.initial, cfg.f_bound);
        if (!cert && (!opt.C || !cfg.unforced)) {
            fmt::print(out, "infeasible at lambda = {}: {}\n", lambda, feas.failing_clause);
            return kExitInconclusive;
        }
        const double C = opt.C ? *opt.C : cert->C;
        const double gain = cert ? cert->forcing_gain : 0.0;

        const Trajectory traj =
            integrate(cfg.equation, cfg.initial, cfg.forcing, cfg.numerics.t_end, cfg.numerics.solver_h);
        const DominanceResult d = dominance(traj, cfg.forcing, lambda, C, cfg.unforced ? 0.0 : gain);

        fmt::print(out, "lambda           {:.10g}\n", d.lambda);
        fmt::print(out, "C                {:.10g}{}\n", d.C, opt.C ? " (override)" : "");
        if (!cfg.unforced) fmt::print(out, "forcing_gain     {:.10g}\n", d.forcing_gain);
        fmt::print(out, "nodes            {}\n", traj.size());
        fmt::print(out, "dominance ratio  {:.10g} (worst at t = {:.6g})\n", d.ratio, d.worst_t);
        fmt::print(out, "result           {}\n", d.pass() ? "PASS" : "FAIL");
        if (auto file = open_out(opt)) write_dominance_csv(*file, traj, cfg.forcing, d);
        return d.pass() ? kExitOk : kExitInconclusive;
    });
}

namespace {

struct RegionRow {
    std::vector<std::string> verdicts;
    double multi_delay_lhs = 0.0;
    std::optional<double> lambda_star;
};

RegionRow region_point(const Options& opt, double value) {
    ConfigOverrides overrides = opt.overrides();
    overrides.params[opt.param] = value;
    const ProblemConfig cfg = load_config(opt.config, overrides);
    RegionRow row;
    const auto violations = validate(cfg.equation, cfg.numerics.norm.window, cfg.numerics.norm.step);
    const SampledEquation sampled(cfg.equation, cfg.numerics.norm);
    const StabilityReport report = run_all(sampled);
    for (const auto& v : report.verdicts) {
        row.verdicts.push_back(!violations.empty() || !v.applicable ? "NA" : (v.holds ? "1" : "0"));
    }
    row.multi_delay_lhs = multi_delay_lhs(sampled);
    if (violations.empty()) row.lambda_star = optimize_lambda(sampled, cfg.numerics.lambda_hi, cfg.numerics.tol);
    return row;
}

} // namespace

int cmd_region(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.param.empty()) throw std::invalid_argument("--param is required");
        if (!opt.from || !opt.to) throw std::invalid_argument("--from and --to are required");
        if (opt.points < 1) throw std::invalid_argument("--points must be at least 1");
        // Fails early on an unknown parameter name.
        (void)load_config(opt.config, [&] {
            ConfigOverrides o = opt.overrides();
            o.params[opt.param] = *opt.from;
            return o;
        }());

        const auto n = static_cast<std::size_t>(opt.points);
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = n == 1 ? *opt.from : *opt.from + (*opt.to - *opt.from) * static_cast<double>(i) / (n - 1);
        }

        std::vector<RegionRow> rows(n);
        std::vector<std::exception_ptr> failures(n);
        const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < n; i += workers) {
                        try {
                            rows[i] = region_point(opt, values[i]);
                        } catch (...) {
                            failures[i] = std::current_exception();
                        }
                    }
                });
            }
        }
        for (const auto& f : failures) {
            if (f) std::rethrow_exception(f);
        }

        auto write = [&](std::ostream& os) {
            os << opt.param;
            for (const char* id : {criterion_id::lambert_delay, criterion_id::truncated_coefficient,
                                   criterion_id::delay_excess, criterion_id::neutral_lag, criterion_id::multi_delay,
                                   criterion_id::constant_coefficients, criterion_id::single_delay}) {
                os << ',' << id;
            }
            os << ",multi_delay_lhs,lambda_star\n";
            for (std::size_t i = 0; i < n; ++i) {
                os << csv_number(values[i]);
                for (const auto& v : rows[i].verdicts) os << ',' << v;
                os << ',' << csv_number(rows[i].multi_delay_lhs) << ','
                   << (rows[i].lambda_star ? csv_number(*rows[i].lambda_star) : "NA") << '\n';
            }
        };
        if (auto file = open_out(opt)) {
            write(*file);
            fmt::print(out, "wrote {} rows to {}\n", n, *opt.out);
        } else {
            write(out);
        }
        return kExitOk;
    });
}

} // namespace ndde::cli
