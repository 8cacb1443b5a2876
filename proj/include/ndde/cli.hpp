#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ndde/config.hpp"
#include "ndde/envelope.hpp"
#include "ndde/solver.hpp"

namespace ndde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
/// Inconclusive stability verdict, infeasible rate, or failed dominance.
inline constexpr int kExitInconclusive = 2;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<double> lambda;
    std::optional<double> C;
    std::string param;
    std::optional<double> from;
    std::optional<double> to;
    int points = 101;
    std::optional<double> h;
    std::optional<double> t_end;
    std::optional<double> window;
    std::optional<double> step;

    [[nodiscard]] ConfigOverrides overrides() const;
};

int cmd_check(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_envelope(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_region(const Options& opt, std::ostream& out, std::ostream& err);

/// Shortest round-trip text for a double ("%.17g").
std::string csv_number(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

struct DominanceResult {
    double lambda = 0.0;
    double C = 0.0;
    double forcing_gain = 0.0;
    /// max_i |x(t_i)| / bound(t_i); PASS iff <= 1.
    double ratio = 0.0;
    double worst_t = 0.0;
    [[nodiscard]] bool pass() const noexcept { return ratio <= 1.0; }
};

/// Largest |x| / (C e^{-lambda (t - t0)} + gain sup_[t0,t] |f|) over the nodes.
DominanceResult dominance(const Trajectory& traj, const ScalarFn& f, double lambda, double C, double forcing_gain);

void write_dominance_csv(std::ostream& os, const Trajectory& traj, const ScalarFn& f, const DominanceResult& d);

} // namespace ndde::cli
