#pragma once

// Problem files: a line-oriented sectioned key/value document.
//
//   # comment
//   [params]            named scalars usable inside every expression
//   sigma = 0.5
//
//   [equation]
//   t0 = 0
//   a = "0.15"          optional a_sup / a_inf declared bounds
//   g_lag = "sigma"     optional g_lag_sup / g_lag_inf, sampled otherwise
//
//   [[term]]            one block per delayed term
//   b = "1"             optional b_sup / b_inf
//   h_lag = "1/e + 0.1*sin(t)"
//
//   [initial]
//   phi = "cos(t)"
//   psi = "sin(2*t) + 2"
//   x0 = 1              optional, defaults to phi(t0)
//
//   [forcing]
//   f = "0"             optional section; f_bound sampled on [t0, t_end] unless given
//
//   [numerics]          window, norm_step, solver_h, t_end, lambda_hi, tol
//
// Values are quoted or bare expressions; numeric keys must not depend on t.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ndde/expr.hpp"
#include "ndde/model.hpp"

namespace ndde {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::size_t line);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Numerics {
    NormWindow norm;
    double solver_h = 1e-3;
    double t_end = 60.0;
    double lambda_hi = 1.0;
    double tol = 1e-6;
};

struct ConfigOverrides {
    /// Each name must exist in [params].
    ParameterTable params;
    std::optional<double> window;
    std::optional<double> norm_step;
    std::optional<double> solver_h;
    std::optional<double> t_end;
};

struct ProblemConfig {
    ParameterTable params;
    NeutralEquation equation;
    InitialData initial;
    ScalarFn forcing;
    /// ||f|| on [t0, t_end], declared or sampled.
    double f_bound = 0.0;
    /// True when f is the constant zero.
    bool unforced = true;
    Numerics numerics;
};

ProblemConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
ProblemConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

} // namespace ndde
