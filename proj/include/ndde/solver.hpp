#pragma once

// Fixed-step method-of-steps integration of
//
//   x'(t) = a(t) x'(g(t)) - sum_k b_k(t) x(h_k(t)) + f(t),   t >= t0,
//
// with classical RK4. The state history x is reconstructed by cubic Hermite
// interpolation on the stored nodes; the derivative history x' is piecewise
// linear in the stored node derivatives. Node derivatives are recomputed from
// the equation after every step, never taken from the RK stages. Each node
// keeps a left and a right derivative, since x' jumps wherever a neutral
// lookup crosses an earlier jump; a segment uses the right derivative at its
// start and the left derivative at its end.
//
// The neutral lag must stay at least one step long so that x'(g(t)) always
// refers to finished history.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ndde/model.hpp"

namespace ndde {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a history lookup reaches past the computed frontier.
class CausalityError : public SolverError {
public:
    using SolverError::SolverError;
};

class Trajectory {
public:
    Trajectory(double t0, double h);

    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double step() const noexcept { return h_; }
    [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * h_; }
    [[nodiscard]] double frontier() const noexcept;

    [[nodiscard]] const std::vector<double>& x() const noexcept { return x_; }
    /// Right derivatives at the nodes.
    [[nodiscard]] const std::vector<double>& dx() const noexcept { return dx_; }
    [[nodiscard]] const std::vector<double>& dx_left() const noexcept { return dx_left_; }

    /// Dense output on [t0, frontier]; exact samples at nodes.
    [[nodiscard]] double eval_x(double t) const;
    /// Right derivative at nodes.
    [[nodiscard]] double eval_dx(double t) const;
    /// Left derivative at nodes; the same as eval_dx elsewhere.
    [[nodiscard]] double eval_dx_left(double t) const;

    void push(double x, double dx) { push(x, dx, dx); }
    void push(double x, double dx_left, double dx_right);

private:
    [[nodiscard]] std::pair<std::size_t, double> locate(double t) const;

    double t0_;
    double h_;
    std::vector<double> x_;
    std::vector<double> dx_;
    std::vector<double> dx_left_;
};

/// (x(t), x'(t)) for t <= frontier: (phi, psi) before t0, (x0, right derivative)
/// at t0, dense output afterwards.
std::pair<double, double> history_eval(const InitialData& init, const Trajectory& traj, double t);

Trajectory integrate(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double t_end,
                     double h);

/// X(t, s): unit value at s, zero history before s, no forcing.
Trajectory fundamental_solution(const NeutralEquation& eq, double s, double t_end, double h);

/// log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|) at t_end.
double convergence_order(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double t_end,
                         double h);

/// max over nodes of |x'(t_i) - (a x'(g) - sum b_k x(h_k) + f)(t_i)| with the
/// right side rebuilt from the finished trajectory.
double self_consistency_residual(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f,
                                 const Trajectory& traj);

} // namespace ndde
