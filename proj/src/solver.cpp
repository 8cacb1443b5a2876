#include "ndde/solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ndde {

namespace {

// Relative (to h) tolerance for treating a lookup time as a grid node or as
// lying on the frontier.
constexpr double kSnap = 1e-9;

} // namespace

Trajectory::Trajectory(double t0, double h) : t0_(t0), h_(h) {
    if (!(h > 0.0)) throw SolverError("step h must be positive");
}

double Trajectory::frontier() const noexcept {
    return x_.empty() ? t0_ : time(x_.size() - 1);
}

void Trajectory::push(double x, double dx_left, double dx_right) {
    x_.push_back(x);
    dx_.push_back(dx_right);
    dx_left_.push_back(dx_left);
}

std::pair<std::size_t, double> Trajectory::locate(double t) const {
    if (x_.empty()) throw CausalityError("trajectory is empty");
    const double r = (t - t0_) / h_;
    const double last = static_cast<double>(x_.size() - 1);
    if (r < -kSnap || r > last + kSnap) {
        throw CausalityError(
            fmt::format("lookup at t = {:.17g} outside [{:.17g}, {:.17g}]", t, t0_, frontier()));
    }
    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= kSnap) return {static_cast<std::size_t>(std::max(0.0, nearest)), 0.0};
    const auto i = static_cast<std::size_t>(std::floor(r));
    return {i, r - static_cast<double>(i)};
}

double Trajectory::eval_x(double t) const {
    const auto [i, theta] = locate(t);
    if (theta == 0.0) return x_[i];
    const double th2 = theta * theta;
    const double th3 = th2 * theta;
    const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    const double h10 = th3 - 2.0 * th2 + theta;
    const double h01 = -2.0 * th3 + 3.0 * th2;
    const double h11 = th3 - th2;
    return h00 * x_[i] + h10 * h_ * dx_[i] + h01 * x_[i + 1] + h11 * h_ * dx_left_[i + 1];
}

double Trajectory::eval_dx(double t) const {
    const auto [i, theta] = locate(t);
    if (theta == 0.0) return dx_[i];
    return (1.0 - theta) * dx_[i] + theta * dx_left_[i + 1];
}

double Trajectory::eval_dx_left(double t) const {
    const auto [i, theta] = locate(t);
    if (theta == 0.0) return dx_left_[i];
    return (1.0 - theta) * dx_[i] + theta * dx_left_[i + 1];
}

std::pair<double, double> history_eval(const InitialData& init, const Trajectory& traj, double t) {
    if (t < traj.t0()) return {init.phi(t), init.psi(t)};
    return {traj.eval_x(t), traj.eval_dx(t)};
}

namespace {

class MethodOfSteps {
public:
    MethodOfSteps(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double h)
        : eq_(eq), init_(init), f_(f), h_(h), traj_(eq.t0, h) {}

    Trajectory run(double t_end) {
        const double span = t_end - eq_.t0;
        if (!(span > 0.0)) throw SolverError(fmt::format("t_end = {} must exceed t0 = {}", t_end, eq_.t0));
        const auto steps = static_cast<std::size_t>(std::ceil(span / h_ - 1e-9));

        // Right derivative at t0 only sees the initial functions.
        frontier_ = eq_.t0;
        traj_.push(init_.x0, 0.0);
        const double dx0 = rhs(eq_.t0, init_.x0, Provisional::None).right;
        traj_ = Trajectory(eq_.t0, h_);
        traj_.push(init_.x0, dx0);

        for (std::size_t n = 0; n < steps; ++n) {
            const double tn = traj_.time(n);
            const double xn = traj_.x()[n];
            frontier_ = tn;
            step_start_ = tn;
            step_start_x_ = xn;
            // Stages at the step ends look at history from inside the step.
            const double k1 = rhs(tn, xn, Provisional::None).right;
            const double k2 = rhs(tn + 0.5 * h_, xn + 0.5 * h_ * k1, Provisional::Stage).right;
            const double k3 = rhs(tn + 0.5 * h_, xn + 0.5 * h_ * k2, Provisional::Stage).right;
            const double t_next = traj_.time(n + 1);
            const double k4 = rhs(t_next, xn + h_ * k3, Provisional::Stage).left;
            const double x_next = xn + h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const Sides dx_next = rhs(t_next, x_next, Provisional::Stage);
            traj_.push(x_next, dx_next.left, dx_next.right);
        }
        return std::move(traj_);
    }

private:
    enum class Provisional { None, Stage };

    struct Sides {
        double left;
        double right;
    };

    // x at q. Lookups past the frontier are only legal inside the current step
    // (delays shorter than h) and use the line from the step start to the stage.
    double x_at(double q, double s, double stage_x, Provisional mode) const {
        if (q < eq_.t0) return init_.phi(q);
        if (q <= frontier_ + kSnap * h_) return traj_.eval_x(std::min(q, frontier_));
        if (mode == Provisional::Stage && q <= s + kSnap * h_) {
            const double w = (std::min(q, s) - step_start_) / (s - step_start_);
            return step_start_x_ + w * (stage_x - step_start_x_);
        }
        throw CausalityError(fmt::format("x requested at t = {:.17g} beyond frontier {:.17g}", q, frontier_));
    }

    // Left and right limits of x' at q.
    Sides dx_at(double q) const {
        if (q < eq_.t0 - kSnap * h_) {
            const double v = init_.psi(q);
            return {v, v};
        }
        if (q <= frontier_ + kSnap * h_) {
            const double clamped = std::clamp(q, eq_.t0, frontier_);
            const double right = traj_.eval_dx(clamped);
            const double left = clamped == eq_.t0 && std::abs(q - eq_.t0) <= kSnap * h_
                                    ? init_.psi(eq_.t0)
                                    : traj_.eval_dx_left(clamped);
            return {left, right};
        }
        throw CausalityError(fmt::format("x' requested at t = {:.17g} beyond frontier {:.17g}", q, frontier_));
    }

    Sides rhs(double s, double stage_x, Provisional mode) const {
        double v = f_(s);
        for (const auto& term : eq_.terms) {
            const double b = term.coeff(s);
            if (b != 0.0) v -= b * x_at(s - term.lag(s), s, stage_x, mode);
        }
        const double a = eq_.a(s);
        if (a == 0.0) return {v, v};
        const Sides d = dx_at(s - eq_.g_lag(s));
        return {v + a * d.left, v + a * d.right};
    }

    const NeutralEquation& eq_;
    const InitialData& init_;
    const ScalarFn& f_;
    double h_;
    Trajectory traj_;
    double frontier_ = 0.0;
    double step_start_ = 0.0;
    double step_start_x_ = 0.0;
};

void check_preconditions(const NeutralEquation& eq, double h) {
    if (!(h > 0.0)) throw SolverError("step h must be positive");
    if (!(eq.g_lag.lag_inf > 0.0)) {
        throw SolverError(fmt::format("neutral lag g_lag has inf {} ; the explicit scheme needs a positive neutral lag",
                                      eq.g_lag.lag_inf));
    }
    if (h > eq.g_lag.lag_inf * (1.0 + kSnap)) {
        throw SolverError(fmt::format("step h = {} exceeds the neutral lag g_lag inf {}", h, eq.g_lag.lag_inf));
    }
    for (std::size_t k = 0; k < eq.terms.size(); ++k) {
        if (eq.terms[k].lag.lag_inf < 0.0) {
            throw SolverError(fmt::format("delay lag h_lag[{}] has negative inf {}", k, eq.terms[k].lag.lag_inf));
        }
    }
}

} // namespace

Trajectory integrate(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double t_end,
                     double h) {
    check_preconditions(eq, h);
    return MethodOfSteps(eq, init, f, h).run(t_end);
}

Trajectory fundamental_solution(const NeutralEquation& eq, double s, double t_end, double h) {
    if (s < eq.t0) throw SolverError(fmt::format("start s = {} precedes t0 = {}", s, eq.t0));
    NeutralEquation shifted = eq;
    shifted.t0 = s;
    const InitialData unit{ScalarFn::constant(0.0), ScalarFn::constant(0.0), 1.0};
    return integrate(shifted, unit, ScalarFn::constant(0.0), t_end, h);
}

double convergence_order(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f, double t_end,
                         double h) {
    const double coarse = integrate(eq, init, f, t_end, h).x().back();
    const double mid = integrate(eq, init, f, t_end, h / 2.0).x().back();
    const double fine = integrate(eq, init, f, t_end, h / 4.0).x().back();
    return std::log2(std::abs(coarse - mid) / std::abs(mid - fine));
}

double self_consistency_residual(const NeutralEquation& eq, const InitialData& init, const ScalarFn& f,
                                 const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.time(i);
        double v = f(t) + eq.a(t) * history_eval(init, traj, t - eq.g_lag(t)).second;
        for (const auto& term : eq.terms) {
            v -= term.coeff(t) * history_eval(init, traj, t - term.lag(t)).first;
        }
        worst = std::max(worst, std::abs(traj.dx()[i] - v));
    }
    return worst;
}

} // namespace ndde
