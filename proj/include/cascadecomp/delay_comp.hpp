#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "check.hpp"
#include "matops.hpp"
#include "ode.hpp"
#include "quadrature.hpp"
#include "sim_result.hpp"

namespace cascadecomp {

inline constexpr int kDefaultDelayIntervals = 100;

/**
 * x1'(t) = A1 x1(t) + B1 u(t - tau) with a nominal gain K such that
 * A1 + B1 K is Hurwitz (checked on construction).
 */
class DelayPlant {
public:
    DelayPlant(Matrix a1, Matrix b1, double tau, Matrix k)
        : a1_(std::move(a1)), b1_(std::move(b1)), k_(std::move(k)), tau_(tau) {
        require_square(a1_, "A1");
        const Eigen::Index n = a1_.rows();
        if (b1_.rows() != n || b1_.cols() != 1) {
            throw DimensionError("B1 must be " + detail::shape(n, 1));
        }
        if (k_.rows() != 1 || k_.cols() != n) {
            throw DimensionError("K must be " + detail::shape(1, n));
        }
        if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
            throw InputError("delay tau must be positive and finite");
        }
        if (!eig(a1_ + b1_ * k_).is_hurwitz(1e-8)) {
            throw DesignError("nominal gain does not make A1 + B1 K Hurwitz");
        }
    }

    [[nodiscard]] const Matrix& a1() const noexcept { return a1_; }
    [[nodiscard]] const Matrix& b1() const noexcept { return b1_; }
    [[nodiscard]] const Matrix& k() const noexcept { return k_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] Eigen::Index n() const noexcept { return a1_.rows(); }

private:
    Matrix a1_;
    Matrix b1_;
    Matrix k_;
    double tau_;
};

/**
 * Transport realisation of the delay: w(x, t) = u(t - x) sampled on
 * `intervals` equal panels of [0, tau]. Node 0 holds the boundary value u(t).
 */
struct TransportState {
    double tau = 1.0;
    std::vector<double> w;

    TransportState() = default;
    TransportState(double tau_, std::vector<double> w_) : tau(tau_), w(std::move(w_)) {
        if (w.size() < 2) {
            throw InputError("transport state needs at least two nodes");
        }
    }

    static TransportState zero(double tau, int intervals) {
        return TransportState(tau, std::vector<double>(static_cast<std::size_t>(intervals) + 1, 0.0));
    }

    [[nodiscard]] int intervals() const noexcept { return static_cast<int>(w.size()) - 1; }
    [[nodiscard]] double dx() const noexcept { return tau / intervals(); }
    [[nodiscard]] double node(int j) const noexcept { return j * dx(); }
};

// K1 = K e^{A1 tau}
inline Matrix predictor_gain(const DelayPlant& p) { return p.k() * expm(p.a1(), p.tau()); }

// S B2 for the transport actuator: e^{-A1 tau} B1.
inline Matrix transport_sb2(const DelayPlant& p) { return expm(p.a1(), -p.tau()) * p.b1(); }

/**
 * Quadrature rule for the distributed predictor term. Simpson is the default
 * for evaluating the controller; inside the closed loop its alternating
 * 1-4-2-4 weights excite a parasitic odd-even mode (z = -1) that grows for
 * open-loop unstable A1, so the simulator defaults to the trapezoid rule.
 */
enum class DelayQuadrature {
    simpson,
    trapezoid,
};

namespace detail {

inline std::vector<double> delay_weights(DelayQuadrature rule, std::size_t intervals, double h) {
    return rule == DelayQuadrature::simpson ? simpson_weights(intervals, h) : trapezoid_weights(intervals, h);
}

inline void check_transport_grid(const DelayPlant& p, const TransportState& w) {
    if (std::abs(w.tau - p.tau()) > 1e-12 * p.tau()) {
        throw InputError("transport grid spans [0, " + detail::fmt_g(w.tau) + "], plant delay is " +
                         detail::fmt_g(p.tau()));
    }
}

// Kernel columns e^{A1 (x_j - tau)} B1 on x_j = j h, built backwards from
// x = tau with one step exponential. With reverse = true the columns are
// e^{A1 (tau - x_j)} B1 instead, the history-form kernel.
inline std::vector<Vector> kernel_columns(const DelayPlant& p, std::size_t intervals, double h, bool reverse) {
    std::vector<Vector> cols(intervals + 1);
    const Eigen::MatrixXd step = expm(p.a1(), reverse ? h : -h).eigen();
    cols[intervals] = p.b1().col_vector(0);
    for (std::size_t j = intervals; j-- > 0;) {
        cols[j] = step * cols[j + 1];
    }
    return cols;
}

} // namespace detail

// S f = ∫_0^tau e^{A1(x - tau)} B1 f(x) dx by composite quadrature on the transport grid.
inline Vector transport_s_apply(const DelayPlant& p, const TransportState& w,
                                DelayQuadrature rule = DelayQuadrature::simpson) {
    detail::check_transport_grid(p, w);
    const auto intervals = static_cast<std::size_t>(w.intervals());
    const auto weights = detail::delay_weights(rule, intervals, w.dx());
    const auto kernel = detail::kernel_columns(p, intervals, w.dx(), false);
    Vector acc = Vector::Zero(p.n());
    for (std::size_t j = 0; j <= intervals; ++j) {
        acc += weights[j] * w.w[j] * kernel[j];
    }
    return acc;
}

// u = K1 ∫_0^tau e^{A1(x - tau)} B1 w(x) dx + K1 x1
inline double pde_controller(const DelayPlant& p, const Vector& x1, const TransportState& w,
                             DelayQuadrature rule = DelayQuadrature::simpson) {
    const Matrix k1 = predictor_gain(p);
    return (k1 * transport_s_apply(p, w, rule))(0) + (k1 * x1)(0);
}

/**
 * Uniform samples of the input over one delay window [t - window, t]:
 * samples.front() = u(t - window), samples.back() = u(t).
 */
struct InputHistory {
    double window = 0.0;
    std::vector<double> samples;
};

// u = K [e^{A1 tau} x1 + ∫_{t-tau}^t e^{A1(t-σ)} B1 u(σ) dσ]
inline double history_controller(const DelayPlant& p, const Vector& x1, const InputHistory& h,
                                 DelayQuadrature rule = DelayQuadrature::simpson) {
    if (h.samples.size() < 2 || std::abs(h.window - p.tau()) > 1e-12 * p.tau()) {
        throw InputError("input history must cover exactly one delay window of length " + detail::fmt_g(p.tau()) +
                         " with at least two samples");
    }
    const std::size_t intervals = h.samples.size() - 1;
    const double dsigma = h.window / static_cast<double>(intervals);
    const auto weights = detail::delay_weights(rule, intervals, dsigma);
    // Sample k sits at lag t - σ_k = window - k dσ.
    const auto kernel = detail::kernel_columns(p, intervals, dsigma, true);
    Vector integral = Vector::Zero(p.n());
    for (std::size_t k = 0; k <= intervals; ++k) {
        integral += weights[k] * h.samples[k] * kernel[k];
    }
    return (p.k() * (expm(p.a1(), p.tau()) * x1 + integral))(0);
}

enum class DelayLaw {
    predictor, // the compensator above
    naive,     // u = K x1, ignoring the delay
};

/**
 * Coupled march of the transport equation and the plant ODE.
 *
 * Transport: first-order upwind, w_j ← w_j − (dt/dx)(w_j − w_{j−1}), inflow
 * w(0, t) = u(t). With dt = dx the shift is exact. The plant takes one RK4
 * step per time step with w(tau, ·) held at its start-of-step value.
 *
 * The predictor law includes node 0 in its quadrature, so the boundary value
 * is found from the scalar fixed point u = Σ_{j≥1} c_j w_j + c_0 u + K1 x1.
 */
inline SimResult simulate_delay_closed_loop(const DelayPlant& p, const Vector& x1_0, const TransportState& w0,
                                            double horizon, double dt, long stride = 1,
                                            DelayLaw law = DelayLaw::predictor,
                                            DelayQuadrature rule = DelayQuadrature::trapezoid) {
    detail::check_transport_grid(p, w0);
    if (x1_0.size() != p.n()) {
        throw DimensionError("initial plant state must have length " + std::to_string(p.n()));
    }
    const double dx = w0.dx();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigurationError("time step must be positive");
    }
    if (dt > dx * (1.0 + 1e-12)) {
        throw ConfigurationError("upwind CFL condition dt <= dx violated (dt = " + detail::fmt_g(dt) +
                                 ", dx = " + detail::fmt_g(dx) + ")");
    }
    stride = std::max<long>(stride, 1);
    const int m = w0.intervals();
    const auto um = static_cast<std::size_t>(m);
    const double courant = dt / dx;

    // Per-node controller weights c_j = K1 e^{A1(x_j - tau)} B1 · q_j.
    const Matrix k1 = predictor_gain(p);
    const auto weights = detail::delay_weights(rule, um, dx);
    std::vector<double> c(um + 1, 0.0);
    if (law == DelayLaw::predictor) {
        const Matrix advance = expm(p.a1(), dx);
        Matrix kernel = expm(p.a1(), -p.tau()) * p.b1(); // at x = 0
        for (std::size_t j = 0; j <= um; ++j) {
            c[j] = (k1 * kernel)(0, 0) * weights[j];
            kernel = advance * kernel;
        }
    }
    const double denom = 1.0 - c[0];
    if (std::abs(denom) < 1e-12) {
        throw NumericalError("boundary fixed point of the predictor law is degenerate");
    }

    std::vector<double> w = w0.w;
    Vector x1 = x1_0;
    auto control = [&]() {
        if (law == DelayLaw::naive) {
            return (p.k() * x1)(0);
        }
        double acc = (k1 * x1)(0);
        for (std::size_t j = 1; j <= um; ++j) {
            acc += c[j] * w[j];
        }
        return acc / denom;
    };

    SimResult r;
    r.grid.resize(um + 1);
    for (std::size_t j = 0; j <= um; ++j) {
        r.grid[j] = w0.node(static_cast<int>(j));
    }
    auto record = [&](double t) {
        r.times.push_back(t);
        r.u.push_back(w[0]);
        r.x1.push_back(x1);
        r.snapshots.push_back(w);
        std::vector<double> sq(um + 1);
        for (std::size_t j = 0; j <= um; ++j) {
            sq[j] = w[j] * w[j];
        }
        r.energy.push_back(x1.squaredNorm() + trapezoid(sq, dx));
    };

    const Eigen::MatrixXd a1 = p.a1().eigen();
    const Vector b1 = p.b1().col_vector(0);
    w[0] = control();
    record(0.0);
    const long steps = step_count(horizon, dt);
    for (long k = 1; k <= steps; ++k) {
        const double held = w[um];
        x1 = rk4_step([&](double, const Vector& x) -> Vector { return a1 * x + b1 * held; }, (k - 1) * dt, x1, dt);
        for (std::size_t j = um; j >= 1; --j) {
            w[j] -= courant * (w[j] - w[j - 1]);
        }
        w[0] = control();
        if (!x1.allFinite() || !std::isfinite(w[0])) {
            throw DivergenceError("delay simulation diverged", k, k * dt);
        }
        if (k % stride == 0 || k == steps) {
            record(k * dt);
        }
    }
    return r;
}

inline std::vector<Check> verify_delay(const DelayPlant& p, int intervals = kDefaultDelayIntervals) {
    std::vector<Check> out;
    const Spectrum nominal = eig(p.a1() + p.b1() * p.k());
    const Spectrum shifted = eig(p.a1() + transport_sb2(p) * predictor_gain(p));
    out.push_back(check_at_most("max Re sigma(A1 + B1 K)", nominal.max_real(), -1e-8));
    out.push_back(check_at_most("sigma(A1 + S B2 K1) = sigma(A1 + B1 K)", spectrum_distance(nominal, shifted),
                                1e-8 * std::max(1.0, p.a1().norm())));

    // Run with a nonzero initial plant state and compare both controller forms
    // once a full delay window of inputs has been recorded.
    Vector x0 = Vector::Ones(p.n());
    const TransportState w0 = TransportState::zero(p.tau(), intervals);
    const double dx = w0.dx();
    const SimResult r = simulate_delay_closed_loop(p, x0, w0, 3.0 * p.tau(), dx);
    double worst = 0.0;
    for (std::size_t k = static_cast<std::size_t>(intervals); k < r.samples(); k += 7) {
        const double u_pde = pde_controller(p, r.x1[k], TransportState(p.tau(), r.snapshots[k]));
        InputHistory h{p.tau(), {r.u.begin() + static_cast<long>(k) - intervals, r.u.begin() + static_cast<long>(k) + 1}};
        worst = std::max(worst, std::abs(u_pde - history_controller(p, r.x1[k], h)));
    }
    out.push_back(check_at_most("|pde_controller - history_controller| for t >= tau", worst, 1e-6));

    double loop_err = 0.0;
    for (std::size_t k = 0; k < r.samples(); k += 7) {
        const TransportState w(p.tau(), r.snapshots[k]);
        loop_err = std::max(loop_err, std::abs(r.u[k] - pde_controller(p, r.x1[k], w, DelayQuadrature::trapezoid)));
    }
    out.push_back(check_at_most("|u - pde_controller| along the simulated loop", loop_err, 1e-9));

    double transport_err = 0.0;
    for (std::size_t k = static_cast<std::size_t>(intervals); k < r.samples(); ++k) {
        transport_err = std::max(transport_err, std::abs(r.snapshots[k].back() - r.u[k - static_cast<std::size_t>(intervals)]));
    }
    out.push_back(check_at_most("|w(tau, t) - u(t - tau)| at unit Courant number", transport_err, 1e-12));
    out.push_back(check_at_most("energy(3 tau) / energy(tau)", r.energy.back() / r.energy[static_cast<std::size_t>(intervals)], 1.0));
    return out;
}

} // namespace cascadecomp
