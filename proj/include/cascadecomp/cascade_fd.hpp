#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "check.hpp"
#include "matops.hpp"
#include "ode.hpp"
#include "sim_result.hpp"
#include "sylvester.hpp"

namespace cascadecomp {

inline constexpr double kHurwitzMargin = 1e-8;

/**
 * Finite-dimensional cascade
 *   x1' = A1 x1 + B1 C2 x2
 *   x2' = A2 x2 + B2 u
 * with the control entering only through the actuator block (A2, B2).
 */
struct CascadePlant {
    Matrix a1; // n×n
    Matrix b1; // n×p
    Matrix c2; // p×m
    Matrix a2; // m×m
    Matrix b2; // m×q

    CascadePlant(Matrix a1_, Matrix b1_, Matrix c2_, Matrix a2_, Matrix b2_)
        : a1(std::move(a1_)), b1(std::move(b1_)), c2(std::move(c2_)), a2(std::move(a2_)), b2(std::move(b2_)) {
        require_square(a1, "A1");
        require_square(a2, "A2");
        if (b1.rows() != a1.rows()) {
            throw DimensionError("B1 must have " + std::to_string(a1.rows()) + " rows");
        }
        if (c2.rows() != b1.cols() || c2.cols() != a2.rows()) {
            throw DimensionError("C2 must be " + detail::shape(b1.cols(), a2.rows()));
        }
        if (b2.rows() != a2.rows()) {
            throw DimensionError("B2 must have " + std::to_string(a2.rows()) + " rows");
        }
    }

    [[nodiscard]] Eigen::Index n() const noexcept { return a1.rows(); }
    [[nodiscard]] Eigen::Index m() const noexcept { return a2.rows(); }
};

struct CompensatorGains {
    Matrix k1; // q×n
    Matrix k2; // q×m
    Matrix s;  // n×m
};

// [B, AB, …, A^{n-1}B]
inline Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
    require_square(a, "controllability A");
    if (b.rows() != a.rows()) {
        throw DimensionError("controllability B must have " + std::to_string(a.rows()) + " rows");
    }
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd c(n, n * b.cols());
    Eigen::MatrixXd blk = b.eigen();
    for (Eigen::Index k = 0; k < n; ++k) {
        c.middleCols(k * b.cols(), b.cols()) = blk;
        blk = a.eigen() * blk;
    }
    return Matrix(std::move(c));
}

inline Eigen::Index controllability_rank(const Matrix& a, const Matrix& b) {
    return numerical_rank(controllability_matrix(a, b), 1e-10);
}

inline bool is_controllable(const Matrix& a, const Matrix& b) { return controllability_rank(a, b) == a.rows(); }

// Monic polynomial with the given roots, highest degree first: s^n + c1 s^{n-1} + …
inline std::vector<double> monic_poly_from_roots(std::span<const Complex> roots) {
    std::vector<Complex> c{Complex{1.0, 0.0}};
    for (const auto& r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= r * c[i];
        }
        c = std::move(next);
    }
    std::vector<double> out;
    out.reserve(c.size());
    for (const auto& z : c) {
        out.push_back(z.real());
    }
    return out;
}

/**
 * Single-input pole placement (Ackermann): returns K (1×n) with
 * σ(A + B K) = desired. The sign convention is u = K x.
 */
inline Matrix place_poles_siso(const Matrix& a, const Matrix& b, std::span<const Complex> desired) {
    require_square(a, "pole placement A");
    const Eigen::Index n = a.rows();
    if (b.rows() != n || b.cols() != 1) {
        throw DimensionError("pole placement needs a single input column of length " + std::to_string(n) + ", got " +
                             detail::shape(b.rows(), b.cols()));
    }
    if (static_cast<Eigen::Index>(desired.size()) != n) {
        throw InputError("expected " + std::to_string(n) + " target poles, got " + std::to_string(desired.size()));
    }
    if (!Spectrum{{desired.begin(), desired.end()}}.is_conjugate_closed(1e-12)) {
        throw InputError("target poles are not closed under complex conjugation");
    }
    if (n == 0) {
        return Matrix::zeros(1, 0);
    }
    const Matrix ctrb = controllability_matrix(a, b);
    const Eigen::Index rank = numerical_rank(ctrb, 1e-10);
    if (rank < n) {
        throw DesignError("pair is not controllable (Kalman rank " + std::to_string(rank) + " < " +
                          std::to_string(n) + "); poles cannot be assigned");
    }
    // p(A) by Horner.
    const auto coeffs = monic_poly_from_roots(desired);
    Eigen::MatrixXd pa = Eigen::MatrixXd::Zero(n, n);
    for (double c : coeffs) {
        pa = pa * a.eigen();
        pa.diagonal().array() += c;
    }
    Vector en = Vector::Zero(n);
    en(n - 1) = 1.0;
    const Vector y = solve_linear(ctrb.transpose(), en); // yᵀ = e_nᵀ 𝒞⁻¹
    return Matrix(Eigen::MatrixXd(-(y.transpose() * pa)));
}

inline Matrix place_poles_siso(const Matrix& a, const Matrix& b, std::initializer_list<Complex> desired) {
    return place_poles_siso(a, b, std::span<const Complex>(desired.begin(), desired.size()));
}

enum class DesignStage {
    actuator_stabilization, // (a) find K2 for (A2, B2)
    sylvester_decoupling,   // (b) solve A1 S - S(A2 + B2 K2) = B1 C2
    plant_stabilization,    // (c) find K1 for (A1, S B2)
};

inline const char* stage_label(DesignStage s) {
    switch (s) {
    case DesignStage::actuator_stabilization:
        return "stage (a) actuator stabilization";
    case DesignStage::sylvester_decoupling:
        return "stage (b) Sylvester decoupling";
    case DesignStage::plant_stabilization:
        return "stage (c) plant stabilization";
    }
    return "unknown stage";
}

class StagedDesignError : public DesignError {
public:
    StagedDesignError(DesignStage stage, const std::string& what)
        : DesignError(std::string(stage_label(stage)) + ": " + what), stage_(stage) {}

    [[nodiscard]] DesignStage stage() const noexcept { return stage_; }

private:
    DesignStage stage_;
};

/**
 * Three-stage compensator design.
 *
 * An empty `actuator_poles` keeps K2 = 0, which is only accepted when A2 is
 * already Hurwitz. The resulting controller is u = K2 x2 + K1 x1 + K1 S x2.
 */
inline CompensatorGains design_compensator(const CascadePlant& p, std::span<const Complex> actuator_poles,
                                           std::span<const Complex> plant_poles) {
    if (p.b2.cols() != 1) {
        throw InputError("only single-input actuators are supported (B2 has " + std::to_string(p.b2.cols()) +
                         " columns); supply MIMO gains externally");
    }
    CompensatorGains g;

    // (a)
    if (actuator_poles.empty()) {
        if (!eig(p.a2).is_hurwitz(kHurwitzMargin)) {
            throw StagedDesignError(DesignStage::actuator_stabilization,
                                    "A2 is not Hurwitz and no actuator poles were given");
        }
        g.k2 = Matrix::zeros(1, p.m());
    } else {
        try {
            g.k2 = place_poles_siso(p.a2, p.b2, actuator_poles);
        } catch (const DesignError& e) {
            throw StagedDesignError(DesignStage::actuator_stabilization,
                                    std::string("controllability of (A2, B2) violated: ") + e.what());
        }
    }
    const Matrix a2_closed = p.a2 + p.b2 * g.k2;
    if (!eig(a2_closed).is_hurwitz(kHurwitzMargin)) {
        throw StagedDesignError(DesignStage::actuator_stabilization, "A2 + B2 K2 is not Hurwitz");
    }

    // (b)
    try {
        const SylvesterProblem sp(p.a1, a2_closed, p.b1 * p.c2);
        g.s = solve_direct(sp).s;
    } catch (const SpectrumOverlapError& e) {
        throw StagedDesignError(DesignStage::sylvester_decoupling,
                                std::string("sigma(A1) and sigma(A2 + B2 K2) must be disjoint: ") + e.what());
    }

    // (c)
    const Matrix sb2 = g.s * p.b2;
    try {
        g.k1 = place_poles_siso(p.a1, sb2, plant_poles);
    } catch (const DesignError& e) {
        throw StagedDesignError(DesignStage::plant_stabilization,
                                std::string("controllability of (A1, S B2) violated: ") + e.what());
    }
    if (!eig(p.a1 + sb2 * g.k1).is_hurwitz(kHurwitzMargin)) {
        throw StagedDesignError(DesignStage::plant_stabilization, "A1 + S B2 K1 is not Hurwitz");
    }
    return g;
}

inline CompensatorGains design_compensator(const CascadePlant& p, std::initializer_list<Complex> actuator_poles,
                                           std::initializer_list<Complex> plant_poles) {
    return design_compensator(p, std::span<const Complex>(actuator_poles.begin(), actuator_poles.size()),
                              std::span<const Complex>(plant_poles.begin(), plant_poles.size()));
}

// Closed loop [[A1, B1C2], [B2K1, A2 + B2K2 + B2K1S]].
inline Matrix closed_loop_matrix(const CascadePlant& p, const CompensatorGains& g) {
    return block_matrix(p.a1, p.b1 * p.c2, p.b2 * g.k1, p.a2 + p.b2 * g.k2 + p.b2 * g.k1 * g.s);
}

// Block-triangular form [[A1 + SB2K1, 0], [B2K1, A2 + B2K2]] similar to the closed loop.
inline Matrix decoupled_matrix(const CascadePlant& p, const CompensatorGains& g) {
    return block_matrix(p.a1 + g.s * p.b2 * g.k1, Matrix::zeros(p.n(), p.m()), p.b2 * g.k1, p.a2 + p.b2 * g.k2);
}

// [[I, S], [0, I]]
inline Matrix decoupling_transform(const Matrix& s) {
    return block_matrix(Matrix::identity(s.rows()), s, Matrix::zeros(s.cols(), s.rows()), Matrix::identity(s.cols()));
}

// ‖𝕊 𝒜₁ 𝕊⁻¹ − 𝒜₂‖ (Frobenius); 𝕊⁻¹ = [[I, −S], [0, I]] exactly.
inline double similarity_residual(const CascadePlant& p, const CompensatorGains& g) {
    const Matrix t = decoupling_transform(g.s);
    const Matrix t_inv = decoupling_transform(-g.s);
    return (t * closed_loop_matrix(p, g) * t_inv - decoupled_matrix(p, g)).norm();
}

inline std::vector<Check> verify_design(const CascadePlant& p, const CompensatorGains& g) {
    std::vector<Check> out;
    const Spectrum act = eig(p.a2 + p.b2 * g.k2);
    const Spectrum plant = eig(p.a1 + g.s * p.b2 * g.k1);
    const Spectrum closed = eig(closed_loop_matrix(p, g));
    out.push_back(check_at_most("max Re sigma(A2 + B2 K2)", act.max_real(), -kHurwitzMargin));
    out.push_back(check_at_most("max Re sigma(A1 + S B2 K1)", plant.max_real(), -kHurwitzMargin));
    const SylvesterProblem sp(p.a1, p.a2 + p.b2 * g.k2, p.b1 * p.c2);
    out.push_back(check_at_most("Sylvester scaled residual", scaled_residual(sp, g.s), 1e-9));
    const double scale = std::max(1.0, closed_loop_matrix(p, g).norm());
    out.push_back(check_at_most("similarity residual (relative)", similarity_residual(p, g) / scale, 1e-9));
    out.push_back(check_at_most("closed-loop spectrum = union of block spectra", spectrum_distance(closed, plant + act),
                                1e-6 * std::max(1.0, closed_loop_matrix(p, g).norm())));
    out.push_back(check_at_most("max Re sigma(closed loop)", closed.max_real(), -kHurwitzMargin));
    return out;
}

/**
 * Fixed-step RK4 march of the closed loop from the stacked state x0 = (x1, x2).
 * Samples every `stride` steps plus the final step.
 */
inline SimResult simulate_cascade(const CascadePlant& p, const CompensatorGains& g, const Vector& x0, double horizon,
                                  double dt, long stride = 1) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigurationError("time step must be positive");
    }
    if (!(horizon >= 0.0)) {
        throw ConfigurationError("horizon must be nonnegative");
    }
    if (x0.size() != p.n() + p.m()) {
        throw DimensionError("initial state must have length " + std::to_string(p.n() + p.m()));
    }
    stride = std::max<long>(stride, 1);
    const Eigen::MatrixXd a = closed_loop_matrix(p, g).eigen();
    const Eigen::MatrixXd k_x1 = g.k1.eigen();
    const Eigen::MatrixXd k_x2 = g.k2.eigen() + g.k1.eigen() * g.s.eigen();
    const Eigen::Index n = p.n();
    const Eigen::Index m = p.m();

    SimResult r;
    auto record = [&](double t, const Vector& x) {
        r.times.push_back(t);
        r.x1.push_back(x.head(n));
        r.x2.push_back(x.tail(m));
        r.u.push_back(m > 0 ? (k_x1 * x.head(n) + k_x2 * x.tail(m))(0) : 0.0);
        r.energy.push_back(x.squaredNorm());
    };

    const long steps = step_count(horizon, dt);
    Vector x = x0;
    record(0.0, x);
    auto rhs = [&a](double, const Vector& v) -> Vector { return a * v; };
    for (long k = 1; k <= steps; ++k) {
        x = rk4_step(rhs, (k - 1) * dt, x, dt);
        if (!x.allFinite()) {
            throw DivergenceError("cascade simulation diverged", k, k * dt);
        }
        if (k % stride == 0 || k == steps) {
            record(k * dt, x);
        }
    }
    return r;
}

} // namespace cascadecomp
