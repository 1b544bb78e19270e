#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cascade_fd.hpp"
#include "check.hpp"
#include "matops.hpp"
#include "quadrature.hpp"

namespace cascadecomp {

// λ_n = (n - 1/2)² π², eigenvalues of -d²/dx² with f(0) = f'(1) = 0.
inline double heat_eigenvalue(int n) {
    const double k = (static_cast<double>(n) - 0.5) * std::numbers::pi;
    return k * k;
}

// φ_n(x) = √2 sin(√λ_n x), orthonormal in L²[0, 1].
inline double heat_mode(int n, double x) {
    return std::numbers::sqrt2 * std::sin((static_cast<double>(n) - 0.5) * std::numbers::pi * x);
}

// Smallest N ≥ 0 with μ − λ_n < 0 for every n > N.
inline int select_n(double mu) {
    if (!std::isfinite(mu)) {
        throw InputError("reaction coefficient must be finite");
    }
    int n = 0;
    while (heat_eigenvalue(n + 1) <= mu) {
        ++n;
    }
    return n;
}

inline constexpr double kHeatSeparationGap = 1e-6;

/**
 * Unstable heat equation driven at x = 1 by an m-dimensional actuator:
 *   w_t = w_xx + μ w,  w(0,t) = 0,  w_x(1,t) = C2 x2(t)
 *   x2' = A2 x2 + B2 u
 */
class HeatOdePlant {
public:
    HeatOdePlant(double mu, Matrix a2, Matrix b2, Matrix c2)
        : mu_(mu), a2_(std::move(a2)), b2_(std::move(b2)), c2_(std::move(c2)) {
        if (!(mu_ >= 0.0) || !std::isfinite(mu_)) {
            throw InputError("reaction coefficient mu must be finite and nonnegative");
        }
        require_square(a2_, "A2");
        const Eigen::Index m = a2_.rows();
        if (b2_.rows() != m || b2_.cols() != 1) {
            throw DimensionError("B2 must be " + detail::shape(m, 1));
        }
        if (c2_.rows() != 1 || c2_.cols() != m) {
            throw DimensionError("C2 must be " + detail::shape(1, m));
        }
        const Spectrum s = eig(a2_);
        if (!s.is_hurwitz(1e-8)) {
            throw DesignError("A2 must be Hurwitz (max Re " + detail::fmt_g(s.max_real()) + ")");
        }
        separation_ = std::numeric_limits<double>::infinity();
        for (const auto& nu : s.eigenvalues) {
            for (int n = 1;; ++n) {
                const double mode = mu_ - heat_eigenvalue(n);
                separation_ = std::min(separation_, std::abs(nu - mode));
                if (mode < nu.real() - std::abs(nu) - 1.0) {
                    break;
                }
            }
        }
        if (separation_ < kHeatSeparationGap) {
            throw DesignError("spectrum-separation hypothesis sigma(A1) ∩ sigma(A2) = ∅ violated: an eigenvalue of A2 "
                              "lies within " +
                              detail::fmt_g(separation_) + " of a heat mode mu - (n - 1/2)^2 pi^2, so cosh G is singular");
        }
    }

    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] const Matrix& a2() const noexcept { return a2_; }
    [[nodiscard]] const Matrix& b2() const noexcept { return b2_; }
    [[nodiscard]] const Matrix& c2() const noexcept { return c2_; }
    [[nodiscard]] Eigen::Index m() const noexcept { return a2_.rows(); }
    [[nodiscard]] double separation() const noexcept { return separation_; }

private:
    double mu_;
    Matrix a2_;
    Matrix b2_;
    Matrix c2_;
    double separation_ = 0.0;
};

/**
 * Ψ(x) = −x · (sinh(xG)/(xG)) · cosh(G)⁻¹ C2ᵀ with G² = A2ᵀ − μ.
 *
 * Both matrix functions are even in G and are evaluated from M = G² directly,
 * so complex square roots never appear. Ψ solves Ψ'' = M Ψ, Ψ(0) = 0,
 * Ψ'(1) = −C2ᵀ.
 */
class PsiKernel {
public:
    explicit PsiKernel(const HeatOdePlant& p)
        : m_(p.a2().transpose() - p.mu() * Matrix::identity(p.m())) {
        try {
            inv_cosh_c_ = solve_linear(cosh_sqrt(m_), p.c2().transpose()).col_vector(0);
        } catch (const SingularityError& e) {
            throw DesignError(std::string("cosh G is not invertible (spectrum-separation hypothesis "
                                          "sigma(A1) ∩ sigma(A2) = ∅ violated): ") +
                              e.what());
        }
    }

    [[nodiscard]] Vector operator()(double x) const {
        if (x == 0.0) {
            return Vector::Zero(m_.rows());
        }
        return -x * (sinhc_sqrt(x * x * m_) * inv_cosh_c_);
    }

    [[nodiscard]] const Matrix& m_matrix() const noexcept { return m_; }
    [[nodiscard]] const Vector& inv_cosh_c() const noexcept { return inv_cosh_c_; }

private:
    Matrix m_;
    Vector inv_cosh_c_;
};

inline Vector psi_eval(const PsiKernel& k, double x) { return k(x); }

// b(x) = ⟨Ψ(x), B2⟩, the distributed input shape S B2.
inline double input_shape_b(const HeatOdePlant& p, const PsiKernel& k, double x) {
    return k(x).dot(p.b2().col_vector(0));
}

enum class ModalRule {
    adaptive,      // adaptive Gauss-Kronrod, relative tolerance 1e-8
    right_riemann, // Σ_{j≥1} f(j dx) dx on a uniform grid
};

struct ModalQuadrature {
    ModalRule rule = ModalRule::adaptive;
    double dx = 1e-2;

    static ModalQuadrature adaptive() { return {}; }
    static ModalQuadrature right_riemann(double dx) { return {ModalRule::right_riemann, dx}; }
};

// b_n = ∫_0^1 b(x) φ_n(x) dx
template<typename F>
double modal_coeff(F&& b, int n, ModalQuadrature q = {}) {
    if (n < 1) {
        throw InputError("mode index must be >= 1");
    }
    auto integrand = [&](double x) { return b(x) * heat_mode(n, x); };
    if (q.rule == ModalRule::adaptive) {
        return integrate_adaptive(integrand, 0.0, 1.0, 1e-8);
    }
    const long cells = std::lround(1.0 / q.dx);
    if (cells < 1 || std::abs(static_cast<double>(cells) * q.dx - 1.0) > 1e-9) {
        throw InputError("grid step must divide [0, 1] evenly");
    }
    const double h = 1.0 / static_cast<double>(cells);
    double acc = 0.0;
    for (long j = 1; j <= cells; ++j) {
        acc += integrand(static_cast<double>(j) * h);
    }
    return acc * h;
}

struct ModalGains {
    int n_modes = 0;
    std::vector<double> lambda_n; // μ − λ_n, n = 1..N (the diagonal of Λ_N)
    std::vector<double> b_n;      // B_N
    std::vector<double> l;        // L_N

    // Σ l_k φ_k(x), the kernel of K_N.
    [[nodiscard]] double gain_shape(double x) const {
        double acc = 0.0;
        for (int k = 0; k < n_modes; ++k) {
            acc += l[static_cast<std::size_t>(k)] * heat_mode(k + 1, x);
        }
        return acc;
    }

    [[nodiscard]] Matrix lambda_matrix() const { return Matrix::diagonal(lambda_n); }
    [[nodiscard]] Matrix b_matrix() const {
        return Matrix::from_row_major(n_modes, 1, b_n);
    }
    [[nodiscard]] Matrix l_matrix() const { return Matrix::from_row_major(1, n_modes, l); }
    [[nodiscard]] Matrix closed_modal_matrix() const {
        return n_modes == 0 ? Matrix() : lambda_matrix() + b_matrix() * l_matrix();
    }
};

inline constexpr double kUncontrollableModeTol = 1e-10;

/**
 * Modal truncation design: keep the N unstable heat modes, project the input
 * shape b = ⟨Ψ, B2⟩ onto them, and place σ(Λ_N + B_N L_N) at `desired`.
 * With N = 0 the gains are empty and the controller is identically zero.
 */
inline ModalGains design_heat_compensator(const HeatOdePlant& p, const PsiKernel& k, std::span<const Complex> desired,
                                          ModalQuadrature q = {}) {
    ModalGains g;
    g.n_modes = select_n(p.mu());
    const auto n = static_cast<std::size_t>(g.n_modes);
    if (desired.size() != n) {
        throw InputError("expected " + std::to_string(n) + " target poles for the unstable heat modes, got " +
                         std::to_string(desired.size()));
    }
    const auto b = [&](double x) { return input_shape_b(p, k, x); };
    for (int i = 1; i <= g.n_modes; ++i) {
        g.lambda_n.push_back(p.mu() - heat_eigenvalue(i));
        const double bn = modal_coeff(b, i, q);
        if (std::abs(bn) < kUncontrollableModeTol) {
            throw DesignError("heat mode " + std::to_string(i) + " is uncontrollable (b_" + std::to_string(i) + " = " +
                              detail::fmt_g(bn) + "); approximate controllability requires b_n != 0 for n <= N");
        }
        g.b_n.push_back(bn);
    }
    if (n == 0) {
        return g;
    }
    const Matrix kn = place_poles_siso(g.lambda_matrix(), g.b_matrix(), desired);
    g.l = kn.entries();
    return g;
}

inline ModalGains design_heat_compensator(const HeatOdePlant& p, const PsiKernel& k, std::initializer_list<Complex> desired,
                                          ModalQuadrature q = {}) {
    return design_heat_compensator(p, k, std::span<const Complex>(desired.begin(), desired.size()), q);
}

// Samples of a function on the uniform grid x_j = j·dx of [0, 1].
struct GridFunction {
    double dx = 1e-2;
    std::vector<double> values;

    template<typename F>
    static GridFunction sample(F&& f, double dx) {
        const long cells = std::lround(1.0 / dx);
        if (cells < 1 || std::abs(static_cast<double>(cells) * dx - 1.0) > 1e-9) {
            throw ConfigurationError("grid step must divide [0, 1] evenly");
        }
        GridFunction g{1.0 / static_cast<double>(cells), {}};
        g.values.reserve(static_cast<std::size_t>(cells) + 1);
        for (long j = 0; j <= cells; ++j) {
            g.values.push_back(f(static_cast<double>(j) * g.dx));
        }
        return g;
    }

    [[nodiscard]] std::size_t cells() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    [[nodiscard]] double node(std::size_t j) const noexcept { return static_cast<double>(j) * dx; }
};

/**
 * The feedback u = K_N[⟨Ψ, x2⟩ + w] with every grid-dependent piece
 * precomputed, so one evaluation is O(grid) and the x2 part is O(m).
 */
class HeatFeedback {
public:
    HeatFeedback(const PsiKernel& k, const ModalGains& g, double dx) {
        const GridFunction shape = GridFunction::sample([&](double x) { return g.gain_shape(x); }, dx);
        const auto weights = simpson_weights(shape.cells(), shape.dx);
        dx_ = shape.dx;
        w_coeff_.resize(shape.values.size());
        x2_coeff_ = Vector::Zero(k.m_matrix().rows());
        for (std::size_t j = 0; j < shape.values.size(); ++j) {
            w_coeff_[j] = weights[j] * shape.values[j];
            if (w_coeff_[j] != 0.0) {
                x2_coeff_ += w_coeff_[j] * k(shape.node(j));
            }
        }
    }

    [[nodiscard]] double w_part(std::span<const double> w) const {
        if (w.size() != w_coeff_.size()) {
            throw DimensionError("grid function has " + std::to_string(w.size()) + " samples, feedback expects " +
                                 std::to_string(w_coeff_.size()));
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            acc += w_coeff_[j] * w[j];
        }
        return acc;
    }

    [[nodiscard]] double x2_part(const Vector& x2) const { return x2_coeff_.dot(x2); }

    [[nodiscard]] double operator()(std::span<const double> w, const Vector& x2) const { return w_part(w) + x2_part(x2); }

    [[nodiscard]] const Vector& x2_coefficients() const noexcept { return x2_coeff_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }

private:
    double dx_ = 0.0;
    std::vector<double> w_coeff_;
    Vector x2_coeff_;
};

// K_N f = ∫_0^1 f(x) Σ l_k φ_k(x) dx, Simpson on the sample grid.
inline double kn_apply(const ModalGains& g, const GridFunction& f) {
    std::vector<double> prod(f.values.size());
    for (std::size_t j = 0; j < prod.size(); ++j) {
        prod[j] = f.values[j] * g.gain_shape(f.node(j));
    }
    return simpson(prod, f.dx);
}

inline double heat_controller(const HeatOdePlant& p, const PsiKernel& k, const ModalGains& g, const GridFunction& w,
                              const Vector& x2) {
    if (x2.size() != p.m()) {
        throw DimensionError("actuator state must have length " + std::to_string(p.m()));
    }
    return HeatFeedback(k, g, w.dx)(w.values, x2);
}

/**
 * Spectrum of the M-mode Galerkin matrix of A1 + S B2 K_N:
 * diag(μ − λ_n) + b lᵀ with l padded by zeros beyond N. The first N entries
 * of b are the design's B_N; the rest come from the quadrature rule q.
 */
inline Matrix galerkin_matrix(const HeatOdePlant& p, const PsiKernel& k, const ModalGains& g, int modes,
                              ModalQuadrature q = {}) {
    if (modes <= g.n_modes) {
        throw InputError("Galerkin truncation must exceed the number of controlled modes");
    }
    const auto b = [&](double x) { return input_shape_b(p, k, x); };
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(modes, modes);
    Vector bv(modes);
    for (int n = 1; n <= modes; ++n) {
        a(n - 1, n - 1) = p.mu() - heat_eigenvalue(n);
        bv(n - 1) = n <= g.n_modes ? g.b_n[static_cast<std::size_t>(n - 1)] : modal_coeff(b, n, q);
    }
    for (int j = 0; j < g.n_modes; ++j) {
        a.col(j) += bv * g.l[static_cast<std::size_t>(j)];
    }
    return Matrix(std::move(a));
}

inline Spectrum galerkin_spectrum(const HeatOdePlant& p, const PsiKernel& k, const ModalGains& g, int modes,
                                  ModalQuadrature q = {}) {
    return eig(galerkin_matrix(p, k, g, modes, q));
}

/**
 * Weak form of A1 S − S A2 = B1 C2 tested against φ_n:
 *   (μ − λ_n) ψ_n − A2ᵀ ψ_n − C2ᵀ φ_n(1),   ψ_n = ∫ Ψ φ_n.
 * Returns the Euclidean norm of that residual.
 */
inline double weak_sylvester_residual(const HeatOdePlant& p, const PsiKernel& k, int n) {
    Vector psi_n(p.m());
    for (Eigen::Index i = 0; i < p.m(); ++i) {
        psi_n(i) = modal_coeff([&](double x) { return k(x)(i); }, n);
    }
    const Vector r = (p.mu() - heat_eigenvalue(n)) * psi_n - p.a2().transpose() * psi_n -
                     p.c2().transpose().col_vector(0) * heat_mode(n, 1.0);
    return r.norm();
}

inline std::vector<Check> verify_heat_design(const HeatOdePlant& p, const PsiKernel& k, const ModalGains& g,
                                             std::span<const Complex> desired, int galerkin_modes = 60) {
    std::vector<Check> out;
    out.push_back(check_at_most("|Psi(0)|", k(0.0).norm(), 0.0));
    const double h = 1e-5;
    const Vector dpsi = (k(1.0 + h) - k(1.0 - h)) / (2.0 * h);
    out.push_back(check_at_most("|Psi'(1) + C2^T| (central difference)",
                                (dpsi + p.c2().transpose().col_vector(0)).norm(), 1e-6));
    const int probe = std::max(g.n_modes, 6);
    double weak = 0.0;
    for (int n = 1; n <= probe; ++n) {
        weak = std::max(weak, weak_sylvester_residual(p, k, n));
    }
    out.push_back(check_at_most("weak-form Sylvester residual, modes 1.." + std::to_string(probe), weak, 1e-6));
    double lambda_err = 0.0;
    for (int n = 1; n <= g.n_modes; ++n) {
        lambda_err = std::max(lambda_err, std::abs(g.lambda_n[static_cast<std::size_t>(n - 1)] -
                                                   (p.mu() - heat_eigenvalue(n))));
    }
    out.push_back(check_at_most("Lambda_N = mu - (n - 1/2)^2 pi^2", lambda_err, 0.0));
    if (g.n_modes > 0) {
        out.push_back(check_at_most("sigma(Lambda_N + B_N L_N) = requested poles",
                                    spectrum_distance(eig(g.closed_modal_matrix()), Spectrum{{desired.begin(), desired.end()}}),
                                    1e-6));
    }
    const Spectrum gs = galerkin_spectrum(p, k, g, galerkin_modes);
    out.push_back(check_at_most("max Re Galerkin spectrum (" + std::to_string(galerkin_modes) + " modes)", gs.max_real(),
                                -1e-8));
    out.push_back(check_at_most("max Re sigma(A2)", eig(p.a2()).max_real(), -1e-8));
    return out;
}

} // namespace cascadecomp
