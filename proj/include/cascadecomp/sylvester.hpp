#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "matops.hpp"

namespace cascadecomp {

inline constexpr double kSpectrumGapTol = 1e-8;

/**
 * The equation A1 S - S A2 = Q with A1 n×n, A2 m×m, Q n×m.
 *
 * Construction validates the shapes and refuses problems whose spectra come
 * closer than the gap tolerance; the solution would not be unique (or would
 * be numerically meaningless).
 */
class SylvesterProblem {
public:
    SylvesterProblem(Matrix a1, Matrix a2, Matrix q, double gap_tol = kSpectrumGapTol)
        : a1_(std::move(a1)), a2_(std::move(a2)), q_(std::move(q)) {
        require_square(a1_, "Sylvester A1");
        require_square(a2_, "Sylvester A2");
        if (q_.rows() != a1_.rows() || q_.cols() != a2_.rows()) {
            throw DimensionError("Sylvester right-hand side is " + detail::shape(q_.rows(), q_.cols()) + ", expected " +
                                 detail::shape(a1_.rows(), a2_.rows()));
        }
        sigma1_ = eig(a1_);
        sigma2_ = eig(a2_);
        gap_ = spectral_gap(sigma1_, sigma2_);
        if (gap_ < gap_tol) {
            throw SpectrumOverlapError("spectrum separation violated: sigma(A1) and sigma(A2) are " +
                                           detail::fmt_g(gap_) + " apart (need >= " + detail::fmt_g(gap_tol) +
                                           "); the Sylvester equation has no unique solution",
                                       gap_);
        }
    }

    [[nodiscard]] const Matrix& a1() const noexcept { return a1_; }
    [[nodiscard]] const Matrix& a2() const noexcept { return a2_; }
    [[nodiscard]] const Matrix& q() const noexcept { return q_; }
    [[nodiscard]] const Spectrum& spectrum_a1() const noexcept { return sigma1_; }
    [[nodiscard]] const Spectrum& spectrum_a2() const noexcept { return sigma2_; }
    [[nodiscard]] double gap() const noexcept { return gap_; }

private:
    Matrix a1_;
    Matrix a2_;
    Matrix q_;
    Spectrum sigma1_;
    Spectrum sigma2_;
    double gap_ = 0.0;
};

// Frobenius norm of A1 S - S A2 - Q.
inline double residual(const SylvesterProblem& p, const Matrix& s) {
    if (s.rows() != p.a1().rows() || s.cols() != p.a2().rows()) {
        throw DimensionError("Sylvester candidate is " + detail::shape(s.rows(), s.cols()));
    }
    return (p.a1().eigen() * s.eigen() - s.eigen() * p.a2().eigen() - p.q().eigen()).norm();
}

// Residual normalised by (‖A1‖ + ‖A2‖)·‖S‖; zero for the trivial solution.
inline double scaled_residual(const SylvesterProblem& p, const Matrix& s) {
    const double r = residual(p, s);
    const double scale = (p.a1().norm() + p.a2().norm()) * s.norm();
    return scale > 0.0 ? r / scale : r;
}

struct SylvesterSolution {
    Matrix s;
    double residual = 0.0;
    std::vector<std::string> warnings;
};

/**
 * Kronecker-vectorised solve: (I ⊗ A1 - A2ᵀ ⊗ I) vec(S) = vec(Q).
 * Problem sizes here are tiny, so the dense mn×mn system is fine.
 */
inline SylvesterSolution solve_direct(const SylvesterProblem& p) {
    const Eigen::Index n = p.a1().rows();
    const Eigen::Index m = p.a2().rows();
    const auto& a1 = p.a1().eigen();
    const auto& a2 = p.a2().eigen();
    const Eigen::Index nm = n * m;

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nm, nm);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = j * n + i;
            for (Eigen::Index c = 0; c < n; ++c) {
                k(row, j * n + c) += a1(i, c);
            }
            for (Eigen::Index l = 0; l < m; ++l) {
                k(row, l * n + i) -= a2(l, j);
            }
        }
    }
    Vector rhs(nm);
    for (Eigen::Index j = 0; j < m; ++j) {
        rhs.segment(j * n, n) = p.q().eigen().col(j);
    }

    SylvesterSolution out;
    if (nm == 0) {
        out.s = Matrix::zeros(n, m);
        return out;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) {
        throw SingularityError("Kronecker system of the Sylvester equation is singular (rcond " + detail::fmt_g(rc) +
                                   ")",
                               rc);
    }
    if (rc < 1e-8) {
        out.warnings.push_back("ill-conditioned spectrum separation (Kronecker rcond " + detail::fmt_g(rc) + ")");
    }
    const Vector vec_s = lu.solve(rhs);
    Eigen::MatrixXd s(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        s.col(j) = vec_s.segment(j * n, n);
    }
    out.s = Matrix(std::move(s));
    out.residual = residual(p, out.s);
    return out;
}

// Positively oriented circle used for the resolvent integral.
struct Contour {
    Complex center{0.0, 0.0};
    double radius = 1.0;
    int nodes = 64;
};

inline constexpr double kContourMargin = 1e-6;
inline constexpr int kContourNodeCap = 4096;

inline void validate_contour(const SylvesterProblem& p, const Contour& c) {
    if (!(c.radius > 0.0) || !std::isfinite(c.radius)) {
        throw ContourError("contour radius must be positive");
    }
    if (c.nodes < 8) {
        throw ContourError("contour needs at least 8 nodes, got " + std::to_string(c.nodes));
    }
    for (const auto& z : p.spectrum_a1().eigenvalues) {
        if (c.radius - std::abs(z - c.center) < kContourMargin) {
            throw ContourError("contour does not enclose eigenvalue (" + detail::fmt_g(z.real()) + ", " +
                               detail::fmt_g(z.imag()) + ") of A1");
        }
    }
    for (const auto& z : p.spectrum_a2().eigenvalues) {
        if (std::abs(z - c.center) - c.radius < kContourMargin) {
            throw ContourError("contour is not separated from eigenvalue (" + detail::fmt_g(z.real()) + ", " +
                               detail::fmt_g(z.imag()) + ") of A2");
        }
    }
}

/**
 * Circle centred at the mean of σ(A1) with radius 1.5× the spread of σ(A1).
 * When that would swallow an eigenvalue of A2 the radius falls back to the
 * midpoint between the spread and the nearest A2 eigenvalue.
 */
inline Contour default_contour(const SylvesterProblem& p) {
    const auto& s1 = p.spectrum_a1().eigenvalues;
    Contour c;
    if (s1.empty()) {
        return c;
    }
    Complex centre{0.0, 0.0};
    for (const auto& z : s1) {
        centre += z;
    }
    centre /= static_cast<double>(s1.size());
    centre = {centre.real(), 0.0};
    double spread = 0.0;
    for (const auto& z : s1) {
        spread = std::max(spread, std::abs(z - centre));
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& z : p.spectrum_a2().eigenvalues) {
        nearest = std::min(nearest, std::abs(z - centre));
    }
    double radius = spread > 0.0 ? 1.5 * spread : std::min(1.0, 0.5 * nearest);
    if (radius >= nearest - kContourMargin) {
        if (spread + 2.0 * kContourMargin >= nearest) {
            throw ContourError("no circle centred at the mean of sigma(A1) separates the two spectra");
        }
        radius = 0.5 * (spread + nearest);
    }
    c.center = centre;
    c.radius = radius;
    return c;
}

struct ContourSolution {
    Matrix s;
    int nodes_used = 0;
    double last_change = 0.0;
};

/**
 * S = (1/2πi) ∮ (A1 - λ)⁻¹ Q (A2 - λ)⁻¹ dλ by the trapezoidal rule on the
 * circle. The node count doubles (reusing the previous nodes) until two
 * successive answers differ by less than 1e-10 relative.
 */
inline ContourSolution solve_contour(const SylvesterProblem& p, const Contour& c, int node_cap = kContourNodeCap) {
    validate_contour(p, c);
    const Eigen::Index n = p.a1().rows();
    const Eigen::Index m = p.a2().rows();
    const Eigen::MatrixXcd a1 = p.a1().eigen().cast<Complex>();
    const Eigen::MatrixXcd a2 = p.a2().eigen().cast<Complex>();
    const Eigen::MatrixXcd q = p.q().eigen().cast<Complex>();
    const Eigen::MatrixXcd id1 = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd id2 = Eigen::MatrixXcd::Identity(m, m);

    // Sum of r e^{iθ} (A1-λ)⁻¹ Q (A2-λ)⁻¹ over nodes θ_k = (k + offset)·2π/count.
    auto node_sum = [&](int count, double offset) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, m);
        for (int k = 0; k < count; ++k) {
            const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + offset) / count;
            const Complex e = std::polar(1.0, theta);
            const Complex lambda = c.center + c.radius * e;
            const Eigen::MatrixXcd left = (a1 - lambda * id1).partialPivLu().solve(q);
            const Eigen::MatrixXcd full = (a2 - lambda * id2).transpose().partialPivLu().solve(left.transpose()).transpose();
            acc += (c.radius * e) * full;
        }
        return acc;
    };

    int count = c.nodes;
    Eigen::MatrixXcd sum = node_sum(count, 0.0);
    Eigen::MatrixXd current = (sum / static_cast<double>(count)).real();
    while (2 * count <= node_cap) {
        sum += node_sum(count, 0.5);
        count *= 2;
        Eigen::MatrixXd next = (sum / static_cast<double>(count)).real();
        const double change = (next - current).norm();
        current = std::move(next);
        if (change < 1e-10 * std::max(1.0, current.norm())) {
            return {Matrix(current), count, change};
        }
    }
    throw NumericalError("contour quadrature did not converge within " + std::to_string(node_cap) + " nodes");
}

inline ContourSolution solve_contour(const SylvesterProblem& p) { return solve_contour(p, default_contour(p)); }

} // namespace cascadecomp
