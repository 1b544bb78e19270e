#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace cascadecomp {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;

namespace detail {

inline std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace detail

/**
 * Dense real matrix with value semantics.
 *
 * Every construction path checks that all entries are finite, so a Matrix in
 * hand never carries NaN/Inf. Entries are immutable after construction; build
 * the data in an Eigen::MatrixXd and wrap it.
 */
class Matrix {
public:
    Matrix() = default;

    Matrix(Eigen::Index rows, Eigen::Index cols) : m_(Eigen::MatrixXd::Zero(rows, cols)) {}

    explicit Matrix(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (!m_.allFinite()) {
            throw InputError("matrix has non-finite entries");
        }
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        const auto r = static_cast<Eigen::Index>(rows.size());
        const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
        m_.resize(r, c);
        Eigen::Index i = 0;
        for (const auto& row : rows) {
            if (static_cast<Eigen::Index>(row.size()) != c) {
                throw DimensionError("ragged matrix literal");
            }
            Eigen::Index j = 0;
            for (double v : row) {
                m_(i, j++) = v;
            }
            ++i;
        }
        if (!m_.allFinite()) {
            throw InputError("matrix has non-finite entries");
        }
    }

    static Matrix from_row_major(Eigen::Index rows, Eigen::Index cols, std::span<const double> entries) {
        if (static_cast<Eigen::Index>(entries.size()) != rows * cols) {
            throw DimensionError("entry count " + std::to_string(entries.size()) + " does not match shape " +
                                 detail::shape(rows, cols));
        }
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                m(i, j) = entries[static_cast<std::size_t>(i * cols + j)];
            }
        }
        return Matrix(std::move(m));
    }

    static Matrix identity(Eigen::Index n) { return Matrix(Eigen::MatrixXd::Identity(n, n)); }
    static Matrix zeros(Eigen::Index rows, Eigen::Index cols) { return Matrix(rows, cols); }

    static Matrix diagonal(std::span<const double> d) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
        }
        return Matrix(std::move(m));
    }
    static Matrix diagonal(std::initializer_list<double> d) { return diagonal(std::span<const double>(d.begin(), d.size())); }

    static Matrix column(const Vector& v) { return Matrix(Eigen::MatrixXd(v)); }
    static Matrix row(const Vector& v) { return Matrix(Eigen::MatrixXd(v.transpose())); }

    [[nodiscard]] Eigen::Index rows() const noexcept { return m_.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return m_.cols(); }
    [[nodiscard]] bool is_square() const noexcept { return m_.rows() == m_.cols(); }
    [[nodiscard]] bool empty() const noexcept { return m_.size() == 0; }

    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    [[nodiscard]] const Eigen::MatrixXd& eigen() const noexcept { return m_; }

    [[nodiscard]] std::vector<double> entries() const {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(m_.size()));
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            for (Eigen::Index j = 0; j < m_.cols(); ++j) {
                out.push_back(m_(i, j));
            }
        }
        return out;
    }

    [[nodiscard]] Matrix transpose() const { return Matrix(Eigen::MatrixXd(m_.transpose())); }

    // Frobenius norm.
    [[nodiscard]] double norm() const { return m_.norm(); }

    // Induced 1-norm (max absolute column sum).
    [[nodiscard]] double norm1() const {
        return m_.size() == 0 ? 0.0 : m_.cwiseAbs().colwise().sum().maxCoeff();
    }

    [[nodiscard]] Matrix block(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const {
        return Matrix(Eigen::MatrixXd(m_.block(r0, c0, nr, nc)));
    }

    [[nodiscard]] Vector col_vector(Eigen::Index j) const { return m_.col(j); }
    [[nodiscard]] Vector row_vector(Eigen::Index i) const { return m_.row(i).transpose(); }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        check_same_shape(a, b, "+");
        return Matrix(Eigen::MatrixXd(a.m_ + b.m_));
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        check_same_shape(a, b, "-");
        return Matrix(Eigen::MatrixXd(a.m_ - b.m_));
    }
    friend Matrix operator-(const Matrix& a) { return Matrix(Eigen::MatrixXd(-a.m_)); }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols() != b.rows()) {
            throw DimensionError("cannot multiply " + detail::shape(a.rows(), a.cols()) + " by " +
                                 detail::shape(b.rows(), b.cols()));
        }
        return Matrix(Eigen::MatrixXd(a.m_ * b.m_));
    }
    friend Vector operator*(const Matrix& a, const Vector& v) {
        if (a.cols() != v.size()) {
            throw DimensionError("cannot multiply " + detail::shape(a.rows(), a.cols()) + " by vector of length " +
                                 std::to_string(v.size()));
        }
        return a.m_ * v;
    }
    friend Matrix operator*(double s, const Matrix& a) { return Matrix(Eigen::MatrixXd(s * a.m_)); }
    friend Matrix operator*(const Matrix& a, double s) { return s * a; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a.m_ == b.m_;
    }

private:
    static void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
        if (a.rows() != b.rows() || a.cols() != b.cols()) {
            throw DimensionError(std::string("shape mismatch in '") + op + "': " + detail::shape(a.rows(), a.cols()) +
                                 " vs " + detail::shape(b.rows(), b.cols()));
        }
    }

    Eigen::MatrixXd m_;
};

inline void require_square(const Matrix& a, const char* name) {
    if (!a.is_square()) {
        throw DimensionError(std::string(name) + " must be square, got " + detail::shape(a.rows(), a.cols()));
    }
}

// [[A, B], [C, D]] from four compatible blocks.
inline Matrix block_matrix(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
    if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols()) {
        throw DimensionError("incompatible blocks in 2x2 block matrix");
    }
    Eigen::MatrixXd m(a.rows() + c.rows(), a.cols() + b.cols());
    m << a.eigen(), b.eigen(), c.eigen(), d.eigen();
    return Matrix(std::move(m));
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
    return block_matrix(a, Matrix::zeros(a.rows(), b.cols()), Matrix::zeros(b.rows(), a.cols()), b);
}

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols()) {
        throw DimensionError("vstack column mismatch");
    }
    Eigen::MatrixXd m(top.rows() + bottom.rows(), top.cols());
    m << top.eigen(), bottom.eigen();
    return Matrix(std::move(m));
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

struct Spectrum {
    std::vector<Complex> eigenvalues;

    [[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }

    [[nodiscard]] double max_real() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& z : eigenvalues) {
            m = std::max(m, z.real());
        }
        return m;
    }

    [[nodiscard]] bool is_hurwitz(double margin = 1e-8) const { return eigenvalues.empty() || max_real() < -margin; }

    [[nodiscard]] bool is_conjugate_closed(double tol = 1e-8) const {
        std::vector<bool> used(eigenvalues.size(), false);
        for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
            if (used[i]) {
                continue;
            }
            const Complex z = eigenvalues[i];
            const double scale = std::max(1.0, std::abs(z));
            if (std::abs(z.imag()) <= tol * scale) {
                used[i] = true;
                continue;
            }
            bool found = false;
            for (std::size_t j = i + 1; j < eigenvalues.size(); ++j) {
                if (!used[j] && std::abs(eigenvalues[j] - std::conj(z)) <= tol * scale) {
                    used[i] = used[j] = true;
                    found = true;
                    break;
                }
            }
            if (!found) {
                return false;
            }
        }
        return true;
    }

    // Sorted by real part, then imaginary part.
    [[nodiscard]] Spectrum sorted() const {
        Spectrum s = *this;
        std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const Complex& a, const Complex& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        return s;
    }

    friend Spectrum operator+(const Spectrum& a, const Spectrum& b) {
        Spectrum s = a;
        s.eigenvalues.insert(s.eigenvalues.end(), b.eigenvalues.begin(), b.eigenvalues.end());
        return s;
    }
};

/**
 * Distance between two spectra viewed as multisets: the largest gap in a
 * greedy nearest-neighbour pairing. Infinite when the sizes differ.
 */
inline double spectrum_distance(const Spectrum& a, const Spectrum& b) {
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    const Spectrum sa = a.sorted();
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (const auto& z : sa.eigenvalues) {
        std::size_t best = b.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(z - b.eigenvalues[j]);
            if (!used[j] && d < best_d) {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, best_d);
    }
    return worst;
}

// Smallest |λ - ν| over λ ∈ a, ν ∈ b.
inline double spectral_gap(const Spectrum& a, const Spectrum& b) {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& x : a.eigenvalues) {
        for (const auto& y : b.eigenvalues) {
            gap = std::min(gap, std::abs(x - y));
        }
    }
    return gap;
}

struct EigenPairs {
    Spectrum spectrum;
    Eigen::MatrixXcd vectors; // column k pairs with spectrum.eigenvalues[k]
};

inline EigenPairs eig_pairs(const Matrix& a) {
    require_square(a, "eig argument");
    EigenPairs out;
    if (a.empty()) {
        return out;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a.eigen(), true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalue iteration did not converge for " + detail::shape(a.rows(), a.cols()) +
                             " matrix (norm " + detail::fmt_g(a.norm()) + ")");
    }
    const auto& ev = solver.eigenvalues();
    out.spectrum.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    out.vectors = solver.eigenvectors();
    return out;
}

inline Spectrum eig(const Matrix& a) {
    require_square(a, "eig argument");
    Spectrum s;
    if (a.empty()) {
        return s;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a.eigen(), false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalue iteration did not converge for " + detail::shape(a.rows(), a.cols()) +
                             " matrix (norm " + detail::fmt_g(a.norm()) + ")");
    }
    const auto& ev = solver.eigenvalues();
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    return s;
}

// ---------------------------------------------------------------------------
// Linear solves and rank
// ---------------------------------------------------------------------------

inline constexpr double kSingularRcond = 1e-12;

// The condition estimate is measured against max(1, ‖A‖₁), so a matrix that
// is negligible on the unit scale (a 1×1 rounding-level pivot) is rejected too.
inline Matrix solve_linear(const Matrix& a, const Matrix& b) {
    require_square(a, "solve_linear coefficient");
    if (a.rows() != b.rows()) {
        throw DimensionError("solve_linear right-hand side has " + std::to_string(b.rows()) + " rows, expected " +
                             std::to_string(a.rows()));
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a.eigen());
    const double norm = a.norm1();
    const double rc = lu.rcond() * std::min(1.0, norm);
    if (!(rc >= kSingularRcond)) {
        throw SingularityError("matrix is singular to working precision (rcond estimate " + detail::fmt_g(rc) + ")",
                               rc);
    }
    return Matrix(Eigen::MatrixXd(lu.solve(b.eigen())));
}

inline Vector solve_linear(const Matrix& a, const Vector& b) {
    return solve_linear(a, Matrix::column(b)).col_vector(0);
}

// Numerical rank: singular values above rel_tol * largest singular value.
inline Eigen::Index numerical_rank(const Matrix& a, double rel_tol = 1e-10) {
    if (a.empty()) {
        return 0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.eigen());
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) {
            ++r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Matrix exponential: Padé(13) with scaling and squaring.
// ---------------------------------------------------------------------------

inline Matrix expm(const Matrix& a, double t = 1.0) {
    require_square(a, "expm argument");
    if (!std::isfinite(t)) {
        throw InputError("expm time argument must be finite");
    }
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return a;
    }
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    Eigen::MatrixXd x = t * a.eigen();
    const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
    if (norm == 0.0) {
        return Matrix::identity(n);
    }
    int s = 0;
    if (norm > theta13) {
        s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        x /= std::ldexp(1.0, s);
    }
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd x2 = x * x;
    const Eigen::MatrixXd x4 = x2 * x2;
    const Eigen::MatrixXd x6 = x4 * x2;
    const Eigen::MatrixXd u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    const Eigen::MatrixXd u = x * u_inner;
    const Eigen::MatrixXd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < s; ++k) {
        r = r * r;
    }
    if (!r.allFinite()) {
        throw NumericalError("matrix exponential overflowed (scaled norm " + detail::fmt_g(norm) + ")");
    }
    return Matrix(std::move(r));
}

// ---------------------------------------------------------------------------
// Even matrix functions of a square root.
//
// For M = G², cosh(G) = Σ M^k/(2k)! and sinh(G)/G = Σ M^k/(2k+1)! depend only
// on M, so no square root is ever formed. M is scaled by 4^-s until its
// 1-norm is at most one, the series are summed, and the result is rebuilt with
//   cosh(2x) = 2 cosh²(x) - 1,   sinh(2x)/(2x) = (sinh(x)/x) cosh(x).
// ---------------------------------------------------------------------------

struct EvenFunctions {
    Matrix cosh;  // cosh(G)
    Matrix sinhc; // sinh(G) G^{-1}
};

inline EvenFunctions even_functions_of_sqrt(const Matrix& m) {
    require_square(m, "even matrix function argument");
    const Eigen::Index n = m.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (n == 0) {
        return {m, m};
    }

    const double norm = m.norm1();
    int s = 0;
    double scaled = norm;
    while (scaled > 1.0) {
        scaled /= 4.0;
        ++s;
    }
    const Eigen::MatrixXd ms = m.eigen() / std::pow(4.0, s);

    Eigen::MatrixXd c = id;
    Eigen::MatrixXd sc = id;
    Eigen::MatrixXd term_c = id;
    Eigen::MatrixXd term_s = id;
    constexpr int kMaxTerms = 40;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    bool converged = false;
    for (int k = 1; k <= kMaxTerms; ++k) {
        const double kk = static_cast<double>(k);
        term_c = term_c * ms / ((2.0 * kk - 1.0) * (2.0 * kk));
        term_s = term_s * ms / ((2.0 * kk) * (2.0 * kk + 1.0));
        c += term_c;
        sc += term_s;
        if (term_c.norm() <= eps * c.norm() && term_s.norm() <= eps * sc.norm()) {
            converged = true;
            break;
        }
    }
    if (!converged || !c.allFinite() || !sc.allFinite()) {
        throw NumericalError("even matrix series did not converge (norm " + detail::fmt_g(norm) + ", scaling 4^" +
                             std::to_string(s) + ")");
    }
    for (int k = 0; k < s; ++k) {
        sc = sc * c;
        c = 2.0 * c * c - id;
    }
    if (!c.allFinite() || !sc.allFinite()) {
        throw NumericalError("even matrix function overflowed while undoing the scaling (norm " +
                             detail::fmt_g(norm) + ")");
    }
    return {Matrix(std::move(c)), Matrix(std::move(sc))};
}

inline Matrix cosh_sqrt(const Matrix& m) { return even_functions_of_sqrt(m).cosh; }
inline Matrix sinhc_sqrt(const Matrix& m) { return even_functions_of_sqrt(m).sinhc; }

} // namespace cascadecomp
