#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heat_ode.hpp"
#include "ode.hpp"
#include "quadrature.hpp"
#include "sim_result.hpp"

namespace cascadecomp {

struct SimConfig {
    double dx = 1e-2;
    double dt = 4e-5;
    double t_end = 1.0;
    long snapshot_stride = 1;

    // Throws ConfigurationError for non-positive steps, a grid that does not
    // divide [0, 1], or a violated explicit-diffusion CFL bound dt <= dx²/2.
    void validate() const {
        if (!(dx > 0.0) || !(dt > 0.0) || !std::isfinite(dx) || !std::isfinite(dt)) {
            throw ConfigurationError("space and time steps must be positive");
        }
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
            throw ConfigurationError("end time must be finite and nonnegative");
        }
        const long cells = std::lround(1.0 / dx);
        if (cells < 2 || std::abs(static_cast<double>(cells) * dx - 1.0) > 1e-9) {
            throw ConfigurationError("space step dx = " + detail::fmt_g(dx) + " must divide [0, 1] evenly");
        }
        if (dt > 0.5 * dx * dx * (1.0 + 1e-12)) {
            throw ConfigurationError("CFL condition dt <= dx^2/2 violated for explicit diffusion (dt = " +
                                     detail::fmt_g(dt) + ", dx^2/2 = " + detail::fmt_g(0.5 * dx * dx) + ")");
        }
    }

    [[nodiscard]] long cells() const { return std::lround(1.0 / dx); }
};

namespace detail {

/**
 * FTCS march of w_t = w_xx + μ w with w(0) = 0 and the ghost-node Neumann
 * closure w_{J+1} = w_{J−1} + 2 dx C2 x2 at x = 1. The actuator takes one RK4
 * step per time step with u re-evaluated at every stage (w frozen at the
 * start of the step). `feedback` absent means u ≡ 0.
 */
inline SimResult march_heat(const HeatOdePlant& p, const HeatFeedback* feedback, const std::function<double(double)>& w0,
                            const Vector& x2_0, const SimConfig& cfg) {
    cfg.validate();
    if (x2_0.size() != p.m()) {
        throw DimensionError("initial actuator state must have length " + std::to_string(p.m()));
    }
    const auto cells = static_cast<std::size_t>(cfg.cells());
    const double dx = 1.0 / static_cast<double>(cells);
    const double dt = cfg.dt;
    const double r = dt / (dx * dx);
    const double mu = p.mu();
    const long stride = std::max<long>(cfg.snapshot_stride, 1);
    if (feedback != nullptr && std::abs(feedback->dx() - dx) > 1e-12) {
        throw ConfigurationError("feedback grid does not match the simulation grid");
    }

    std::vector<double> w(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) {
        w[j] = w0(static_cast<double>(j) * dx);
    }
    w[0] = 0.0;
    std::vector<double> next(cells + 1, 0.0);
    Vector x2 = x2_0;

    const Eigen::MatrixXd a2 = p.a2().eigen();
    const Vector b2 = p.b2().col_vector(0);
    const Vector c2 = p.c2().row_vector(0);

    SimResult out;
    out.grid.resize(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) {
        out.grid[j] = static_cast<double>(j) * dx;
    }
    std::vector<double> sq(cells + 1);
    auto record = [&](double t, double u) {
        for (std::size_t j = 0; j <= cells; ++j) {
            if (!std::isfinite(w[j])) {
                throw DivergenceError("heat simulation overflowed", std::lround(t / dt), t);
            }
            sq[j] = w[j] * w[j];
        }
        out.times.push_back(t);
        out.u.push_back(u);
        out.x2.push_back(x2);
        out.snapshots.push_back(w);
        out.energy.push_back(trapezoid(sq, dx) + x2.squaredNorm());
    };

    const long steps = step_count(cfg.t_end, dt);
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double u_w = feedback != nullptr ? feedback->w_part(w) : 0.0;
        auto control = [&](const Vector& x) { return feedback != nullptr ? u_w + feedback->x2_part(x) : 0.0; };
        if (k % stride == 0 || k == steps) {
            record(t, control(x2));
        }
        if (k == steps) {
            break;
        }

        const double flux = c2.dot(x2);
        for (std::size_t j = 1; j < cells; ++j) {
            next[j] = w[j] + r * (w[j + 1] - 2.0 * w[j] + w[j - 1]) + dt * mu * w[j];
        }
        next[cells] = w[cells] + r * (2.0 * w[cells - 1] - 2.0 * w[cells] + 2.0 * dx * flux) + dt * mu * w[cells];
        next[0] = 0.0;
        w.swap(next);

        x2 = rk4_step([&](double, const Vector& x) -> Vector { return a2 * x + b2 * control(x); }, t, x2, dt);
        if (!x2.allFinite() || !std::isfinite(w[cells])) {
            throw DivergenceError("heat simulation overflowed", k + 1, t + dt);
        }
    }
    return out;
}

} // namespace detail

inline SimResult simulate_heat_open_loop(const HeatOdePlant& p, const std::function<double(double)>& w0,
                                         const Vector& x2_0, const SimConfig& cfg) {
    return detail::march_heat(p, nullptr, w0, x2_0, cfg);
}

inline SimResult simulate_heat_closed_loop(const HeatOdePlant& p, const PsiKernel& kernel, const ModalGains& gains,
                                           const std::function<double(double)>& w0, const Vector& x2_0,
                                           const SimConfig& cfg) {
    cfg.validate();
    const HeatFeedback feedback(kernel, gains, 1.0 / static_cast<double>(cfg.cells()));
    return detail::march_heat(p, &feedback, w0, x2_0, cfg);
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

struct ExportedFiles {
    std::filesystem::path trajectory;
    std::filesystem::path snapshots;
};

namespace detail {

inline std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open file for writing", path.string());
    }
    return os;
}

inline std::size_t width_of(const std::vector<Vector>& rows) { return rows.empty() ? 0 : static_cast<std::size_t>(rows.front().size()); }

} // namespace detail

/**
 * Writes `<stem>.csv` (columns t, energy, u, x1_*, x2_*) and
 * `<stem>_snapshots.csv` (header: t then the grid x-coordinates, one row per
 * sample) into `dir`. Numbers carry 9 significant digits.
 */
inline ExportedFiles export_csv(const SimResult& r, const std::filesystem::path& dir, const std::string& stem) {
    ExportedFiles files{dir / (stem + ".csv"), dir / (stem + "_snapshots.csv")};
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory", dir.string());
    }

    const std::size_t n1 = detail::width_of(r.x1);
    const std::size_t n2 = detail::width_of(r.x2);
    {
        auto os = detail::open_for_write(files.trajectory);
        os << "t,energy,u";
        for (std::size_t i = 1; i <= n1; ++i) {
            os << ",x1_" << i;
        }
        for (std::size_t i = 1; i <= n2; ++i) {
            os << ",x2_" << i;
        }
        os << '\n';
        for (std::size_t k = 0; k < r.samples(); ++k) {
            os << detail::fmt9(r.times[k]) << ',' << detail::fmt9(r.energy[k]) << ',' << detail::fmt9(r.u[k]);
            for (std::size_t i = 0; i < n1; ++i) {
                os << ',' << detail::fmt9(r.x1[k](static_cast<Eigen::Index>(i)));
            }
            for (std::size_t i = 0; i < n2; ++i) {
                os << ',' << detail::fmt9(r.x2[k](static_cast<Eigen::Index>(i)));
            }
            os << '\n';
        }
        if (!os) {
            throw IoError("write failed", files.trajectory.string());
        }
    }
    {
        auto os = detail::open_for_write(files.snapshots);
        os << 't';
        for (double x : r.grid) {
            os << ',' << detail::fmt9(x);
        }
        os << '\n';
        for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
            os << detail::fmt9(r.times[k]);
            for (double v : r.snapshots[k]) {
                os << ',' << detail::fmt9(v);
            }
            os << '\n';
        }
        if (!os) {
            throw IoError("write failed", files.snapshots.string());
        }
    }
    return files;
}

} // namespace cascadecomp
