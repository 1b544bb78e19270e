#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "plot_script.hpp"

namespace cascadecomp::cli {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::validation:
        return exit_validation;
    case ErrorKind::design:
        return exit_design;
    case ErrorKind::numerical:
        return exit_numerical;
    case ErrorKind::io:
        return exit_io;
    }
    return exit_numerical;
}

int verify_status(const std::vector<Check>& checks) { return all_passed(checks) ? exit_ok : exit_design; }

namespace {

using detail::fmt9;

// Largest real part first.
std::vector<Complex> dominant_first(const Spectrum& s) {
    std::vector<Complex> z = s.sorted().eigenvalues;
    std::stable_sort(z.begin(), z.end(), [](const Complex& a, const Complex& b) { return a.real() > b.real(); });
    return z;
}

class Table {
public:
    explicit Table(std::string header) { text_ << header << '\n'; }

    void matrix(const std::string& quantity, const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                text_ << quantity << ',' << i + 1 << ',' << j + 1 << ',' << fmt9(m(i, j)) << '\n';
            }
        }
    }

    void spectrum(const std::string& set, const Spectrum& s) {
        const std::vector<Complex> zs = dominant_first(s);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const Complex z = zs[i];
            text_ << set << ',' << i + 1 << ',' << fmt9(z.real()) << ',' << fmt9(z.imag() == 0.0 ? 0.0 : z.imag())
                  << '\n';
        }
    }

    [[nodiscard]] std::string str() const { return text_.str(); }

private:
    std::ostringstream text_;
};

std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& file, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory", dir.string());
    }
    const std::filesystem::path path = dir / file;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open file for writing", path.string());
    }
    os << text;
    if (!os) {
        throw IoError("write failed", path.string());
    }
    return path;
}

std::string format_complex(Complex z) {
    if (z.imag() == 0.0) {
        return fmt9(z.real());
    }
    return fmt9(z.real()) + (z.imag() < 0.0 ? " - " : " + ") + fmt9(std::abs(z.imag())) + "i";
}

std::string format_spectrum(const std::string& label, const Spectrum& s) {
    std::ostringstream os;
    os << label << " (" << s.eigenvalues.size() << " eigenvalues)\n";
    for (const auto& z : dominant_first(s)) {
        os << "  " << format_complex(z) << '\n';
    }
    return os.str();
}

std::string format_checks(const std::vector<Check>& checks) {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  value = " << fmt9(c.value)
           << "  tolerance = " << fmt9(c.tolerance) << '\n';
    }
    const std::size_t failed = static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(),
                                                                      [](const Check& c) { return !c.passed; }));
    os << (failed == 0 ? "all " + std::to_string(checks.size()) + " checks passed\n"
                       : std::to_string(failed) + " of " + std::to_string(checks.size()) + " checks failed\n");
    return os.str();
}

// Pipeline state shared by the four commands for one scenario kind.
struct Context {
    const ScenarioConfig& cfg;
    std::filesystem::path dir;
    RunOutcome out;

    void artifact(const std::filesystem::path& p) { out.artifacts.push_back(p); }

    void export_run(const SimResult& r, const std::string& stem, bool surface) {
        const ExportedFiles files = export_csv(r, dir, stem);
        artifact(files.trajectory);
        artifact(files.snapshots);
        if (surface) {
            artifact(emit_plot_script(files, PlotStyle::surface));
        }
        artifact(emit_plot_script(files, PlotStyle::lines));
        std::ostringstream os;
        os << stem << ": " << r.samples() << " samples";
        if (!r.empty()) {
            os << ", energy " << fmt9(r.energy.front()) << " -> " << fmt9(r.energy.back()) << " at t = "
               << fmt9(r.times.back());
        }
        out.report += os.str() + '\n';
    }

    void finish_verify(const std::vector<Check>& checks) {
        const std::string text = format_checks(checks);
        artifact(write_text(dir, cfg.name + "_verify.txt", text));
        out.report += text;
        out.exit_code = verify_status(checks);
    }
};

void run_heat(Command cmd, Context& ctx) {
    const HeatScenario& h = ctx.cfg.heat;
    const HeatOdePlant plant(h.mu, h.a2, h.b2, h.c2);
    const PsiKernel kernel(plant);
    const ModalGains gains = design_heat_compensator(plant, kernel, h.poles, h.quadrature);

    switch (cmd) {
    case Command::synthesize: {
        Table t("quantity,row,col,value");
        t.matrix("Lambda_N", gains.lambda_matrix());
        t.matrix("B_N", gains.b_matrix());
        t.matrix("L_N", gains.l_matrix());
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_gains.csv", t.str()));
        std::ostringstream os;
        os << "unstable heat modes N = " << gains.n_modes << '\n';
        for (int i = 0; i < gains.n_modes; ++i) {
            const auto k = static_cast<std::size_t>(i);
            os << "  mode " << i + 1 << ": Lambda = " << fmt9(gains.lambda_n[k]) << ", B = " << fmt9(gains.b_n[k])
               << ", L = " << fmt9(gains.l[k]) << '\n';
        }
        ctx.out.report += os.str();
        break;
    }
    case Command::verify:
        ctx.finish_verify(verify_heat_design(plant, kernel, gains, h.poles, h.galerkin_modes));
        break;
    case Command::simulate:
        if (h.open_loop) {
            ctx.export_run(simulate_heat_open_loop(plant, h.w0, h.x2_0, h.sim), ctx.cfg.name + "_open", true);
        }
        if (h.closed_loop) {
            ctx.export_run(simulate_heat_closed_loop(plant, kernel, gains, h.w0, h.x2_0, h.sim),
                           ctx.cfg.name + "_closed", true);
        }
        break;
    case Command::spectrum: {
        const Spectrum s = galerkin_spectrum(plant, kernel, gains, h.galerkin_modes, h.quadrature);
        Table t("set,index,re,im");
        t.spectrum("galerkin", s);
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_spectrum.csv", t.str()));
        ctx.out.report += format_spectrum("Galerkin closed loop, " + std::to_string(h.galerkin_modes) + " modes", s);
        break;
    }
    }
}

void run_cascade(Command cmd, Context& ctx) {
    const CascadeScenario& c = ctx.cfg.cascade;
    const CascadePlant plant(c.a1, c.b1, c.c2, c.a2, c.b2);
    const CompensatorGains gains = design_compensator(plant, c.actuator_poles, c.plant_poles);

    switch (cmd) {
    case Command::synthesize: {
        Table t("quantity,row,col,value");
        t.matrix("K1", gains.k1);
        t.matrix("K2", gains.k2);
        t.matrix("S", gains.s);
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_gains.csv", t.str()));
        ctx.out.report += "controller u = K2 x2 + K1 (x1 + S x2)\n" + t.str();
        break;
    }
    case Command::verify:
        ctx.finish_verify(verify_design(plant, gains));
        break;
    case Command::simulate:
        ctx.export_run(simulate_cascade(plant, gains, c.x0, c.t_end, c.dt, c.stride), ctx.cfg.name, false);
        break;
    case Command::spectrum: {
        const Spectrum s = eig(closed_loop_matrix(plant, gains));
        Table t("set,index,re,im");
        t.spectrum("closed_loop", s);
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_spectrum.csv", t.str()));
        ctx.out.report += format_spectrum("closed-loop matrix", s);
        break;
    }
    }
}

void run_delay(Command cmd, Context& ctx) {
    const DelayScenario& d = ctx.cfg.delay;
    Matrix k;
    if (d.k) {
        k = *d.k;
    } else {
        try {
            k = place_poles_siso(d.a1, d.b1, d.poles);
        } catch (const DesignError& e) {
            throw DesignError(std::string("controllability of (A1, B1) violated: ") + e.what());
        }
    }
    const DelayPlant plant(d.a1, d.b1, d.tau, k);

    switch (cmd) {
    case Command::synthesize: {
        Table t("quantity,row,col,value");
        t.matrix("K", plant.k());
        t.matrix("K1", predictor_gain(plant));
        t.matrix("S_B2", transport_sb2(plant));
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_gains.csv", t.str()));
        ctx.out.report += "predictor u(t) = K1 x1(t) + K1 (S w)(t), K1 = K exp(A1 tau)\n" + t.str();
        break;
    }
    case Command::verify:
        ctx.finish_verify(verify_delay(plant, d.intervals));
        break;
    case Command::simulate:
        ctx.export_run(simulate_delay_closed_loop(plant, d.x1_0, TransportState::zero(d.tau, d.intervals), d.t_end,
                                                  d.dt, d.stride, d.law),
                       ctx.cfg.name, true);
        break;
    case Command::spectrum: {
        const Spectrum nominal = eig(plant.a1() + plant.b1() * plant.k());
        const Spectrum shifted = eig(plant.a1() + transport_sb2(plant) * predictor_gain(plant));
        Table t("set,index,re,im");
        t.spectrum("nominal", nominal);
        t.spectrum("transformed", shifted);
        ctx.artifact(write_text(ctx.dir, ctx.cfg.name + "_spectrum.csv", t.str()));
        ctx.out.report += format_spectrum("A1 + B1 K", nominal) + format_spectrum("A1 + S B2 K1", shifted);
        break;
    }
    }
}

std::string failure_text(const ScenarioConfig* cfg, const std::exception& e) {
    return (cfg != nullptr ? cfg->name + ": " : std::string()) + "error: " + e.what() + '\n';
}

} // namespace

RunOutcome run(Command cmd, const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
    Context ctx{cfg, out_dir.value_or(cfg.output_dir), {}};
    try {
        switch (cfg.kind) {
        case ScenarioKind::heat_ode:
            run_heat(cmd, ctx);
            break;
        case ScenarioKind::cascade_fd:
            run_cascade(cmd, ctx);
            break;
        case ScenarioKind::delay:
            run_delay(cmd, ctx);
            break;
        }
    } catch (const Error& e) {
        ctx.out.exit_code = exit_code_for(e.kind());
        ctx.out.report += failure_text(&cfg, e);
    } catch (const std::exception& e) {
        ctx.out.exit_code = exit_numerical;
        ctx.out.report += failure_text(&cfg, e);
    }
    return ctx.out;
}

RunOutcome run_file(Command cmd, const std::filesystem::path& config, const std::optional<std::filesystem::path>& out_dir) {
    ScenarioConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const Error& e) {
        return {exit_code_for(e.kind()), failure_text(nullptr, e), {}};
    }
    return run(cmd, cfg, out_dir);
}

std::vector<RunOutcome> run_batch(Command cmd, const std::vector<std::filesystem::path>& configs,
                                  const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
    std::vector<RunOutcome> results(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            results[i] = run_file(cmd, configs[i], out_dir);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    return results;
}

} // namespace cascadecomp::cli
