#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace cascadecomp::cli {

const char* kind_name(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::cascade_fd:
        return "cascade_fd";
    case ScenarioKind::delay:
        return "delay";
    case ScenarioKind::heat_ode:
        return "heat_ode";
    }
    return "unknown";
}

double InitialProfile::operator()(double x) const {
    switch (type) {
    case Type::zero:
        return 0.0;
    case Type::sine:
        return amplitude * std::sin(frequency * std::numbers::pi * x);
    case Type::mode:
        return amplitude * heat_mode(mode, x);
    }
    return 0.0;
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = std::to_string(issues.size()) + " configuration error" + (issues.size() == 1 ? "" : "s");
    for (const auto& i : issues) {
        out += "\n  " + i;
    }
    return out;
}

std::string at(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) {
        return "";
    }
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

// Field reader that records problems instead of stopping at the first one.
class Reader {
public:
    explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

    void error(const std::string& path, const std::string& msg) { issues_.push_back(path + ": " + msg); }

    [[nodiscard]] std::size_t error_count() const { return issues_.size(); }

    // Map node at `path`; reports unknown keys against `allowed`.
    YAML::Node section(const YAML::Node& parent, const std::string& parent_path, const std::string& key, bool required,
                       std::initializer_list<const char*> allowed) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap()) {
            return YAML::Node();
        }
        const YAML::Node n = parent[key];
        if (!n) {
            if (required) {
                error(path, "required section is missing");
            }
            return YAML::Node();
        }
        if (!n.IsMap()) {
            error(path, "expected a mapping" + at(n));
            return YAML::Node();
        }
        check_keys(n, path, allowed);
        return n;
    }

    void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!ok.contains(key)) {
                error(join_path(path, key), "unknown key" + at(kv.first));
            }
        }
    }

    std::optional<double> number(const YAML::Node& parent, const std::string& parent_path, const std::string& key,
                                 bool required) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap() || !parent[key]) {
            if (required && parent.IsMap()) {
                error(path, "required field is missing");
            }
            return std::nullopt;
        }
        return scalar(parent[key], path);
    }

    double number_or(const YAML::Node& parent, const std::string& parent_path, const std::string& key, double fallback) {
        return number(parent, parent_path, key, false).value_or(fallback);
    }

    long integer_or(const YAML::Node& parent, const std::string& parent_path, const std::string& key, long fallback,
                    long min_value) {
        const auto v = number(parent, parent_path, key, false);
        if (!v) {
            return fallback;
        }
        const std::string path = join_path(parent_path, key);
        if (*v != std::floor(*v) || *v < static_cast<double>(min_value)) {
            error(path, "expected an integer >= " + std::to_string(min_value) + at(parent[key]));
            return fallback;
        }
        return static_cast<long>(*v);
    }

    std::optional<std::string> text(const YAML::Node& parent, const std::string& parent_path, const std::string& key,
                                    bool required) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap() || !parent[key]) {
            if (required && parent.IsMap()) {
                error(path, "required field is missing");
            }
            return std::nullopt;
        }
        const YAML::Node n = parent[key];
        if (!n.IsScalar()) {
            error(path, "expected a string" + at(n));
            return std::nullopt;
        }
        return n.as<std::string>();
    }

    std::optional<Matrix> matrix(const YAML::Node& parent, const std::string& parent_path, const std::string& key,
                                 bool required) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap() || !parent[key]) {
            if (required && parent.IsMap()) {
                error(path, "required matrix is missing");
            }
            return std::nullopt;
        }
        const YAML::Node n = parent[key];
        if (!n.IsSequence() || n.size() == 0) {
            error(path, "expected a nonempty list of rows, e.g. [[1, 0], [0, 1]]" + at(n));
            return std::nullopt;
        }
        std::vector<double> entries;
        std::size_t cols = 0;
        bool ok = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const YAML::Node row = n[i];
            const std::string row_path = path + "[" + std::to_string(i) + "]";
            if (!row.IsSequence() || row.size() == 0) {
                error(row_path, "expected a nonempty row list" + at(row));
                ok = false;
                continue;
            }
            if (i == 0) {
                cols = row.size();
            } else if (row.size() != cols) {
                error(row_path, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols) +
                                    at(row));
                ok = false;
                continue;
            }
            for (std::size_t j = 0; j < row.size(); ++j) {
                const auto v = scalar(row[j], row_path + "[" + std::to_string(j) + "]");
                ok = ok && v.has_value();
                entries.push_back(v.value_or(0.0));
            }
        }
        if (!ok) {
            return std::nullopt;
        }
        return Matrix::from_row_major(static_cast<Eigen::Index>(n.size()), static_cast<Eigen::Index>(cols), entries);
    }

    std::optional<Vector> vector(const YAML::Node& parent, const std::string& parent_path, const std::string& key) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap() || !parent[key]) {
            return std::nullopt;
        }
        const YAML::Node n = parent[key];
        if (!n.IsSequence() || n.size() == 0) {
            error(path, "expected a nonempty list of numbers" + at(n));
            return std::nullopt;
        }
        Vector v(static_cast<Eigen::Index>(n.size()));
        bool ok = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const auto x = scalar(n[i], path + "[" + std::to_string(i) + "]");
            ok = ok && x.has_value();
            v(static_cast<Eigen::Index>(i)) = x.value_or(0.0);
        }
        return ok ? std::optional<Vector>(v) : std::nullopt;
    }

    // Each pole is a real number or a [re, im] pair.
    std::optional<std::vector<Complex>> poles(const YAML::Node& parent, const std::string& parent_path,
                                              const std::string& key, bool required) {
        const std::string path = join_path(parent_path, key);
        if (!parent.IsMap() || !parent[key]) {
            if (required && parent.IsMap()) {
                error(path, "required pole list is missing");
            }
            return std::nullopt;
        }
        const YAML::Node n = parent[key];
        if (!n.IsSequence()) {
            error(path, "expected a list of poles (numbers or [re, im] pairs)" + at(n));
            return std::nullopt;
        }
        std::vector<Complex> out;
        bool ok = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string p = path + "[" + std::to_string(i) + "]";
            const YAML::Node e = n[i];
            if (e.IsSequence()) {
                if (e.size() != 2) {
                    error(p, "complex pole must be a [re, im] pair" + at(e));
                    ok = false;
                    continue;
                }
                const auto re = scalar(e[0], p + "[0]");
                const auto im = scalar(e[1], p + "[1]");
                ok = ok && re && im;
                out.emplace_back(re.value_or(0.0), im.value_or(0.0));
            } else {
                const auto re = scalar(e, p);
                ok = ok && re;
                out.emplace_back(re.value_or(0.0), 0.0);
            }
        }
        if (ok && !Spectrum{out}.is_conjugate_closed(1e-12)) {
            error(path, "complex poles must come in conjugate pairs");
            ok = false;
        }
        return ok ? std::optional<std::vector<Complex>>(out) : std::nullopt;
    }

private:
    std::optional<double> scalar(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) {
            error(path, "expected a number" + at(n));
            return std::nullopt;
        }
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) {
                error(path, "value must be finite" + at(n));
                return std::nullopt;
            }
            return v;
        } catch (const YAML::BadConversion&) {
            error(path, "'" + n.Scalar() + "' is not a number" + at(n));
            return std::nullopt;
        }
    }

    std::vector<std::string>& issues_;
};

std::string shape_of(const Matrix& m) { return detail::shape(m.rows(), m.cols()); }

void expect_shape(Reader& rd, const std::string& path, const std::optional<Matrix>& m, Eigen::Index rows,
                  Eigen::Index cols) {
    if (m && (m->rows() != rows || m->cols() != cols)) {
        rd.error(path, "expected shape " + detail::shape(rows, cols) + ", got " + shape_of(*m));
    }
}

void expect_square(Reader& rd, const std::string& path, const std::optional<Matrix>& m) {
    if (m && !m->is_square()) {
        rd.error(path, "must be square, got " + shape_of(*m));
    }
}

void parse_cascade(Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
    CascadeScenario& c = cfg.cascade;
    const YAML::Node plant = rd.section(root, "", "plant", true, {"a1", "b1", "c2", "a2", "b2"});
    const YAML::Node design = rd.section(root, "", "design", true, {"actuator_poles", "plant_poles"});
    const YAML::Node sim = rd.section(root, "", "simulation", false, {"dt", "t_end", "snapshot_stride", "x0"});

    const auto a1 = rd.matrix(plant, "plant", "a1", true);
    const auto b1 = rd.matrix(plant, "plant", "b1", true);
    const auto c2 = rd.matrix(plant, "plant", "c2", true);
    const auto a2 = rd.matrix(plant, "plant", "a2", true);
    const auto b2 = rd.matrix(plant, "plant", "b2", true);
    expect_square(rd, "plant.a1", a1);
    expect_square(rd, "plant.a2", a2);
    if (a1 && b1 && b1->rows() != a1->rows()) {
        rd.error("plant.b1", "must have " + std::to_string(a1->rows()) + " rows to match a1, got " + shape_of(*b1));
    }
    if (b1 && a2) {
        expect_shape(rd, "plant.c2", c2, b1->cols(), a2->rows());
    }
    if (a2) {
        expect_shape(rd, "plant.b2", b2, a2->rows(), 1);
    }

    const auto act = rd.poles(design, "design", "actuator_poles", false);
    const auto pl = rd.poles(design, "design", "plant_poles", true);
    if (act && a2 && !act->empty() && static_cast<Eigen::Index>(act->size()) != a2->rows()) {
        rd.error("design.actuator_poles", "expected " + std::to_string(a2->rows()) + " poles (or none to keep K2 = 0), got " +
                                              std::to_string(act->size()));
    }
    if (pl && a1 && static_cast<Eigen::Index>(pl->size()) != a1->rows()) {
        rd.error("design.plant_poles",
                 "expected " + std::to_string(a1->rows()) + " poles, got " + std::to_string(pl->size()));
    }

    c.dt = rd.number_or(sim, "simulation", "dt", c.dt);
    c.t_end = rd.number_or(sim, "simulation", "t_end", c.t_end);
    c.stride = rd.integer_or(sim, "simulation", "snapshot_stride", c.stride, 1);
    if (!(c.dt > 0.0)) {
        rd.error("simulation.dt", "time step must be positive");
    }
    if (!(c.t_end >= 0.0)) {
        rd.error("simulation.t_end", "end time must be nonnegative");
    }
    const auto x0 = rd.vector(sim, "simulation", "x0");
    if (a1 && a2) {
        const Eigen::Index dim = a1->rows() + a2->rows();
        if (x0 && x0->size() != dim) {
            rd.error("simulation.x0", "expected " + std::to_string(dim) + " entries (x1 then x2), got " +
                                          std::to_string(x0->size()));
        }
        c.x0 = x0.value_or(Vector::Ones(dim));
    }
    if (a1 && b1 && c2 && a2 && b2) {
        c.a1 = *a1;
        c.b1 = *b1;
        c.c2 = *c2;
        c.a2 = *a2;
        c.b2 = *b2;
    }
    c.actuator_poles = act.value_or(std::vector<Complex>{});
    c.plant_poles = pl.value_or(std::vector<Complex>{});
}

void parse_delay(Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
    DelayScenario& d = cfg.delay;
    const YAML::Node plant = rd.section(root, "", "plant", true, {"a1", "b1", "tau"});
    const YAML::Node design = rd.section(root, "", "design", true, {"k", "poles"});
    const YAML::Node sim =
        rd.section(root, "", "simulation", false, {"intervals", "dt", "t_end", "snapshot_stride", "x1_0", "law"});

    const auto a1 = rd.matrix(plant, "plant", "a1", true);
    const auto b1 = rd.matrix(plant, "plant", "b1", true);
    const auto tau = rd.number(plant, "plant", "tau", true);
    expect_square(rd, "plant.a1", a1);
    if (a1) {
        expect_shape(rd, "plant.b1", b1, a1->rows(), 1);
    }
    if (tau && !(*tau > 0.0)) {
        rd.error("plant.tau", "delay must be positive");
    }

    const auto k = rd.matrix(design, "design", "k", false);
    const auto poles = rd.poles(design, "design", "poles", false);
    if (design.IsMap() && !design["k"] && !design["poles"]) {
        rd.error("design", "give either the nominal gain 'k' or target 'poles'");
    }
    if (k && poles) {
        rd.error("design", "give only one of 'k' and 'poles'");
    }
    if (a1) {
        expect_shape(rd, "design.k", k, 1, a1->rows());
        if (poles && static_cast<Eigen::Index>(poles->size()) != a1->rows()) {
            rd.error("design.poles",
                     "expected " + std::to_string(a1->rows()) + " poles, got " + std::to_string(poles->size()));
        }
    }

    d.intervals = static_cast<int>(rd.integer_or(sim, "simulation", "intervals", d.intervals, 2));
    d.t_end = rd.number_or(sim, "simulation", "t_end", d.t_end);
    d.stride = rd.integer_or(sim, "simulation", "snapshot_stride", d.stride, 1);
    d.tau = tau.value_or(1.0);
    const double dx = d.tau / d.intervals;
    d.dt = rd.number_or(sim, "simulation", "dt", dx);
    if (!(d.dt > 0.0)) {
        rd.error("simulation.dt", "time step must be positive");
    } else if (d.dt > dx * (1.0 + 1e-12)) {
        rd.error("simulation.dt", "CFL condition dt <= dx violated for upwind transport (dt = " + detail::fmt_g(d.dt) +
                                      ", dx = tau/intervals = " + detail::fmt_g(dx) + ")");
    }
    if (!(d.t_end >= 0.0)) {
        rd.error("simulation.t_end", "end time must be nonnegative");
    }
    if (const auto law = rd.text(sim, "simulation", "law", false)) {
        if (*law == "predictor") {
            d.law = DelayLaw::predictor;
        } else if (*law == "naive") {
            d.law = DelayLaw::naive;
        } else {
            rd.error("simulation.law", "expected 'predictor' or 'naive', got '" + *law + "'");
        }
    }
    const auto x1_0 = rd.vector(sim, "simulation", "x1_0");
    if (a1) {
        if (x1_0 && x1_0->size() != a1->rows()) {
            rd.error("simulation.x1_0",
                     "expected " + std::to_string(a1->rows()) + " entries, got " + std::to_string(x1_0->size()));
        }
        d.x1_0 = x1_0.value_or(Vector::Ones(a1->rows()));
    }
    if (a1 && b1) {
        d.a1 = *a1;
        d.b1 = *b1;
    }
    d.k = k;
    d.poles = poles.value_or(std::vector<Complex>{});
}

void parse_profile(Reader& rd, const YAML::Node& sim, InitialProfile& w0) {
    const YAML::Node n = rd.section(sim, "simulation", "w0", false, {"type", "amplitude", "frequency", "mode"});
    if (!n.IsMap()) {
        return;
    }
    const std::string path = "simulation.w0";
    if (const auto type = rd.text(n, path, "type", true)) {
        if (*type == "sine") {
            w0.type = InitialProfile::Type::sine;
        } else if (*type == "mode") {
            w0.type = InitialProfile::Type::mode;
        } else if (*type == "zero") {
            w0.type = InitialProfile::Type::zero;
        } else {
            rd.error(path + ".type", "expected 'sine', 'mode' or 'zero', got '" + *type + "'");
        }
    }
    w0.amplitude = rd.number_or(n, path, "amplitude", w0.amplitude);
    w0.frequency = rd.number_or(n, path, "frequency", w0.frequency);
    w0.mode = static_cast<int>(rd.integer_or(n, path, "mode", w0.mode, 1));
}

void parse_heat(Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
    HeatScenario& h = cfg.heat;
    const YAML::Node plant = rd.section(root, "", "plant", true, {"mu", "a2", "b2", "c2"});
    const YAML::Node design = rd.section(root, "", "design", true, {"poles", "modal_quadrature", "galerkin_modes"});
    const YAML::Node sim =
        rd.section(root, "", "simulation", false, {"dx", "dt", "t_end", "snapshot_stride", "w0", "x2_0", "loops"});

    const auto mu = rd.number(plant, "plant", "mu", true);
    const auto a2 = rd.matrix(plant, "plant", "a2", true);
    const auto b2 = rd.matrix(plant, "plant", "b2", true);
    const auto c2 = rd.matrix(plant, "plant", "c2", true);
    expect_square(rd, "plant.a2", a2);
    if (a2) {
        expect_shape(rd, "plant.b2", b2, a2->rows(), 1);
        expect_shape(rd, "plant.c2", c2, 1, a2->rows());
    }
    if (mu && !(*mu >= 0.0)) {
        rd.error("plant.mu", "reaction coefficient must be nonnegative");
    }

    h.sim.dx = rd.number_or(sim, "simulation", "dx", h.sim.dx);
    h.sim.dt = rd.number_or(sim, "simulation", "dt", h.sim.dt);
    h.sim.t_end = rd.number_or(sim, "simulation", "t_end", h.sim.t_end);
    h.sim.snapshot_stride = rd.integer_or(sim, "simulation", "snapshot_stride", h.sim.snapshot_stride, 1);
    try {
        h.sim.validate();
    } catch (const ConfigurationError& e) {
        const std::string what = e.what();
        const bool cfl = what.find("CFL") != std::string::npos;
        const bool grid = what.find("dx") != std::string::npos;
        rd.error(cfl ? "simulation.dt" : (grid ? "simulation.dx" : "simulation"), what);
    }

    const auto poles = rd.poles(design, "design", "poles", true);
    if (poles && mu && *mu >= 0.0) {
        const auto n = static_cast<std::size_t>(select_n(*mu));
        if (poles->size() != n) {
            rd.error("design.poles", "expected " + std::to_string(n) + " poles, one per unstable heat mode (mu - (n - 1/2)^2 pi^2 >= 0), got " +
                                         std::to_string(poles->size()));
        }
    }
    if (const auto rule = rd.text(design, "design", "modal_quadrature", false)) {
        if (*rule == "adaptive") {
            h.quadrature = ModalQuadrature::adaptive();
        } else if (*rule == "grid") {
            h.quadrature = ModalQuadrature::right_riemann(h.sim.dx);
        } else {
            rd.error("design.modal_quadrature", "expected 'adaptive' or 'grid', got '" + *rule + "'");
        }
    }
    h.galerkin_modes = static_cast<int>(rd.integer_or(design, "design", "galerkin_modes", h.galerkin_modes, 1));
    if (poles && h.galerkin_modes <= static_cast<int>(poles->size())) {
        rd.error("design.galerkin_modes", "must exceed the number of controlled modes");
    }

    parse_profile(rd, sim, h.w0);
    if (const auto loops = rd.text(sim, "simulation", "loops", false)) {
        h.open_loop = *loops == "open" || *loops == "both";
        h.closed_loop = *loops == "closed" || *loops == "both";
        if (!h.open_loop && !h.closed_loop) {
            rd.error("simulation.loops", "expected 'open', 'closed' or 'both', got '" + *loops + "'");
        }
    }
    const auto x2_0 = rd.vector(sim, "simulation", "x2_0");
    if (a2) {
        if (x2_0 && x2_0->size() != a2->rows()) {
            rd.error("simulation.x2_0",
                     "expected " + std::to_string(a2->rows()) + " entries, got " + std::to_string(x2_0->size()));
        }
        h.x2_0 = x2_0.value_or(Vector::Ones(a2->rows()));
    }
    h.mu = mu.value_or(0.0);
    if (a2 && b2 && c2) {
        h.a2 = *a2;
        h.b2 = *b2;
        h.c2 = *c2;
    }
    h.poles = poles.value_or(std::vector<Complex>{});
}

std::string default_name(const std::string& source) {
    const std::string stem = std::filesystem::path(source).stem().string();
    if (stem.empty() || stem.front() == '<') {
        return "scenario";
    }
    return stem;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> issues) : InputError(join_issues(issues)), issues_(std::move(issues)) {}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError({source + ": syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                           std::to_string(e.mark.column + 1) + ": " + e.msg});
    }
    if (!root.IsMap()) {
        throw ConfigError({source + ": top level must be a mapping with at least a 'kind' field"});
    }

    std::vector<std::string> issues;
    Reader rd(issues);
    rd.check_keys(root, "", {"kind", "name", "output", "plant", "design", "simulation"});

    ScenarioConfig cfg;
    cfg.name = rd.text(root, "", "name", false).value_or(default_name(source));
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
        rd.error("name", "must be a nonempty file stem without path separators");
    }
    cfg.output_dir = rd.text(root, "", "output", false).value_or("out");

    const auto kind = rd.text(root, "", "kind", true);
    if (kind) {
        if (*kind == "cascade_fd") {
            cfg.kind = ScenarioKind::cascade_fd;
            parse_cascade(rd, root, cfg);
        } else if (*kind == "delay") {
            cfg.kind = ScenarioKind::delay;
            parse_delay(rd, root, cfg);
        } else if (*kind == "heat_ode") {
            cfg.kind = ScenarioKind::heat_ode;
            parse_heat(rd, root, cfg);
        } else {
            rd.error("kind", "expected 'cascade_fd', 'delay' or 'heat_ode', got '" + *kind + "'");
        }
    }
    if (!issues.empty()) {
        for (auto& i : issues) {
            i = source + ": " + i;
        }
        throw ConfigError(std::move(issues));
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot read config", path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path.string());
}

} // namespace cascadecomp::cli
