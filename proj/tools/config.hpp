#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascadecomp/cascadecomp.hpp"

namespace cascadecomp::cli {

enum class ScenarioKind { cascade_fd, delay, heat_ode };

const char* kind_name(ScenarioKind k);

// Initial heat profile: A sin(k pi x), A phi_n(x), or zero.
struct InitialProfile {
    enum class Type { zero, sine, mode } type = Type::sine;
    double amplitude = 1.0;
    double frequency = 1.0;
    int mode = 1;

    [[nodiscard]] double operator()(double x) const;
};

struct CascadeScenario {
    Matrix a1, b1, c2, a2, b2;
    std::vector<Complex> actuator_poles;
    std::vector<Complex> plant_poles;
    double dt = 1e-2;
    double t_end = 10.0;
    long stride = 1;
    Vector x0;
};

struct DelayScenario {
    Matrix a1, b1;
    double tau = 1.0;
    std::optional<Matrix> k;
    std::vector<Complex> poles; // used when k is absent
    int intervals = kDefaultDelayIntervals;
    double dt = 1e-2;
    double t_end = 5.0;
    long stride = 1;
    Vector x1_0;
    DelayLaw law = DelayLaw::predictor;
};

struct HeatScenario {
    double mu = 0.0;
    Matrix a2, b2, c2;
    std::vector<Complex> poles;
    ModalQuadrature quadrature;
    int galerkin_modes = 60;
    SimConfig sim;
    InitialProfile w0;
    Vector x2_0;
    bool open_loop = true;
    bool closed_loop = true;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::heat_ode;
    std::string name = "scenario";
    std::filesystem::path output_dir = "out";
    CascadeScenario cascade;
    DelayScenario delay;
    HeatScenario heat;
};

// Every problem found while reading a config, one line each.
class ConfigError : public InputError {
public:
    explicit ConfigError(std::vector<std::string> issues);

    [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

// `source` names the text in messages and supplies the default scenario name.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");

ScenarioConfig load_config(const std::filesystem::path& path);

} // namespace cascadecomp::cli
