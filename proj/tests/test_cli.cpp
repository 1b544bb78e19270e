#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "config.hpp"
#include "plot_script.hpp"
#include "runner.hpp"

using namespace cascadecomp;
using namespace cascadecomp::cli;

namespace {

const char* kHeatConfig = R"(
kind: heat_ode
name: heat
plant:
  mu: 10
  a2: [[-1, 0], [0, -2]]
  b2: [[1], [1]]
  c2: [[1, 1]]
design:
  poles: [-2]
  modal_quadrature: grid
simulation:
  dx: 0.01
  dt: 4.0e-5
  t_end: 1
)";

const char* kDelayConfig = R"(
kind: delay
name: delay
plant: {a1: [[1]], b1: [[1]], tau: 1}
design: {k: [[-2]]}
simulation: {intervals: 100, dt: 0.01, t_end: 3}
)";

const char* kCascadeConfig = R"(
kind: cascade_fd
name: cascade
plant: {a1: [[1]], b1: [[1]], c2: [[1]], a2: [[-1]], b2: [[1]]}
design: {actuator_poles: [-3], plant_poles: [-2]}
simulation: {dt: 0.01, t_end: 2}
)";

// Fresh scratch directory per test.
std::filesystem::path scratch() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    const auto dir = std::filesystem::temp_directory_path() / "cascadecomp_cli_tests" /
                     (std::string(info->test_suite_name()) + "_" + info->name());
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> issues_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    if (pos != std::string::npos) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

// quantity -> value of the (1, 1) entry in a gains CSV.
std::map<std::string, double> first_entries(const std::filesystem::path& csv) {
    std::map<std::string, double> out;
    std::istringstream is(slurp(csv));
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "quantity,row,col,value");
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string q, r, c, v;
        std::getline(ss, q, ',');
        std::getline(ss, r, ',');
        std::getline(ss, c, ',');
        std::getline(ss, v, ',');
        if (r == "1" && c == "1") {
            out[q] = std::stod(v);
        }
    }
    return out;
}

} // namespace

TEST(ParseConfig, MinimalHeatConfig) {
    const ScenarioConfig cfg = parse_config(kHeatConfig);
    EXPECT_EQ(cfg.kind, ScenarioKind::heat_ode);
    EXPECT_EQ(cfg.heat.mu, 10.0);
    EXPECT_EQ(cfg.heat.a2(1, 1), -2.0);
    EXPECT_EQ(cfg.heat.quadrature.rule, ModalRule::right_riemann);
    EXPECT_EQ(cfg.heat.x2_0.size(), 2);
    EXPECT_EQ(cfg.name, "heat");
}

TEST(ParseConfig, MissingFieldIsNamed) {
    const auto issues = issues_of(replace(kHeatConfig, "  b2: [[1], [1]]\n", ""));
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("plant.b2"), std::string::npos) << issues[0];
}

TEST(ParseConfig, CflViolationCitesRule) {
    const auto issues = issues_of(replace(kHeatConfig, "dt: 4.0e-5", "dt: 1.0e-4"));
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("simulation.dt"), std::string::npos);
    EXPECT_NE(issues[0].find("dt <= dx^2/2"), std::string::npos) << issues[0];
}

TEST(ParseConfig, CollectsAllErrors) {
    std::string text = replace(kHeatConfig, "  b2: [[1], [1]]\n", "");
    text = replace(text, "dt: 4.0e-5", "dt: 1.0e-4");
    text = replace(text, "poles: [-2]", "poles: [-2, -3]");
    text = replace(text, "modal_quadrature: grid", "modal_quadrature: simpson");
    const auto issues = issues_of(text);
    EXPECT_EQ(issues.size(), 4u);
    EXPECT_TRUE(any_contains(issues, "plant.b2"));
    EXPECT_TRUE(any_contains(issues, "dt <= dx^2/2"));
    EXPECT_TRUE(any_contains(issues, "design.poles"));
    EXPECT_TRUE(any_contains(issues, "design.modal_quadrature"));
}

TEST(ParseConfig, SyntaxErrorHasLineAndColumn) {
    const auto issues = issues_of("kind: heat_ode\nplant:\n  mu: [1, 2\n");
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("syntax error at line"), std::string::npos) << issues[0];
    EXPECT_NE(issues[0].find("column"), std::string::npos);
}

TEST(ParseConfig, ShapeAndValueErrors) {
    EXPECT_TRUE(any_contains(issues_of(replace(kHeatConfig, "c2: [[1, 1]]", "c2: [[1, 1, 1]]")), "plant.c2"));
    EXPECT_TRUE(any_contains(issues_of(replace(kHeatConfig, "a2: [[-1, 0], [0, -2]]", "a2: [[-1, 0], [0]]")),
                             "plant.a2[1]"));
    EXPECT_TRUE(any_contains(issues_of(replace(kHeatConfig, "mu: 10", "mu: ten")), "'ten' is not a number"));
    EXPECT_TRUE(any_contains(issues_of(replace(kHeatConfig, "name: heat", "name: heat\ncolour: red")), "colour"));
    EXPECT_TRUE(any_contains(issues_of(replace(kHeatConfig, "kind: heat_ode", "kind: wave")), "kind"));
    EXPECT_TRUE(any_contains(issues_of("- 1\n- 2\n"), "top level"));
}

TEST(ParseConfig, PolesAcceptConjugatePairsOnly) {
    const std::string base = kCascadeConfig;
    const ScenarioConfig ok = parse_config(replace(
        replace(base, "a1: [[1]], b1: [[1]], c2: [[1]]", "a1: [[0, 1], [0, 0]], b1: [[0], [1]], c2: [[1]]"),
        "plant_poles: [-2]", "plant_poles: [[-1, 2], [-1, -2]]"));
    ASSERT_EQ(ok.cascade.plant_poles.size(), 2u);
    EXPECT_EQ(ok.cascade.plant_poles[0], Complex(-1, 2));
    EXPECT_TRUE(any_contains(
        issues_of(replace(replace(base, "a1: [[1]], b1: [[1]], c2: [[1]]",
                                  "a1: [[0, 1], [0, 0]], b1: [[0], [1]], c2: [[1]]"),
                          "plant_poles: [-2]", "plant_poles: [[-1, 2], [-1, 2]]")),
        "conjugate"));
}

TEST(ParseConfig, DelayTransportCfl) {
    const auto issues = issues_of(replace(kDelayConfig, "dt: 0.01", "dt: 0.02"));
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("dt <= dx"), std::string::npos) << issues[0];
    EXPECT_TRUE(any_contains(issues_of(replace(kDelayConfig, "design: {k: [[-2]]}", "design: {}")), "design"));
}

TEST(Run, HeatSynthesizeWritesReferenceGains) {
    const auto dir = scratch();
    const RunOutcome r = run(Command::synthesize, parse_config(kHeatConfig), dir);
    ASSERT_EQ(r.exit_code, 0) << r.report;
    ASSERT_EQ(r.artifacts.size(), 1u);
    const auto g = first_entries(dir / "heat_gains.csv");
    EXPECT_NEAR(g.at("Lambda_N"), 7.5326, 1e-4);
    EXPECT_NEAR(g.at("B_N"), 0.3130, 2e-3);
    EXPECT_NEAR(g.at("L_N"), -30.4541, 5e-2);
}

TEST(Run, DelayVerifyPasses) {
    const auto dir = scratch();
    const RunOutcome r = run(Command::verify, parse_config(kDelayConfig), dir);
    EXPECT_EQ(r.exit_code, 0) << r.report;
    EXPECT_EQ(r.report.find("FAIL"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "delay_verify.txt"));
}

TEST(Run, SeparationViolationNamesHypothesis) {
    // A2 = mu - lambda_1 puts an actuator eigenvalue on the first heat mode.
    const std::string text = R"(
kind: heat_ode
plant: {mu: 1, a2: [[-1.4674011002723395]], b2: [[1]], c2: [[1]]}
design: {poles: []}
)";
    const RunOutcome r = run(Command::synthesize, parse_config(text), scratch());
    EXPECT_EQ(r.exit_code, exit_design);
    EXPECT_NE(r.report.find("spectrum-separation"), std::string::npos) << r.report;
}

TEST(Run, StagedDesignErrorCarriesStage) {
    const std::string text = replace(kCascadeConfig, "b2: [[1]]", "b2: [[0]]");
    const RunOutcome r = run(Command::synthesize, parse_config(text), scratch());
    EXPECT_EQ(r.exit_code, exit_design);
    EXPECT_NE(r.report.find("stage (a)"), std::string::npos) << r.report;
    EXPECT_NE(r.report.find("controllability"), std::string::npos) << r.report;
}

TEST(Run, VerifyStatusFollowsChecks) {
    EXPECT_EQ(verify_status({check_at_most("a", 1.0, 2.0)}), exit_ok);
    EXPECT_EQ(verify_status({check_at_most("a", 1.0, 2.0), check_at_most("b", 3.0, 2.0)}), exit_design);
}

TEST(Run, CascadeCommands) {
    const auto dir = scratch();
    const ScenarioConfig cfg = parse_config(kCascadeConfig);
    const auto g = (run(Command::synthesize, cfg, dir), first_entries(dir / "cascade_gains.csv"));
    EXPECT_NEAR(g.at("K2"), -2.0, 1e-12);
    EXPECT_NEAR(g.at("S"), 0.25, 1e-12);
    EXPECT_NEAR(g.at("K1"), -12.0, 1e-10);
    EXPECT_EQ(run(Command::verify, cfg, dir).exit_code, 0);
    const RunOutcome spec = run(Command::spectrum, cfg, dir);
    EXPECT_EQ(slurp(dir / "cascade_spectrum.csv"), "set,index,re,im\nclosed_loop,1,-2,0\nclosed_loop,2,-3,0\n");
    EXPECT_EQ(spec.exit_code, 0);
    const RunOutcome sim = run(Command::simulate, cfg, dir);
    EXPECT_EQ(sim.exit_code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "cascade_lines.gp"));
    EXPECT_FALSE(std::filesystem::exists(dir / "cascade_surface.gp"));
}

TEST(Run, HeatSpectrumListsGalerkinEigenvalues) {
    const auto dir = scratch();
    const RunOutcome r = run(Command::spectrum, parse_config(kHeatConfig), dir);
    ASSERT_EQ(r.exit_code, 0) << r.report;
    std::istringstream is(slurp(dir / "heat_spectrum.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(is, line);
    while (std::getline(is, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 60u);
    EXPECT_NE(r.report.find("\n  -2\n"), std::string::npos);
}

TEST(Run, ClosedLoopHeatSimulationEmitsTwoScripts) {
    const auto dir = scratch();
    std::string text = replace(kHeatConfig, "dx: 0.01", "dx: 0.05");
    text = replace(text, "dt: 4.0e-5", "dt: 1.0e-3");
    text = replace(text, "t_end: 1", "t_end: 0.5\n  loops: closed");
    const RunOutcome r = run(Command::simulate, parse_config(text), dir);
    ASSERT_EQ(r.exit_code, 0) << r.report;
    std::size_t scripts = 0;
    for (const auto& p : r.artifacts) {
        scripts += p.extension() == ".gp" ? 1 : 0;
    }
    EXPECT_EQ(scripts, 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "heat_closed_surface.gp"));
    EXPECT_TRUE(std::filesystem::exists(dir / "heat_closed_lines.gp"));
    EXPECT_FALSE(std::filesystem::exists(dir / "heat_open.csv"));
}

TEST(Run, OutputsAreDeterministic) {
    const auto a = scratch() / "a";
    const auto b = a.parent_path() / "b";
    const ScenarioConfig cfg = parse_config(kDelayConfig);
    for (auto cmd : {Command::synthesize, Command::verify, Command::simulate, Command::spectrum}) {
        const RunOutcome ra = run(cmd, cfg, a);
        const RunOutcome rb = run(cmd, cfg, b);
        ASSERT_EQ(ra.artifacts.size(), rb.artifacts.size());
        EXPECT_EQ(ra.report, rb.report);
        for (std::size_t i = 0; i < ra.artifacts.size(); ++i) {
            EXPECT_EQ(slurp(ra.artifacts[i]), slurp(rb.artifacts[i])) << ra.artifacts[i];
        }
    }
}

TEST(Run, MissingConfigFileIsIoError) {
    const RunOutcome r = run_file(Command::verify, scratch() / "nope.yaml");
    EXPECT_EQ(r.exit_code, exit_io);
}

TEST(Run, InvalidConfigFileIsValidationError) {
    const auto path = scratch() / "bad.yaml";
    std::ofstream(path) << replace(kHeatConfig, "  b2: [[1], [1]]\n", "");
    const RunOutcome r = run_file(Command::verify, path);
    EXPECT_EQ(r.exit_code, exit_validation);
    EXPECT_NE(r.report.find("b2"), std::string::npos);
}

TEST(Run, BatchKeepsInputOrder) {
    const auto dir = scratch();
    std::ofstream(dir / "one.yaml") << kDelayConfig;
    std::ofstream(dir / "two.yaml") << kCascadeConfig;
    std::ofstream(dir / "three.yaml") << "kind: [\n";
    const auto results =
        run_batch(Command::spectrum, {dir / "one.yaml", dir / "two.yaml", dir / "three.yaml"}, dir / "out", 3);
    ASSERT_EQ(results.size(), 3u);
    EXPECT_EQ(results[0].exit_code, 0);
    EXPECT_NE(results[0].report.find("A1 + B1 K"), std::string::npos);
    EXPECT_EQ(results[1].exit_code, 0);
    EXPECT_NE(results[1].report.find("closed-loop matrix"), std::string::npos);
    EXPECT_EQ(results[2].exit_code, exit_validation);
}

TEST(ExitCodes, MapErrorKinds) {
    EXPECT_EQ(exit_code_for(ErrorKind::validation), 1);
    EXPECT_EQ(exit_code_for(ErrorKind::design), 2);
    EXPECT_EQ(exit_code_for(ErrorKind::numerical), 3);
    EXPECT_EQ(exit_code_for(ErrorKind::io), 4);
}

TEST(PlotScript, EmptyResultPlotsEmptyAxes) {
    const auto dir = scratch();
    const ExportedFiles files = export_csv(SimResult{}, dir, "empty");
    const auto surface = emit_plot_script(files, PlotStyle::surface);
    const auto lines = emit_plot_script(files, PlotStyle::lines);
    EXPECT_EQ(surface.filename(), "empty_surface.gp");
    EXPECT_NE(slurp(surface).find("splot 1/0"), std::string::npos);
    EXPECT_NE(slurp(lines).find("plot 1/0"), std::string::npos);
}

TEST(PlotScript, ReferencesCsvByRelativeName) {
    const auto dir = scratch();
    SimResult r;
    r.times = {0.0, 0.5};
    r.energy = {1.0, 0.5};
    r.u = {0.0, -1.0};
    r.x2 = {Vector::Ones(2), Vector::Zero(2)};
    r.grid = {0.0, 0.5, 1.0};
    r.snapshots = {{0.0, 1.0, 0.0}, {0.0, 0.5, 0.0}};
    const ExportedFiles files = export_csv(r, dir, "run");
    const std::string surface = plot_script_text(files, PlotStyle::surface);
    const std::string lines = plot_script_text(files, PlotStyle::lines);
    EXPECT_NE(surface.find("'run_snapshots.csv'"), std::string::npos);
    EXPECT_EQ(surface.find(dir.string()), std::string::npos);
    EXPECT_NE(surface.find("for [j=2:4:1]"), std::string::npos);
    EXPECT_NE(lines.find("using 1:4 with lines title 'x2_1'"), std::string::npos);
    EXPECT_NE(lines.find("using 1:5 with lines title 'x2_2'"), std::string::npos);
    EXPECT_EQ(surface, plot_script_text(files, PlotStyle::surface));
}

TEST(PlotScript, MissingCsvIsIoError) {
    const auto dir = scratch();
    const ExportedFiles files{dir / "gone.csv", dir / "gone_snapshots.csv"};
    EXPECT_THROW(plot_script_text(files, PlotStyle::lines), IoError);
    EXPECT_THROW(emit_plot_script(files, PlotStyle::surface), IoError);
}
