#pragma once

#include <filesystem>
#include <string>

#include "cascadecomp/pde_sim.hpp"

namespace cascadecomp::cli {

enum class PlotStyle {
    surface, // w(x, t) from the snapshot CSV
    lines,   // energy, u and the ODE states from the trajectory CSV
};

const char* style_name(PlotStyle s);

/**
 * Gnuplot script for one exported run. CSVs are referenced by file name, so
 * the script is meant to be run from the directory holding them. Runs with no
 * samples produce a script that draws empty axes. Throws IoError when a CSV
 * the style needs is missing.
 */
std::string plot_script_text(const ExportedFiles& files, PlotStyle style);

// Writes the script next to the CSVs as `<stem>_<style>.gp` and returns its path.
std::filesystem::path emit_plot_script(const ExportedFiles& files, PlotStyle style);

} // namespace cascadecomp::cli
