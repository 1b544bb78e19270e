#include "plot_script.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace cascadecomp::cli {

const char* style_name(PlotStyle s) { return s == PlotStyle::surface ? "surface" : "lines"; }

namespace {

struct CsvShape {
    std::vector<std::string> header;
    std::size_t rows = 0;
};

CsvShape read_shape(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("plot script needs the exported CSV", path.string());
    }
    CsvShape s;
    std::string line;
    if (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            s.header.push_back(cell);
        }
    }
    while (std::getline(is, line)) {
        if (!line.empty()) {
            ++s.rows;
        }
    }
    return s;
}

std::string stem_of(const ExportedFiles& files) { return files.trajectory.stem().string(); }

void preamble(std::ostringstream& os, const std::string& source, const std::string& png) {
    os << "# Source: " << source << "\n"
       << "# Run from this directory: gnuplot " << png.substr(0, png.size() - 4) << ".gp\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 960,720 noenhanced\n"
       << "set output '" << png << "'\n";
}

std::string surface_text(const ExportedFiles& files) {
    const CsvShape s = read_shape(files.snapshots);
    const std::string data = files.snapshots.filename().string();
    const std::string stem = stem_of(files);
    std::ostringstream os;
    preamble(os, data, stem + "_surface.png");
    os << "set xlabel 'x'\nset ylabel 't'\nset zlabel 'w(x,t)' rotate by 90\nset ticslevel 0\nunset key\n";

    const std::size_t nodes = s.header.empty() ? 0 : s.header.size() - 1;
    if (s.rows == 0 || nodes < 2) {
        os << "set xrange [0:1]\nset yrange [0:1]\nset zrange [-1:1]\n"
           << "splot 1/0 notitle\n";
        return os.str();
    }
    const double x0 = std::stod(s.header[1]);
    const double dx = std::stod(s.header[2]) - x0;
    // At most about 40 space curves keep the mesh readable.
    const std::size_t step = std::max<std::size_t>(1, nodes / 40);
    os << "set hidden3d\n"
       << "x0 = " << detail::fmt9(x0) << "\n"
       << "dx = " << detail::fmt9(dx) << "\n"
       << "splot for [j=2:" << nodes + 1 << ":" << step << "] '" << data
       << "' every ::1 using (x0 + (j-2)*dx):1:j with lines lc rgb '#1f4e79' notitle\n";
    return os.str();
}

std::string lines_text(const ExportedFiles& files) {
    const CsvShape s = read_shape(files.trajectory);
    const std::string data = files.trajectory.filename().string();
    const std::string stem = stem_of(files);
    std::vector<std::size_t> x1_cols;
    std::vector<std::size_t> x2_cols;
    for (std::size_t c = 0; c < s.header.size(); ++c) {
        if (s.header[c].starts_with("x1_")) {
            x1_cols.push_back(c + 1);
        } else if (s.header[c].starts_with("x2_")) {
            x2_cols.push_back(c + 1);
        }
    }
    const std::size_t panels = 2 + (x1_cols.empty() ? 0 : 1) + (x2_cols.empty() ? 0 : 1);

    std::ostringstream os;
    preamble(os, data, stem + "_lines.png");
    os << "set multiplot layout " << panels << ",1\n"
       << "set xlabel 't'\nset grid\n";
    if (s.rows == 0) {
        os << "set xrange [0:1]\nset yrange [0:1]\n";
        for (std::size_t p = 0; p < panels; ++p) {
            os << "plot 1/0 notitle\n";
        }
        os << "unset multiplot\n";
        return os.str();
    }
    os << "set title 'energy'\nset logscale y\n"
       << "plot '" << data << "' every ::1 using 1:2 with lines lc rgb '#1f4e79' notitle\n"
       << "unset logscale y\n"
       << "set title 'u(t)'\n"
       << "plot '" << data << "' every ::1 using 1:3 with lines lc rgb '#a33b20' notitle\n";
    auto state_panel = [&](const std::vector<std::size_t>& cols, const char* title) {
        if (cols.empty()) {
            return;
        }
        os << "set title '" << title << "'\nplot ";
        for (std::size_t i = 0; i < cols.size(); ++i) {
            os << (i == 0 ? "'" + data + "'" : std::string("''")) << " every ::1 using 1:" << cols[i]
               << " with lines title '" << s.header[cols[i] - 1] << "'" << (i + 1 < cols.size() ? ", \\\n     " : "\n");
        }
    };
    state_panel(x1_cols, "x1(t)");
    state_panel(x2_cols, "x2(t)");
    os << "unset multiplot\n";
    return os.str();
}

} // namespace

std::string plot_script_text(const ExportedFiles& files, PlotStyle style) {
    return style == PlotStyle::surface ? surface_text(files) : lines_text(files);
}

std::filesystem::path emit_plot_script(const ExportedFiles& files, PlotStyle style) {
    const std::string text = plot_script_text(files, style);
    const std::filesystem::path path =
        files.trajectory.parent_path() / (stem_of(files) + "_" + style_name(style) + ".gp");
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

} // namespace cascadecomp::cli
