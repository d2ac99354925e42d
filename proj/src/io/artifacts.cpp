#include "io/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/errors.hpp"

namespace kinetic {

std::string config_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        if (c == '\r') continue;
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create output directory: " + path);
}

CsvWriter::CsvWriter(std::string path, const std::vector<std::string>& columns,
                     const std::vector<std::pair<std::string, std::string>>& header_meta)
    : path_(std::move(path)) {
    for (const auto& [k, v] : header_meta) buffer_ += "# " + k + "=" + v + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        buffer_ += columns[i] + (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        buffer_ += format_double(values[i]) + (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) { buffer_ += line + "\n"; }

void CsvWriter::close() {
    if (closed_) return;
    write_text_file(path_, buffer_);
    closed_ = true;
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

// ---------------------------------------------------------------------------

namespace {

double nice_log(double v) { return std::log10(std::max(v, 1e-300)); }

} // namespace

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, bool logx, bool logy) {
    const int W = 760, H = 520, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double xv = logx ? nice_log(s.x[i]) : s.x[i];
            const double yv = logy ? nice_log(s.y[i]) : s.y[i];
            if (logy && s.y[i] <= 0) continue;
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    if (!(xmax > xmin)) {
        xmin -= 1;
        xmax += 1;
    }
    if (!(ymax > ymin)) {
        ymin -= 1;
        ymax += 1;
    }
    auto sx = [&](double v) { return ML + (v - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto sy = [&](double v) { return H - MB - (v - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) +
                      "' height='" + std::to_string(H) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<text x='" + std::to_string(W / 2) + "' y='24' text-anchor='middle' font-size='15'>" +
           title + "</text>\n";
    // axes
    svg += "<line x1='" + std::to_string(ML) + "' y1='" + std::to_string(H - MB) + "' x2='" +
           std::to_string(W - MR) + "' y2='" + std::to_string(H - MB) + "' stroke='black'/>\n";
    svg += "<line x1='" + std::to_string(ML) + "' y1='" + std::to_string(MT) + "' x2='" +
           std::to_string(ML) + "' y2='" + std::to_string(H - MB) + "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4;
        const double yv = ymin + (ymax - ymin) * i / 4;
        svg += "<text x='" + std::to_string(sx(xv)) + "' y='" + std::to_string(H - MB + 18) +
               "' text-anchor='middle' font-size='11'>" + (logx ? "1e" : "") +
               format_double(logx ? xv : xv).substr(0, 8) + "</text>\n";
        svg += "<text x='" + std::to_string(ML - 6) + "' y='" + std::to_string(sy(yv) + 4) +
               "' text-anchor='end' font-size='11'>" + (logy ? "1e" : "") +
               format_double(logy ? yv : yv).substr(0, 8) + "</text>\n";
    }
    int li = 0;
    for (const auto& s : series) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double xv = logx ? nice_log(s.x[i]) : s.x[i];
            if (logy && s.y[i] <= 0) continue;
            const double yv = logy ? nice_log(s.y[i]) : s.y[i];
            pts += std::to_string(sx(xv)) + "," + std::to_string(sy(yv)) + " ";
        }
        svg += "<polyline fill='none' stroke='" + s.color + "' stroke-width='1.5' points='" + pts +
               "'/>\n";
        svg += "<text x='" + std::to_string(W - MR - 8) + "' y='" + std::to_string(MT + 16 + 16 * li) +
               "' text-anchor='end' font-size='12' fill='" + s.color + "'>" + s.label + "</text>\n";
        ++li;
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

void write_pbm_mask(const std::string& path, const PhaseGrid& grid, const std::vector<char>& mask) {
    if (grid.dim() == 1) {
        const std::size_t nx = grid.num_x_cells(), nv = grid.num_v_cells();
        std::string out = "P1\n" + std::to_string(nx) + " " + std::to_string(nv) + "\n";
        for (std::size_t row = 0; row < nv; ++row) {
            const std::size_t iv = nv - 1 - row;  // v increases upward
            for (std::size_t ix = 0; ix < nx; ++ix)
                out += mask[ix * nv + iv] ? "1 " : "0 ";
            out += "\n";
        }
        write_text_file(path, out);
        return;
    }
    // d=2: dump the position projection
    const int nx = grid.nx();
    std::vector<char> px(grid.num_x_cells(), 0);
    const std::size_t Nv = grid.num_v_cells();
    for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix)
        for (std::size_t iv = 0; iv < Nv; ++iv)
            if (mask[ix * Nv + iv]) {
                px[ix] = 1;
                break;
            }
    std::string out = "P1\n" + std::to_string(nx) + " " + std::to_string(nx) + "\n";
    for (int j = nx - 1; j >= 0; --j) {
        for (int i = 0; i < nx; ++i) {
            const int mi[2] = {i, j};
            out += px[grid.x_linear(mi)] ? "1 " : "0 ";
        }
        out += "\n";
    }
    write_text_file(path, out);
}

void write_snapshot(const std::string& path, const PhaseGrid& grid, const std::vector<double>& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write snapshot: " + path);
    const char magic[8] = {'K', 'N', 'S', 'N', 'A', 'P', '0', '1'};
    out.write(magic, 8);
    const std::int32_t dims[4] = {grid.dim(), grid.nx(), grid.nv(), 0};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    const double spacing[3] = {grid.dx(), grid.dv(), grid.v_max()};
    out.write(reinterpret_cast<const char*>(spacing), sizeof spacing);
    out.write(reinterpret_cast<const char*>(field.data()),
              static_cast<std::streamsize>(field.size() * sizeof(double)));
}

std::vector<double> read_snapshot(const std::string& path, const PhaseGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read snapshot: " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "KNSNAP01", 8) != 0) throw ConfigError("bad snapshot magic: " + path);
    std::int32_t dims[4];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (dims[0] != grid.dim() || dims[1] != grid.nx() || dims[2] != grid.nv())
        throw ConfigError("snapshot dimensions do not match the grid: " + path);
    double spacing[3];
    in.read(reinterpret_cast<char*>(spacing), sizeof spacing);
    std::vector<double> field(grid.num_cells());
    in.read(reinterpret_cast<char*>(field.data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated snapshot: " + path);
    return field;
}

void write_svg_heatmap(const std::string& path, const PhaseGrid& grid, const std::vector<double>& field,
                       const std::string& title) {
    if (grid.dim() != 1) throw ContractError("svg heatmap supports d=1 fields");
    const std::size_t nx = grid.num_x_cells(), nv = grid.num_v_cells();
    double mx = 0;
    for (double v : field) mx = std::max(mx, std::abs(v));
    if (mx <= 0) mx = 1;
    const int cell = std::max<int>(1, 512 / static_cast<int>(std::max(nx, nv)));
    const int W = static_cast<int>(nx) * cell, H = static_cast<int>(nv) * cell;
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) +
                      "' height='" + std::to_string(H + 24) + "'>\n<text x='4' y='14' font-size='12'>" +
                      title + "</text>\n<g transform='translate(0,24)'>\n";
    for (std::size_t iv = 0; iv < nv; ++iv) {
        const std::size_t row = nv - 1 - iv;
        // merge horizontal runs of equal color to keep the file small
        std::size_t run_start = 0;
        auto shade = [&](std::size_t ix) {
            const double t = std::min(1.0, std::abs(field[ix * nv + iv]) / mx);
            return static_cast<int>(255 * (1.0 - t));
        };
        int cur = shade(0);
        for (std::size_t ix = 1; ix <= nx; ++ix) {
            const int s = ix < nx ? shade(ix) : -1;
            if (s != cur) {
                if (cur < 255) {
                    svg += "<rect x='" + std::to_string(run_start * cell) + "' y='" +
                           std::to_string(row * cell) + "' width='" +
                           std::to_string((ix - run_start) * cell) + "' height='" + std::to_string(cell) +
                           "' fill='rgb(" + std::to_string(cur) + "," + std::to_string(cur) + ",255)'/>\n";
                }
                run_start = ix;
                cur = s;
            }
        }
    }
    svg += "</g></svg>\n";
    write_text_file(path, svg);
}

void write_series_csv(const std::string& path, const EvolutionSeries& series,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
    std::vector<std::string> cols = {"t", "l2_distance", "norm2_sq", "mass", "dissipation", "linf",
                                     "min_value"};
    const std::size_t ncls = series.class_masses.empty() ? 0 : series.class_masses.front().size();
    for (std::size_t j = 0; j < ncls; ++j) cols.push_back("class_mass_" + std::to_string(j));
    auto meta2 = meta;
    meta2.push_back({"scheme", series.scheme_name});
    meta2.push_back({"interp", series.interp_name});
    CsvWriter csv(path, cols, meta2);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        std::vector<double> row = {series.t[i],          series.l2_dist[i], series.norm2_sq[i],
                                   series.mass[i],       series.dissipation[i],
                                   series.linf[i],       series.min_value[i]};
        for (std::size_t j = 0; j < ncls; ++j) row.push_back(series.class_masses[i][j]);
        csv.row(row);
    }
    csv.close();
}

} // namespace kinetic
