#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geometry/grid.hpp"
#include "solver/solver.hpp"

namespace kinetic {

/// FNV-1a 64-bit hash of the normalized config text, hex encoded.
std::string config_hash(const std::string& text);

std::string format_double(double v);  // round-trippable %.17g

void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

/// CSV with a `# key=value` provenance header (config hash, seed).
class CsvWriter {
public:
    CsvWriter(std::string path, const std::vector<std::string>& columns,
              const std::vector<std::pair<std::string, std::string>>& header_meta);
    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);
    void close();
    ~CsvWriter();

private:
    std::string path_;
    std::string buffer_;
    bool closed_ = false;
};

/// Simple self-contained SVG line plot (log axes optional).
struct PlotSeries {
    std::vector<double> x, y;
    std::string label;
    std::string color = "#1f77b4";
};
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, bool logx, bool logy);

/// Phase-mask bitmap (PBM P1), d=1: rows = v cells, cols = x cells.
void write_pbm_mask(const std::string& path, const PhaseGrid& grid, const std::vector<char>& mask);

/// Field snapshot: header (dims, spacing) + row-major doubles.
void write_snapshot(const std::string& path, const PhaseGrid& grid, const std::vector<double>& field);
std::vector<double> read_snapshot(const std::string& path, const PhaseGrid& grid);

/// SVG heatmap of a d=1 phase-space field (x horizontal, v vertical).
void write_svg_heatmap(const std::string& path, const PhaseGrid& grid, const std::vector<double>& field,
                       const std::string& title);

void write_series_csv(const std::string& path, const EvolutionSeries& series,
                      const std::vector<std::pair<std::string, std::string>>& meta);

} // namespace kinetic
