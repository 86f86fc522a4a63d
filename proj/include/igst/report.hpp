#pragma once

// CSV tables and SVG line plots for experiment output. Number formatting is
// fixed so that reruns reproduce files byte for byte.

#include <filesystem>
#include <string>
#include <vector>

#include "igst/benchmarks.hpp"

namespace igst {

/// "%.12g"; NaN prints as "nan".
std::string format_number(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_csv() const;
};

Table convergence_table(const std::vector<ConvergenceRow>& rows);
/// Columns s, value_numeric and value_reference when a reference exists.
Table series_table(const CutSeries& series);
Table stability_table(const std::vector<StabilityRow>& rows);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

std::string render_svg(const Plot& plot);

Plot convergence_plot(const std::vector<ConvergenceRow>& rows);
Plot series_plot(const CutSeries& series, const std::string& title);

/// Writes text to a file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace igst
