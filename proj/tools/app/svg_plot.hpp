#pragma once

#include <string>
#include <vector>

namespace augwm::app {

/// Cell (i, j) is values[i][j]; rows are drawn top to bottom.
std::string svg_heatmap(const std::string& title, const std::vector<double>& row_labels,
                        const std::vector<double>& col_labels, const std::vector<std::vector<double>>& values,
                        const std::string& row_name, const std::string& col_name);

std::string svg_bars(const std::string& title, const std::vector<std::string>& labels, const std::vector<double>& values);

struct Series {
  std::string name;
  std::vector<double> y;
};

/// x runs 1..n for every series.
std::string svg_lines(const std::string& title, const std::vector<Series>& series, double marker_x = 0.0);

}  // namespace augwm::app
