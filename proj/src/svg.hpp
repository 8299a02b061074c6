#pragma once

// Minimal SVG rendering for figure previews: line charts and categorical
// heatmaps. Output is deterministic for identical input.

#include <string>
#include <vector>

namespace geneft::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string line_chart(const Axes& axes, const std::vector<Series>& series);

struct Category {
  std::string name;
  std::string color;  // any SVG color
};

/// Grid of categorical cells. `cells[row][col]` indexes into `categories`
/// (-1 leaves the cell blank); rows follow `y_ticks` bottom to top.
std::string heatmap(const Axes& axes, const std::vector<std::string>& x_ticks, const std::vector<std::string>& y_ticks,
                    const std::vector<std::vector<int>>& cells, const std::vector<Category>& categories);

}  // namespace geneft::svg
