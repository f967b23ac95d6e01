#pragma once

#include <string>
#include <utility>
#include <vector>

namespace polyfreg::svg {

// One polyline. Points with a NaN coordinate split the line into segments.
struct Series {
  std::vector<std::pair<double, double>> points;
  std::string color = "#888888";
  double stroke_width = 1.0;
  bool dashed = false;
};

// A horizontal reference line with a small label at the right edge.
struct ReferenceLine {
  double y = 0.0;
  std::string label;
  std::string color = "#c03030";
};

// Minimal vector-only line chart (no raster content, standalone XML).
struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<ReferenceLine> reference_lines;
  double width = 960.0;
  double height = 600.0;

  std::string to_xml() const;
  void save(const std::string& path) const;
};

std::string xml_escape(const std::string& text);

}  // namespace polyfreg::svg
