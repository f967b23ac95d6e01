#include "polyfreg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyfreg/errors.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg::svg {

namespace {

bool usable(const std::pair<double, double>& p) {
  return std::isfinite(p.first) && std::isfinite(p.second);
}

// Tick positions at a "nice" step (1, 2 or 5 times a power of ten).
std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> ticks;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(target - 1, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 0.5 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

std::string num(double v) {
  std::ostringstream s;
  s << format_short(v);
  return s.str();
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string LineChart::to_xml() const {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!usable(p)) continue;
      x_min = std::min(x_min, p.first);
      x_max = std::max(x_max, p.first);
      y_min = std::min(y_min, p.second);
      y_max = std::max(y_max, p.second);
    }
  }
  for (const auto& r : reference_lines) {
    y_min = std::min(y_min, r.y);
    y_max = std::max(y_max, r.y);
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    throw InvalidArgumentError("chart has no finite data points");
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double left = 72.0;
  const double right = width - 36.0;
  const double top = title.empty() ? 24.0 : 48.0;
  const double bottom = height - 56.0;
  auto px = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * (right - left);
  };
  auto py = [&](double y) {
    return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
  };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width)
      << " " << num(height) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << num(0.5 * width)
        << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"18\">"
        << xml_escape(title) << "</text>\n";
  }

  // axes
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\""
      << num(right) << "\" y2=\"" << num(bottom)
      << "\" stroke=\"#303030\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\""
      << num(left) << "\" y2=\"" << num(bottom)
      << "\" stroke=\"#303030\" stroke-width=\"1\"/>\n";
  for (double t : nice_ticks(x_min, x_max, 8)) {
    const double x = px(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\""
        << num(x) << "\" y2=\"" << num(bottom + 5)
        << "\" stroke=\"#303030\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << xml_escape(format_label(t)) << "</text>\n";
  }
  for (double t : nice_ticks(y_min, y_max, 7)) {
    const double y = py(t);
    out << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(left) << "\" y2=\"" << num(y)
        << "\" stroke=\"#303030\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(left - 9) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << xml_escape(format_label(t)) << "</text>\n";
  }
  if (!x_label.empty()) {
    out << "<text x=\"" << num(0.5 * (left + right)) << "\" y=\""
        << num(height - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << xml_escape(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    out << "<text x=\"18\" y=\"" << num(0.5 * (top + bottom))
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" transform=\"rotate(-90 18 "
        << num(0.5 * (top + bottom)) << ")\">" << xml_escape(y_label)
        << "</text>\n";
  }

  for (const auto& r : reference_lines) {
    const double y = py(r.y);
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(right) << "\" y2=\"" << num(y) << "\" stroke=\"" << r.color
        << "\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
    if (!r.label.empty()) {
      out << "<text x=\"" << num(right - 4) << "\" y=\"" << num(y - 5)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"12\" fill=\""
          << r.color << "\">" << xml_escape(r.label) << "</text>\n";
    }
  }

  for (const auto& s : series) {
    // break the polyline wherever a point is not finite
    size_t i = 0;
    while (i < s.points.size()) {
      while (i < s.points.size() && !usable(s.points[i])) ++i;
      size_t j = i;
      while (j < s.points.size() && usable(s.points[j])) ++j;
      if (j > i + 1) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"" << num(s.stroke_width) << "\"";
        if (s.dashed) out << " stroke-dasharray=\"5 3\"";
        out << " points=\"";
        for (size_t k = i; k < j; ++k) {
          if (k > i) out << " ";
          out << num(px(s.points[k].first)) << "," << num(py(s.points[k].second));
        }
        out << "\"/>\n";
      } else if (j == i + 1) {
        out << "<circle cx=\"" << num(px(s.points[i].first)) << "\" cy=\""
            << num(py(s.points[i].second)) << "\" r=\"2\" fill=\"" << s.color
            << "\"/>\n";
      }
      i = j;
    }
  }

  out << "</svg>\n";
  return out.str();
}

void LineChart::save(const std::string& path) const {
  write_file(path, to_xml());
}

}  // namespace polyfreg::svg
