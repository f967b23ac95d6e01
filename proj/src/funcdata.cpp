#include "polyfreg/funcdata.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "polyfreg/errors.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

Grid build_grid(double lower, double upper, int n_nodes) {
  if (!(upper > lower)) {
    throw InvalidArgumentError("grid interval is empty: [" +
                               format_label(lower) + ", " +
                               format_label(upper) + "]");
  }
  if (n_nodes < 2) {
    throw InvalidArgumentError("grid needs at least 2 nodes, got " +
                               std::to_string(n_nodes));
  }
  Grid g;
  g.lower = lower;
  g.upper = upper;
  g.nodes.resize(n_nodes);
  g.weights.resize(n_nodes);
  const double h = (upper - lower) / static_cast<double>(n_nodes - 1);
  for (int k = 0; k < n_nodes; ++k) {
    g.nodes[k] = lower + h * static_cast<double>(k);
    g.weights[k] = h;
  }
  g.nodes[n_nodes - 1] = upper;  // exact endpoint regardless of rounding
  g.weights[0] *= 0.5;
  g.weights[n_nodes - 1] *= 0.5;
  return g;
}

void validate_grid(const Grid& grid) {
  const int n = grid.size();
  if (n < 2 || grid.weights.size() != grid.nodes.size()) {
    throw InvalidArgumentError("grid must have >= 2 nodes with one weight each");
  }
  if (!(grid.upper > grid.lower)) {
    throw InvalidArgumentError("grid interval is empty");
  }
  for (int k = 0; k < n; ++k) {
    if (!(grid.weights[k] > 0)) {
      throw InvalidArgumentError("grid weights must be positive");
    }
    if (grid.nodes[k] < grid.lower || grid.nodes[k] > grid.upper) {
      throw InvalidArgumentError("grid node outside interval");
    }
    if (k > 0 && !(grid.nodes[k] > grid.nodes[k - 1])) {
      throw InvalidArgumentError("grid nodes must be strictly increasing");
    }
  }
  const double total = grid.weights.sum();
  const double span = grid.upper - grid.lower;
  if (std::abs(total - span) > 1e-10 * std::abs(span)) {
    throw InvalidArgumentError("grid weights do not sum to interval length");
  }
}

bool same_grid(const Grid& a, const Grid& b) {
  return a.lower == b.lower && a.upper == b.upper &&
         a.nodes.size() == b.nodes.size() && a.nodes == b.nodes;
}

void validate_dataset(const Dataset& data) {
  validate_grid(data.grid);
  if (data.samples.empty()) {
    throw InvalidArgumentError("dataset has no samples");
  }
  if (static_cast<Eigen::Index>(data.samples.size()) != data.responses.size()) {
    throw DataShapeError("dataset has " + std::to_string(data.samples.size()) +
                         " samples but " + std::to_string(data.responses.size()) +
                         " responses");
  }
  for (const auto& s : data.samples) {
    if (s.values.size() != data.grid.nodes.size()) {
      throw DataShapeError("sample id " + std::to_string(s.id) +
                           " does not conform to the grid");
    }
    if (!s.values.allFinite()) {
      throw DataShapeError("sample id " + std::to_string(s.id) +
                           " contains non-finite values");
    }
  }
  if (!data.responses.allFinite()) {
    throw DataShapeError("responses contain non-finite values");
  }
  if (data.kappa_bound) {
    for (const auto& s : data.samples) {
      if (l2_norm(s, data.grid) > *data.kappa_bound + 1e-12) {
        throw DataShapeError("sample id " + std::to_string(s.id) +
                             " violates the declared norm bound");
      }
    }
  }
}

double inner_product(const FunctionalSample& f, const FunctionalSample& g,
                     const Grid& grid) {
  if (f.values.size() != grid.nodes.size() ||
      g.values.size() != grid.nodes.size()) {
    throw DataShapeError("inner_product: sample length does not match grid");
  }
  double acc = 0.0;
  const Eigen::Index n = grid.nodes.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    // Associate the sample product first: f_k * g_k is bitwise commutative,
    // which makes the quadrature sum exactly symmetric in (f, g).
    acc += grid.weights[k] * (f.values[k] * g.values[k]);
  }
  return acc;
}

double l2_norm(const FunctionalSample& f, const Grid& grid) {
  return std::sqrt(std::max(0.0, inner_product(f, f, grid)));
}

GramMatrix gram(const Dataset& data) {
  const int n = data.size();
  GramMatrix g;
  g.entries.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s <= i; ++s) {
      const double v = inner_product(data.samples[i], data.samples[s], data.grid);
      g.entries(i, s) = v;
      g.entries(s, i) = v;
    }
  }
  return g;
}

FunctionalSample ingest_profile(const std::vector<double>& positions,
                                const std::vector<double>& values,
                                const Grid& grid, long id) {
  if (positions.size() != values.size() || positions.size() < 2) {
    throw DataShapeError("profile needs >= 2 (position, value) pairs");
  }
  for (size_t k = 1; k < positions.size(); ++k) {
    if (!(positions[k] > positions[k - 1])) {
      throw DataShapeError("profile positions must be strictly increasing");
    }
  }
  if (positions.front() > grid.lower || positions.back() < grid.upper) {
    throw GridNotCoveredError(
        "profile covers [" + format_label(positions.front()) + ", " +
        format_label(positions.back()) + "] but the grid needs [" +
        format_label(grid.lower) + ", " + format_label(grid.upper) + "]");
  }

  FunctionalSample out;
  out.id = id;
  out.values.resize(grid.nodes.size());
  size_t seg = 0;  // invariant: positions[seg] <= t <= positions[seg+1]
  for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
    const double t = grid.nodes[k];
    while (seg + 2 < positions.size() && positions[seg + 1] < t) ++seg;
    const double t0 = positions[seg];
    const double t1 = positions[seg + 1];
    const double a = (t - t0) / (t1 - t0);
    out.values[k] = (1.0 - a) * values[seg] + a * values[seg + 1];
  }
  return out;
}

namespace {

struct RawProfile {
  std::vector<double> positions;
  std::vector<double> values;
  double label = 0.0;
};

Dataset from_profiles(const std::vector<long>& order,
                      std::map<long, RawProfile>& profiles, const Grid& grid) {
  Dataset data;
  data.grid = grid;
  data.responses.resize(static_cast<Eigen::Index>(order.size()));
  Eigen::Index i = 0;
  for (long id : order) {
    auto& p = profiles[id];
    data.samples.push_back(ingest_profile(p.positions, p.values, grid, id));
    data.responses[i++] = p.label;
  }
  validate_dataset(data);
  return data;
}

}  // namespace

Dataset load_dataset_csv(const std::string& path, const Grid& grid) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataFormatError(path + ": empty file");
  const auto header = split_csv(lines[0]);
  if (header.size() >= 3 && trim(header[0]) == "id" &&
      trim(header[1]) == "position_mm" && trim(header[2]) == "diameter_mm") {
    const bool has_label = header.size() == 4 && trim(header[3]) == "label";
    if (header.size() > 3 && !has_label) {
      throw DataFormatError(path + ": unexpected long-format header");
    }
    std::vector<long> order;
    std::map<long, RawProfile> profiles;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      const auto f = split_csv(lines[ln]);
      const std::string ctx = path + ":" + std::to_string(ln + 1);
      if (f.size() != header.size()) {
        throw DataFormatError(ctx + ": expected " +
                              std::to_string(header.size()) + " fields");
      }
      const long id = parse_long(f[0], ctx);
      if (!profiles.count(id)) order.push_back(id);
      auto& p = profiles[id];
      p.positions.push_back(parse_double(f[1], ctx));
      p.values.push_back(parse_double(f[2], ctx));
      if (has_label) p.label = parse_double(f[3], ctx);
    }
    if (order.empty()) throw DataFormatError(path + ": no data rows");
    return from_profiles(order, profiles, grid);
  }

  if (header.size() >= 3 && trim(header[0]) == "id" &&
      trim(header[1]) == "label") {
    const size_t n_vals = header.size() - 2;
    if (static_cast<Eigen::Index>(n_vals) != grid.nodes.size()) {
      throw DataFormatError(path + ": wide format has " +
                            std::to_string(n_vals) + " value columns, grid has " +
                            std::to_string(grid.nodes.size()) + " nodes");
    }
    Dataset data;
    data.grid = grid;
    std::vector<double> labels;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      const auto f = split_csv(lines[ln]);
      const std::string ctx = path + ":" + std::to_string(ln + 1);
      if (f.size() != header.size()) {
        throw DataFormatError(ctx + ": expected " +
                              std::to_string(header.size()) + " fields");
      }
      FunctionalSample s;
      s.id = parse_long(f[0], ctx);
      labels.push_back(parse_double(f[1], ctx));
      s.values.resize(static_cast<Eigen::Index>(n_vals));
      for (size_t k = 0; k < n_vals; ++k) {
        s.values[static_cast<Eigen::Index>(k)] = parse_double(f[k + 2], ctx);
      }
      data.samples.push_back(std::move(s));
    }
    if (data.samples.empty()) throw DataFormatError(path + ": no data rows");
    data.responses.resize(static_cast<Eigen::Index>(labels.size()));
    for (size_t i = 0; i < labels.size(); ++i) {
      data.responses[static_cast<Eigen::Index>(i)] = labels[i];
    }
    validate_dataset(data);
    return data;
  }

  throw DataFormatError(path + ": unrecognized header '" + lines[0] + "'");
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  out << "id,label";
  for (int k = 1; k <= data.grid.size(); ++k) out << ",v_" << k;
  out << "\n";
  for (int i = 0; i < data.size(); ++i) {
    out << data.samples[i].id << "," << format_full(data.responses[i]);
    for (Eigen::Index k = 0; k < data.samples[i].values.size(); ++k) {
      out << "," << format_full(data.samples[i].values[k]);
    }
    out << "\n";
  }
  write_file(path, out.str());
}

}  // namespace polyfreg
