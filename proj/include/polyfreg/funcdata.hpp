#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace polyfreg {

// Quadrature grid representing the domain interval with its measure.
// Nodes are strictly increasing inside [lower, upper]; weights are positive
// and sum to the interval length.
struct Grid {
  double lower = 0.0;
  double upper = 0.0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// Uniform nodes with composite-trapezoid weights (half weights at the two
// endpoints). The trapezoid rule is spectrally accurate for the periodic
// integrands this library works with most.
Grid build_grid(double lower, double upper, int n_nodes);

// Throws InvalidArgumentError if the grid violates its invariants.
void validate_grid(const Grid& grid);

// True when two grids describe the same quadrature (same interval, same
// node count, identical nodes).
bool same_grid(const Grid& a, const Grid& b);

// One predictor function tabulated at the grid nodes.
struct FunctionalSample {
  Eigen::VectorXd values;
  long id = 0;
};

// Tabulates f(t) at every grid node.
template <typename F>
FunctionalSample tabulate(const Grid& grid, F&& f, long id = 0) {
  FunctionalSample s;
  s.id = id;
  s.values.resize(grid.nodes.size());
  for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
    s.values[k] = f(grid.nodes[k]);
  }
  return s;
}

// A supervised functional dataset: samples X_i with scalar responses Y_i.
// kappa_bound, when set, asserts a uniform bound on the samples' L2 norms.
struct Dataset {
  Grid grid;
  std::vector<FunctionalSample> samples;
  Eigen::VectorXd responses;
  std::optional<double> kappa_bound;

  int size() const { return static_cast<int>(samples.size()); }
};

// Throws if sizes disagree, a sample does not conform to the grid, values
// are non-finite, or kappa_bound is violated.
void validate_dataset(const Dataset& data);

// Quadrature inner product <f, g> = sum_k w_k f_k g_k.
double inner_product(const FunctionalSample& f, const FunctionalSample& g,
                     const Grid& grid);

// L2 norm sqrt(<f, f>).
double l2_norm(const FunctionalSample& f, const Grid& grid);

// Pairwise inner products of the dataset's samples.
struct GramMatrix {
  Eigen::MatrixXd entries;

  int size() const { return static_cast<int>(entries.rows()); }
};

GramMatrix gram(const Dataset& data);

// Resamples a raw profile (positions, values) onto the grid nodes by
// piecewise-linear interpolation. The profile must cover the whole grid
// interval; positions must be strictly increasing.
FunctionalSample ingest_profile(const std::vector<double>& positions,
                                const std::vector<double>& values,
                                const Grid& grid, long id = 0);

// Dataset CSV input. Two layouts, distinguished by the header row:
//   long:  id,position_mm,diameter_mm[,label]   (one row per position)
//   wide:  id,label,v_1,...,v_G                 (one row per sample)
// Long profiles are resampled onto `grid`; wide rows must have exactly
// grid.size() values. Labels become the responses (0 when absent).
Dataset load_dataset_csv(const std::string& path, const Grid& grid);

// Writes a dataset in the wide layout.
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace polyfreg
