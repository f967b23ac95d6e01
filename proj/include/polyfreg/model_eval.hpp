#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polyfreg/funcdata.hpp"
#include "polyfreg/mp_solver.hpp"

namespace polyfreg {

// One additive product term of a degree-l target component:
//   coefficient * g_1(t_1) * ... * g_l(t_l),
// with each univariate factor tabulated on the grid.
struct SeparableTerm {
  double coefficient = 1.0;
  std::vector<Eigen::VectorXd> factors;

  int degree() const { return static_cast<int>(factors.size()); }
};

// Analytic target u = (u_0, ..., u_p): a constant plus, per degree l >= 1,
// a sum of separable terms. Restricting targets to sums of products keeps
// every norm and cross term computable from 1-D quadratures.
struct TruthPolynomial {
  int order = 0;
  double constant = 0.0;
  std::vector<std::vector<SeparableTerm>> terms;  // terms[l-1]: degree l

  const std::vector<SeparableTerm>& degree_terms(int l) const {
    return terms[static_cast<size_t>(l - 1)];
  }
};

void validate_truth(const TruthPolynomial& truth, const Grid& grid);

// <u_l, x^{(x)l}> = sum_terms coefficient * prod_j <g_j, x>.
double truth_inner_with_tensor(const std::vector<SeparableTerm>& degree_terms,
                               const FunctionalSample& x, const Grid& grid);

// Squared L2 norm of a degree component, expanded over term pairs:
// ||sum_a c_a (x)_j g_j^a||^2 = sum_{a,b} c_a c_b prod_j <g_j^a, g_j^b>.
double truth_degree_norm_sq(const std::vector<SeparableTerm>& degree_terms,
                            const Grid& grid);

// L2 distance between the analytic target and a fitted model, computed by
// expanding everything into Gram powers and 1-D quadratures:
//   |u_0 - b_0|^2 + sum_l [ ||u_l||^2 - 2 sum_i b_{l,i} <u_l, X_i^{(x)l}>
//                           + sum_{i,s} b_{l,i} b_{l,s} c_{i,s}^l ].
// Tiny negative round-off before the square root is clamped to zero.
double l2_error(const PolyModel& model, const TruthPolynomial& truth,
                const GramMatrix& gram);

// L2 distance between two models fitted on the same dataset.
double model_l2_distance(const PolyModel& a, const PolyModel& b,
                         const GramMatrix& gram);

// Mean squared prediction error (1/N) sum_i (Y_i - pred_i)^2.
double empirical_risk(const Eigen::VectorXd& predictions,
                      const Eigen::VectorXd& responses);

// Truth specification file: CSV rows
//   degree,coefficient,factor_spec_1,...,factor_spec_degree
// where each factor spec is `cos:k` (-> cos(k t)) or `const:c`. A row with
// degree 0 sets the constant (no factor specs). Terms tabulate onto `grid`.
TruthPolynomial load_truth_csv(const std::string& path, const Grid& grid);

}  // namespace polyfreg
