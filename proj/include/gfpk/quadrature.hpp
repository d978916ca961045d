#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gfpk {

/// Points (k x n, one column per node) with weights.
struct WeightedNodes {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  int dimension() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }
};

/// Gauss-Hermite rule for the standard Gaussian measure: weights sum to one.
/// The tensor grid keeps its one-dimensional generator rule.
class QuadratureGrid : public WeightedNodes {
 public:
  QuadratureGrid() = default;
  QuadratureGrid(Eigen::VectorXd rule_nodes, Eigen::VectorXd rule_weights, int dimension);

  int nodes_per_dimension() const { return static_cast<int>(rule_nodes_.size()); }
  const Eigen::VectorXd& rule_nodes() const { return rule_nodes_; }
  const Eigen::VectorXd& rule_weights() const { return rule_weights_; }

 private:
  Eigen::VectorXd rule_nodes_;
  Eigen::VectorXd rule_weights_;
};

inline constexpr Eigen::Index kDefaultGridCap = 2'000'000;

/// One-dimensional Q-point rule, exact through degree 2Q-1 against gamma_1.
QuadratureGrid gauss_hermite(int nodes);

/// Tensor product of the Q-point rule in k dimensions.
QuadratureGrid gauss_hermite(int nodes, int dimension, Eigen::Index cap = kDefaultGridCap);

/// Gauss-Legendre rule on [a, b] (weights sum to b - a).
struct LegendreRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
LegendreRule gauss_legendre(int nodes, double a = -1.0, double b = 1.0);

}  // namespace gfpk
