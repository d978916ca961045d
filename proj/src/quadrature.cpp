#include "gfpk/quadrature.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gfpk/error.hpp"

namespace gfpk {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix and
// weights are mu0 times the squared first eigenvector components.
void golub_welsch(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& offdiagonal,
                  double mu0, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const Eigen::Index n = diagonal.size();
  if (n == 1) {
    nodes = diagonal;
    weights = Eigen::VectorXd::Constant(1, mu0);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diagonal, offdiagonal, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericError("Jacobi eigenvalue iteration did not converge for a " + std::to_string(n) +
                       "-point rule");
  }
  nodes = solver.eigenvalues();
  weights = mu0 * solver.eigenvectors().row(0).array().square().transpose();
}

// Enforce exact reflection symmetry of a rule on a symmetric weight.
void symmetrize(Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const Eigen::Index n = nodes.size();
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index j = n - 1 - i;
    const double x = 0.5 * (nodes(j) - nodes(i));
    const double w = 0.5 * (weights(i) + weights(j));
    nodes(i) = -x;
    nodes(j) = x;
    weights(i) = w;
    weights(j) = w;
  }
  if (n % 2 == 1) nodes(n / 2) = 0.0;
}

}  // namespace

QuadratureGrid::QuadratureGrid(Eigen::VectorXd rule_nodes, Eigen::VectorXd rule_weights,
                               int dimension)
    : rule_nodes_(std::move(rule_nodes)), rule_weights_(std::move(rule_weights)) {
  const Eigen::Index q = rule_nodes_.size();
  Eigen::Index total = 1;
  for (int i = 0; i < dimension; ++i) total *= q;
  points.resize(dimension, total);
  weights.resize(total);
  // Lexicographic tensor order: the last coordinate varies fastest.
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index rest = j;
    double w = 1.0;
    for (int i = dimension - 1; i >= 0; --i) {
      const Eigen::Index a = rest % q;
      rest /= q;
      points(i, j) = rule_nodes_(a);
      w *= rule_weights_(a);
    }
    weights(j) = w;
  }
}

QuadratureGrid gauss_hermite(int nodes) {
  if (nodes < 1) throw ArgumentError("Gauss-Hermite rule needs at least one node");
  Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(nodes);
  Eigen::VectorXd off(std::max(nodes - 1, 0));
  for (int n = 1; n < nodes; ++n) off(n - 1) = std::sqrt(static_cast<double>(n));
  Eigen::VectorXd x, w;
  golub_welsch(diagonal, off, 1.0, x, w);
  symmetrize(x, w);
  w /= w.sum();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(x(i))) {
      throw NumericError("Gauss-Hermite rule with " + std::to_string(nodes) +
                         " nodes produced a non-positive weight");
    }
  }
  return QuadratureGrid(std::move(x), std::move(w), 1);
}

QuadratureGrid gauss_hermite(int nodes, int dimension, Eigen::Index cap) {
  if (dimension < 1) throw ArgumentError("grid dimension must be >= 1");
  double total = std::pow(static_cast<double>(nodes), dimension);
  if (total > static_cast<double>(cap)) {
    throw SizeError("tensor grid with " + std::to_string(static_cast<long long>(total)) +
                    " nodes exceeds the cap of " + std::to_string(cap));
  }
  auto rule = gauss_hermite(nodes);
  return QuadratureGrid(rule.rule_nodes(), rule.rule_weights(), dimension);
}

LegendreRule gauss_legendre(int nodes, double a, double b) {
  if (nodes < 1) throw ArgumentError("Gauss-Legendre rule needs at least one node");
  Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(nodes);
  Eigen::VectorXd off(std::max(nodes - 1, 0));
  for (int n = 1; n < nodes; ++n) off(n - 1) = n / std::sqrt(4.0 * n * n - 1.0);
  LegendreRule rule;
  golub_welsch(diagonal, off, 2.0, rule.nodes, rule.weights);
  symmetrize(rule.nodes, rule.weights);
  const double half = 0.5 * (b - a);
  rule.nodes = (rule.nodes.array() * half + 0.5 * (a + b)).matrix();
  rule.weights *= half;
  return rule;
}

}  // namespace gfpk
