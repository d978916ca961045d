#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gfpk/chaos_basis.hpp"
#include "gfpk/quadrature.hpp"

namespace gfpk {

/// Density with respect to gamma_k, rho = sum_alpha c_alpha h_alpha.
/// The zero coefficient is exactly one, so rho integrates to one against gamma.
class ChaosDensity {
 public:
  ChaosDensity(BasisPtr basis, Eigen::VectorXd coefficients);

  /// rho = 1, the density of gamma itself.
  static ChaosDensity constant(BasisPtr basis);

  /// exp(<h, x> - |h|^2 / 2) truncated to the basis; c_alpha = prod h_i^a_i / sqrt(a_i!).
  static ChaosDensity cameron_martin(BasisPtr basis, std::span<const double> shift);

  const BasisPtr& basis() const { return basis_; }
  const ChaosBasis& chaos_basis() const { return *basis_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  int dimension() const { return basis_->dimension(); }

  /// Sum of squared coefficients; the L^2(gamma) norm squared by Parseval.
  double l2_norm_squared() const { return coefficients_.squaredNorm(); }

  double evaluate(std::span<const double> x) const;
  Eigen::VectorXd evaluate_all(const Eigen::MatrixXd& points) const;

  /// Exact gradient from d_i h_alpha = sqrt(alpha_i) h_{alpha - e_i}.
  Eigen::VectorXd gradient(std::span<const double> x) const;

  /// Coefficient of the multi-index, zero when it lies outside the basis.
  double coefficient(std::span<const int> exponents) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd coefficients_;
};

double evaluate(const ChaosDensity& rho, std::span<const double> x);

/// Sum_i w_i f(x_i) rho(x_i). Throws NumericError at the first non-finite f.
double integrate(const ChaosDensity& rho, const std::function<double(std::span<const double>)>& f,
                 const WeightedNodes& grid);

/// Marginal on the kept coordinates (0-based, any order; kept in ascending
/// order in the result). Degree of the parent basis is preserved.
ChaosDensity marginal(const ChaosDensity& rho, std::span<const int> keep);

/// Product density rho(x_1..x_m) on the first m coordinates of a larger basis.
ChaosDensity embed(const ChaosDensity& rho, BasisPtr target);

/// L^2(gamma) distance of two densities on the same basis dimension.
double l2_distance(const ChaosDensity& a, const ChaosDensity& b);

/// Nonnegative probability measure supported on quadrature nodes.
struct PointMeasure {
  Eigen::MatrixXd points;   // k x n
  Eigen::VectorXd weights;  // sums to one
  double clip_defect = 0.0; // negative mass removed before renormalization

  int dimension() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }

  /// Law of coordinate i, merged over coincident coordinate values. Missing
  /// coordinates (i >= dimension) are the point mass at zero.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> coordinate_law(int i) const;

  static PointMeasure dirac(Eigen::VectorXd point);
};

inline constexpr double kMinPositiveMass = 0.5;

/// Clip node values at zero and renormalize. Throws DegeneracyError when the
/// positive mass is below one half.
PointMeasure as_measure(const ChaosDensity& rho, const WeightedNodes& grid);
PointMeasure as_measure(const WeightedNodes& grid, std::span<const double> node_values);

nlohmann::json to_json(const ChaosDensity& rho);
ChaosDensity density_from_json(const nlohmann::json& doc);
std::string dump_density(const ChaosDensity& rho);

}  // namespace gfpk
