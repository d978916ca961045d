#pragma once

// Drift fields b(p, x) = -x + v(p, x). The v part carries a declared bound:
// either sup |v|_H <= M (H-norm) or |v_n| <= C for every component
// (componentwise). Every evaluation re-checks the bound.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfpk/density.hpp"
#include "gfpk/quadrature.hpp"

namespace gfpk {

struct DeclaredBound {
  enum class Kind { HNorm, Componentwise };
  Kind kind = Kind::HNorm;
  double value = 0.0;
};

enum class DriftKind { Constant, Gradient, Vlasov, Componentwise, Custom };

std::string to_string(DriftKind kind);

/// Bounded convolution kernel b0 : R^k -> R^k.
///   constant:       b0(z) = a
///   tanh:           b0(z)_i = a_i tanh(z_i / s)
///   gaussian_lobe:  b0(z) = a exp(-|z|^2 / (2 s^2))
///   clipped_linear: b0(z)_i = a_i clamp(z_i / s, -1, 1)
struct VlasovKernel {
  enum class Type { Constant, Tanh, GaussianLobe, ClippedLinear };

  Type type = Type::Constant;
  Eigen::VectorXd amplitude;
  double scale = 1.0;

  int dimension() const { return static_cast<int>(amplitude.size()); }
  /// Component i depends on z_i only.
  bool separable() const { return type != Type::GaussianLobe; }
  /// sup_z |b0(z)|_2.
  double h_bound() const { return amplitude.norm(); }
  double component(int i, double z) const;
  Eigen::VectorXd operator()(std::span<const double> z) const;
  VlasovKernel truncated(int k) const;
};

std::string to_string(VlasovKernel::Type type);

/// v evaluated on a batch of points (k x n) for a frozen measure; returns k x n.
using BatchEvaluator = std::function<Eigen::MatrixXd(const PointMeasure&, const Eigen::MatrixXd&)>;
/// One component v_n on a batch; points are k x n, the measure lives on R^k and
/// coordinates beyond k are read as zero.
using ComponentEvaluator =
    std::function<Eigen::RowVectorXd(const PointMeasure&, const Eigen::MatrixXd&)>;

class DriftField {
 public:
  static DriftField constant(Eigen::VectorXd h);

  /// v = grad W for W(x) = sum_i a s log cosh(x_i / s): v_i = a tanh(x_i / s).
  static DriftField softclip_gradient(int k, double amplitude, double scale);

  /// v = grad W for a user potential; bound validated by sampling.
  static DriftField gradient(int k, std::function<double(std::span<const double>)> potential,
                             std::function<Eigen::VectorXd(std::span<const double>)> grad,
                             DeclaredBound bound, std::string name = "gradient");

  /// v(p, x) = int b0(x - y) p(dy).
  static DriftField vlasov(VlasovKernel kernel);

  /// Field given by its components, each bounded by C in absolute value.
  static DriftField componentwise(std::vector<ComponentEvaluator> components, double bound,
                                  bool measure_dependent, std::string name);

  /// v_n(mu, x) = C int tanh(s (x_n - y_n) + kappa x_{n+1}) mu(dy) for n < active,
  /// zero for the remaining components.
  static DriftField tanh_chain(int components, double bound, double slope, double coupling,
                               int active);

  static DriftField custom(int k, BatchEvaluator evaluator, DeclaredBound bound,
                           bool measure_dependent, std::string name);

  /// v(x) = a (-x_2, x_1) / sqrt(1 + |x|^2) + shift; a bounded non-gradient field.
  static DriftField rotational(double amplitude, Eigen::Vector2d shift);

  DriftKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  const DeclaredBound& declared_bound() const { return bound_; }
  /// Upper bound on sup |v|_H implied by the declared bound.
  double h_bound() const;
  bool measure_dependent() const { return measure_dependent_; }
  const VlasovKernel* kernel() const { return kernel_.get(); }

  Eigen::MatrixXd eval_v_batch(const PointMeasure& mu, const Eigen::MatrixXd& points) const;
  Eigen::VectorXd eval_v(const PointMeasure& mu, std::span<const double> x) const;
  Eigen::VectorXd eval_v(const ChaosDensity& p, const QuadratureGrid& grid,
                         std::span<const double> x) const;
  Eigen::VectorXd eval_b(const PointMeasure& mu, std::span<const double> x) const;

  /// k-dimensional restriction v^k_n = v_n, n < k.
  DriftField truncate_to_k(int k) const;

  /// Same field with a looser declared bound; re-validated by sampling.
  DriftField with_declared_bound(DeclaredBound bound) const;

 private:
  DriftField() = default;
  void check_bound(const Eigen::MatrixXd& values) const;

  DriftKind kind_ = DriftKind::Custom;
  std::string name_;
  int dimension_ = 0;
  DeclaredBound bound_;
  bool measure_dependent_ = false;
  BatchEvaluator evaluator_;
  std::shared_ptr<const VlasovKernel> kernel_;
  std::shared_ptr<const std::vector<ComponentEvaluator>> components_;
  std::function<DriftField(int)> truncator_;
};

/// Quadrature approximation of int b0(x - y) p(y) gamma(dy) through as_measure(p, grid).
Eigen::VectorXd vlasov_eval(const VlasovKernel& kernel, const ChaosDensity& p,
                            std::span<const double> x, const QuadratureGrid& grid);
Eigen::MatrixXd vlasov_eval_batch(const VlasovKernel& kernel, const PointMeasure& mu,
                                  const Eigen::MatrixXd& points);

/// Samples the field at pseudo-random points and measures; throws ContractError
/// on a bound violation.
void validate_bound(const DriftField& v, int samples = 10000, std::uint64_t seed = 0x5eed);

}  // namespace gfpk
