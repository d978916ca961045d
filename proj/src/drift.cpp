#include "gfpk/drift.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gfpk/error.hpp"
#include "gfpk/parallel.hpp"

namespace gfpk {

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::Constant: return "constant";
    case DriftKind::Gradient: return "gradient";
    case DriftKind::Vlasov: return "vlasov";
    case DriftKind::Componentwise: return "componentwise";
    case DriftKind::Custom: return "custom";
  }
  return "unknown";
}

std::string to_string(VlasovKernel::Type type) {
  switch (type) {
    case VlasovKernel::Type::Constant: return "constant";
    case VlasovKernel::Type::Tanh: return "tanh";
    case VlasovKernel::Type::GaussianLobe: return "gaussian_lobe";
    case VlasovKernel::Type::ClippedLinear: return "clipped_linear";
  }
  return "unknown";
}

double VlasovKernel::component(int i, double z) const {
  switch (type) {
    case Type::Constant: return amplitude(i);
    case Type::Tanh: return amplitude(i) * std::tanh(z / scale);
    case Type::ClippedLinear: return amplitude(i) * std::clamp(z / scale, -1.0, 1.0);
    case Type::GaussianLobe: break;
  }
  throw ArgumentError("gaussian_lobe kernel has no separable components");
}

Eigen::VectorXd VlasovKernel::operator()(std::span<const double> z) const {
  const int k = dimension();
  if (type == Type::GaussianLobe) {
    double r2 = 0.0;
    for (int i = 0; i < k; ++i) r2 += z[i] * z[i];
    return amplitude * std::exp(-0.5 * r2 / (scale * scale));
  }
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) out(i) = component(i, z[i]);
  return out;
}

VlasovKernel VlasovKernel::truncated(int k) const {
  VlasovKernel out = *this;
  out.amplitude = amplitude.head(k);
  return out;
}

Eigen::MatrixXd vlasov_eval_batch(const VlasovKernel& kernel, const PointMeasure& mu,
                                  const Eigen::MatrixXd& points) {
  const int k = kernel.dimension();
  if (points.rows() != k) throw ArgumentError("evaluation points do not match kernel dimension");
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, n);
  if (kernel.type == VlasovKernel::Type::Constant) {
    out.colwise() = kernel.amplitude;
    return out;
  }
  if (kernel.separable()) {
    for (int i = 0; i < k; ++i) {
      const auto [values, masses] = mu.coordinate_law(i);
      parallel_for(n, [&, i](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (std::ptrdiff_t j = begin; j < end; ++j) {
          double sum = 0.0;
          for (Eigen::Index a = 0; a < values.size(); ++a) {
            sum += masses(a) * kernel.component(i, points(i, j) - values(a));
          }
          out(i, j) = sum;
        }
      });
    }
    return out;
  }
  if (mu.dimension() != k) throw ArgumentError("measure dimension does not match kernel dimension");
  parallel_for(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    std::vector<double> z(static_cast<std::size_t>(k));
    for (std::ptrdiff_t j = begin; j < end; ++j) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
      for (Eigen::Index a = 0; a < mu.size(); ++a) {
        if (mu.weights(a) == 0.0) continue;
        for (int i = 0; i < k; ++i) z[i] = points(i, j) - mu.points(i, a);
        sum += mu.weights(a) * kernel(z);
      }
      out.col(j) = sum;
    }
  });
  return out;
}

Eigen::VectorXd vlasov_eval(const VlasovKernel& kernel, const ChaosDensity& p,
                            std::span<const double> x, const QuadratureGrid& grid) {
  const PointMeasure mu = as_measure(p, grid);
  Eigen::MatrixXd point(kernel.dimension(), 1);
  for (int i = 0; i < kernel.dimension(); ++i) point(i, 0) = x[i];
  return vlasov_eval_batch(kernel, mu, point).col(0);
}

double DriftField::h_bound() const {
  if (bound_.kind == DeclaredBound::Kind::HNorm) return bound_.value;
  return bound_.value * std::sqrt(static_cast<double>(dimension_));
}

void DriftField::check_bound(const Eigen::MatrixXd& values) const {
  const double limit = bound_.value * (1.0 + 1e-9) + 1e-300;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double size = bound_.kind == DeclaredBound::Kind::HNorm
                            ? values.col(j).norm()
                            : values.col(j).cwiseAbs().maxCoeff();
    if (!(size <= limit)) {
      std::ostringstream msg;
      msg << "drift '" << name_ << "' has " << (bound_.kind == DeclaredBound::Kind::HNorm ? "|v|_H" : "max |v_n|")
          << " = " << size << " above its declared bound " << bound_.value;
      throw ContractError(msg.str());
    }
  }
}

Eigen::MatrixXd DriftField::eval_v_batch(const PointMeasure& mu, const Eigen::MatrixXd& points) const {
  if (points.rows() != dimension_) {
    throw ArgumentError("drift of dimension " + std::to_string(dimension_) +
                        " evaluated at points of dimension " + std::to_string(points.rows()));
  }
  Eigen::MatrixXd values = evaluator_(mu, points);
  check_bound(values);
  return values;
}

Eigen::VectorXd DriftField::eval_v(const PointMeasure& mu, std::span<const double> x) const {
  Eigen::MatrixXd point(dimension_, 1);
  for (int i = 0; i < dimension_; ++i) {
    if (!std::isfinite(x[i])) throw ArgumentError("drift evaluation point must be finite");
    point(i, 0) = x[i];
  }
  return eval_v_batch(mu, point).col(0);
}

Eigen::VectorXd DriftField::eval_v(const ChaosDensity& p, const QuadratureGrid& grid,
                                   std::span<const double> x) const {
  return eval_v(measure_dependent_ ? as_measure(p, grid) : PointMeasure::dirac(Eigen::VectorXd::Zero(dimension_)), x);
}

Eigen::VectorXd DriftField::eval_b(const PointMeasure& mu, std::span<const double> x) const {
  Eigen::VectorXd b = eval_v(mu, x);
  for (int i = 0; i < dimension_; ++i) b(i) -= x[i];
  return b;
}

DriftField DriftField::truncate_to_k(int k) const {
  if (k < 1 || k > dimension_) {
    throw ArgumentError("cannot truncate a " + std::to_string(dimension_) + "-component drift to k = " +
                        std::to_string(k));
  }
  if (k == dimension_) return *this;
  if (!truncator_) throw ArgumentError("drift '" + name_ + "' does not support truncation");
  return truncator_(k);
}

DriftField DriftField::with_declared_bound(DeclaredBound bound) const {
  DriftField v = *this;
  v.bound_ = bound;
  if (truncator_) {
    auto inner = truncator_;
    v.truncator_ = [inner, bound](int k) { return inner(k).with_declared_bound(bound); };
  }
  validate_bound(v);
  return v;
}

DriftField DriftField::constant(Eigen::VectorXd h) {
  if (h.size() < 1) throw ArgumentError("constant drift needs at least one component");
  DriftField v;
  v.kind_ = DriftKind::Constant;
  v.name_ = "constant";
  v.dimension_ = static_cast<int>(h.size());
  v.bound_ = {DeclaredBound::Kind::HNorm, h.norm()};
  v.evaluator_ = [h](const PointMeasure&, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd out(h.size(), points.cols());
    out.colwise() = h;
    return out;
  };
  v.truncator_ = [h](int k) { return DriftField::constant(h.head(k)); };
  validate_bound(v);
  return v;
}

DriftField DriftField::softclip_gradient(int k, double amplitude, double scale) {
  if (k < 1 || !(scale > 0.0)) throw ArgumentError("softclip gradient needs k >= 1 and scale > 0");
  DriftField v;
  v.kind_ = DriftKind::Gradient;
  v.name_ = "softclip_gradient";
  v.dimension_ = k;
  v.bound_ = {DeclaredBound::Kind::HNorm, std::abs(amplitude) * std::sqrt(static_cast<double>(k))};
  v.evaluator_ = [amplitude, scale](const PointMeasure&, const Eigen::MatrixXd& points) {
    return Eigen::MatrixXd(amplitude * (points.array() / scale).tanh());
  };
  v.truncator_ = [amplitude, scale](int j) { return DriftField::softclip_gradient(j, amplitude, scale); };
  validate_bound(v);
  return v;
}

DriftField DriftField::gradient(int k, std::function<double(std::span<const double>)> potential,
                                std::function<Eigen::VectorXd(std::span<const double>)> grad,
                                DeclaredBound bound, std::string name) {
  if (!potential || !grad) throw ArgumentError("gradient drift needs a potential and its gradient");
  DriftField v;
  v.kind_ = DriftKind::Gradient;
  v.name_ = std::move(name);
  v.dimension_ = k;
  v.bound_ = bound;
  v.evaluator_ = [k, grad](const PointMeasure&, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd out(k, points.cols());
    std::vector<double> x(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      for (int i = 0; i < k; ++i) x[i] = points(i, j);
      out.col(j) = grad(x);
    }
    return out;
  };
  validate_bound(v);
  return v;
}

DriftField DriftField::vlasov(VlasovKernel kernel) {
  if (kernel.dimension() < 1) throw ArgumentError("Vlasov kernel needs at least one component");
  if (!(kernel.scale > 0.0)) throw ArgumentError("Vlasov kernel scale must be positive");
  DriftField v;
  v.kind_ = DriftKind::Vlasov;
  v.name_ = "vlasov_" + to_string(kernel.type);
  v.dimension_ = kernel.dimension();
  v.bound_ = {DeclaredBound::Kind::HNorm, kernel.h_bound()};
  v.measure_dependent_ = kernel.type != VlasovKernel::Type::Constant;
  v.kernel_ = std::make_shared<const VlasovKernel>(kernel);
  v.evaluator_ = [kernel](const PointMeasure& mu, const Eigen::MatrixXd& points) {
    return vlasov_eval_batch(kernel, mu, points);
  };
  if (kernel.separable()) {
    v.truncator_ = [kernel](int k) { return DriftField::vlasov(kernel.truncated(k)); };
  }
  validate_bound(v);
  return v;
}

DriftField DriftField::componentwise(std::vector<ComponentEvaluator> components, double bound,
                                     bool measure_dependent, std::string name) {
  if (components.empty()) throw ArgumentError("componentwise drift needs at least one component");
  if (!(bound >= 0.0)) throw ArgumentError("componentwise bound must be non-negative");
  auto shared = std::make_shared<const std::vector<ComponentEvaluator>>(std::move(components));
  DriftField v;
  v.kind_ = DriftKind::Componentwise;
  v.name_ = std::move(name);
  v.dimension_ = static_cast<int>(shared->size());
  v.bound_ = {DeclaredBound::Kind::Componentwise, bound};
  v.measure_dependent_ = measure_dependent;
  v.components_ = shared;
  v.evaluator_ = [shared](const PointMeasure& mu, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(shared->size()), points.cols());
    for (std::size_t n = 0; n < shared->size(); ++n) {
      out.row(static_cast<Eigen::Index>(n)) = (*shared)[n](mu, points);
    }
    return out;
  };
  const std::string base = v.name_;
  v.truncator_ = [shared, bound, measure_dependent, base](int k) {
    std::vector<ComponentEvaluator> head(shared->begin(), shared->begin() + k);
    return DriftField::componentwise(std::move(head), bound, measure_dependent, base);
  };
  validate_bound(v);
  return v;
}

DriftField DriftField::tanh_chain(int components, double bound, double slope, double coupling,
                                  int active) {
  if (components < 1) throw ArgumentError("tanh chain needs at least one component");
  std::vector<ComponentEvaluator> list;
  for (int n = 0; n < components; ++n) {
    if (n >= active) {
      list.emplace_back([](const PointMeasure&, const Eigen::MatrixXd& points) {
        return Eigen::RowVectorXd::Zero(points.cols()).eval();
      });
      continue;
    }
    list.emplace_back([n, bound, slope, coupling](const PointMeasure& mu, const Eigen::MatrixXd& points) {
      const auto [values, masses] = mu.coordinate_law(n);
      Eigen::RowVectorXd out(points.cols());
      const bool has_next = n + 1 < points.rows();
      parallel_for(points.cols(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (std::ptrdiff_t j = begin; j < end; ++j) {
          const double shift = has_next ? coupling * points(n + 1, j) : 0.0;
          double sum = 0.0;
          for (Eigen::Index a = 0; a < values.size(); ++a) {
            sum += masses(a) * std::tanh(slope * (points(n, j) - values(a)) + shift);
          }
          out(j) = bound * sum;
        }
      });
      return out;
    });
  }
  return componentwise(std::move(list), bound, true, "tanh_chain");
}

DriftField DriftField::custom(int k, BatchEvaluator evaluator, DeclaredBound bound,
                              bool measure_dependent, std::string name) {
  if (!evaluator) throw ArgumentError("custom drift needs an evaluator");
  if (k < 1) throw ArgumentError("custom drift dimension must be >= 1");
  DriftField v;
  v.kind_ = DriftKind::Custom;
  v.name_ = std::move(name);
  v.dimension_ = k;
  v.bound_ = bound;
  v.measure_dependent_ = measure_dependent;
  v.evaluator_ = std::move(evaluator);
  validate_bound(v);
  return v;
}

DriftField DriftField::rotational(double amplitude, Eigen::Vector2d shift) {
  auto evaluator = [amplitude, shift](const PointMeasure&, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd out(2, points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double x1 = points(0, j);
      const double x2 = points(1, j);
      const double s = amplitude / std::sqrt(1.0 + x1 * x1 + x2 * x2);
      out(0, j) = -s * x2 + shift(0);
      out(1, j) = s * x1 + shift(1);
    }
    return out;
  };
  return custom(2, evaluator, {DeclaredBound::Kind::HNorm, std::abs(amplitude) + shift.norm()}, false,
                "rotational");
}

void validate_bound(const DriftField& v, int samples, std::uint64_t seed) {
  const int k = v.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> exponential(1.0);
  const int groups = v.measure_dependent() ? 8 : 1;
  const int per_group = (samples + groups - 1) / groups;
  try {
    for (int g = 0; g < groups; ++g) {
      PointMeasure mu;
      if (v.measure_dependent()) {
        const int atoms = 32;
        mu.points.resize(k, atoms);
        mu.weights.resize(atoms);
        for (int a = 0; a < atoms; ++a) {
          for (int i = 0; i < k; ++i) mu.points(i, a) = 2.0 * normal(rng);
          mu.weights(a) = exponential(rng);
        }
        mu.weights /= mu.weights.sum();
      } else {
        mu = PointMeasure::dirac(Eigen::VectorXd::Zero(k));
      }
      Eigen::MatrixXd points(k, per_group);
      for (int j = 0; j < per_group; ++j) {
        const double spread = j % 10 == 0 ? 25.0 : 3.0;
        for (int i = 0; i < k; ++i) points(i, j) = spread * normal(rng);
      }
      v.eval_v_batch(mu, points);
    }
  } catch (const ContractError& e) {
    throw ContractError(std::string("declared bound validation failed: ") + e.what());
  }
}

}  // namespace gfpk
