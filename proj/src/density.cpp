#include "gfpk/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gfpk/error.hpp"

namespace gfpk {

ChaosDensity::ChaosDensity(BasisPtr basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (!basis_) throw ArgumentError("density needs a basis");
  if (static_cast<std::size_t>(coefficients_.size()) != basis_->size()) {
    throw ArgumentError("coefficient count " + std::to_string(coefficients_.size()) +
                        " does not match basis size " + std::to_string(basis_->size()));
  }
  if (coefficients_(0) != 1.0) {
    throw ArgumentError("density must have zero coefficient exactly 1 (probability normalization)");
  }
  if (!coefficients_.allFinite()) throw NumericError("density has non-finite coefficients");
}

ChaosDensity ChaosDensity::constant(BasisPtr basis) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  c(0) = 1.0;
  return ChaosDensity(std::move(basis), std::move(c));
}

ChaosDensity ChaosDensity::cameron_martin(BasisPtr basis, std::span<const double> shift) {
  const int k = basis->dimension();
  if (shift.size() != static_cast<std::size_t>(k)) {
    throw ArgumentError("Cameron-Martin shift must have one entry per coordinate");
  }
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  for (std::size_t a = 0; a < basis->size(); ++a) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) {
      const int e = (*basis)[a][i];
      v *= std::pow(shift[i], e) / std::sqrt(std::tgamma(e + 1.0));
    }
    c(static_cast<Eigen::Index>(a)) = v;
  }
  c(0) = 1.0;
  return ChaosDensity(std::move(basis), std::move(c));
}

double ChaosDensity::evaluate(std::span<const double> x) const {
  return basis_->evaluate(x).dot(coefficients_);
}

Eigen::VectorXd ChaosDensity::evaluate_all(const Eigen::MatrixXd& points) const {
  return basis_->evaluate_all(points) * coefficients_;
}

Eigen::VectorXd ChaosDensity::gradient(std::span<const double> x) const {
  const int k = dimension();
  const Eigen::RowVectorXd h = basis_->evaluate(x);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
  for (std::size_t a = 0; a < basis_->size(); ++a) {
    const double c = coefficients_(static_cast<Eigen::Index>(a));
    if (c == 0.0) continue;
    for (int i = 0; i < k; ++i) {
      if (auto low = basis_->lowered(a, i)) {
        g(i) += c * std::sqrt(static_cast<double>((*basis_)[a][i])) *
                h(static_cast<Eigen::Index>(*low));
      }
    }
  }
  return g;
}

double ChaosDensity::coefficient(std::span<const int> exponents) const {
  auto p = basis_->position(exponents);
  return p ? coefficients_(static_cast<Eigen::Index>(*p)) : 0.0;
}

double evaluate(const ChaosDensity& rho, std::span<const double> x) {
  for (double xi : x) {
    if (!std::isfinite(xi)) throw ArgumentError("evaluation point must be finite");
  }
  return rho.evaluate(x);
}

double integrate(const ChaosDensity& rho, const std::function<double(std::span<const double>)>& f,
                 const WeightedNodes& grid) {
  if (grid.dimension() != rho.dimension()) {
    throw ArgumentError("grid dimension does not match density");
  }
  const Eigen::VectorXd values = rho.evaluate_all(grid.points);
  double sum = 0.0;
  std::vector<double> x(static_cast<std::size_t>(grid.dimension()));
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    for (int i = 0; i < grid.dimension(); ++i) x[i] = grid.points(i, j);
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg << "integrand is not finite at node (";
      for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
      msg << ")";
      throw NumericError(msg.str());
    }
    sum += grid.weights(j) * fx * values(j);
  }
  return sum;
}

ChaosDensity marginal(const ChaosDensity& rho, std::span<const int> keep) {
  if (keep.empty()) throw ArgumentError("marginal needs at least one kept coordinate");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  const int k = rho.dimension();
  for (int i : kept) {
    if (i < 0 || i >= k) throw ArgumentError("marginal coordinate out of range");
  }
  if (static_cast<int>(kept.size()) == k) return rho;

  const auto& parent = rho.chaos_basis();
  auto basis = enumerate_basis(static_cast<int>(kept.size()), parent.max_degree());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  std::vector<bool> is_kept(static_cast<std::size_t>(k), false);
  for (int i : kept) is_kept[i] = true;
  std::vector<int> reduced(kept.size());
  for (std::size_t a = 0; a < parent.size(); ++a) {
    const auto& e = parent[a].exponents;
    bool dropped_zero = true;
    for (int i = 0; i < k; ++i) {
      if (!is_kept[i] && e[i] != 0) {
        dropped_zero = false;
        break;
      }
    }
    if (!dropped_zero) continue;
    for (std::size_t j = 0; j < kept.size(); ++j) reduced[j] = e[kept[j]];
    c(static_cast<Eigen::Index>(*basis->position(reduced))) = rho.coefficients()(
        static_cast<Eigen::Index>(a));
  }
  c(0) = 1.0;
  return ChaosDensity(std::move(basis), std::move(c));
}

ChaosDensity embed(const ChaosDensity& rho, BasisPtr target) {
  const int m = rho.dimension();
  if (target->dimension() < m) throw ArgumentError("embedding target has fewer coordinates");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target->size()));
  for (std::size_t a = 0; a < target->size(); ++a) {
    const auto& e = (*target)[a].exponents;
    if (std::any_of(e.begin() + m, e.end(), [](int x) { return x != 0; })) continue;
    c(static_cast<Eigen::Index>(a)) = rho.coefficient(std::span<const int>(e.data(), m));
  }
  c(0) = 1.0;
  return ChaosDensity(std::move(target), std::move(c));
}

double l2_distance(const ChaosDensity& a, const ChaosDensity& b) {
  if (a.dimension() != b.dimension()) throw ArgumentError("densities live in different dimensions");
  if (a.basis() == b.basis() || a.chaos_basis().max_degree() == b.chaos_basis().max_degree()) {
    return (a.coefficients() - b.coefficients()).norm();
  }
  const ChaosDensity& big = a.chaos_basis().size() >= b.chaos_basis().size() ? a : b;
  const ChaosDensity& small = &big == &a ? b : a;
  double sum = 0.0;
  for (std::size_t i = 0; i < big.chaos_basis().size(); ++i) {
    const double d = big.coefficients()(static_cast<Eigen::Index>(i)) -
                     small.coefficient(big.chaos_basis()[i].exponents);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> PointMeasure::coordinate_law(int i) const {
  if (i >= dimension()) return {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index j = 0; j < size(); ++j) atoms.emplace_back(points(i, j), weights(j));
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<double> values, masses;
  for (const auto& [x, w] : atoms) {
    if (!values.empty() && values.back() == x) {
      masses.back() += w;
    } else {
      values.push_back(x);
      masses.push_back(w);
    }
  }
  return {Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
          Eigen::Map<Eigen::VectorXd>(masses.data(), static_cast<Eigen::Index>(masses.size()))};
}

PointMeasure PointMeasure::dirac(Eigen::VectorXd point) {
  PointMeasure mu;
  mu.points = point;
  mu.weights = Eigen::VectorXd::Ones(1);
  return mu;
}

PointMeasure as_measure(const WeightedNodes& grid, std::span<const double> node_values) {
  if (node_values.size() != static_cast<std::size_t>(grid.size())) {
    throw ArgumentError("one value per node is required");
  }
  PointMeasure mu;
  mu.points = grid.points;
  mu.weights.resize(grid.size());
  double positive = 0.0;
  double negative = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double v = node_values[static_cast<std::size_t>(j)];
    if (!std::isfinite(v)) throw NumericError("non-finite density value at a quadrature node");
    const double m = grid.weights(j) * v;
    if (v > 0.0) {
      positive += m;
      mu.weights(j) = m;
    } else {
      negative -= m;
      mu.weights(j) = 0.0;
    }
  }
  if (positive < kMinPositiveMass) {
    throw DegeneracyError("truncated density has positive mass " + std::to_string(positive) +
                          " < 0.5; increase the basis degree or reduce the drift");
  }
  mu.weights /= positive;
  mu.clip_defect = negative;
  return mu;
}

PointMeasure as_measure(const ChaosDensity& rho, const WeightedNodes& grid) {
  if (grid.dimension() != rho.dimension()) {
    throw ArgumentError("grid dimension does not match density");
  }
  const Eigen::VectorXd values = rho.evaluate_all(grid.points);
  return as_measure(grid, std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

nlohmann::json to_json(const ChaosDensity& rho) {
  nlohmann::json doc;
  doc["k"] = rho.dimension();
  doc["N"] = rho.chaos_basis().max_degree();
  doc["ordering"] = "grlex";
  doc["coefficients"] = std::vector<double>(rho.coefficients().data(),
                                            rho.coefficients().data() + rho.coefficients().size());
  return doc;
}

ChaosDensity density_from_json(const nlohmann::json& doc) {
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "k" && key != "N" && key != "ordering" && key != "coefficients") {
        throw ArgumentError("unknown key in density document: " + key);
      }
    }
    if (doc.at("ordering").get<std::string>() != "grlex") {
      throw ArgumentError("density ordering must be grlex");
    }
    auto basis = enumerate_basis(doc.at("k").get<int>(), doc.at("N").get<int>());
    const auto values = doc.at("coefficients").get<std::vector<double>>();
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                          static_cast<Eigen::Index>(values.size()));
    return ChaosDensity(std::move(basis), std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed density document: ") + e.what());
  }
}

std::string dump_density(const ChaosDensity& rho) { return to_json(rho).dump(2) + "\n"; }

}  // namespace gfpk
