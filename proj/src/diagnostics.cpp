#include "gfpk/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "gfpk/error.hpp"

namespace gfpk {

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json doc;
  doc["name"] = report.name;
  doc["left"] = report.left;
  doc["right"] = report.right;
  doc["pass"] = report.pass ? nlohmann::json(*report.pass) : nlohmann::json("not-applicable");
  doc["tolerance"] = report.tolerance;
  doc["inputs"] = report.inputs;
  return doc;
}

double schauder_constant(double h_bound) { return 2.0 * std::numbers::pi * h_bound; }

double sigma_infinity(double h_bound) {
  const double c0 = schauder_constant(h_bound);
  return c0 > 0.0 ? 1.0 / (c0 * c0) : std::numeric_limits<double>::infinity();
}

double b1_bound(double c0) {
  if (!(c0 >= 0.0)) throw ArgumentError("b1_bound needs C0 >= 0");
  if (c0 == 0.0) return 1.0;
  const double peak = c0 * c0;  // exponent 2u - u^2/C0^2 is maximal at u = C0^2
  if (peak > 700.0) return std::numeric_limits<double>::infinity();
  // With s = (u - C0^2) / C0 the integral of exp(2u - u^2/C0^2) over u > 0 is
  // C0 e^{C0^2} times the integral of e^{-s^2} over s > -C0, which is >= sqrt(pi)/2.
  auto f = [](double s) { return std::exp(-s * s); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err_left = 0.0;
  double err_right = 0.0;
  const double left = Rule::integrate(f, -c0, 0.0, 20, 1e-15, &err_left);
  const double right = Rule::integrate(f, 0.0, 40.0, 20, 1e-15, &err_right);
  const double integral = c0 * (left + right);
  if (!std::isfinite(integral) || err_left + err_right > 1e-8 * (left + right)) {
    throw NumericError("b1_bound quadrature did not converge for C0 = " + std::to_string(c0));
  }
  return 1.0 + 2.0 * std::exp(2.0) * std::exp(peak) * integral;
}

namespace {

double gaussian_upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// gamma_1 mass of [a, b] with infinite ends allowed.
double gaussian_mass(double a, double b) {
  if (a >= 0.0) return gaussian_upper(a) - gaussian_upper(b);
  if (b <= 0.0) return gaussian_upper(-b) - gaussian_upper(-a);
  return 1.0 - gaussian_upper(-a) - gaussian_upper(b);
}

// Mass of {x : g(x) >= t} for the one-dimensional Hermite series g.
double superlevel_mass(const std::vector<double>& series, double t) {
  constexpr double kRange = 12.0;
  constexpr int kSamples = 2400;
  const double h = 2.0 * kRange / kSamples;
  auto g = [&](double x) { return hermite_series(series, x) - t; };
  double mass = 0.0;
  double prev_x = -kRange;
  double prev = g(prev_x);
  bool inside = prev >= 0.0;
  double start = -std::numeric_limits<double>::infinity();
  boost::math::tools::eps_tolerance<double> tol(50);
  for (int s = 1; s <= kSamples; ++s) {
    const double x = -kRange + s * h;
    const double cur = g(x);
    if ((cur >= 0.0) != inside) {
      std::uintmax_t iters = 100;
      const auto [lo, hi] = boost::math::tools::toms748_solve(g, prev_x, x, prev, cur, tol, iters);
      const double root = 0.5 * (lo + hi);
      if (inside) {
        mass += gaussian_mass(start, root);
      } else {
        start = root;
      }
      inside = !inside;
    }
    prev_x = x;
    prev = cur;
  }
  if (inside) mass += gaussian_mass(start, std::numeric_limits<double>::infinity());
  return mass;
}

}  // namespace

double level_set_mass(const ChaosDensity& rho, double t, const QuadratureGrid& grid) {
  const int k = rho.dimension();
  const auto& basis = rho.chaos_basis();
  const int degree = basis.max_degree();
  const int last = k - 1;
  const Eigen::Index q = grid.nodes_per_dimension();
  Eigen::Index outer = 1;
  for (int i = 0; i < last; ++i) outer *= q;

  std::vector<double> table(static_cast<std::size_t>(std::max(last, 1) * (degree + 1)));
  std::vector<double> series(static_cast<std::size_t>(degree + 1));
  double mass = 0.0;
  for (Eigen::Index j = 0; j < outer; ++j) {
    Eigen::Index rest = j;
    double w = 1.0;
    for (int i = last - 1; i >= 0; --i) {
      const Eigen::Index a = rest % q;
      rest /= q;
      w *= grid.rule_weights()(a);
      hermite_values(degree, grid.rule_nodes()(a),
                     std::span<double>(table).subspan(static_cast<std::size_t>(i * (degree + 1)), degree + 1));
    }
    std::fill(series.begin(), series.end(), 0.0);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      double v = rho.coefficients()(static_cast<Eigen::Index>(a));
      for (int i = 0; i < last; ++i) v *= table[i * (degree + 1) + basis[a][i]];
      series[basis[a][last]] += v;
    }
    mass += w * superlevel_mass(series, t);
  }
  return mass;
}

std::vector<BoundReport> tail_check(const ChaosDensity& rho, double sigma_inf,
                                    const std::vector<double>& t_grid, const QuadratureGrid& grid) {
  if (!(sigma_inf > 0.0)) throw ArgumentError("tail_check needs sigma_inf > 0");
  if (grid.dimension() != rho.dimension()) throw ArgumentError("grid dimension does not match density");
  std::vector<BoundReport> out;
  for (double t : t_grid) {
    if (!(t > 1.0)) throw ArgumentError("tail_check levels must exceed 1");
    BoundReport r;
    r.name = "tail";
    r.left = level_set_mass(rho, t, grid);
    const double lt = std::log(t);
    r.right = std::exp(2.0) * std::exp(-sigma_inf * lt * lt);
    r.tolerance = 1e-10;
    r.pass = r.left <= r.right + r.tolerance;
    r.inputs = {{"t", t}, {"sigma_inf", sigma_inf}};
    out.push_back(std::move(r));
  }
  return out;
}

double log_moment(const ChaosDensity& rho, double alpha, const QuadratureGrid& grid) {
  if (!(alpha > 0.0 && alpha < 0.25)) throw ArgumentError("log_moment needs alpha in (0, 1/4)");
  const Eigen::VectorXd values = rho.evaluate_all(grid.points);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double f = std::max(values(j), 0.0);
    if (f > 0.0) sum += grid.weights(j) * f * std::pow(std::log1p(f), alpha);
  }
  return sum;
}

double log_moment_bracket(double v_l1, double alpha) {
  return 1.0 + v_l1 * std::pow(std::log1p(v_l1), alpha);
}

namespace {

PointMeasure frozen_measure(const DriftField& v, const ChaosDensity& p, const QuadratureGrid& grid) {
  if (!v.measure_dependent()) return PointMeasure::dirac(Eigen::VectorXd::Zero(v.dimension()));
  return as_measure(p, grid);
}

}  // namespace

double drift_l1_norm(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                     const QuadratureGrid& grid) {
  const Eigen::VectorXd values = rho.evaluate_all(grid.points);
  const Eigen::MatrixXd drift = v.eval_v_batch(frozen_measure(v, p_frozen, grid), grid.points);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    sum += grid.weights(j) * std::max(values(j), 0.0) * drift.col(j).norm();
  }
  return sum;
}

FisherReport fisher_energy(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                           const QuadratureGrid& grid) {
  const int k = rho.dimension();
  const auto& basis = rho.chaos_basis();
  const Eigen::MatrixXd h = basis.evaluate_all(grid.points);
  const Eigen::VectorXd values = h * rho.coefficients();

  FisherReport report;
  double positive_mass = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values(j) > kFisherFloor) positive_mass += grid.weights(j);
  }
  if (positive_mass < 1.0 - 1e-6) {
    report.skipped = true;
    report.reason = "density is not positive on a node set of mass >= 1 - 1e-6 (mass " +
                    std::to_string(positive_mass) + ")";
    return report;
  }
  Eigen::MatrixXd grad(values.size(), k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd lowered = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
      if (auto down = basis.lowered(a, i)) {
        lowered(static_cast<Eigen::Index>(*down)) +=
            std::sqrt(static_cast<double>(basis[a][i])) * rho.coefficients()(static_cast<Eigen::Index>(a));
      }
    }
    grad.col(i) = h * lowered;
  }
  const Eigen::MatrixXd drift = v.eval_v_batch(frozen_measure(v, p_frozen, grid), grid.points);
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double w = grid.weights(j);
    if (values(j) > kFisherFloor) report.fisher += w * grad.row(j).squaredNorm() / values(j);
    const double b2 = (drift.col(j) - grid.points.col(j)).squaredNorm();
    report.drift_energy_gamma += w * b2;
    report.drift_energy_mu += w * b2 * values(j);
  }
  return report;
}

nlohmann::json to_json(const FisherReport& report) {
  nlohmann::json doc;
  doc["name"] = "fisher";
  doc["pass"] = "not-applicable";
  if (report.skipped) {
    doc["skipped"] = report.reason;
    return doc;
  }
  doc["fisher"] = report.fisher;
  doc["drift_energy_gamma"] = report.drift_energy_gamma;
  doc["drift_energy_mu"] = report.drift_energy_mu;
  return doc;
}

}  // namespace gfpk
