#include "gfpk/galerkin_ladder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gfpk/error.hpp"
#include "gfpk/linear_fpk.hpp"

namespace gfpk {

std::vector<double> LadderConfig::default_weights(int nmax) {
  std::vector<double> w;
  for (int n = 1; n <= nmax; ++n) w.push_back(std::pow(4.0, -n));
  return w;
}

void LadderConfig::validate() const {
  if (max_dimension < 1) throw ArgumentError("ladder needs K >= 1");
  if (static_cast<int>(weights.size()) < max_dimension) {
    throw ArgumentError("ladder needs a weight alpha_n for every n <= K");
  }
  if (!(max_ratio > 0.0 && max_ratio < 1.0)) throw ArgumentError("weight ratio cap must lie in (0, 1)");
  for (std::size_t n = 0; n < weights.size(); ++n) {
    if (!(weights[n] > 0.0)) throw ArgumentError("ladder weights must be positive");
    if (n > 0 && weights[n] > max_ratio * weights[n - 1] * (1.0 + 1e-12)) {
      throw ArgumentError("ladder weights must decay geometrically with ratio <= " + std::to_string(max_ratio));
    }
  }
  if (!(bound >= 0.0)) throw ArgumentError("componentwise bound C must be non-negative");
  auto check_list = [this](const std::vector<int>& list, const char* what) {
    if (list.size() != 1 && static_cast<int>(list.size()) != max_dimension) {
      throw ArgumentError(std::string("ladder ") + what + " must have one entry or one per level");
    }
  };
  check_list(degrees, "degrees");
  check_list(quadrature, "quadrature");
  for (double r : tail_levels) {
    if (!(r > 0.0)) throw ArgumentError("tail levels must be positive");
  }
  fixed_point.validate();
}

int LadderConfig::degree(int k) const { return degrees.size() == 1 ? degrees[0] : degrees[k - 1]; }
int LadderConfig::nodes(int k) const { return quadrature.size() == 1 ? quadrature[0] : quadrature[k - 1]; }

double LadderConfig::tail_bound() const { return weights.back() * max_ratio / (1.0 - max_ratio); }

double LadderConfig::total_weight() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum + tail_bound();
}

bool LadderReport::pass() const {
  if (aborted) return false;
  return std::all_of(levels.begin(), levels.end(), [](const LadderLevel& l) { return l.pass; });
}

nlohmann::json LadderReport::to_json() const {
  nlohmann::json doc;
  doc["T"] = total_weight;
  doc["tail_bound"] = tail_bound;
  doc["moment_bound"] = bound;
  doc["tail_levels"] = tail_levels;
  doc["aborted"] = aborted;
  if (aborted) doc["failure"] = failure;
  doc["note"] = note;
  doc["pass"] = pass();
  auto& rows = doc["levels"] = nlohmann::json::array();
  for (const auto& l : levels) {
    nlohmann::json row;
    row["k"] = l.k;
    row["iterations"] = l.iterations;
    row["moment"] = l.moment;
    row["moment_measure"] = l.moment_measure;
    row["quad_error"] = l.quad_error;
    row["bound"] = l.bound;
    row["pass"] = l.pass;
    row["distance_next"] = l.distance_next ? nlohmann::json(*l.distance_next) : nlohmann::json(nullptr);
    row["tail_mass"] = l.tail_mass;
    row["chebyshev"] = l.chebyshev;
    rows.push_back(std::move(row));
  }
  return doc;
}

std::string LadderReport::to_csv() const {
  std::string out = "k,m_k,bound,pass,d_next";
  for (double r : tail_levels) {
    char col[48];
    std::snprintf(col, sizeof col, ",tail@%g", r);
    out += col;
  }
  out += "\n";
  char cell[64];
  for (const auto& l : levels) {
    std::snprintf(cell, sizeof cell, "%d,%.17g,%.17g,%d,", l.k, l.moment, l.bound, l.pass ? 1 : 0);
    out += cell;
    if (l.distance_next) {
      std::snprintf(cell, sizeof cell, "%.17g", *l.distance_next);
      out += cell;
    }
    for (double m : l.tail_mass) {
      std::snprintf(cell, sizeof cell, ",%.17g", m);
      out += cell;
    }
    out += "\n";
  }
  return out;
}

double lyapunov_moment(const ChaosDensity& rho, std::span<const double> weights) {
  const int k = rho.dimension();
  if (rho.chaos_basis().max_degree() < 2) throw ArgumentError("Lyapunov moment needs basis degree >= 2");
  if (static_cast<int>(weights.size()) < k) throw ArgumentError("Lyapunov moment needs a weight per coordinate");
  double sum = 0.0;
  std::vector<int> e(static_cast<std::size_t>(k), 0);
  for (int n = 0; n < k; ++n) {
    e[n] = 2;
    sum += weights[n] * (1.0 + std::numbers::sqrt2 * rho.coefficient(e));
    e[n] = 0;
  }
  return sum;
}

double marginal_distance(const ChaosDensity& mu, const ChaosDensity& other,
                         std::span<const TestFunction> battery) {
  if (battery.empty()) throw ArgumentError("marginal distance needs a non-empty battery");
  const int shared = std::min(mu.dimension(), other.dimension());
  double worst = 0.0;
  for (const auto& phi : battery) {
    if (phi.max_coordinate() >= shared) continue;
    worst = std::max(worst, std::abs(expectation(mu, phi) - expectation(other, phi)));
  }
  return worst;
}

std::vector<TestFunction> default_battery(int K) {
  std::vector<TestFunction> battery;
  for (int n = 0; n < K; ++n) {
    battery.push_back(TestFunction::coordinate(n, K));
    battery.push_back(TestFunction::coordinate_square(n, K));
    for (double c : {-1.0, 0.0, 1.0}) battery.push_back(TestFunction::bump({n}, {c}, 1.0));
  }
  return battery;
}

LadderReport run_ladder(const DriftField& v, const LadderConfig& cfg) {
  cfg.validate();
  if (v.declared_bound().kind != DeclaredBound::Kind::Componentwise) {
    throw ArgumentError("ladder needs a drift with a componentwise bound");
  }
  if (v.dimension() < cfg.max_dimension) {
    throw ArgumentError("drift has fewer components than the ladder's K");
  }
  if (v.declared_bound().value > cfg.bound * (1.0 + 1e-12)) {
    throw ArgumentError("drift's declared componentwise bound exceeds the ladder's C");
  }
  LadderReport report;
  report.total_weight = cfg.total_weight();
  report.tail_bound = cfg.tail_bound();
  report.bound = (2.0 + cfg.bound * cfg.bound) * report.total_weight;
  report.tail_levels = cfg.tail_levels;
  report.note =
      "finite-dimensional levels only; the limit measure on R^infinity is not constructed and "
      "convergence is evidenced by battery distances and uniform Lyapunov moments";
  const auto battery = cfg.battery.empty() ? default_battery(cfg.max_dimension) : cfg.battery;

  std::optional<ChaosDensity> previous;
  for (int k = 1; k <= cfg.max_dimension; ++k) {
    LadderLevel level;
    level.k = k;
    level.bound = report.bound;
    try {
      const DriftField vk = v.truncate_to_k(k);
      auto basis = enumerate_basis(k, cfg.degree(k));
      const auto grid = gauss_hermite(cfg.nodes(k), k);
      FixedPointOptions opts = cfg.fixed_point;
      if (previous) opts.initial = embed(*previous, basis);
      const auto result = fixed_point_solve(vk, GalerkinAssembler(basis, grid), opts);
      const ChaosDensity& mu = result.density;
      level.iterations = result.trace.iterations();
      level.moment = lyapunov_moment(mu, cfg.weights);

      const PointMeasure measure = as_measure(mu, grid);
      Eigen::VectorXd V = Eigen::VectorXd::Zero(grid.size());
      for (int n = 0; n < k; ++n) V += cfg.weights[n] * grid.points.row(n).transpose().cwiseAbs2();
      level.moment_measure = measure.weights.dot(V);
      level.quad_error = std::abs(level.moment - level.moment_measure) + measure.clip_defect * V.maxCoeff();
      level.pass = level.moment <= report.bound + level.quad_error;
      for (double r : cfg.tail_levels) {
        double mass = 0.0;
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
          if (V(j) > r) mass += measure.weights(j);
        }
        level.tail_mass.push_back(mass);
        level.chebyshev.push_back(level.moment_measure / r);
      }
      level.density = mu;
      if (previous && !report.levels.empty()) {
        report.levels.back().distance_next = marginal_distance(*previous, mu, battery);
      }
      previous = mu;
      report.levels.push_back(std::move(level));
    } catch (const Error& e) {
      report.aborted = true;
      report.failure = "level k = " + std::to_string(k) + ": " + e.what();
      return report;
    }
  }
  return report;
}

}  // namespace gfpk
