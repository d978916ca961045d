#pragma once

// Finite-dimensional ladder k = 1..K for componentwise-bounded drifts. Each
// level solves the k-dimensional nonlinear problem for the truncated drift v^k
// and certifies int V dmu_k <= (2 + C^2) T for V(x) = sum_n alpha_n x_n^2.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfpk/density.hpp"
#include "gfpk/drift.hpp"
#include "gfpk/nonlinear_fpk.hpp"
#include "gfpk/test_function.hpp"

namespace gfpk {

struct LadderConfig {
  std::vector<double> weights;    // alpha_1..alpha_nmax, geometric decay enforced
  double max_ratio = 0.5;         // alpha_{n+1} / alpha_n <= max_ratio < 1
  double bound = 0.0;             // componentwise drift bound C
  int max_dimension = 1;          // K
  std::vector<int> degrees;       // N_k, one per level or a single shared value
  std::vector<int> quadrature;    // Q_k, same convention
  FixedPointOptions fixed_point;
  std::vector<double> tail_levels{1.0, 2.0, 4.0};
  std::vector<TestFunction> battery;  // empty: default_battery(K)

  /// alpha_n = 4^{-n} for n <= nmax.
  static std::vector<double> default_weights(int nmax);

  void validate() const;
  int degree(int k) const;
  int nodes(int k) const;
  /// T = sum of the listed weights plus the geometric tail bound.
  double total_weight() const;
  double tail_bound() const;
};

struct LadderLevel {
  int k = 0;
  std::optional<ChaosDensity> density;
  int iterations = 0;
  double moment = 0.0;          // int V dmu_k from the chaos coefficients
  double moment_measure = 0.0;  // same integral over as_measure(mu_k)
  double quad_error = 0.0;      // |moment - moment_measure| + clip defect * max V on the grid
  double bound = 0.0;           // (2 + C^2) T
  bool pass = false;
  std::optional<double> distance_next;
  std::vector<double> tail_mass;   // mu_k(V > R)
  std::vector<double> chebyshev;   // moment_measure / R, the Markov bound
};

struct LadderReport {
  std::vector<LadderLevel> levels;
  double total_weight = 0.0;
  double tail_bound = 0.0;
  double bound = 0.0;
  std::vector<double> tail_levels;
  bool aborted = false;
  std::string failure;
  std::string note;

  bool pass() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// sum_n alpha_n int x_n^2 rho dgamma = sum_n alpha_n (1 + sqrt(2) c_{2 e_n}).
double lyapunov_moment(const ChaosDensity& rho, std::span<const double> weights);

/// max over the battery of |int phi dmu - int phi dmu'|; tests touching
/// coordinates outside either density are skipped.
double marginal_distance(const ChaosDensity& mu, const ChaosDensity& other,
                         std::span<const TestFunction> battery);

/// x_n, x_n^2 and three bumps per coordinate n < K.
std::vector<TestFunction> default_battery(int K);

LadderReport run_ladder(const DriftField& v, const LadderConfig& cfg);

}  // namespace gfpk
