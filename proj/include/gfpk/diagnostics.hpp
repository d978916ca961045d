#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfpk/density.hpp"
#include "gfpk/drift.hpp"
#include "gfpk/quadrature.hpp"

namespace gfpk {

struct BoundReport {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  /// nullopt for monitored functionals that are never asserted.
  std::optional<bool> pass;
  double tolerance = 0.0;
  std::map<std::string, double> inputs;
};

nlohmann::json to_json(const BoundReport& report);

/// C0 = 2 pi sup |v|_H.
double schauder_constant(double h_bound);
/// sigma_inf = C0^{-2}; infinity for a zero drift.
double sigma_infinity(double h_bound);

/// B(C0) = 1 + 2 e^2 int_1^inf t exp(-(ln t)^2 / C0^2) dt, by adaptive
/// Gauss-Kronrod quadrature in u = ln t. B(0) = 1.
double b1_bound(double c0);

/// Level-set masses gamma(rho >= t) against e^2 exp(-sigma (ln t)^2) for every t.
/// The last coordinate is integrated exactly between the crossings of rho = t,
/// the others with the grid's Gauss-Hermite rule.
std::vector<BoundReport> tail_check(const ChaosDensity& rho, double sigma_inf,
                                    const std::vector<double>& t_grid, const QuadratureGrid& grid);

/// gamma(rho >= t) as used by tail_check.
double level_set_mass(const ChaosDensity& rho, double t, const QuadratureGrid& grid);

/// int f (log(f + 1))^alpha dgamma with f = max(rho, 0). Monitored only.
double log_moment(const ChaosDensity& rho, double alpha, const QuadratureGrid& grid);

/// 1 + m (log(1 + m))^alpha with m = || |v|_H ||_{L^1(mu)}.
double log_moment_bracket(double v_l1, double alpha);

/// int |v(p_frozen, x)|_H rho dgamma on the grid.
double drift_l1_norm(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                     const QuadratureGrid& grid);

struct FisherReport {
  double fisher = 0.0;
  double drift_energy_gamma = 0.0;  // int |b|^2 dgamma
  double drift_energy_mu = 0.0;     // int |b|^2 rho dgamma
  bool skipped = false;
  std::string reason;
};

inline constexpr double kFisherFloor = 1e-12;

/// Fisher information int |grad rho|^2 / rho dgamma next to both drift energies.
FisherReport fisher_energy(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                           const QuadratureGrid& grid);

nlohmann::json to_json(const FisherReport& report);

}  // namespace gfpk
