#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfpk/density.hpp"
#include "gfpk/drift.hpp"
#include "gfpk/error.hpp"
#include "gfpk/linear_fpk.hpp"

namespace gfpk {

struct FixedPointOptions {
  double damping = 1.0;          // theta in (0, 1]
  double tolerance = 1e-10;      // stop once ||Psi(p_m) - p_m|| <= tolerance
  int max_iterations = 200;
  std::optional<ChaosDensity> initial;  // defaults to rho = 1

  void validate() const;
};

struct FixedPointRecord {
  int iteration = 0;           // m
  double delta = 0.0;          // ||p_m - p_{m-1}||, 0 for the seed
  double psi_residual = 0.0;   // ||Psi(p_m) - p_m||
  double l2_squared = 0.0;     // ||p_m||^2
  bool in_schauder_set = false;
};

struct FixedPointTrace {
  std::vector<FixedPointRecord> records;
  double schauder_bound = 0.0;

  /// Number of damped updates applied (records minus the seed).
  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
  std::string to_csv() const;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, FixedPointTrace trace)
      : Error(message), trace_(std::move(trace)) {}
  const FixedPointTrace& trace() const { return trace_; }

 private:
  FixedPointTrace trace_;
};

struct FixedPointResult {
  ChaosDensity density;
  FixedPointTrace trace;
};

/// Damped Picard iteration p_{m+1} = (1 - theta) p_m + theta Psi(p_m). Each
/// record holds p_m and its Psi-residual; the returned density is the first
/// iterate whose residual is <= tolerance.
FixedPointResult fixed_point_solve(const DriftField& v, BasisPtr basis, const QuadratureGrid& grid,
                                   const FixedPointOptions& opts);
FixedPointResult fixed_point_solve(const DriftField& v, const GalerkinAssembler& assembler,
                                   const FixedPointOptions& opts);

/// Runs one solve per seed; never merges them.
std::vector<FixedPointResult> explore_seeds(const DriftField& v, BasisPtr basis,
                                            const QuadratureGrid& grid, FixedPointOptions opts,
                                            const std::vector<ChaosDensity>& seeds);

struct SchauderMembership {
  bool member = false;
  double margin = 0.0;  // B(C0) - ||rho||^2
  double bound = 1.0;   // B(C0)
};

SchauderMembership schauder_membership(const ChaosDensity& rho, double c0);

}  // namespace gfpk
