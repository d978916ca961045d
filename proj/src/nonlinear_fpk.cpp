#include "gfpk/nonlinear_fpk.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "gfpk/diagnostics.hpp"

namespace gfpk {

void FixedPointOptions::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw ArgumentError("damping must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw ArgumentError("fixed-point tolerance must be positive");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
}

std::string FixedPointTrace::to_csv() const {
  std::string out = "iteration,delta,psi_residual,l2sq,in_schauder_set\n";
  char line[160];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%d\n", r.iteration, r.delta,
                  r.psi_residual, r.l2_squared, r.in_schauder_set ? 1 : 0);
    out += line;
  }
  return out;
}

FixedPointResult fixed_point_solve(const DriftField& v, const GalerkinAssembler& assembler,
                                   const FixedPointOptions& opts) {
  opts.validate();
  const auto& basis = assembler.basis();
  ChaosDensity p = opts.initial ? embed(*opts.initial, basis) : ChaosDensity::constant(basis);
  if (opts.initial && opts.initial->dimension() != basis->dimension()) {
    throw ArgumentError("initial density dimension does not match the basis");
  }
  FixedPointTrace trace;
  trace.schauder_bound = b1_bound(schauder_constant(v.h_bound()));
  double delta = 0.0;
  for (int m = 0;; ++m) {
    const ChaosDensity psi = solve_system(assembler.assemble(v, p)).density;
    const double residual = l2_distance(psi, p);
    const double l2 = p.l2_norm_squared();
    trace.records.push_back({m, delta, residual, l2, l2 <= trace.schauder_bound});
    if (residual <= opts.tolerance) return {std::move(p), std::move(trace)};
    if (m == opts.max_iterations) {
      char msg[200];
      std::snprintf(msg, sizeof msg,
                    "fixed-point iteration did not reach tolerance %.3g in %d iterations "
                    "(last residual %.3g); retry with smaller damping",
                    opts.tolerance, opts.max_iterations, residual);
      throw NonConvergenceError(msg, std::move(trace));
    }
    Eigen::VectorXd next = (1.0 - opts.damping) * p.coefficients() + opts.damping * psi.coefficients();
    next(0) = 1.0;
    delta = (next - p.coefficients()).norm();
    p = ChaosDensity(basis, std::move(next));
  }
}

FixedPointResult fixed_point_solve(const DriftField& v, BasisPtr basis, const QuadratureGrid& grid,
                                   const FixedPointOptions& opts) {
  return fixed_point_solve(v, GalerkinAssembler(std::move(basis), grid), opts);
}

std::vector<FixedPointResult> explore_seeds(const DriftField& v, BasisPtr basis,
                                            const QuadratureGrid& grid, FixedPointOptions opts,
                                            const std::vector<ChaosDensity>& seeds) {
  GalerkinAssembler assembler(std::move(basis), grid);
  std::vector<FixedPointResult> results;
  for (const auto& seed : seeds) {
    opts.initial = seed;
    results.push_back(fixed_point_solve(v, assembler, opts));
  }
  return results;
}

SchauderMembership schauder_membership(const ChaosDensity& rho, double c0) {
  SchauderMembership out;
  out.bound = b1_bound(c0);
  const double l2 = rho.l2_norm_squared();
  out.member = l2 <= out.bound;
  out.margin = out.bound - l2;
  return out;
}

}  // namespace gfpk
