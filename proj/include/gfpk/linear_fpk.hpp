#pragma once

// Galerkin discretization of L*_{b(p,.)}(rho gamma) = 0 in the Hermite basis.
// Testing with phi = h_beta gives -|beta| c_beta + (A c)_beta = 0 with
//   A_{beta alpha} = sum_i sqrt(beta_i) int v_i(p, x) h_{beta - e_i} h_alpha dgamma,
// and c_0 = 1 moves column A_{., 0} to the right-hand side.

#include <vector>

#include <Eigen/Dense>

#include "gfpk/chaos_basis.hpp"
#include "gfpk/density.hpp"
#include "gfpk/drift.hpp"
#include "gfpk/quadrature.hpp"
#include "gfpk/test_function.hpp"

namespace gfpk {

struct GalerkinSystem {
  BasisPtr basis;
  Eigen::VectorXd ou_diagonal;  // |beta|
  Eigen::MatrixXd interaction;  // A

  /// (D - A) restricted to beta, alpha != 0.
  Eigen::MatrixXd reduced_matrix() const;
  /// A_{beta, 0}, beta != 0.
  Eigen::VectorXd reduced_rhs() const;
  /// Infinity norm of D - A.
  double norm() const;
};

inline constexpr double kMaxCondition = 1e12;

/// Caches the basis values on a quadrature grid; reused across the outer
/// fixed-point iterations.
class GalerkinAssembler {
 public:
  GalerkinAssembler(BasisPtr basis, QuadratureGrid grid);

  const BasisPtr& basis() const { return basis_; }
  const QuadratureGrid& grid() const { return grid_; }
  /// n x M matrix of h_alpha at the nodes.
  const Eigen::MatrixXd& basis_values() const { return values_; }

  /// Frozen measure fed to measure-dependent drifts: as_measure(p, grid).
  PointMeasure frozen_measure(const DriftField& v, const ChaosDensity& p) const;

  GalerkinSystem assemble(const DriftField& v, const PointMeasure& frozen) const;
  GalerkinSystem assemble(const DriftField& v, const ChaosDensity& p) const;

 private:
  BasisPtr basis_;
  QuadratureGrid grid_;
  Eigen::MatrixXd values_;
};

GalerkinSystem assemble(const DriftField& v, const ChaosDensity& p, BasisPtr basis,
                        const QuadratureGrid& grid);

struct LinearSolution {
  ChaosDensity density;
  double condition_estimate = 1.0;
  double system_norm = 0.0;
};

/// Solves the assembled system. Throws SolverError when the condition estimate
/// exceeds kMaxCondition.
LinearSolution solve_system(const GalerkinSystem& system);

/// Psi(p): the stationary density of the linear equation with drift frozen at p.
ChaosDensity solve_linear(const DriftField& v, const ChaosDensity& p, BasisPtr basis,
                          const QuadratureGrid& grid);

/// int [Delta phi - x . grad phi + v(p_frozen, x) . grad phi] rho dgamma.
/// Polynomial tests use the given grid; bumps use bump_support_grid(phi, grid).
double residual(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                const TestFunction& phi, const QuadratureGrid& grid);

struct ResidualSuite {
  double max_hermite = 0.0;       // over all h_beta, 0 < |beta| <= N
  double hermite_tolerance = 0.0; // 1e-10 (1 + ||system||)
  double max_bump = 0.0;
  double bump_tolerance = 1e-3;
  int hermite_tests = 0;
  int bump_tests = 0;
  bool pass() const { return max_hermite <= hermite_tolerance && max_bump <= bump_tolerance; }
};

/// Ten bumps spread over the coordinates (pairs of coordinates when k >= 2).
std::vector<TestFunction> default_bumps(int k, int count = 10);

ResidualSuite residual_suite(const ChaosDensity& rho, const DriftField& v,
                             const ChaosDensity& p_frozen, const QuadratureGrid& grid,
                             const std::vector<TestFunction>& bumps);

}  // namespace gfpk
