#pragma once

// Reference solutions that share no numerical kernels with the chaos solver.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfpk/density.hpp"
#include "gfpk/drift.hpp"

namespace gfpk {

/// Lebesgue density of the 1-D stationary law on a uniform grid of [-L, L].
struct GridDensity1D {
  std::vector<double> x;
  std::vector<double> density;    // trapezoidal mass 1
  std::vector<double> potential;  // int_0^x v(s) ds
  double normalization = 1.0;     // Z with density = exp(-x^2/2 + potential) / Z

  /// Density relative to gamma_1 at grid point i.
  double gamma_relative(std::size_t i) const;
  double trapezoid_mass() const;
  std::string to_csv() const;
};

/// density ∝ exp(-x^2/2 + int_0^x v). The antiderivative uses three-point
/// Gauss-Legendre on every cell. Throws DomainError when the boundary density
/// exceeds 1e-12.
GridDensity1D oracle_1d(const std::function<double(double)>& v, double L = 10.0, int n_points = 20001);

/// Self-consistent Vlasov solution v(x) = int b0(x - y) mu(dy) in one
/// dimension, by fixed-point iteration of the closed form until successive
/// densities differ by < tolerance.
GridDensity1D oracle_1d_vlasov(const std::function<double(double)>& kernel, double L = 10.0,
                               int n_points = 1001, double tolerance = 1e-12, int max_iterations = 500);

/// L^2(gamma) distance between a 1-D chaos density and a grid oracle.
double l2_gamma_distance(const ChaosDensity& rho, const GridDensity1D& oracle);

struct SdeOptions {
  double dt = 1e-3;
  long n_steps = 10000;
  int n_particles = 100;
  std::uint64_t seed = 1;
  double burn_in = 0.2;
  int n_batches = 50;
  std::vector<double> lyapunov_weights;  // optional V = sum alpha_n x_n^2
};

struct SdeEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_se;
  Eigen::MatrixXd second_moment;  // E[x_i x_j]
  Eigen::MatrixXd second_moment_se;
  double lyapunov = 0.0;
  double lyapunov_se = 0.0;
};

/// Euler-Maruyama for dX = (-X + v(p_frozen, X)) dt + sqrt(2) dW with
/// time-and-ensemble averages; batch means over particle groups give the
/// standard errors. Every particle owns a stream derived from the root seed.
SdeEstimate oracle_sde(const DriftField& v_frozen, const PointMeasure& p_frozen, const SdeOptions& opts);

/// Cell-centred density on [-L, L]^2, n x n cells.
struct GridDensity2D {
  double L = 0.0;
  int n = 0;
  double h = 0.0;
  Eigen::MatrixXd density;  // (i, j) = cell (x1_i, x2_j), sum * h^2 = 1

  double center(int i) const { return -L + (i + 0.5) * h; }
  /// Marginal Lebesgue density of coordinate 0 or 1 at cell centres.
  Eigen::VectorXd marginal(int coordinate) const;
  std::string to_csv() const;
};

/// Finite-volume solve of div(grad u - b u) = 0 with zero-flux walls and
/// Scharfetter-Gummel fluxes.
GridDensity2D oracle_fd_2d(const DriftField& v_frozen, const PointMeasure& p_frozen, double L = 6.0,
                           int n = 200);

}  // namespace gfpk
