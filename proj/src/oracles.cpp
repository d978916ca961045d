#include "gfpk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "gfpk/error.hpp"

namespace gfpk {

namespace {

// Three-point Gauss-Legendre on [a, b].
double cell_integral(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double off = half * std::sqrt(0.6);
  return half * (5.0 * f(mid - off) + 8.0 * f(mid) + 5.0 * f(mid + off)) / 9.0;
}

std::vector<double> uniform_grid(double L, int n) {
  if (n < 3 || n % 2 == 0) throw ArgumentError("oracle grid needs an odd number of points >= 3");
  if (!(L > 0.0)) throw ArgumentError("oracle box half-width must be positive");
  std::vector<double> x(static_cast<std::size_t>(n));
  const double h = 2.0 * L / (n - 1);
  for (int i = 0; i < n; ++i) x[i] = -L + i * h;
  x[static_cast<std::size_t>(n / 2)] = 0.0;
  return x;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) sum += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return sum;
}

// Fills density/normalization from the potential; checks the boundary.
void finish(GridDensity1D& out) {
  const std::size_t n = out.x.size();
  std::vector<double> log_density(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    log_density[i] = -0.5 * out.x[i] * out.x[i] + out.potential[i];
    peak = std::max(peak, log_density[i]);
  }
  out.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.density[i] = std::exp(log_density[i] - peak);
  const double mass = trapezoid(out.x, out.density);
  for (auto& d : out.density) d /= mass;
  out.normalization = mass * std::exp(peak);
  if (out.density.front() > 1e-12 || out.density.back() > 1e-12) {
    throw DomainError("oracle box [-L, L] is too small: boundary density exceeds 1e-12");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double GridDensity1D::gamma_relative(std::size_t i) const {
  return std::exp(potential[i]) * std::sqrt(2.0 * std::numbers::pi) / normalization;
}

double GridDensity1D::trapezoid_mass() const { return trapezoid(x, density); }

std::string GridDensity1D::to_csv() const {
  std::string out = "x,density\n";
  char line[96];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", x[i], density[i]);
    out += line;
  }
  return out;
}

GridDensity1D oracle_1d(const std::function<double(double)>& v, double L, int n_points) {
  GridDensity1D out;
  out.x = uniform_grid(L, n_points);
  const auto n = out.x.size();
  const std::size_t center = n / 2;
  out.potential.assign(n, 0.0);
  for (std::size_t i = center; i + 1 < n; ++i) {
    out.potential[i + 1] = out.potential[i] + cell_integral(v, out.x[i], out.x[i + 1]);
  }
  for (std::size_t i = center; i > 0; --i) {
    out.potential[i - 1] = out.potential[i] - cell_integral(v, out.x[i - 1], out.x[i]);
  }
  for (double p : out.potential) {
    if (!std::isfinite(p)) throw NumericError("oracle drift is not finite on the box");
  }
  finish(out);
  return out;
}

GridDensity1D oracle_1d_vlasov(const std::function<double(double)>& kernel, double L, int n_points,
                               double tolerance, int max_iterations) {
  const auto x = uniform_grid(L, n_points);
  const std::size_t n = x.size();
  std::vector<double> tw(n, 2.0 * L / (n_points - 1));
  tw.front() *= 0.5;
  tw.back() *= 0.5;
  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) density[i] = std::exp(-0.5 * x[i] * x[i]) / std::sqrt(2.0 * std::numbers::pi);

  for (int it = 0; it < max_iterations; ++it) {
    auto v = [&](double s) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += tw[j] * density[j] * kernel(s - x[j]);
      return sum;
    };
    GridDensity1D next = oracle_1d(v, L, n_points);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next.density[i] - density[i]));
    density = next.density;
    if (change < tolerance) return next;
  }
  throw NumericError("self-consistent oracle did not converge");
}

double l2_gamma_distance(const ChaosDensity& rho, const GridDensity1D& oracle) {
  if (rho.dimension() != 1) throw ArgumentError("l2_gamma_distance needs a one-dimensional density");
  const std::vector<double> c(rho.coefficients().data(), rho.coefficients().data() + rho.coefficients().size());
  std::vector<double> integrand(oracle.x.size());
  for (std::size_t i = 0; i < oracle.x.size(); ++i) {
    const double d = hermite_series(c, oracle.x[i]) - oracle.gamma_relative(i);
    const double gauss = std::exp(-0.5 * oracle.x[i] * oracle.x[i]) / std::sqrt(2.0 * std::numbers::pi);
    integrand[i] = d * d * gauss;
  }
  return std::sqrt(trapezoid(oracle.x, integrand));
}

SdeEstimate oracle_sde(const DriftField& v_frozen, const PointMeasure& p_frozen, const SdeOptions& opts) {
  if (!(opts.dt > 0.0 && opts.dt <= 0.01)) throw ArgumentError("SDE step must satisfy 0 < dt <= 0.01");
  if (opts.n_particles < opts.n_batches || opts.n_batches < 2) {
    throw ArgumentError("SDE oracle needs at least two batches and one particle per batch");
  }
  if (!(opts.burn_in >= 0.0 && opts.burn_in < 1.0)) throw ArgumentError("burn-in fraction must lie in [0, 1)");
  const int k = v_frozen.dimension();
  const int particles = opts.n_particles;
  const long burn = static_cast<long>(opts.burn_in * static_cast<double>(opts.n_steps));
  const long kept = opts.n_steps - burn;
  if (kept < 1) throw ArgumentError("no SDE steps left after burn-in");
  const bool with_v = !opts.lyapunov_weights.empty();

  std::vector<std::mt19937_64> streams;
  streams.reserve(static_cast<std::size_t>(particles));
  for (int p = 0; p < particles; ++p) streams.emplace_back(splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(p))));
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd x(k, particles);
  for (int p = 0; p < particles; ++p) {
    for (int i = 0; i < k; ++i) x(i, p) = normal(streams[p]);
  }
  Eigen::MatrixXd sum_x = Eigen::MatrixXd::Zero(k, particles);
  Eigen::MatrixXd sum_xx = Eigen::MatrixXd::Zero(k * k, particles);
  Eigen::VectorXd sum_v = Eigen::VectorXd::Zero(particles);
  const double noise = std::sqrt(2.0 * opts.dt);

  for (long s = 0; s < opts.n_steps; ++s) {
    const Eigen::MatrixXd drift = v_frozen.eval_v_batch(p_frozen, x);
    for (int p = 0; p < particles; ++p) {
      for (int i = 0; i < k; ++i) {
        x(i, p) += (drift(i, p) - x(i, p)) * opts.dt + noise * normal(streams[p]);
      }
    }
    if (!(x.cwiseAbs().maxCoeff() <= 1e6)) {
      throw InstabilityError("SDE particle left |x| <= 1e6; reduce dt");
    }
    if (s < burn) continue;
    for (int p = 0; p < particles; ++p) {
      for (int i = 0; i < k; ++i) {
        sum_x(i, p) += x(i, p);
        for (int j = 0; j < k; ++j) sum_xx(i * k + j, p) += x(i, p) * x(j, p);
      }
      if (with_v) {
        double V = 0.0;
        for (int i = 0; i < k && i < static_cast<int>(opts.lyapunov_weights.size()); ++i) {
          V += opts.lyapunov_weights[i] * x(i, p) * x(i, p);
        }
        sum_v(p) += V;
      }
    }
  }

  const int batches = opts.n_batches;
  Eigen::MatrixXd batch_x = Eigen::MatrixXd::Zero(k, batches);
  Eigen::MatrixXd batch_xx = Eigen::MatrixXd::Zero(k * k, batches);
  Eigen::VectorXd batch_v = Eigen::VectorXd::Zero(batches);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(batches);
  for (int p = 0; p < particles; ++p) {
    const int b = p % batches;
    batch_x.col(b) += sum_x.col(p) / static_cast<double>(kept);
    batch_xx.col(b) += sum_xx.col(p) / static_cast<double>(kept);
    batch_v(b) += sum_v(p) / static_cast<double>(kept);
    counts(b) += 1.0;
  }
  for (int b = 0; b < batches; ++b) {
    batch_x.col(b) /= counts(b);
    batch_xx.col(b) /= counts(b);
    batch_v(b) /= counts(b);
  }
  auto mean_se = [batches](const Eigen::VectorXd& row, double& mean, double& se) {
    mean = row.mean();
    se = std::sqrt((row.array() - mean).square().sum() / (batches - 1) / batches);
  };
  SdeEstimate est;
  est.mean.resize(k);
  est.mean_se.resize(k);
  est.second_moment.resize(k, k);
  est.second_moment_se.resize(k, k);
  for (int i = 0; i < k; ++i) {
    mean_se(batch_x.row(i).transpose(), est.mean(i), est.mean_se(i));
    for (int j = 0; j < k; ++j) {
      mean_se(batch_xx.row(i * k + j).transpose(), est.second_moment(i, j), est.second_moment_se(i, j));
    }
  }
  if (with_v) mean_se(batch_v, est.lyapunov, est.lyapunov_se);
  return est;
}

Eigen::VectorXd GridDensity2D::marginal(int coordinate) const {
  return coordinate == 0 ? Eigen::VectorXd(density.rowwise().sum() * h)
                         : Eigen::VectorXd(density.colwise().sum().transpose() * h);
}

std::string GridDensity2D::to_csv() const {
  std::string out = "x1,x2,density\n";
  char line[128];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", center(i), center(j), density(i, j));
      out += line;
    }
  }
  return out;
}

namespace {

// Bernoulli function z / (e^z - 1).
double bernoulli(double z) { return z == 0.0 ? 1.0 : z / std::expm1(z); }

}  // namespace

GridDensity2D oracle_fd_2d(const DriftField& v_frozen, const PointMeasure& p_frozen, double L, int n) {
  if (v_frozen.dimension() != 2) throw ArgumentError("finite-difference oracle is two-dimensional");
  if (n < 4 || !(L > 0.0)) throw ArgumentError("finite-difference oracle needs n >= 4 and L > 0");
  GridDensity2D out;
  out.L = L;
  out.n = n;
  out.h = 2.0 * L / n;
  const double h = out.h;
  const auto index = [n](int i, int j) { return static_cast<Eigen::Index>(i) * n + j; };

  // Interior faces: normal direction d, lower cell (i, j) and its neighbour.
  const int faces_per_dir = (n - 1) * n;
  Eigen::MatrixXd face_points(2, 2 * faces_per_dir);
  for (int d = 0; d < 2; ++d) {
    for (int a = 0; a < n - 1; ++a) {
      for (int b = 0; b < n; ++b) {
        const int f = d * faces_per_dir + a * n + b;
        const double across = -L + (a + 1) * h;
        const double along = out.center(b);
        face_points(0, f) = d == 0 ? across : along;
        face_points(1, f) = d == 0 ? along : across;
      }
    }
  }
  const Eigen::MatrixXd v = v_frozen.eval_v_batch(p_frozen, face_points);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(10 * n * n));
  const Eigen::Index pinned = index(n / 2, n / 2);
  for (int d = 0; d < 2; ++d) {
    for (int a = 0; a < n - 1; ++a) {
      for (int b = 0; b < n; ++b) {
        const int f = d * faces_per_dir + a * n + b;
        const double beta = v(d, f) - face_points(d, f);
        const double lower_coeff = bernoulli(-beta * h);
        const double upper_coeff = bernoulli(beta * h);
        const Eigen::Index lo = d == 0 ? index(a, b) : index(b, a);
        const Eigen::Index hi = d == 0 ? index(a + 1, b) : index(b, a + 1);
        // Outflow of lo through the face: lower_coeff u_lo - upper_coeff u_hi.
        if (lo != pinned) {
          triplets.emplace_back(lo, lo, lower_coeff);
          triplets.emplace_back(lo, hi, -upper_coeff);
        }
        if (hi != pinned) {
          triplets.emplace_back(hi, lo, -lower_coeff);
          triplets.emplace_back(hi, hi, upper_coeff);
        }
      }
    }
  }
  triplets.emplace_back(pinned, pinned, 1.0);
  const Eigen::Index size = static_cast<Eigen::Index>(n) * n;
  Eigen::SparseMatrix<double> matrix(size, size);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(pinned) = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.analyzePattern(matrix);
  solver.factorize(matrix);
  if (solver.info() != Eigen::Success) {
    throw DiscretizationError("finite-difference system is singular beyond its constant null space");
  }
  Eigen::VectorXd u = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !u.allFinite()) {
    throw DiscretizationError("finite-difference solve failed");
  }
  u = u.cwiseMax(0.0);
  u /= u.sum() * h * h;
  out.density.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.density(i, j) = u(index(i, j));
  }
  return out;
}

}  // namespace gfpk
