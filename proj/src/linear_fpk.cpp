#include "gfpk/linear_fpk.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "gfpk/error.hpp"

namespace gfpk {

Eigen::MatrixXd GalerkinSystem::reduced_matrix() const {
  const Eigen::Index m = interaction.rows() - 1;
  Eigen::MatrixXd out = -interaction.bottomRightCorner(m, m);
  out.diagonal() += ou_diagonal.tail(m);
  return out;
}

Eigen::VectorXd GalerkinSystem::reduced_rhs() const {
  return interaction.col(0).tail(interaction.rows() - 1);
}

double GalerkinSystem::norm() const {
  Eigen::MatrixXd full = -interaction;
  full.diagonal() += ou_diagonal;
  return full.cwiseAbs().rowwise().sum().maxCoeff();
}

GalerkinAssembler::GalerkinAssembler(BasisPtr basis, QuadratureGrid grid)
    : basis_(std::move(basis)), grid_(std::move(grid)) {
  if (grid_.dimension() != basis_->dimension()) {
    throw ArgumentError("quadrature grid dimension does not match the basis");
  }
  if (grid_.nodes_per_dimension() < basis_->max_degree() + 1) {
    throw ArgumentError("quadrature needs Q >= N + 1 nodes per dimension (Q = " +
                        std::to_string(grid_.nodes_per_dimension()) +
                        ", N = " + std::to_string(basis_->max_degree()) + ")");
  }
  values_ = basis_->evaluate_all(grid_.points);
}

PointMeasure GalerkinAssembler::frozen_measure(const DriftField& v, const ChaosDensity& p) const {
  if (!v.measure_dependent()) return PointMeasure::dirac(Eigen::VectorXd::Zero(v.dimension()));
  return as_measure(p, grid_);
}

GalerkinSystem GalerkinAssembler::assemble(const DriftField& v, const ChaosDensity& p) const {
  return assemble(v, frozen_measure(v, p));
}

GalerkinSystem GalerkinAssembler::assemble(const DriftField& v, const PointMeasure& frozen) const {
  const int k = basis_->dimension();
  if (v.dimension() != k) {
    throw ArgumentError("drift dimension " + std::to_string(v.dimension()) +
                        " does not match basis dimension " + std::to_string(k));
  }
  const auto m = static_cast<Eigen::Index>(basis_->size());
  const int degree = basis_->max_degree();
  GalerkinSystem system;
  system.basis = basis_;
  system.ou_diagonal.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) system.ou_diagonal(a) = (*basis_)[a].degree();
  system.interaction = Eigen::MatrixXd::Zero(m, m);
  if (degree == 0) return system;

  const Eigen::MatrixXd drift = v.eval_v_batch(frozen, grid_.points);
  // Rows h_mu with |mu| <= N - 1 are a prefix of the graded ordering.
  const auto low = static_cast<Eigen::Index>(basis_size(k, degree - 1));
  const Eigen::MatrixXd low_values = values_.leftCols(low);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd weight = grid_.weights.cwiseProduct(drift.row(i).transpose());
    // gram(mu, alpha) = int v_i h_mu h_alpha dgamma
    const Eigen::MatrixXd gram = (low_values.array().colwise() * weight.array()).matrix().transpose() * values_;
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto down = basis_->lowered(static_cast<std::size_t>(b), i);
      if (!down) continue;
      system.interaction.row(b) +=
          std::sqrt(static_cast<double>((*basis_)[b][i])) * gram.row(static_cast<Eigen::Index>(*down));
    }
  }
  return system;
}

GalerkinSystem assemble(const DriftField& v, const ChaosDensity& p, BasisPtr basis,
                        const QuadratureGrid& grid) {
  return GalerkinAssembler(std::move(basis), grid).assemble(v, p);
}

LinearSolution solve_system(const GalerkinSystem& system) {
  const auto m = static_cast<Eigen::Index>(system.basis->size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  c(0) = 1.0;
  LinearSolution out{ChaosDensity::constant(system.basis), 1.0, system.norm()};
  if (m == 1) return out;
  const Eigen::MatrixXd matrix = system.reduced_matrix();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "Galerkin system is singular or ill-conditioned (condition estimate " << condition
        << " > " << kMaxCondition << "); increase the basis degree or reduce the drift";
    throw SolverError(msg.str());
  }
  c.tail(m - 1) = lu.solve(system.reduced_rhs());
  if (!c.allFinite()) throw SolverError("Galerkin solve produced non-finite coefficients");
  out.density = ChaosDensity(system.basis, std::move(c));
  out.condition_estimate = condition;
  return out;
}

ChaosDensity solve_linear(const DriftField& v, const ChaosDensity& p, BasisPtr basis,
                          const QuadratureGrid& grid) {
  return solve_system(assemble(v, p, std::move(basis), grid)).density;
}

namespace {

PointMeasure frozen_for(const DriftField& v, const ChaosDensity& p_frozen, const QuadratureGrid& grid) {
  if (!v.measure_dependent()) return PointMeasure::dirac(Eigen::VectorXd::Zero(v.dimension()));
  return as_measure(p_frozen, grid);
}

double residual_on(const ChaosDensity& rho, const DriftField& v, const PointMeasure& frozen,
                   const TestFunction& phi, const WeightedNodes& nodes) {
  const int k = nodes.dimension();
  const Eigen::VectorXd density = rho.evaluate_all(nodes.points);
  const Eigen::MatrixXd drift = v.eval_v_batch(frozen, nodes.points);
  std::vector<double> x(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < nodes.size(); ++j) {
    if (nodes.weights(j) == 0.0) continue;
    for (int i = 0; i < k; ++i) x[i] = nodes.points(i, j);
    const Eigen::VectorXd g = phi.gradient(x);
    double integrand = phi.laplacian(x);
    for (int i = 0; i < k; ++i) integrand += (drift(i, j) - x[i]) * g(i);
    sum += nodes.weights(j) * integrand * density(j);
  }
  return sum;
}

}  // namespace

double residual(const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
                const TestFunction& phi, const QuadratureGrid& grid) {
  if (rho.dimension() != grid.dimension() || v.dimension() != grid.dimension()) {
    throw ArgumentError("density, drift, and grid dimensions must agree");
  }
  const PointMeasure frozen = frozen_for(v, p_frozen, grid);
  if (phi.kind() == TestFunction::Kind::Bump) {
    return residual_on(rho, v, frozen, phi, bump_support_grid(phi, grid));
  }
  return residual_on(rho, v, frozen, phi, grid);
}

std::vector<TestFunction> default_bumps(int k, int count) {
  std::vector<TestFunction> bumps;
  for (int j = 0; j < count; ++j) {
    const double c = -1.8 + 0.4 * j;
    if (k >= 2 && j % 2 == 1) {
      const int a = j % k;
      const int b = (j + 1) % k;
      bumps.push_back(TestFunction::bump({a, b}, {c, -0.5 * c}, 1.2));
    } else {
      bumps.push_back(TestFunction::bump({j % k}, {c}, 1.0));
    }
  }
  return bumps;
}

ResidualSuite residual_suite(const ChaosDensity& rho, const DriftField& v,
                             const ChaosDensity& p_frozen, const QuadratureGrid& grid,
                             const std::vector<TestFunction>& bumps) {
  GalerkinAssembler assembler(rho.basis(), grid);
  const PointMeasure frozen = frozen_for(v, p_frozen, grid);
  const auto system = assembler.assemble(v, frozen);
  const auto& basis = rho.chaos_basis();
  const int k = basis.dimension();
  const Eigen::MatrixXd& h = assembler.basis_values();
  const Eigen::MatrixXd drift = v.eval_v_batch(frozen, grid.points);
  const Eigen::VectorXd weighted = grid.weights.cwiseProduct(h * rho.coefficients());

  ResidualSuite suite;
  suite.hermite_tolerance = 1e-10 * (1.0 + system.norm());
  // Quadrature of (L_OU h_beta + v . grad h_beta) rho, with L_OU h_beta = -|beta| h_beta.
  for (std::size_t b = 1; b < basis.size(); ++b) {
    Eigen::VectorXd integrand = -static_cast<double>(basis[b].degree()) *
                                h.col(static_cast<Eigen::Index>(b));
    for (int i = 0; i < k; ++i) {
      if (auto down = basis.lowered(b, i)) {
        integrand += std::sqrt(static_cast<double>(basis[b][i])) *
                     drift.row(i).transpose().cwiseProduct(h.col(static_cast<Eigen::Index>(*down)));
      }
    }
    suite.max_hermite = std::max(suite.max_hermite, std::abs(integrand.dot(weighted)));
    ++suite.hermite_tests;
  }
  for (const auto& phi : bumps) {
    suite.max_bump = std::max(suite.max_bump,
                              std::abs(residual_on(rho, v, frozen, phi, bump_support_grid(phi, grid))));
    ++suite.bump_tests;
  }
  return suite;
}

}  // namespace gfpk
