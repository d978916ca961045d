#include <doctest.h>

#include "gfpk/diagnostics.hpp"
#include "gfpk/error.hpp"
#include "gfpk/linear_fpk.hpp"
#include "gfpk/nonlinear_fpk.hpp"
#include "support.hpp"

using namespace gfpk;

namespace {

VlasovKernel tanh_kernel(double a) { return {VlasovKernel::Type::Tanh, Eigen::VectorXd::Constant(1, a), 1.0}; }

// Self-consistent 1-D law for b0 = a tanh: with
//   int_0^x v = a int [log cosh(x - y) - log cosh(y)] mu(dy)
// only the mu-integral is discretized (trapezoid, spectrally accurate here).
std::vector<double> vlasov_reference(double a, const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double h = x[1] - x[0];
  std::vector<double> mu(n), rho(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = oracle::phi_density(x[i]) * h;
  for (int it = 0; it < 200; ++it) {
    double z = 0.0, change = 0.0;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      double pot = 0.0;
      for (std::size_t j = 0; j < n; ++j) pot += (std::log(std::cosh(x[i] - x[j])) - std::log(std::cosh(x[j]))) * mu[j];
      rho[i] = std::exp(a * pot);  // relative to gamma
      next[i] = rho[i] * oracle::phi_density(x[i]) * h;
      z += next[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= z;
      rho[i] /= z;
      change = std::max(change, std::abs(next[i] - mu[i]));
    }
    mu = next;
    if (change < 1e-15) break;
  }
  return rho;
}

double l2_gamma(const ChaosDensity& p, const std::vector<double>& x, const std::vector<double>& ref) {
  const double h = x[1] - x[0];
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = p.evaluate(std::span<const double>(&x[i], 1)) - ref[i];
    s += d * d * oracle::phi_density(x[i]) * h;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("nonlinear_fpk") {
  TEST_CASE("options are validated") {
    FixedPointOptions o;
    o.damping = 0.0;
    CHECK_THROWS_AS(o.validate(), ArgumentError);
    o.damping = 1.5;
    CHECK_THROWS_AS(o.validate(), ArgumentError);
    o.damping = 1.0;
    o.tolerance = 0.0;
    CHECK_THROWS_AS(o.validate(), ArgumentError);
    o.tolerance = 1e-10;
    o.max_iterations = 0;
    CHECK_THROWS_AS(o.validate(), ArgumentError);
  }

  TEST_CASE("constant kernel converges in exactly one iteration") {
    VlasovKernel k{VlasovKernel::Type::Constant, Eigen::VectorXd::Constant(1, 0.3), 1.0};
    auto basis = enumerate_basis(1, 12);
    auto grid = gauss_hermite(24, 1);
    auto res = fixed_point_solve(DriftField::vlasov(k), basis, grid, {});
    CHECK(res.trace.iterations() == 1);
    const auto ref = oracle::cameron_martin(0.3, 12);
    for (int n = 0; n <= 12; ++n) CHECK(std::abs(res.density.coefficients()(n) - ref[static_cast<std::size_t>(n)]) <= 1e-8);
  }

  TEST_CASE("p-independent drift: fixed point equals the linear solve") {
    auto v = DriftField::softclip_gradient(1, 0.5, 1.0);
    auto basis = enumerate_basis(1, 14);
    auto grid = gauss_hermite(30, 1);
    auto res = fixed_point_solve(v, basis, grid, {});
    auto lin = solve_linear(v, ChaosDensity::constant(basis), basis, grid);
    CHECK(res.trace.iterations() == 1);
    CHECK(l2_distance(res.density, lin) <= 1e-15);
  }

  TEST_CASE("tanh Vlasov: convergence, oracle match, damping and seed consistency") {
    auto v = DriftField::vlasov(tanh_kernel(0.2));
    auto basis = enumerate_basis(1, 20);
    auto grid = gauss_hermite(40, 1);
    FixedPointOptions half;
    half.damping = 0.5;
    half.tolerance = 1e-10;
    auto r_half = fixed_point_solve(v, basis, grid, half);
    CHECK(r_half.trace.iterations() <= 30);
    CHECK(r_half.trace.records.back().psi_residual <= 1e-10);

    std::vector<double> x;
    for (int i = -800; i <= 800; ++i) x.push_back(i * 0.0125);
    const auto ref = vlasov_reference(0.2, x);
    CHECK(l2_gamma(r_half.density, x, ref) <= 1e-6);

    FixedPointOptions full;
    auto r_full = fixed_point_solve(v, basis, grid, full);
    CHECK(l2_distance(r_full.density, r_half.density) <= 1e-8);

    const std::vector<double> shift{0.2};
    std::vector<ChaosDensity> seeds{ChaosDensity::constant(basis), ChaosDensity::cameron_martin(basis, shift)};
    auto runs = explore_seeds(v, basis, grid, full, seeds);
    REQUIRE(runs.size() == 2);
    CHECK(l2_distance(runs[0].density, runs[1].density) <= 1e-8);

    // Residual decay by at least 0.9 per step once within 0.1 of the fixed point.
    const auto& recs = r_half.trace.records;
    for (std::size_t m = 1; m < recs.size(); ++m) {
      if (recs[m - 1].psi_residual < 0.1 && recs[m - 1].psi_residual > 1e-12) {
        CHECK(recs[m].psi_residual <= 0.9 * recs[m - 1].psi_residual);
      }
    }
    for (const auto& r : recs) CHECK(r.in_schauder_set);
  }

  TEST_CASE("non-convergence carries the trace") {
    auto v = DriftField::vlasov(tanh_kernel(0.2));
    auto basis = enumerate_basis(1, 10);
    auto grid = gauss_hermite(20, 1);
    FixedPointOptions o;
    o.damping = 0.1;
    o.max_iterations = 2;
    try {
      fixed_point_solve(v, basis, grid, o);
      FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
      CHECK(e.trace().records.size() == 3);
      CHECK(e.trace().to_csv().rfind("iteration,delta,psi_residual,l2sq,in_schauder_set\n", 0) == 0);
    }
  }

  TEST_CASE("iterates keep c0 = 1 in two dimensions") {
    VlasovKernel lobe{VlasovKernel::Type::GaussianLobe, Eigen::VectorXd::Constant(2, 0.4), 1.0};
    auto basis = enumerate_basis(2, 8);
    auto res = fixed_point_solve(DriftField::vlasov(lobe), basis, gauss_hermite(14, 2), {});
    CHECK(res.density.coefficients()(0) == 1.0);
    CHECK(res.trace.records.back().psi_residual <= 1e-10);
  }

  TEST_CASE("Schauder membership examples") {
    auto one = ChaosDensity::constant(enumerate_basis(1, 4));
    for (double c0 : {0.0, 0.3, 1.0, 3.0}) {
      auto m = schauder_membership(one, c0);
      CHECK(m.member);
      CHECK(m.margin == doctest::Approx(b1_bound(c0) - 1.0));
      CHECK(m.margin >= 0.0);
    }
    // First order in C0: margin ~ e^2 sqrt(pi) C0.
    CHECK(schauder_membership(one, 1e-3).margin ==
          doctest::Approx(std::exp(2.0) * std::sqrt(std::numbers::pi) * 1e-3).epsilon(2e-3));
    auto basis = enumerate_basis(1, 20);
    const std::vector<double> shift{0.3};
    auto cm = ChaosDensity::cameron_martin(basis, shift);
    CHECK(cm.l2_norm_squared() == doctest::Approx(std::exp(0.09)).epsilon(1e-12));
    CHECK(schauder_membership(cm, 0.6 * std::numbers::pi).member);
  }
}
