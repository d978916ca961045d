#include <doctest.h>

#include <random>

#include "gfpk/diagnostics.hpp"
#include "gfpk/error.hpp"
#include "gfpk/linear_fpk.hpp"
#include "support.hpp"

using namespace gfpk;

namespace {

double b1_closed(double c0) {
  return 1.0 + std::exp(2.0) * std::sqrt(std::numbers::pi) * c0 * std::exp(c0 * c0) * (1.0 + std::erf(c0));
}

double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

ChaosDensity cm(int k, int N, std::vector<double> shift) {
  return ChaosDensity::cameron_martin(enumerate_basis(k, N), shift);
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("b1_bound") {
    CHECK(b1_bound(0.0) == 1.0);
    for (double c0 : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      const double ref = b1_closed(c0);
      CHECK(std::abs(b1_bound(c0) - ref) <= 1e-10 * ref);
    }
    double last = 1.0;
    for (double c0 = 0.05; c0 <= 6.0; c0 += 0.05) {
      const double b = b1_bound(c0);
      CHECK(b > last);
      last = b;
    }
    CHECK_THROWS_AS(b1_bound(-1.0), ArgumentError);
  }

  TEST_CASE("constants") {
    CHECK(schauder_constant(0.3) == doctest::Approx(0.6 * std::numbers::pi));
    CHECK(sigma_infinity(0.3) == doctest::Approx(1.0 / std::pow(0.6 * std::numbers::pi, 2)));
    CHECK(std::isinf(sigma_infinity(0.0)));
  }

  TEST_CASE("tail_check examples") {
    auto grid1 = gauss_hermite(24, 1);
    auto one = ChaosDensity::constant(enumerate_basis(1, 4));
    for (const auto& r : tail_check(one, 0.5, {1.0001, 2.0, 8.0}, grid1)) {
      CHECK(r.left == 0.0);
      CHECK(r.pass.value());
    }
    const double sigma = 1.0 / std::pow(0.6 * std::numbers::pi, 2);
    auto rho = cm(1, 16, {0.3});
    auto reports = tail_check(rho, sigma, {2.0, 4.0, 8.0}, grid1);
    REQUIRE(reports.size() == 3);
    const double t = 2.0;
    CHECK(std::abs(reports[0].left - upper_tail(std::log(t) / 0.3 + 0.15)) <= 1e-8);
    CHECK(reports[0].right == doctest::Approx(std::exp(2.0) * std::exp(-sigma * std::log(2.0) * std::log(2.0))));
    for (const auto& r : reports) CHECK(r.pass.value());
    // Right side exceeds one near t = 1.
    auto near = tail_check(rho, sigma, {1.0 + 1e-9}, grid1);
    CHECK(near[0].right > 1.0);
    CHECK_THROWS_AS(tail_check(rho, sigma, {1.0}, grid1), ArgumentError);
  }

  TEST_CASE("level-set mass in two dimensions") {
    // Shift along the last coordinate: the level set is a half-plane in x2.
    auto rho = cm(2, 16, {0.0, 0.4});
    auto grid = gauss_hermite(20, 2);
    for (double t : {1.5, 3.0}) {
      CHECK(std::abs(level_set_mass(rho, t, grid) - upper_tail(std::log(t) / 0.4 + 0.2)) <= 1e-8);
    }
  }

  TEST_CASE("log_moment") {
    auto grid = gauss_hermite(60, 1);
    auto one = ChaosDensity::constant(enumerate_basis(1, 4));
    CHECK(log_moment(one, 0.2, grid) == doctest::Approx(std::pow(std::log(2.0), 0.2)).epsilon(1e-14));
    auto rho = cm(1, 20, {0.3});
    CHECK(std::abs(log_moment(rho, 1e-9, grid) - 1.0) <= 1e-8);
    const double ref = oracle::gaussian_expectation([](double x) {
      const double f = std::exp(0.3 * x - 0.045);
      return f * std::pow(std::log(f + 1.0), 0.2);
    });
    CHECK(std::abs(log_moment(rho, 0.2, grid) - ref) <= 1e-6);
    CHECK(log_moment_bracket(0.0, 0.2) == 1.0);
    CHECK(log_moment_bracket(0.3, 0.2) == doctest::Approx(1.0 + 0.3 * std::pow(std::log(1.3), 0.2)));
  }

  TEST_CASE("fisher_energy") {
    auto grid = gauss_hermite(30, 2);
    auto basis = enumerate_basis(2, 14);
    auto zero = DriftField::constant(Eigen::VectorXd::Zero(2));
    auto one = ChaosDensity::constant(basis);
    auto f0 = fisher_energy(one, zero, one, grid);
    CHECK(f0.fisher == 0.0);
    CHECK(f0.drift_energy_gamma == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_FALSE(f0.skipped);

    auto rho = cm(2, 14, {0.3, -0.2});
    Eigen::VectorXd h(2);
    h << 0.3, -0.2;
    auto v = DriftField::constant(h);
    auto f = fisher_energy(rho, v, one, grid);
    CHECK(std::abs(f.fisher - 0.13) <= 1e-6);
    CHECK(f.drift_energy_mu == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(f.drift_energy_gamma == doctest::Approx(2.13).epsilon(1e-13));
  }

  TEST_CASE("exact gradients against central differences at 100 random nodes") {
    auto basis = enumerate_basis(2, 10);
    auto grid = gauss_hermite(20, 2);
    auto v = DriftField::rotational(0.5, Eigen::Vector2d(0.3, 0.0));
    auto rho = solve_linear(v, ChaosDensity::constant(basis), basis, grid);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<Eigen::Index> pick(0, grid.size() - 1);
    double worst = 0.0;
    const double e = 1e-5;
    for (int s = 0; s < 100; ++s) {
      const Eigen::Index j = pick(rng);
      std::vector<double> x{grid.points(0, j), grid.points(1, j)};
      const Eigen::VectorXd g = rho.gradient(x);
      for (int i = 0; i < 2; ++i) {
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(i)] += e;
        xm[static_cast<std::size_t>(i)] -= e;
        const double fd = (rho.evaluate(xp) - rho.evaluate(xm)) / (2 * e);
        worst = std::max(worst, std::abs(fd - g(i)) / (1.0 + std::abs(g(i))));
      }
    }
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("bound report JSON") {
    BoundReport r{"log_moment", 1.0, 2.0, std::nullopt, 0.0, {{"alpha", 0.2}}};
    auto j = to_json(r);
    CHECK(j["pass"] == "not-applicable");
    r.pass = true;
    CHECK(to_json(r)["pass"] == true);
  }
}
