#include <doctest.h>

#include "gfpk/error.hpp"
#include "gfpk/galerkin_ladder.hpp"
#include "gfpk/nonlinear_fpk.hpp"

using namespace gfpk;

namespace {

LadderConfig base_config(double C, int K) {
  LadderConfig cfg;
  cfg.weights = LadderConfig::default_weights(30);
  cfg.bound = C;
  cfg.max_dimension = K;
  cfg.degrees = {6};
  cfg.quadrature = {10};
  return cfg;
}

}  // namespace

TEST_SUITE("galerkin_ladder") {
  TEST_CASE("weights and validation") {
    auto cfg = base_config(0.5, 3);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.total_weight() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    cfg.weights = {0.5, 0.4};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = base_config(0.5, 3);
    cfg.degrees = {4, 5};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }

  TEST_CASE("lyapunov_moment examples") {
    const std::vector<double> w{0.25, 0.0625, 0.015625};
    auto basis = enumerate_basis(3, 4);
    CHECK(lyapunov_moment(ChaosDensity::constant(basis), w) == doctest::Approx(0.25 + 0.0625 + 0.015625));
    const std::vector<double> shift{0.7, 0.0, 0.0};
    auto cm = ChaosDensity::cameron_martin(basis, shift);
    CHECK(lyapunov_moment(cm, w) == doctest::Approx(0.25 * (1 + 0.49) + 0.0625 + 0.015625).epsilon(1e-14));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
    c(0) = 1.0;
    const std::vector<int> two{2, 0, 0};
    c(static_cast<Eigen::Index>(*basis->position(two))) = 1.0 / std::sqrt(2.0);
    CHECK(lyapunov_moment(ChaosDensity(basis, c), w) == doctest::Approx(0.5 + 0.0625 + 0.015625).epsilon(1e-14));
  }

  TEST_CASE("marginal_distance examples") {
    auto basis = enumerate_basis(2, 6);
    auto one = ChaosDensity::constant(basis);
    const auto battery = default_battery(2);
    CHECK(marginal_distance(one, one, battery) == 0.0);
    const std::vector<double> shift{-0.4, 0.0};
    auto cm = ChaosDensity::cameron_martin(basis, shift);
    const std::vector<TestFunction> x1{TestFunction::coordinate(0, 2)};
    CHECK(marginal_distance(one, cm, x1) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(default_battery(3).size() == 15);
  }

  TEST_CASE("zero drift ladder") {
    auto cfg = base_config(0.0, 3);
    auto v = DriftField::tanh_chain(3, 0.0, 1.0, 0.0, 3);
    auto rep = run_ladder(v, cfg);
    REQUIRE(rep.levels.size() == 3);
    double partial = 0.0;
    for (const auto& level : rep.levels) {
      partial += cfg.weights[static_cast<std::size_t>(level.k - 1)];
      CHECK(level.moment == doctest::Approx(partial).epsilon(1e-14));
      CHECK(level.density->coefficients().tail(level.density->coefficients().size() - 1).cwiseAbs().maxCoeff() == 0.0);
      CHECK(level.pass);
    }
    CHECK(rep.pass());
  }

  TEST_CASE("coupled tanh chain: moment certificate and Chebyshev tails") {
    auto cfg = base_config(0.5, 3);
    auto v = DriftField::tanh_chain(3, 0.5, 1.0, 0.5, 3);
    auto rep = run_ladder(v, cfg);
    CHECK(rep.pass());
    CHECK(rep.bound == doctest::Approx(2.25 * cfg.total_weight()));
    for (const auto& level : rep.levels) {
      CHECK(level.moment <= level.bound + level.quad_error);
      for (std::size_t r = 0; r < rep.tail_levels.size(); ++r) CHECK(level.tail_mass[r] <= level.chebyshev[r] + 1e-15);
    }
    const std::string csv = rep.to_csv();
    CHECK(csv.rfind("k,m_k,bound,pass,d_next,tail@1,tail@2,tail@4\n", 0) == 0);
    CHECK(rep.to_json()["levels"].size() == 3);
  }

  TEST_CASE("decoupled drift: first marginal stable across levels") {
    auto cfg = base_config(0.5, 3);
    auto v = DriftField::tanh_chain(3, 0.5, 1.0, 0.0, 1);
    auto rep = run_ladder(v, cfg);
    REQUIRE(rep.levels.size() == 3);
    // Oracle: the 1-D nonlinear solve.
    auto one_d = fixed_point_solve(v.truncate_to_k(1), enumerate_basis(1, 6), gauss_hermite(10, 1), {});
    for (const auto& level : rep.levels) {
      const std::array<int, 1> keep{0};
      CHECK(l2_distance(marginal(*level.density, keep), one_d.density) <= 1e-8);
      if (level.distance_next) CHECK(*level.distance_next <= 1e-8);
    }
  }

  TEST_CASE("ladder refuses drifts above the configured bound") {
    auto cfg = base_config(0.25, 2);
    CHECK_THROWS_AS(run_ladder(DriftField::tanh_chain(2, 0.5, 1.0, 0.0, 2), cfg), ArgumentError);
  }
}
