// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gfpk/diagnostics.hpp"
#include "gfpk/error.hpp"
#include "gfpk/galerkin_ladder.hpp"
#include "gfpk/linear_fpk.hpp"
#include "gfpk/nonlinear_fpk.hpp"
#include "gfpk/oracles.hpp"

using namespace gfpk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("violated: " + what);
    }
  }
  void note(const char* fmt, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    detail += (detail.empty() ? "" : "; ") + std::string(buf);
  }
};

// Every density solved below, with what its diagnostics need.
struct Solved {
  std::string name;
  ChaosDensity rho;
  DriftField v;
  ChaosDensity frozen;
  QuadratureGrid grid;
};
std::vector<Solved> solved;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

Outcome zero_drift() {
  Outcome out;
  double worst = 0.0, slowest = 0.0;
  for (int k : {1, 2, 3}) {
    const auto t0 = Clock::now();
    auto basis = enumerate_basis(k, 8);
    auto grid = gauss_hermite(16, k);
    auto v = DriftField::constant(Eigen::VectorXd::Zero(k));
    auto one = ChaosDensity::constant(basis);
    auto rho = solve_linear(v, one, basis, grid);
    slowest = std::max(slowest, seconds_since(t0));
    worst = std::max(worst, rho.coefficients().tail(rho.coefficients().size() - 1).cwiseAbs().maxCoeff());
    solved.push_back({"zero drift k=" + std::to_string(k), rho, v, one, grid});
  }
  out.note("max |c_alpha| = %.3g, slowest %.3f s", worst, slowest);
  out.require(worst <= 1e-12, "max |c_alpha| <= 1e-12");
  out.require(slowest < 1.0, "runtime < 1 s");
  return out;
}

Outcome cameron_martin() {
  Outcome out;
  const auto t0 = Clock::now();
  auto basis = enumerate_basis(1, 12);
  auto grid = gauss_hermite(24, 1);
  auto v = DriftField::constant(Eigen::VectorXd::Constant(1, 0.3));
  auto one = ChaosDensity::constant(basis);
  auto rho = solve_linear(v, one, basis, grid);
  const auto member = schauder_membership(rho, 0.6 * std::numbers::pi);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (int n = 0; n <= 12; ++n) worst = std::max(worst, std::abs(rho.coefficients()(n) - std::pow(0.3, n) / std::sqrt(factorial(n))));
  const double l2_gap = std::abs(rho.l2_norm_squared() - std::exp(0.09));
  out.note("coef err %.3g, |l2 - e^0.09| %.3g, %.3f s", worst, l2_gap, elapsed);
  out.require(worst <= 1e-8, "coefficients within 1e-8");
  out.require(l2_gap <= 1e-6, "L2 norm within 1e-6");
  out.require(member.member, "Schauder membership with C0 = 0.6 pi");
  out.require(elapsed < 1.0, "runtime < 1 s");
  solved.push_back({"Cameron-Martin 0.3", rho, v, one, grid});
  return out;
}

Outcome gradient_oracle() {
  Outcome out;
  // Built-in clipped potential W = a s log cosh(x / s).
  auto v = DriftField::softclip_gradient(1, 0.5, 2.0);
  auto basis = enumerate_basis(1, 16);
  auto grid = gauss_hermite(64, 1);
  auto one = ChaosDensity::constant(basis);
  auto rho = solve_linear(v, one, basis, grid);
  const PointMeasure none = PointMeasure::dirac(Eigen::VectorXd::Zero(1));
  auto oracle = oracle_1d([&](double x) { return v.eval_v(none, std::span<const double>(&x, 1))[0]; });
  const double d = l2_gamma_distance(rho, oracle);
  out.note("L2(gamma) distance %.3g", d);
  out.require(d <= 1e-6, "distance <= 1e-6");
  solved.push_back({"softclip gradient", rho, v, one, grid});
  return out;
}

Outcome vlasov() {
  Outcome out;
  const auto t0 = Clock::now();
  VlasovKernel kernel{VlasovKernel::Type::Tanh, Eigen::VectorXd::Constant(1, 0.2), 1.0};
  auto v = DriftField::vlasov(kernel);
  auto basis = enumerate_basis(1, 20);
  auto grid = gauss_hermite(40, 1);
  GalerkinAssembler assembler(basis, grid);
  FixedPointOptions half;
  half.damping = 0.5;
  half.tolerance = 1e-10;
  auto r_half = fixed_point_solve(v, assembler, half);
  FixedPointOptions full = half;
  full.damping = 1.0;
  auto r_full = fixed_point_solve(v, assembler, full);
  const std::vector<double> shift{0.2};
  full.initial = ChaosDensity::cameron_martin(basis, shift);
  auto r_seed = fixed_point_solve(v, assembler, full);
  auto oracle = oracle_1d_vlasov([](double z) { return 0.2 * std::tanh(z); });
  const double elapsed = seconds_since(t0);
  const double d_oracle = l2_gamma_distance(r_half.density, oracle);
  const double d_theta = l2_distance(r_half.density, r_full.density);
  const double d_seed = l2_distance(r_full.density, r_seed.density);
  out.note("%.0f iterations (theta 0.5), oracle distance %.3g, theta gap %.3g", r_half.trace.iterations(), d_oracle, d_theta);
  out.note("seed gap %.3g, %.2f s", d_seed, elapsed);
  out.require(r_half.trace.iterations() <= 30, "<= 30 iterations");
  out.require(d_oracle <= 1e-6, "oracle distance <= 1e-6");
  out.require(d_theta <= 1e-8, "theta = 1 within 1e-8");
  out.require(d_seed <= 1e-8, "seed robustness within 1e-8");
  out.require(elapsed < 10.0, "runtime < 10 s");
  solved.push_back({"tanh Vlasov", r_half.density, v, r_half.density, grid});
  return out;
}

Outcome constant_kernel() {
  Outcome out;
  VlasovKernel kernel{VlasovKernel::Type::Constant, Eigen::VectorXd::Constant(1, 0.3), 1.0};
  auto v = DriftField::vlasov(kernel);
  auto basis = enumerate_basis(1, 12);
  auto grid = gauss_hermite(24, 1);
  auto res = fixed_point_solve(v, basis, grid, {});
  out.note("%.0f iteration(s)", res.trace.iterations());
  out.require(res.trace.iterations() == 1, "exactly one iteration");
  solved.push_back({"constant-kernel Vlasov", res.density, v, res.density, grid});
  return out;
}

Outcome b1() {
  Outcome out;
  double worst = 0.0;
  for (double c0 : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double closed = 1.0 + std::exp(2.0) * std::sqrt(std::numbers::pi) * c0 * std::exp(c0 * c0) * (1.0 + std::erf(c0));
    worst = std::max(worst, std::abs(b1_bound(c0) - closed) / closed);
  }
  out.note("max relative gap %.3g, B(0) = %.17g", worst, b1_bound(0.0));
  out.require(worst <= 1e-10, "agreement to 1e-10");
  out.require(b1_bound(0.0) == 1.0, "B(0) = 1");
  return out;
}

Outcome residuals() {
  Outcome out;
  double worst_h = 0.0, worst_b = 0.0;
  int hermite_tests = 0, bump_tests = 0;
  for (const auto& s : solved) {
    const auto suite = residual_suite(s.rho, s.v, s.frozen, s.grid, default_bumps(s.rho.dimension()));
    worst_h = std::max(worst_h, suite.max_hermite / suite.hermite_tolerance);
    worst_b = std::max(worst_b, suite.max_bump);
    hermite_tests += suite.hermite_tests;
    bump_tests += suite.bump_tests;
    out.require(suite.pass(), "residual suite for " + s.name);
    out.require(suite.bump_tests == 10, "ten bump tests for " + s.name);
  }
  out.note("%.0f cases, worst Hermite residual / tolerance %.3g, worst bump %.3g", static_cast<double>(solved.size()), worst_h, worst_b);
  out.note("%.0f Hermite and %.0f bump tests", hermite_tests, bump_tests);
  return out;
}

Outcome tails() {
  Outcome out;
  int checks = 0;
  for (const auto& s : solved) {
    const double sigma = sigma_infinity(s.v.h_bound());
    for (const auto& r : tail_check(s.rho, sigma, {2.0, 4.0, 8.0}, s.grid)) {
      ++checks;
      out.require(r.pass.value_or(false), "tail bound for " + s.name);
    }
  }
  auto basis = enumerate_basis(1, 12);
  auto grid = gauss_hermite(24, 1);
  auto rho = solve_linear(DriftField::constant(Eigen::VectorXd::Constant(1, 0.3)), ChaosDensity::constant(basis), basis, grid);
  double worst = 0.0;
  for (double t : {2.0, 4.0, 8.0}) {
    worst = std::max(worst, std::abs(level_set_mass(rho, t, grid) - upper_tail(std::log(t) / 0.3 + 0.15)));
  }
  out.note("%.0f tail checks, Cameron-Martin level-set error %.3g", checks, worst);
  out.require(worst <= 1e-8, "error-function closed form within 1e-8");
  return out;
}

Outcome ladder() {
  Outcome out;
  const auto t0 = Clock::now();
  LadderConfig cfg;
  cfg.weights = LadderConfig::default_weights(30);
  cfg.bound = 0.5;
  cfg.max_dimension = 4;
  cfg.degrees = {6};
  cfg.quadrature = {10};
  auto coupled = run_ladder(DriftField::tanh_chain(4, 0.5, 1.0, 0.5, 4), cfg);
  const double threshold = 2.25 * cfg.total_weight();
  double worst_margin = -1e300;
  for (const auto& level : coupled.levels) {
    worst_margin = std::max(worst_margin, level.moment - (threshold + level.quad_error));
    out.require(level.moment <= threshold + level.quad_error, "m_k <= 2.25 T + eps_quad at k = " + std::to_string(level.k));
  }
  out.require(coupled.levels.size() == 4 && !coupled.aborted, "all four levels solved");
  auto decoupled = run_ladder(DriftField::tanh_chain(4, 0.5, 1.0, 0.0, 1), cfg);
  double worst_stability = 0.0;
  for (const auto& level : decoupled.levels) {
    if (level.distance_next) worst_stability = std::max(worst_stability, *level.distance_next);
  }
  const double elapsed = seconds_since(t0);
  out.note("max m_k - (2.25 T + eps) = %.3g, decoupled max d(k,k+1) = %.3g, %.1f s", worst_margin, worst_stability, elapsed);
  out.require(decoupled.levels.size() == 4 && worst_stability <= 1e-8, "marginal stability <= 1e-8");
  out.require(elapsed < 120.0, "runtime < 2 min");
  return out;
}

Outcome cross_validation() {
  Outcome out;
  const auto t0 = Clock::now();
  auto v = DriftField::rotational(0.5, Eigen::Vector2d(0.3, 0.0));
  auto basis = enumerate_basis(2, 10);
  auto grid = gauss_hermite(24, 2);
  auto one = ChaosDensity::constant(basis);
  auto rho = solve_linear(v, one, basis, grid);
  solved.push_back({"rotational 2-D", rho, v, one, grid});
  const PointMeasure none = PointMeasure::dirac(Eigen::VectorXd::Zero(2));

  SdeOptions opts;
  opts.n_steps = 10000;
  opts.n_particles = 100;
  opts.seed = 20240601;
  auto est = oracle_sde(v, none, opts);
  const std::array<std::array<int, 2>, 2> unit{{{1, 0}, {0, 1}}};
  double worst_z = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double z = std::abs(rho.coefficient(unit[static_cast<std::size_t>(i)]) - est.mean(i)) / est.mean_se(i);
    worst_z = std::max(worst_z, z);
  }
  const std::array<std::array<int, 2>, 3> second{{{2, 0}, {1, 1}, {0, 2}}};
  const std::array<std::pair<int, int>, 3> entry{{{0, 0}, {0, 1}, {1, 1}}};
  for (std::size_t q = 0; q < 3; ++q) {
    const auto [i, j] = entry[q];
    const double c = rho.coefficient(second[q]);
    const double spectral = i == j ? 1.0 + std::numbers::sqrt2 * c : c;
    worst_z = std::max(worst_z, std::abs(spectral - est.second_moment(i, j)) / est.second_moment_se(i, j));
  }

  auto fd = oracle_fd_2d(v, none, 6.0, 200);
  double worst_fd = 0.0;
  for (int c = 0; c < 2; ++c) {
    const std::array<int, 1> keep{c};
    auto m = marginal(rho, keep);
    const Eigen::VectorXd ref = fd.marginal(c);
    for (int i = 0; i < fd.n; ++i) {
      const double x = fd.center(i);
      const double spectral = m.evaluate(std::span<const double>(&x, 1)) * std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
      worst_fd = std::max(worst_fd, std::abs(spectral - ref(i)));
    }
  }
  const double elapsed = seconds_since(t0);
  out.note("worst moment gap %.2f standard errors, worst marginal gap %.3g, %.1f s", worst_z, worst_fd, elapsed);
  out.require(worst_z <= 3.0, "moments within 3 standard errors");
  out.require(worst_fd <= 5e-3, "finite-volume marginals within 5e-3");
  out.require(elapsed < 120.0, "runtime < 2 min");
  return out;
}

Outcome gradient_check() {
  Outcome out;
  const Solved& s = solved.back();  // the 2-D rotational solution
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Eigen::Index> pick(0, s.grid.size() - 1);
  double worst = 0.0;
  const double e = 1e-5;
  for (int n = 0; n < 100; ++n) {
    const Eigen::Index j = pick(rng);
    std::vector<double> x{s.grid.points(0, j), s.grid.points(1, j)};
    const Eigen::VectorXd g = s.rho.gradient(x);
    for (int i = 0; i < 2; ++i) {
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += e;
      xm[static_cast<std::size_t>(i)] -= e;
      const double fd = (s.rho.evaluate(xp) - s.rho.evaluate(xm)) / (2 * e);
      worst = std::max(worst, std::abs(fd - g(i)) / std::max(1.0, std::abs(g(i))));
    }
  }
  const auto fisher = fisher_energy(s.rho, s.v, s.frozen, s.grid);
  out.note("worst gradient gap %.3g (fisher %.4g)", worst, fisher.fisher);
  out.require(worst <= 1e-6, "gradients within 1e-6");
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::current_path() / "acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"mode": "solve-nonlinear", "k": 1, "N": 20, "Q": 40, "seed": 7,
    "drift": {"kind": "vlasov", "kernel": "tanh", "amplitude": 0.2},
    "fixed_point": {"damping": 0.5, "tolerance": 1e-10}})";
  int codes = 0;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(GFPK_CLI_PATH) + " solve-nonlinear --config " + (dir / "config.json").string() +
                            " --out " + (dir / run).string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    codes += WIFEXITED(status) ? WEXITSTATUS(status) : 99;
  }
  out.require(codes == 0, "both runs exit 0");
  const bool same_density = slurp(dir / "a" / "density.json") == slurp(dir / "b" / "density.json");
  const bool same_report = slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json");
  out.note("density identical %.0f, report identical %.0f", same_density, same_report);
  out.require(same_density && !slurp(dir / "a" / "density.json").empty(), "byte-identical density.json");
  out.require(same_report, "byte-identical report.json");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  // Order matters: criteria 3, 8 and 11 inspect the densities solved before them.
  const std::vector<Criterion> criteria{
      {1, "zero-drift identity", zero_drift},
      {2, "Cameron-Martin recovery", cameron_martin},
      {4, "1-D gradient-drift oracle", gradient_oracle},
      {5, "nonlinear tanh Vlasov", vlasov},
      {6, "constant-kernel Vlasov", constant_kernel},
      {7, "b1_bound closed form", b1},
      {9, "Galerkin ladder", ladder},
      {10, "2-D cross-validation", cross_validation},
      {11, "gradient check", gradient_check},
      {3, "residual suite", residuals},
      {8, "tail bound", tails},
      {12, "determinism", determinism},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(c.id) + "] " + c.name + ": " + o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failures, lines.size());
  return failures == 0 ? 0 : 1;
}
