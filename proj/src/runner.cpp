#include "gfpk/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include <CLI11.hpp>

#include "gfpk/diagnostics.hpp"
#include "gfpk/error.hpp"
#include "gfpk/linear_fpk.hpp"
#include "gfpk/nonlinear_fpk.hpp"
#include "gfpk/oracles.hpp"
#include "gfpk/parallel.hpp"

namespace gfpk {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

class Context {
 public:
  Context(const RunConfig& cfg, RunReport& result) : cfg(cfg), result(result), start_(Clock::now()) {}

  void write(const std::string& name, const std::string& content) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    if (!out) throw Error("cannot write " + (dir / name).string());
    result.artifacts.push_back(name);
  }

  void lap(const std::string& stage) {
    const auto now = Clock::now();
    result.timings["stages"][stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  double total() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  const RunConfig& cfg;
  RunReport& result;
  bool pass = true;

 private:
  Clock::time_point start_;
  Clock::time_point last_ = Clock::now();
};

json to_json(const ResidualSuite& s) {
  return {{"max_hermite", s.max_hermite},     {"hermite_tolerance", s.hermite_tolerance},
          {"hermite_tests", s.hermite_tests}, {"max_bump", s.max_bump},
          {"bump_tolerance", s.bump_tolerance}, {"bump_tests", s.bump_tests},
          {"pass", s.pass()}};
}

ChaosDensity seed_density(const RunConfig& cfg, const BasisPtr& basis) {
  if (cfg.seed_density.cameron_martin.empty()) return ChaosDensity::constant(basis);
  return ChaosDensity::cameron_martin(basis, cfg.seed_density.cameron_martin);
}

// Residual suite plus every bound the theory attaches to a solution.
json diagnose(Context& ctx, const ChaosDensity& rho, const DriftField& v, const ChaosDensity& p_frozen,
              const QuadratureGrid& grid) {
  json out;
  const ResidualSuite suite = residual_suite(rho, v, p_frozen, grid, default_bumps(rho.dimension()));
  out["residual_suite"] = to_json(suite);
  ctx.pass = ctx.pass && suite.pass();

  json bounds = json::array();
  const double h = v.h_bound();
  const double c0 = schauder_constant(h);
  const SchauderMembership member = schauder_membership(rho, c0);
  bounds.push_back(to_json(BoundReport{"schauder_l2", rho.l2_norm_squared(), member.bound, member.member,
                                       0.0, {{"C0", c0}, {"h_bound", h}}}));
  ctx.pass = ctx.pass && member.member;
  for (const auto& r : tail_check(rho, sigma_infinity(h), ctx.cfg.t_grid, grid)) {
    bounds.push_back(to_json(r));
    ctx.pass = ctx.pass && r.pass.value_or(true);
  }
  const double alpha = ctx.cfg.log_moment_alpha;
  const double l1 = drift_l1_norm(rho, v, p_frozen, grid);
  bounds.push_back(to_json(BoundReport{"log_moment", log_moment(rho, alpha, grid),
                                       log_moment_bracket(l1, alpha), std::nullopt, 0.0,
                                       {{"alpha", alpha}, {"drift_l1", l1}}}));
  out["bounds"] = bounds;
  out["fisher"] = to_json(fisher_energy(rho, v, p_frozen, grid));
  return out;
}

json trace_summary(const FixedPointTrace& trace, const FixedPointOptions& opts) {
  bool inside = true;
  for (const auto& r : trace.records) inside = inside && r.in_schauder_set;
  return {{"iterations", trace.iterations()},
          {"final_psi_residual", trace.records.empty() ? 0.0 : trace.records.back().psi_residual},
          {"damping", opts.damping},
          {"tolerance", opts.tolerance},
          {"schauder_bound", trace.schauder_bound},
          {"all_iterates_in_schauder_set", inside},
          {"file", "trace.csv"}};
}

struct Solved {
  ChaosDensity density;
  ChaosDensity frozen;
  json summary;
};

// Linear solve for measure-independent drifts, fixed point otherwise.
Solved solve(Context& ctx, const DriftField& v, const GalerkinAssembler& assembler, bool nonlinear) {
  const auto& cfg = ctx.cfg;
  const ChaosDensity seed = seed_density(cfg, assembler.basis());
  if (!nonlinear) {
    const LinearSolution sol = solve_system(assembler.assemble(v, seed));
    json summary = {{"condition_estimate", sol.condition_estimate}, {"system_norm", sol.system_norm}};
    return {sol.density, seed, summary};
  }
  FixedPointOptions opts = cfg.fixed_point;
  opts.initial = seed;
  try {
    FixedPointResult res = fixed_point_solve(v, assembler, opts);
    ctx.write("trace.csv", res.trace.to_csv());
    json summary = {{"trace", trace_summary(res.trace, opts)}};
    return {res.density, res.density, summary};
  } catch (const NonConvergenceError& e) {
    ctx.write("trace.csv", e.trace().to_csv());
    throw;
  }
}

void run_single(Context& ctx, bool nonlinear) {
  const auto& cfg = ctx.cfg;
  const DriftField v = build_drift(cfg.drift, cfg.k);
  const BasisPtr basis = enumerate_basis(cfg.k, cfg.N);
  const GalerkinAssembler assembler(basis, gauss_hermite(cfg.Q, cfg.k));
  ctx.lap("setup");
  Solved s = solve(ctx, v, assembler, nonlinear);
  ctx.lap("solve");
  ctx.write("density.json", dump_density(s.density));
  json& rep = ctx.result.report;
  rep["solution"] = s.summary;
  rep["solution"]["density"] = "density.json";
  rep["solution"]["l2_squared"] = s.density.l2_norm_squared();
  rep["diagnostics"] = diagnose(ctx, s.density, v, s.frozen, assembler.grid());
  ctx.lap("diagnostics");
}

void run_ladder_mode(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const LadderConfig& lc = *cfg.ladder;
  const DriftField v = build_drift(cfg.drift, std::max(cfg.k, lc.max_dimension));
  const LadderReport rep = run_ladder(v, lc);
  ctx.lap("ladder");
  ctx.write("ladder.csv", rep.to_csv());
  for (const auto& level : rep.levels) {
    if (level.density) ctx.write("density_k" + std::to_string(level.k) + ".json", dump_density(*level.density));
  }
  ctx.result.report["ladder"] = rep.to_json();
  ctx.pass = ctx.pass && rep.pass();
  if (rep.aborted) throw SolverError("ladder aborted: " + rep.failure);
}

void run_sweep(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const SweepSpec& sweep = *cfg.sweep;
  const BasisPtr basis = enumerate_basis(cfg.k, cfg.N);
  const GalerkinAssembler assembler(basis, gauss_hermite(cfg.Q, cfg.k));
  const auto n = static_cast<std::ptrdiff_t>(sweep.values.size());

  struct Point {
    std::optional<ChaosDensity> density;
    json row;
    bool pass = false;
    bool failed = false;
  };
  std::vector<Point> points(static_cast<std::size_t>(n));
  // Deterministic selection u -> p_u: seed rho = 1 and the configured policy at every u.
  parallel_for(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j) {
      Point& pt = points[static_cast<std::size_t>(j)];
      const double u = sweep.values[static_cast<std::size_t>(j)];
      pt.row = {{"index", j}, {"u", u}, {"seed", derive_seed(cfg.seed, static_cast<std::uint64_t>(j))}};
      try {
        json block = cfg.drift;
        block[sweep.parameter] = u;
        const DriftField v = build_drift(block, cfg.k);
        ChaosDensity p = ChaosDensity::constant(basis);
        ChaosDensity frozen = p;
        int iterations = 0;
        if (v.measure_dependent()) {
          FixedPointOptions opts = cfg.fixed_point;
          opts.initial.reset();
          FixedPointResult res = fixed_point_solve(v, assembler, opts);
          iterations = res.trace.iterations();
          p = res.density;
          frozen = p;
        } else {
          p = solve_system(assembler.assemble(v, frozen)).density;
        }
        const ResidualSuite suite = residual_suite(p, v, frozen, assembler.grid(), default_bumps(cfg.k));
        const SchauderMembership member = schauder_membership(p, schauder_constant(v.h_bound()));
        pt.row["status"] = "ok";
        pt.row["iterations"] = iterations;
        pt.row["l2_squared"] = p.l2_norm_squared();
        pt.row["residual_suite"] = to_json(suite);
        pt.row["schauder_margin"] = member.margin;
        pt.row["density"] = "sweep_" + std::to_string(j) + ".json";
        pt.pass = suite.pass() && member.member;
        pt.density = std::move(p);
      } catch (const Error& e) {
        pt.row["status"] = "error";
        pt.row["message"] = e.what();
        pt.failed = true;
      }
    }
  });
  ctx.lap("sweep");

  json rows = json::array();
  std::string csv = "index,u,seed,status,iterations,l2sq,max_hermite,max_bump,pass,distance_prev\n";
  bool failed = false;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    Point& pt = points[static_cast<std::size_t>(j)];
    std::optional<double> distance;
    if (j > 0 && pt.density && points[static_cast<std::size_t>(j - 1)].density) {
      distance = l2_distance(*pt.density, *points[static_cast<std::size_t>(j - 1)].density);
      pt.row["distance_prev"] = *distance;
    }
    if (pt.density) ctx.write(pt.row["density"].get<std::string>(), dump_density(*pt.density));
    char line[512];
    if (pt.failed) {
      std::snprintf(line, sizeof line, "%td,%.17g,%llu,error,,,,,0,", j, sweep.values[static_cast<std::size_t>(j)],
                    static_cast<unsigned long long>(pt.row["seed"].get<std::uint64_t>()));
    } else {
      const auto& s = pt.row["residual_suite"];
      std::snprintf(line, sizeof line, "%td,%.17g,%llu,ok,%d,%.17g,%.17g,%.17g,%d,", j,
                    sweep.values[static_cast<std::size_t>(j)],
                    static_cast<unsigned long long>(pt.row["seed"].get<std::uint64_t>()),
                    pt.row["iterations"].get<int>(), pt.row["l2_squared"].get<double>(),
                    s["max_hermite"].get<double>(), s["max_bump"].get<double>(), pt.pass ? 1 : 0);
    }
    csv += line;
    if (distance) {
      std::snprintf(line, sizeof line, "%.17g", *distance);
      csv += line;
    }
    csv += "\n";
    ctx.pass = ctx.pass && pt.pass;
    failed = failed || pt.failed;
    rows.push_back(pt.row);
  }
  ctx.write("sweep.csv", csv);
  ctx.result.report["sweep"] = {{"parameter", sweep.parameter}, {"points", rows}, {"table", "sweep.csv"}};
  if (failed) throw SolverError("one or more sweep points failed; see report.sweep.points");
}

void run_verify(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::ifstream in(cfg.verify_input);
  if (!in) throw ConfigError("cannot open verify input " + cfg.verify_input);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("verify input is not valid JSON: " + std::string(e.what()));
  }
  const ChaosDensity rho = density_from_json(doc);
  if (rho.dimension() != cfg.k) throw ConfigError("verify input has k different from the config");
  const int n = rho.chaos_basis().max_degree();
  if (cfg.Q < n + 1) throw ConfigError("config Q must exceed the degree of the verify input");
  const DriftField v = build_drift(cfg.drift, cfg.k);
  const ChaosDensity frozen = v.measure_dependent() ? rho : seed_density(cfg, rho.basis());
  ctx.result.report["verify"] = {{"input", cfg.verify_input}, {"N", n}, {"l2_squared", rho.l2_norm_squared()}};
  ctx.result.report["diagnostics"] = diagnose(ctx, rho, v, frozen, gauss_hermite(cfg.Q, cfg.k));
  ctx.lap("diagnostics");
}

BoundReport compare(const std::string& name, double left, double right) {
  return {name, left, right, left <= right, 0.0, {}};
}

void run_oracle_compare(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.k > 2) throw ConfigError("oracle-compare supports k = 1 and k = 2");
  const DriftField v = build_drift(cfg.drift, cfg.k);
  const BasisPtr basis = enumerate_basis(cfg.k, cfg.N);
  const GalerkinAssembler assembler(basis, gauss_hermite(cfg.Q, cfg.k));
  const bool nonlinear = v.measure_dependent();
  if (cfg.k == 1 && nonlinear && v.kernel() == nullptr) {
    throw ConfigError("1-D oracle-compare needs a measure-independent or Vlasov drift");
  }
  Solved s = solve(ctx, v, assembler, nonlinear);
  ctx.lap("solve");
  ctx.write("density.json", dump_density(s.density));
  json& rep = ctx.result.report;
  rep["solution"] = s.summary;
  rep["solution"]["density"] = "density.json";
  json comparisons = json::array();
  auto record = [&](const BoundReport& r) {
    comparisons.push_back(to_json(r));
    ctx.pass = ctx.pass && r.pass.value_or(true);
  };

  if (cfg.k == 1) {
    GridDensity1D oracle;
    if (nonlinear) {
      const VlasovKernel kernel = *v.kernel();
      oracle = oracle_1d_vlasov([&](double z) { return kernel.component(0, z); }, cfg.oracle.L,
                                cfg.oracle.vlasov_points);
    } else {
      const PointMeasure none = PointMeasure::dirac(Eigen::VectorXd::Zero(1));
      oracle = oracle_1d([&](double x) { return v.eval_v(none, std::span<const double>(&x, 1))[0]; },
                         cfg.oracle.L, cfg.oracle.points);
    }
    ctx.lap("oracle");
    ctx.write("oracle_1d.csv", oracle.to_csv());
    record(compare("oracle_1d_l2_gamma", l2_gamma_distance(s.density, oracle), cfg.oracle.tolerance));
  } else {
    const PointMeasure frozen = nonlinear ? as_measure(s.density, assembler.grid())
                                          : PointMeasure::dirac(Eigen::VectorXd::Zero(2));
    const GridDensity2D fd = oracle_fd_2d(v, frozen, cfg.oracle.fd_L, cfg.oracle.fd_n);
    ctx.lap("oracle_fd_2d");
    ctx.write("oracle_fd_2d.csv", fd.to_csv());
    for (int c = 0; c < 2; ++c) {
      const std::array<int, 1> keep{c};
      const ChaosDensity m = marginal(s.density, keep);
      const Eigen::VectorXd ref = fd.marginal(c);
      double worst = 0.0;
      for (int i = 0; i < fd.n; ++i) {
        const double x = fd.center(i);
        const double spectral = m.evaluate(std::span<const double>(&x, 1)) * std::exp(-0.5 * x * x) /
                                std::sqrt(2.0 * std::numbers::pi);
        worst = std::max(worst, std::abs(spectral - ref(i)));
      }
      record(compare("fd_marginal_" + std::to_string(c), worst, cfg.oracle.fd_tolerance));
    }
    SdeOptions opts = cfg.oracle.sde;
    const SdeEstimate est = oracle_sde(v, frozen, opts);
    ctx.lap("oracle_sde");
    const auto& c = s.density;
    const std::array<std::array<int, 2>, 2> unit{{{1, 0}, {0, 1}}};
    for (int i = 0; i < 2; ++i) {
      const double mean = c.coefficient(unit[static_cast<std::size_t>(i)]);
      record(compare("sde_mean_" + std::to_string(i), std::abs(mean - est.mean(i)), 3.0 * est.mean_se(i)));
    }
    const std::array<std::array<int, 2>, 3> second{{{2, 0}, {1, 1}, {0, 2}}};
    const std::array<std::pair<int, int>, 3> entry{{{0, 0}, {0, 1}, {1, 1}}};
    for (std::size_t q = 0; q < 3; ++q) {
      const auto [i, j] = entry[q];
      const double coef = c.coefficient(second[q]);
      const double spectral = i == j ? 1.0 + std::numbers::sqrt2 * coef : coef;
      record(compare("sde_second_moment_" + std::to_string(i) + std::to_string(j),
                     std::abs(spectral - est.second_moment(i, j)), 3.0 * est.second_moment_se(i, j)));
    }
    rep["sde"] = {{"mean", {est.mean(0), est.mean(1)}},
                  {"mean_se", {est.mean_se(0), est.mean_se(1)}},
                  {"particle_steps", static_cast<double>(opts.n_steps) * opts.n_particles},
                  {"seed", opts.seed}};
  }
  rep["comparisons"] = comparisons;
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  RunReport result;
  Context ctx(cfg, result);
  json& rep = result.report;
  rep["software"] = {{"name", "gfpk"}, {"version", GFPK_VERSION}};
  rep["mode"] = to_string(cfg.mode);
  rep["config_hash"] = config_hash(cfg.source);
  rep["config"] = cfg.source;
  rep["effective"] = {{"k", cfg.k}, {"N", cfg.N}, {"Q", cfg.Q}, {"seed", cfg.seed}};
  std::string kind;
  std::string message;
  try {
    switch (cfg.mode) {
      case Mode::SolveLinear: run_single(ctx, false); break;
      case Mode::SolveNonlinear: run_single(ctx, true); break;
      case Mode::Ladder: run_ladder_mode(ctx); break;
      case Mode::Sweep: run_sweep(ctx); break;
      case Mode::Verify: run_verify(ctx); break;
      case Mode::OracleCompare: run_oracle_compare(ctx); break;
    }
    result.exit_code = ctx.pass ? kExitOk : kExitAssertion;
  } catch (const ConfigError& e) {
    result.exit_code = kExitParse;
    kind = "parse";
    message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitSolver;
    kind = "solver";
    message = e.what();
  }
  rep["pass"] = result.exit_code == kExitOk;
  rep["status"] = result.exit_code == kExitOk          ? "ok"
                  : result.exit_code == kExitAssertion ? "assertion-failed"
                                                       : "error";
  if (!kind.empty()) rep["error"] = {{"kind", kind}, {"message", message}};
  result.timings["total_seconds"] = ctx.total();
  if (result.exit_code == kExitParse) return result;  // nothing is written for bad input
  try {
    auto artifacts = result.artifacts;
    artifacts.push_back("timings.json");
    rep["artifacts"] = artifacts;
    ctx.write("report.json", rep.dump(2) + "\n");
    ctx.write("timings.json", result.timings.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "gfpk: error[io]: " << e.what() << "\n";
    if (result.exit_code == kExitOk) result.exit_code = kExitSolver;
  }
  return result;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"gfpk: stationary Fokker-Planck solver on Gaussian space"};
  std::string mode_name;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("mode", mode_name, "solve-linear | solve-nonlinear | ladder | sweep | verify | oracle-compare")
      ->required()
      ->check(CLI::IsMember({"solve-linear", "solve-nonlinear", "ladder", "sweep", "verify", "oracle-compare"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "root seed (overrides seed)");
  app.add_option("--threads", threads, "worker threads (overrides GFPK_THREADS)")->check(CLI::Range(1, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path, parse_mode(mode_name));
  } catch (const ConfigError& e) {
    std::cerr << "gfpk: error[parse]: " << e.what() << "\n";
    return kExitParse;
  }
  if (out_dir) cfg.output_dir = *out_dir;
  if (seed) {
    cfg.seed = *seed;
    cfg.oracle.sde.seed = *seed;
  }
  int workers = cfg.threads;
  if (threads) {
    workers = *threads;
  } else if (const char* env = std::getenv("GFPK_THREADS")) {
    workers = std::atoi(env);
  }
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  set_thread_count(workers);

  const RunReport result = run(cfg);
  if (result.report.contains("error")) {
    const auto& err = result.report["error"];
    std::cerr << "gfpk: error[" << err["kind"].get<std::string>() << "]: " << err["message"].get<std::string>()
              << "\n";
  } else if (result.exit_code == kExitAssertion) {
    std::cerr << "gfpk: assertion failed; see " << cfg.output_dir << "/report.json\n";
  }
  std::cout << "gfpk " << to_string(cfg.mode) << ": " << result.report["status"].get<std::string>() << " ("
            << cfg.output_dir << ")\n";
  return result.exit_code;
}

}  // namespace gfpk
