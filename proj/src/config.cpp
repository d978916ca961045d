#include "gfpk/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gfpk/error.hpp"

namespace gfpk {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::SolveLinear: return "solve-linear";
    case Mode::SolveNonlinear: return "solve-nonlinear";
    case Mode::Ladder: return "ladder";
    case Mode::Sweep: return "sweep";
    case Mode::Verify: return "verify";
    case Mode::OracleCompare: return "oracle-compare";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::SolveLinear, Mode::SolveNonlinear, Mode::Ladder, Mode::Sweep, Mode::Verify,
                 Mode::OracleCompare}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + name + "'");
}

namespace {

// Typed, range-checked access to one JSON object; rejects unread keys on finish().
class Reader {
 public:
  Reader(const nlohmann::json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    if (!doc_.contains(key)) throw ConfigError(where(key) + " is required");
    return doc_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback, double lo, double hi) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(where(key) + " is required");
      return *fallback;
    }
    const auto& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return check(key, v.get<double>(), lo, hi);
  }

  int integer(const std::string& key, std::optional<int> fallback, int lo, int hi) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(where(key) + " is required");
      return *fallback;
    }
    const auto& v = doc_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return static_cast<int>(check(key, static_cast<double>(v.get<long long>()), lo, hi));
  }

  std::string text(const std::string& key, std::optional<std::string> fallback) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(where(key) + " is required");
      return *fallback;
    }
    const auto& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, double lo, double hi) {
    const auto& v = raw(key);
    if (v.is_number()) return {check(key, v.get<double>(), lo, hi)};
    if (!v.is_array() || v.empty()) throw ConfigError(where(key) + " must be a number or non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + " entries must be numbers");
      out.push_back(check(key, e.get<double>(), lo, hi));
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, int lo, int hi) {
    const auto& v = raw(key);
    std::vector<int> out;
    auto one = [&](const nlohmann::json& e) {
      if (!e.is_number_integer()) throw ConfigError(where(key) + " entries must be integers");
      out.push_back(static_cast<int>(check(key, static_cast<double>(e.get<long long>()), lo, hi)));
    };
    if (v.is_array()) {
      if (v.empty()) throw ConfigError(where(key) + " must not be empty");
      for (const auto& e : v) one(e);
    } else {
      one(v);
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  double check(const std::string& key, double v, double lo, double hi) const {
    if (!std::isfinite(v) || v < lo || v > hi) {
      std::ostringstream msg;
      msg << where(key) << " = " << v << " is outside [" << lo << ", " << hi << "]";
      throw ConfigError(msg.str());
    }
    return v;
  }

  const nlohmann::json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr double kBig = 1e6;

Eigen::VectorXd vector_of(const std::vector<double>& values, int k, const std::string& what) {
  if (values.size() == 1) return Eigen::VectorXd::Constant(k, values[0]);
  if (static_cast<int>(values.size()) != k) {
    throw ConfigError(what + " must have one entry or k = " + std::to_string(k) + " entries");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), k);
}

}  // namespace

DriftField build_drift(const nlohmann::json& block, int k) {
  Reader r(block, "drift");
  const std::string kind = r.text("kind", std::nullopt);
  const double scale = r.number("scale", 1.0, -kBig, kBig);
  std::optional<DriftField> field;
  if (kind == "constant") {
    field = DriftField::constant(scale * vector_of(r.numbers("h", -kBig, kBig), k, "drift.h"));
  } else if (kind == "gradient") {
    const std::string potential = r.text("potential", "softclip");
    if (potential != "softclip") throw ConfigError("drift.potential must be 'softclip'");
    field = DriftField::softclip_gradient(k, scale * r.number("amplitude", std::nullopt, -kBig, kBig),
                                          r.number("width", 1.0, 1e-6, kBig));
  } else if (kind == "vlasov") {
    const std::string name = r.text("kernel", std::nullopt);
    VlasovKernel kernel;
    if (name == "constant") kernel.type = VlasovKernel::Type::Constant;
    else if (name == "tanh") kernel.type = VlasovKernel::Type::Tanh;
    else if (name == "gaussian_lobe") kernel.type = VlasovKernel::Type::GaussianLobe;
    else if (name == "clipped_linear") kernel.type = VlasovKernel::Type::ClippedLinear;
    else throw ConfigError("drift.kernel must be constant, tanh, gaussian_lobe or clipped_linear");
    kernel.amplitude = scale * vector_of(r.numbers("amplitude", -kBig, kBig), k, "drift.amplitude");
    kernel.scale = r.number("width", 1.0, 1e-6, kBig);
    field = DriftField::vlasov(kernel);
  } else if (kind == "componentwise") {
    const std::string family = r.text("family", "tanh_chain");
    if (family != "tanh_chain") throw ConfigError("drift.family must be 'tanh_chain'");
    const int components = r.integer("components", k, k, 64);
    field = DriftField::tanh_chain(components, scale * r.number("C", std::nullopt, 0.0, kBig),
                                   r.number("slope", 1.0, -kBig, kBig),
                                   r.number("coupling", 0.0, -kBig, kBig),
                                   r.integer("active", components, 0, components));
  } else if (kind == "custom") {
    const std::string preset = r.text("preset", std::nullopt);
    if (preset != "rotational") throw ConfigError("drift.preset must be 'rotational'");
    if (k != 2) throw ConfigError("the rotational preset needs k = 2");
    Eigen::Vector2d shift = Eigen::Vector2d::Zero();
    if (r.has("shift")) shift = vector_of(r.numbers("shift", -kBig, kBig), 2, "drift.shift");
    field = DriftField::rotational(scale * r.number("amplitude", std::nullopt, -kBig, kBig), scale * shift);
  } else {
    throw ConfigError("drift.kind must be constant, gradient, vlasov, componentwise or custom");
  }
  if (r.has("bound")) {
    Reader b = r.child("bound");
    const std::string type = b.text("type", std::nullopt);
    DeclaredBound declared;
    if (type == "H") declared.kind = DeclaredBound::Kind::HNorm;
    else if (type == "componentwise") declared.kind = DeclaredBound::Kind::Componentwise;
    else throw ConfigError("drift.bound.type must be 'H' or 'componentwise'");
    declared.value = b.number("value", std::nullopt, 0.0, kBig);
    b.finish();
    try {
      field = field->with_declared_bound(declared);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("drift.bound: ") + e.what());
    }
  }
  r.finish();
  if (field->dimension() < k) throw ConfigError("drift has fewer components than k");
  return field->dimension() == k ? *field : field->truncate_to_k(k);
}

RunConfig parse_config(const nlohmann::json& doc, std::optional<Mode> mode) {
  RunConfig cfg;
  cfg.source = doc;
  Reader r(doc, "config");
  if (r.has("mode")) {
    const Mode declared = parse_mode(r.text("mode", std::nullopt));
    if (mode && *mode != declared) {
      throw ConfigError("config mode '" + to_string(declared) + "' differs from the command line mode '" +
                        to_string(*mode) + "'");
    }
    cfg.mode = declared;
  } else if (mode) {
    cfg.mode = *mode;
  } else {
    throw ConfigError("no mode given");
  }
  cfg.k = r.integer("k", std::nullopt, 1, 8);
  cfg.N = r.integer("N", std::nullopt, 0, 60);
  cfg.Q = r.integer("Q", std::max(2 * cfg.N, cfg.N + 1), cfg.N + 1, 128);

  if (r.has("fixed_point")) {
    Reader f = r.child("fixed_point");
    cfg.fixed_point.damping = f.number("damping", 1.0, 1e-6, 1.0);
    cfg.fixed_point.tolerance = f.number("tolerance", 1e-10, 1e-15, 1.0);
    cfg.fixed_point.max_iterations = f.integer("max_iterations", 200, 1, 100000);
    if (f.has("seed")) {
      const auto& s = f.raw("seed");
      if (s.is_string()) {
        if (s.get<std::string>() != "one") throw ConfigError("config.fixed_point.seed must be 'one' or an object");
      } else {
        Reader sr(s, "config.fixed_point.seed");
        auto shift = sr.numbers("cameron_martin", -10.0, 10.0);
        sr.finish();
        if (shift.size() == 1) shift.assign(static_cast<std::size_t>(cfg.k), shift[0]);
        if (static_cast<int>(shift.size()) != cfg.k) throw ConfigError("seed shift needs k entries");
        cfg.seed_density.cameron_martin = shift;
      }
    }
    f.finish();
  }

  if (cfg.mode == Mode::Ladder) {
    Reader l = r.child("ladder");
    LadderConfig ladder;
    ladder.max_dimension = l.integer("K", std::nullopt, 1, 8);
    ladder.max_ratio = l.number("ratio_cap", 0.5, 1e-6, 1.0 - 1e-9);
    ladder.weights = l.has("weights") ? l.numbers("weights", 1e-300, kBig)
                                      : LadderConfig::default_weights(std::max(ladder.max_dimension, 30));
    ladder.degrees = l.has("degrees") ? l.integers("degrees", 2, 60) : std::vector<int>{cfg.N};
    ladder.quadrature = l.has("quadrature") ? l.integers("quadrature", 3, 128) : std::vector<int>{cfg.Q};
    if (l.has("tail_levels")) ladder.tail_levels = l.numbers("tail_levels", 1e-12, kBig);
    ladder.bound = l.number("C", -1.0, -1.0, kBig);
    ladder.fixed_point = cfg.fixed_point;
    l.finish();
    cfg.ladder = ladder;
  } else if (doc.contains("ladder")) {
    throw ConfigError("config.ladder is only valid in ladder mode");
  }

  if (cfg.mode == Mode::Sweep) {
    Reader s = r.child("sweep");
    SweepSpec sweep;
    sweep.parameter = s.text("parameter", std::nullopt);
    sweep.values = s.numbers("values", -kBig, kBig);
    s.finish();
    cfg.sweep = sweep;
  } else if (doc.contains("sweep")) {
    throw ConfigError("config.sweep is only valid in sweep mode");
  }

  if (cfg.mode == Mode::Verify) {
    Reader v = r.child("verify");
    cfg.verify_input = v.text("input", std::nullopt);
    v.finish();
  } else if (doc.contains("verify")) {
    throw ConfigError("config.verify is only valid in verify mode");
  }

  if (r.has("oracle")) {
    Reader o = r.child("oracle");
    cfg.oracle.L = o.number("L", 10.0, 1.0, 100.0);
    cfg.oracle.points = o.integer("points", 20001, 3, 2'000'001);
    if (cfg.oracle.points % 2 == 0) throw ConfigError("config.oracle.points must be odd");
    cfg.oracle.vlasov_points = o.integer("vlasov_points", 1001, 3, 20001);
    if (cfg.oracle.vlasov_points % 2 == 0) throw ConfigError("config.oracle.vlasov_points must be odd");
    cfg.oracle.tolerance = o.number("tolerance", 1e-6, 0.0, 1.0);
    cfg.oracle.fd_L = o.number("fd_L", 6.0, 1.0, 100.0);
    cfg.oracle.fd_n = o.integer("fd_n", 200, 4, 2000);
    cfg.oracle.fd_tolerance = o.number("fd_tolerance", 5e-3, 0.0, 1.0);
    if (o.has("sde")) {
      Reader s = o.child("sde");
      cfg.oracle.sde.dt = s.number("dt", 1e-3, 1e-7, 0.01);
      cfg.oracle.sde.n_steps = s.integer("steps", 10000, 1, 100'000'000);
      cfg.oracle.sde.n_particles = s.integer("particles", 100, 2, 10'000'000);
      cfg.oracle.sde.n_batches = s.integer("batches", 50, 2, 100000);
      cfg.oracle.sde.burn_in = s.number("burn_in", 0.2, 0.0, 0.99);
      s.finish();
    }
    o.finish();
  }

  if (r.has("diagnostics")) {
    Reader d = r.child("diagnostics");
    if (d.has("t_grid")) cfg.t_grid = d.numbers("t_grid", 1.0 + 1e-12, kBig);
    cfg.log_moment_alpha = d.number("log_moment_alpha", 0.2, 1e-9, 0.25 - 1e-12);
    d.finish();
  }
  if (r.has("output")) {
    Reader o = r.child("output");
    cfg.output_dir = o.text("dir", cfg.output_dir);
    o.finish();
  }
  if (r.has("seed")) {
    const auto& s = r.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("config.seed must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.oracle.sde.seed = cfg.seed;
  cfg.threads = r.integer("threads", 0, 0, 1024);

  cfg.drift = r.raw("drift");
  try {
    // Ladder levels truncate a K-component field; other modes use k directly.
    const int kd = cfg.ladder ? std::max(cfg.k, cfg.ladder->max_dimension) : cfg.k;
    const DriftField v = build_drift(cfg.drift, kd);
    if (cfg.ladder) {
      if (v.declared_bound().kind != DeclaredBound::Kind::Componentwise) {
        throw ConfigError("ladder mode needs a componentwise drift");
      }
      if (cfg.ladder->bound < 0.0) cfg.ladder->bound = v.declared_bound().value;
      cfg.ladder->validate();
    }
    if (cfg.sweep) {
      for (double u : cfg.sweep->values) {
        auto probe = cfg.drift;
        if (!probe.contains(cfg.sweep->parameter) && cfg.sweep->parameter != "scale") {
          throw ConfigError("sweep parameter '" + cfg.sweep->parameter + "' is not a key of the drift block");
        }
        probe[cfg.sweep->parameter] = u;
        build_drift(probe, kd);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  r.finish();
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Mode> mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc, mode);
}

std::string config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace gfpk
