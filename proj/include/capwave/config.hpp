#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "capwave/dispersion.hpp"
#include "capwave/grid.hpp"

namespace capwave {

struct PhysicsParams {
  double nu = 0.0;
  double rho = 0.0;  // coefficient of the |k|^4 hyperviscous part
  DispersionLaw law;
};

/// 2 nu (k^2 + rho k^4).
inline double damping_rate(double k_mag, const PhysicsParams& params) {
  if (k_mag < 0.0) throw std::domain_error("damping_rate: negative wavenumber magnitude");
  const double k2 = k_mag * k_mag;
  return 2.0 * params.nu * (k2 + params.rho * k2 * k2);
}

enum class Scheme { Rk4IntegratingFactor, EulerTruncated };
enum class PositivityMode { Clip, RejectStep };
enum class OperatorForm { Conservative, Direct };

struct SchemeConfig {
  Scheme scheme = Scheme::Rk4IntegratingFactor;
  double dt = 1e-3;
  double t_end = 1.0;
  double truncation_radius = std::numeric_limits<double>::infinity();
  PositivityMode positivity = PositivityMode::Clip;
};

struct GridSpec {
  double k_min = 1e-2;
  double k_max = 1e2;
  std::size_t n = 128;
  Spacing spacing = Spacing::Log;
};

struct CollisionSpec {
  OperatorForm form = OperatorForm::Conservative;
  int quad_order = 4;
  bool closed_system = false;
  std::optional<double> low_slope;
};

struct GaussianBump {
  double center = 1.0;
  double width = 0.25;
  double amplitude = 1.0;
};

struct PowerLawInit {
  double exponent = 4.25;
  double band_lo = 0.1;
  double band_hi = 10.0;
  double amplitude = 1.0;
};

struct FromFile {
  std::string path;
};

using InitialCondition = std::variant<GaussianBump, PowerLawInit, FromFile>;

struct OutputPlan {
  std::vector<double> snapshot_times;
  double moment_interval = 0.0;  // 0: every time step
  std::vector<double> moment_exponents{1.0};
  std::string directory = "out";
};

/// Bounds on L^1_{1/3}, L^1_1 and L^1_{N+3}; a hard ceiling on M_1..M_N aborts.
struct MonitorThresholds {
  double c0 = std::numeric_limits<double>::infinity();
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = std::numeric_limits<double>::infinity();
  int N = 3;
  double ceiling = 1e100;
};

struct KzScanSpec {
  std::optional<double> band_lo;
  std::optional<double> band_hi;
  double from = 3.5;
  double to = 5.0;
  int steps = 31;
};

struct GeometrySpec {
  std::vector<double> p{0.5, 1.0, 2.0};
  int n_alpha = 101;
  double u_max_factor = 4.0;
};

struct OracleSpec {
  std::vector<double> p{0.5, 1.0, 2.0};
  double epsilon = 0.01;
  std::uint64_t samples = 2'000'000;
  double u_max_factor = 4.0;
};

struct SimConfig {
  PhysicsParams physics;
  GridSpec grid;
  SchemeConfig scheme;
  CollisionSpec collision;
  InitialCondition initial = GaussianBump{};
  OutputPlan output;
  MonitorThresholds monitor;
  std::optional<double> kernel_constant;
  std::uint64_t seed = 1;
  KzScanSpec kz_scan;
  GeometrySpec geometry;
  OracleSpec oracle;
};

/// All validation failures of a configuration, each prefixed by its field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out = "invalid configuration:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
  }

  std::vector<std::string> errors_;
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json* node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_->is_object()) {
      fail("", "must be an object");
      node_ = nullptr;
    }
  }

  ~Section() {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) fail(key, "unknown key");
    }
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  std::string path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const nlohmann::json* find(const std::string& key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    auto it = node_->find(key);
    if (it == node_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  Section child(const std::string& key) { return Section(find(key), path(key), errors_); }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(key, "must be a number");
      }
    }
  }

  void number(const std::string& key, std::optional<double>& out) {
    if (const auto* v = find(key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(key, "must be a number");
      }
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* v = find(key)) {
      if (v->is_number_integer() || v->is_number_unsigned()) {
        if (v->is_number_unsigned() || v->get<std::int64_t>() >= 0 || std::is_signed_v<Int>) {
          out = v->get<Int>();
          return;
        }
      }
      fail(key, "must be an integer");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (v->is_boolean()) {
        out = v->get<bool>();
      } else {
        fail(key, "must be a boolean");
      }
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (v->is_string()) {
        out = v->get<std::string>();
      } else {
        fail(key, "must be a string");
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) {
        fail(key, "must be an array of numbers");
        return;
      }
      std::vector<double> tmp;
      for (const auto& x : *v) {
        if (!x.is_number()) {
          fail(key, "must be an array of numbers");
          return;
        }
        tmp.push_back(x.get<double>());
      }
      out = std::move(tmp);
    }
  }

  void fail(const std::string& key, const std::string& what) {
    errors_.push_back((key.empty() ? path_ : path(key)) + ": " + what);
  }

  bool present() const { return node_ != nullptr; }

 private:
  const nlohmann::json* node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Parses and validates a JSON run description. Unknown keys are errors.
/// Throws ConfigError listing every problem found.
inline SimConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("<root>: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  SimConfig cfg;
  double gamma = 1.5, sigma = 1.0;
  int dim = 3;
  {
    detail::Section top(&root, "", errors);
    {
      auto s = top.child("physics");
      s.number("nu", cfg.physics.nu);
      s.number("rho", cfg.physics.rho);
      s.number("gamma", gamma);
      s.number("sigma", sigma);
      s.integer("dim", dim);
      if (!(cfg.physics.nu >= 0.0)) s.fail("nu", "must be >= 0");
      if (!(cfg.physics.rho >= 0.0)) s.fail("rho", "must be >= 0");
      if (!(gamma > 1.0 && gamma <= 2.0)) s.fail("gamma", "must lie in (1, 2]");
      if (!(sigma > 0.0)) s.fail("sigma", "must be > 0");
      if (dim != 2 && dim != 3) s.fail("dim", "must be 2 or 3");
    }
    {
      auto s = top.child("grid");
      s.number("k_min", cfg.grid.k_min);
      s.number("k_max", cfg.grid.k_max);
      s.integer("n", cfg.grid.n);
      std::string spacing = "log";
      s.string("spacing", spacing);
      if (spacing == "log") {
        cfg.grid.spacing = Spacing::Log;
      } else if (spacing == "linear") {
        cfg.grid.spacing = Spacing::Linear;
      } else {
        s.fail("spacing", "must be \"log\" or \"linear\"");
      }
      if (!(cfg.grid.k_min > 0.0)) s.fail("k_min", "must be > 0");
      if (!(cfg.grid.k_max > cfg.grid.k_min)) s.fail("k_max", "must exceed k_min");
      if (cfg.grid.n < 8) s.fail("n", "must be >= 8");
    }
    {
      auto s = top.child("scheme");
      std::string type = "rk4_if";
      s.string("type", type);
      if (type == "rk4_if") {
        cfg.scheme.scheme = Scheme::Rk4IntegratingFactor;
      } else if (type == "euler_truncated") {
        cfg.scheme.scheme = Scheme::EulerTruncated;
      } else {
        s.fail("type", "must be \"rk4_if\" or \"euler_truncated\"");
      }
      s.number("dt", cfg.scheme.dt);
      s.number("t_end", cfg.scheme.t_end);
      std::optional<double> radius;
      s.number("truncation_radius", radius);
      if (radius) {
        cfg.scheme.truncation_radius = *radius;
        if (!(*radius > 0.0)) s.fail("truncation_radius", "must be > 0");
      }
      std::string positivity = "clip";
      s.string("positivity", positivity);
      if (positivity == "clip") {
        cfg.scheme.positivity = PositivityMode::Clip;
      } else if (positivity == "reject_step") {
        cfg.scheme.positivity = PositivityMode::RejectStep;
      } else {
        s.fail("positivity", "must be \"clip\" or \"reject_step\"");
      }
      if (!(cfg.scheme.dt > 0.0)) s.fail("dt", "must be > 0");
      if (!(cfg.scheme.t_end > 0.0)) s.fail("t_end", "must be > 0");
    }
    {
      auto s = top.child("collision");
      std::string form = "conservative";
      s.string("form", form);
      if (form == "conservative") {
        cfg.collision.form = OperatorForm::Conservative;
      } else if (form == "direct") {
        cfg.collision.form = OperatorForm::Direct;
      } else {
        s.fail("form", "must be \"conservative\" or \"direct\"");
      }
      s.integer("quad_order", cfg.collision.quad_order);
      s.boolean("closed_system", cfg.collision.closed_system);
      s.number("low_slope", cfg.collision.low_slope);
      if (cfg.collision.quad_order < 1 || cfg.collision.quad_order > 32) {
        s.fail("quad_order", "must lie in [1, 32]");
      }
    }
    {
      auto s = top.child("initial");
      std::string type = "gaussian_bump";
      s.string("type", type);
      if (type == "gaussian_bump") {
        GaussianBump g;
        s.number("center", g.center);
        s.number("width", g.width);
        s.number("amplitude", g.amplitude);
        if (!(g.width > 0.0)) s.fail("width", "must be > 0");
        if (!(g.amplitude >= 0.0)) s.fail("amplitude", "must be >= 0");
        cfg.initial = g;
      } else if (type == "power_law") {
        PowerLawInit p;
        s.number("exponent", p.exponent);
        std::vector<double> band{p.band_lo, p.band_hi};
        s.numbers("band", band);
        s.number("amplitude", p.amplitude);
        if (band.size() != 2 || !(band[0] > 0.0) || !(band[1] > band[0])) {
          s.fail("band", "must be [lo, hi] with 0 < lo < hi");
        } else {
          p.band_lo = band[0];
          p.band_hi = band[1];
        }
        if (!(p.amplitude >= 0.0)) s.fail("amplitude", "must be >= 0");
        cfg.initial = p;
      } else if (type == "from_file") {
        FromFile f;
        s.string("path", f.path);
        if (f.path.empty()) s.fail("path", "is required for from_file");
        cfg.initial = f;
      } else {
        s.fail("type", "must be gaussian_bump, power_law or from_file");
      }
    }
    {
      auto s = top.child("output");
      s.numbers("snapshot_times", cfg.output.snapshot_times);
      s.number("moment_interval", cfg.output.moment_interval);
      s.numbers("moment_exponents", cfg.output.moment_exponents);
      s.string("directory", cfg.output.directory);
      for (double t : cfg.output.snapshot_times) {
        if (!(t >= 0.0 && t <= cfg.scheme.t_end)) {
          s.fail("snapshot_times", "every time must lie in [0, t_end]");
          break;
        }
      }
      if (!(cfg.output.moment_interval >= 0.0)) s.fail("moment_interval", "must be >= 0");
      for (double n : cfg.output.moment_exponents) {
        if (!(n >= 0.0)) {
          s.fail("moment_exponents", "exponents must be >= 0");
          break;
        }
      }
      auto& ex = cfg.output.moment_exponents;
      if (std::find(ex.begin(), ex.end(), 1.0) == ex.end()) ex.insert(ex.begin(), 1.0);
    }
    {
      auto s = top.child("monitor");
      s.number("c0", cfg.monitor.c0);
      s.number("c1", cfg.monitor.c1);
      s.number("c2", cfg.monitor.c2);
      s.integer("N", cfg.monitor.N);
      s.number("ceiling", cfg.monitor.ceiling);
      if (!(cfg.monitor.c0 > 0.0)) s.fail("c0", "must be > 0");
      if (!(cfg.monitor.c1 > 0.0)) s.fail("c1", "must be > 0");
      if (!(cfg.monitor.c2 > 0.0)) s.fail("c2", "must be > 0");
      if (cfg.monitor.N < 1) s.fail("N", "must be >= 1");
      if (!(cfg.monitor.ceiling > 0.0)) s.fail("ceiling", "must be > 0");
    }
    top.number("kernel_constant", cfg.kernel_constant);
    if (cfg.kernel_constant && !(*cfg.kernel_constant >= 0.0)) {
      top.fail("kernel_constant", "must be >= 0");
    }
    top.integer("seed", cfg.seed);
    {
      auto s = top.child("kz_scan");
      std::vector<double> band;
      s.numbers("band", band);
      if (!band.empty()) {
        if (band.size() != 2 || !(band[0] > 0.0) || !(band[1] > band[0])) {
          s.fail("band", "must be [lo, hi] with 0 < lo < hi");
        } else {
          cfg.kz_scan.band_lo = band[0];
          cfg.kz_scan.band_hi = band[1];
        }
      }
      s.number("from", cfg.kz_scan.from);
      s.number("to", cfg.kz_scan.to);
      s.integer("steps", cfg.kz_scan.steps);
      if (!(cfg.kz_scan.to > cfg.kz_scan.from)) s.fail("to", "must exceed from");
      if (cfg.kz_scan.steps < 3) s.fail("steps", "must be >= 3");
    }
    {
      auto s = top.child("geometry");
      s.numbers("p", cfg.geometry.p);
      s.integer("n_alpha", cfg.geometry.n_alpha);
      s.number("u_max_factor", cfg.geometry.u_max_factor);
      for (double p : cfg.geometry.p) {
        if (!(p > 0.0)) {
          s.fail("p", "magnitudes must be > 0");
          break;
        }
      }
      if (cfg.geometry.n_alpha < 2) s.fail("n_alpha", "must be >= 2");
      if (!(cfg.geometry.u_max_factor > 0.0)) s.fail("u_max_factor", "must be > 0");
    }
    {
      auto s = top.child("oracle");
      s.numbers("p", cfg.oracle.p);
      s.number("epsilon", cfg.oracle.epsilon);
      s.integer("samples", cfg.oracle.samples);
      s.number("u_max_factor", cfg.oracle.u_max_factor);
      for (double p : cfg.oracle.p) {
        if (!(p > 0.0)) {
          s.fail("p", "magnitudes must be > 0");
          break;
        }
      }
      if (!(cfg.oracle.epsilon > 0.0 && cfg.oracle.epsilon <= 0.05)) {
        s.fail("epsilon", "must lie in (0, 0.05]");
      }
      if (cfg.oracle.samples < 100'000) s.fail("samples", "must be >= 100000");
      if (!(cfg.oracle.u_max_factor > 0.0)) s.fail("u_max_factor", "must be > 0");
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  cfg.physics.law = DispersionLaw(gamma, sigma, dim);
  if (cfg.scheme.scheme == Scheme::EulerTruncated &&
      !std::isfinite(cfg.scheme.truncation_radius)) {
    cfg.scheme.truncation_radius = cfg.grid.k_max;
  }
  return cfg;
}

/// FNV-1a 64-bit digest, hex encoded; identifies the configuration text.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

inline GridPtr make_grid(const GridSpec& spec, int dim) {
  return make_grid(spec.k_min, spec.k_max, spec.n, spec.spacing, dim);
}

}  // namespace capwave
