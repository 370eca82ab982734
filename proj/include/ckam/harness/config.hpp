#pragma once

#include "ckam/kernels.hpp"
#include "ckam/samplers/run.hpp"
#include "ckam/targets.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef CKAM_PRESET_DIR
#define CKAM_PRESET_DIR "presets"
#endif

namespace ckam::harness {

/// Any problem with a config document. The message names the offending key
/// (or line) so the user can fix it without reading code.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { Rw, Am, Rbam, Gam, Kam, Ckam };

inline std::string to_string(SamplerKind s) {
  switch (s) {
    case SamplerKind::Rw: return "rw";
    case SamplerKind::Am: return "am";
    case SamplerKind::Rbam: return "rbam";
    case SamplerKind::Gam: return "gam";
    case SamplerKind::Kam: return "kam";
    case SamplerKind::Ckam: return "ckam";
  }
  return "?";
}

inline std::filesystem::path default_preset_dir() { return CKAM_PRESET_DIR; }

/// Raw key/value entries after preset expansion, in sorted key order.
using RawConfig = std::map<std::string, std::string>;

struct DiagConfig {
  std::uint64_t checkpoint_every = 1000;
  int bins = 100;
  double smoothing = kDefaultSmoothing;
  GridMesh mesh{-1, 1, -1, 1, 100, 100};
};

struct ExperimentConfig {
  RawConfig entries;  // echoed into summary.json
  std::string target_name;
  Eigen::Index dimension = 2;
  SamplerKind sampler = SamplerKind::Rw;
  Position init;
  std::optional<KernelSpec> kernel;

  RandomWalkConfig rw;
  AdaptiveMetropolisConfig am;
  CkamConfig ckam;  // ckam.kam doubles as the KAM configuration

  std::uint64_t seed = 0;
  Budget budget;
  bool virtual_clock = false;
  DiagConfig diag;

  Target make_target() const;
};

namespace detail {

enum class KeyType { Text, Real, Count, Flag, Vector };

struct KeySpec {
  std::string_view name;
  KeyType type;
  // samplers the key applies to; empty means every sampler
  std::vector<SamplerKind> samplers;
};

inline const std::vector<KeySpec>& key_table() {
  using S = SamplerKind;
  using K = KeyType;
  static const std::vector<KeySpec> table{
      {"preset", K::Text, {}},
      {"target.name", K::Text, {}},
      {"target.dimension", K::Count, {}},
      {"sampler.name", K::Text, {}},
      {"sampler.init", K::Vector, {}},
      {"sampler.stepsize", K::Real, {S::Rw, S::Am, S::Gam, S::Kam, S::Ckam}},
      {"sampler.gain", K::Real, {S::Am, S::Rbam}},
      {"sampler.rm_rate", K::Real, {S::Gam, S::Kam, S::Ckam}},
      {"sampler.target_accept", K::Real, {S::Gam, S::Kam, S::Ckam}},
      {"sampler.init_cov_scale", K::Real, {S::Am, S::Rbam, S::Gam}},
      {"sampler.subsample_size", K::Count, {S::Kam, S::Ckam}},
      {"sampler.adapt_prob", K::Real, {S::Kam, S::Ckam}},
      {"sampler.noise_a", K::Real, {S::Kam, S::Ckam}},
      {"sampler.noise_b", K::Real, {S::Kam, S::Ckam}},
      {"sampler.noise_decay", K::Real, {S::Kam, S::Ckam}},
      {"sampler.iterations_per_cycle", K::Count, {S::Ckam}},
      {"sampler.exploration_fraction", K::Real, {S::Ckam}},
      {"sampler.burnin", K::Count, {S::Rw, S::Am, S::Rbam, S::Gam, S::Kam}},
      {"kernel.name", K::Text, {S::Kam, S::Ckam}},
      {"kernel.order", K::Real, {S::Kam, S::Ckam}},
      {"kernel.lengthscale", K::Real, {S::Kam, S::Ckam}},
      {"diag.checkpoint_every", K::Count, {}},
      {"diag.bins", K::Count, {}},
      {"diag.smoothing", K::Real, {}},
      {"diag.mesh_lo", K::Real, {}},
      {"diag.mesh_hi", K::Real, {}},
      {"diag.mesh_cells", K::Count, {}},
      {"run.seed", K::Count, {}},
      {"run.budget_iters", K::Count, {}},
      {"run.budget_seconds", K::Real, {}},
      {"run.virtual_clock", K::Flag, {}},
  };
  return table;
}

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : key_table())
    if (k.name == key) return &k;
  return nullptr;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_real(const std::string& key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("config error: " + key + ": expected a finite number, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_count(const std::string& key, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config error: " + key + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline bool parse_flag(const std::string& key, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("config error: " + key + ": expected true or false, got '" +
                    std::string(text) + "'");
}

/// "origin" or a comma-separated list of numbers.
inline std::optional<Position> parse_vector(const std::string& key, std::string_view text) {
  if (text == "origin") return std::nullopt;
  std::vector<double> values;
  while (true) {
    const auto comma = text.find(',');
    values.push_back(parse_real(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return Eigen::Map<const Position>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path preset_path(const std::filesystem::path& preset_dir,
                                         const std::string& name) {
  if (name.empty() || name.find("..") != std::string::npos || name.front() == '/') {
    throw ConfigError("config error: preset: invalid preset name '" + name + "'");
  }
  return preset_dir / (name + ".cfg");
}

inline void parse_into(RawConfig& out, std::string_view text, const std::string& origin,
                       const std::filesystem::path& preset_dir, std::set<std::string>& visiting) {
  RawConfig local;
  std::istringstream lines{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config error: " + origin + " line " + std::to_string(number) +
                        ": expected 'key = value'");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError("config error: " + origin + " line " + std::to_string(number) +
                        ": empty key or value");
    }
    if (!find_key(key)) throw ConfigError("config error: " + key + ": unknown key");
    if (local.contains(key)) throw ConfigError("config error: " + key + ": set twice in " + origin);
    local[key] = value;
  }

  // the included preset is applied first; this document's entries override it
  if (const auto it = local.find("preset"); it != local.end()) {
    const std::string name = it->second;
    if (visiting.contains(name)) {
      throw ConfigError("config error: preset: include cycle through '" + name + "'");
    }
    const auto path = preset_path(preset_dir, name);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("config error: preset: unknown preset '" + name + "'");
    }
    visiting.insert(name);
    parse_into(out, read_file(path), name, preset_dir, visiting);
    visiting.erase(name);
  }
  // the budget is a single choice: either kind replaces an inherited one
  if (local.contains("run.budget_iters") || local.contains("run.budget_seconds")) {
    out.erase("run.budget_iters");
    out.erase("run.budget_seconds");
  }
  for (auto& [k, v] : local) out[k] = v;
}

inline SamplerKind parse_sampler(const std::string& name) {
  for (auto s : {SamplerKind::Rw, SamplerKind::Am, SamplerKind::Rbam, SamplerKind::Gam,
                 SamplerKind::Kam, SamplerKind::Ckam}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("config error: sampler.name: unknown sampler '" + name +
                    "' (expected rw, am, rbam, gam, kam or ckam)");
}

/// Typed accessor over the raw entries that remembers what was read.
class Reader {
public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.contains(key); }

  const std::string& text(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) throw ConfigError("config error: " + key + ": required key is missing");
    return it->second;
  }
  double real(const std::string& key) const { return parse_real(key, text(key)); }
  double real(const std::string& key, double fallback) const {
    return has(key) ? real(key) : fallback;
  }
  std::uint64_t count(const std::string& key) const { return parse_count(key, text(key)); }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

private:
  const RawConfig& raw_;
};

inline void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config error: " + key + ": " + what);
}

inline GridMesh default_mesh(const Target& target) {
  if (target.name() == "bimodal2d") return {-14, 14, -14, 14, 100, 100};
  if (target.name() == "mixture5_2d") return {-6, 16, -6, 16, 100, 100};
  if (target.dimension() != 2) return {-1, 1, -1, 1, 100, 100};  // unused: marginal KL
  const auto [xlo, xhi] = target.marginal_range(0);
  const auto [ylo, yhi] = target.marginal_range(1);
  return {xlo, xhi, ylo, yhi, 100, 100};
}

inline Target make_target(const std::string& name, Eigen::Index dimension) {
  if (name == "bimodal2d") return Target::bimodal2d();
  if (name == "mixture5_2d") return Target::mixture5_2d();
  if (name == "grid5_highd") return Target::grid5(dimension);
  if (name == "normal") return Target::standard_normal(dimension);
  throw ConfigError("config error: target.name: unknown target '" + name +
                    "' (expected bimodal2d, mixture5_2d, grid5_highd or normal)");
}

}  // namespace detail

inline Target ExperimentConfig::make_target() const {
  return detail::make_target(target_name, dimension);
}

/// Builds and validates a typed config from expanded raw entries.
inline ExperimentConfig build_config(const RawConfig& raw) {
  using detail::require;
  const detail::Reader r(raw);
  ExperimentConfig cfg;
  cfg.entries = raw;

  // value syntax, and applicability of sampler-specific keys
  cfg.sampler = detail::parse_sampler(r.text("sampler.name"));
  for (const auto& [key, value] : raw) {
    const auto* spec = detail::find_key(key);
    if (!spec) throw ConfigError("config error: " + key + ": unknown key");
    if (!spec->samplers.empty() &&
        std::find(spec->samplers.begin(), spec->samplers.end(), cfg.sampler) ==
            spec->samplers.end()) {
      throw ConfigError("config error: " + key + ": does not apply to sampler '" +
                        to_string(cfg.sampler) + "'");
    }
    switch (spec->type) {
      case detail::KeyType::Real: detail::parse_real(key, value); break;
      case detail::KeyType::Count: detail::parse_count(key, value); break;
      case detail::KeyType::Flag: detail::parse_flag(key, value); break;
      case detail::KeyType::Vector: detail::parse_vector(key, value); break;
      case detail::KeyType::Text: break;
    }
  }

  // target
  cfg.target_name = r.text("target.name");
  const bool fixed_2d = cfg.target_name == "bimodal2d" || cfg.target_name == "mixture5_2d";
  if (fixed_2d) {
    require(!r.has("target.dimension") || r.count("target.dimension") == 2, "target.dimension",
            "target '" + cfg.target_name + "' is 2-dimensional");
    cfg.dimension = 2;
  } else {
    cfg.dimension = static_cast<Eigen::Index>(r.count("target.dimension", 1));
    require(cfg.dimension >= 1 && cfg.dimension <= 4096, "target.dimension",
            "must lie in [1, 4096]");
  }
  const Target target = cfg.make_target();

  const auto init = detail::parse_vector("sampler.init", r.text("sampler.init"));
  cfg.init = init ? *init : Position::Zero(cfg.dimension);
  require(cfg.init.size() == cfg.dimension, "sampler.init",
          "has " + std::to_string(cfg.init.size()) + " coordinates, target dimension is " +
              std::to_string(cfg.dimension));

  // sampler hyperparameters
  const auto positive = [&](const std::string& key) {
    const double v = r.real(key);
    require(v > 0.0, key, "must be positive");
    return v;
  };
  const auto probability = [&](const std::string& key, double fallback) {
    const double v = r.real(key, fallback);
    require(v > 0.0 && v <= 1.0, key, "must lie in (0, 1]");
    return v;
  };
  const std::uint64_t burnin = r.count("sampler.burnin", 0);

  switch (cfg.sampler) {
    case SamplerKind::Rw:
      cfg.rw.stepsize = positive("sampler.stepsize");
      cfg.rw.burnin = burnin;
      break;
    case SamplerKind::Am:
    case SamplerKind::Rbam:
    case SamplerKind::Gam: {
      auto& am = cfg.am;
      am.variant = cfg.sampler == SamplerKind::Am     ? AdaptiveVariant::Am
                   : cfg.sampler == SamplerKind::Rbam ? AdaptiveVariant::Rbam
                                                      : AdaptiveVariant::Gam;
      // RBAM takes no stepsize: its proposal is N(theta, Sigma_t) itself
      am.stepsize = cfg.sampler == SamplerKind::Rbam ? 1.0 : positive("sampler.stepsize");
      if (cfg.sampler == SamplerKind::Gam) {
        am.rm_rate = positive("sampler.rm_rate");
        am.target_accept = probability("sampler.target_accept", 0.234);
      } else {
        am.gain = probability("sampler.gain", 0.1);
        require(r.has("sampler.gain"), "sampler.gain", "required key is missing");
      }
      am.init_cov_scale = r.real("sampler.init_cov_scale", 1.0);
      require(am.init_cov_scale > 0.0, "sampler.init_cov_scale", "must be positive");
      am.burnin = burnin;
      break;
    }
    case SamplerKind::Kam:
    case SamplerKind::Ckam: {
      auto& kam = cfg.ckam.kam;
      kam.stepsize = positive("sampler.stepsize");
      kam.rm_rate = positive("sampler.rm_rate");
      kam.target_accept = probability("sampler.target_accept", 0.234);
      require(r.has("sampler.target_accept"), "sampler.target_accept", "required key is missing");
      kam.subsample_size = r.count("sampler.subsample_size");
      require(kam.subsample_size >= 1, "sampler.subsample_size", "must be at least 1");
      kam.adapt_prob = probability("sampler.adapt_prob", 0.5);
      kam.noise.a = r.real("sampler.noise_a", 0.2);
      kam.noise.b = r.real("sampler.noise_b", 1.0);
      kam.noise.decay_rate = r.real("sampler.noise_decay", 0.0);
      require(kam.noise.a > 0.0, "sampler.noise_a", "must be positive");
      require(kam.noise.b > 0.0, "sampler.noise_b", "must be positive");
      require(kam.noise.decay_rate >= 0.0, "sampler.noise_decay", "must be non-negative");
      kam.burnin = burnin;
      if (cfg.sampler == SamplerKind::Ckam) {
        cfg.ckam.iterations_per_cycle = r.count("sampler.iterations_per_cycle");
        require(cfg.ckam.iterations_per_cycle >= 2, "sampler.iterations_per_cycle",
                "must be at least 2");
        cfg.ckam.exploration_fraction = r.real("sampler.exploration_fraction");
        require(cfg.ckam.exploration_fraction > 0.0 && cfg.ckam.exploration_fraction < 1.0,
                "sampler.exploration_fraction", "must lie strictly between 0 and 1");
      }

      const std::string& kname = r.text("kernel.name");
      try {
        if (kname == "matern") {
          cfg.kernel = KernelSpec::matern(r.real("kernel.order"), r.real("kernel.lengthscale"));
        } else if (kname == "rbf") {
          require(!r.has("kernel.order"), "kernel.order", "does not apply to kernel 'rbf'");
          cfg.kernel = KernelSpec::rbf(r.real("kernel.lengthscale"));
        } else if (kname == "linear") {
          require(!r.has("kernel.order") && !r.has("kernel.lengthscale"), "kernel.name",
                  "kernel 'linear' takes no order or lengthscale");
          cfg.kernel = KernelSpec::linear();
        } else {
          throw ConfigError("config error: kernel.name: unknown kernel '" + kname +
                            "' (expected matern, rbf or linear)");
        }
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config error: kernel: ") + e.what());
      }
      break;
    }
  }

  // run
  cfg.seed = r.count("run.seed", 0);
  const bool iters = r.has("run.budget_iters"), secs = r.has("run.budget_seconds");
  require(!(iters && secs), "run.budget_iters", "conflicts with run.budget_seconds");
  require(iters || secs, "run.budget_iters", "no budget given (set run.budget_iters or run.budget_seconds)");
  if (iters) {
    cfg.budget = Budget::iterations(r.count("run.budget_iters"));
  } else {
    const double s = r.real("run.budget_seconds");
    require(s >= 0.0, "run.budget_seconds", "must be non-negative");
    cfg.budget = Budget::seconds(s);
  }
  cfg.virtual_clock = r.has("run.virtual_clock") &&
                      detail::parse_flag("run.virtual_clock", r.text("run.virtual_clock"));

  // diagnostics
  cfg.diag.checkpoint_every = r.count("diag.checkpoint_every", 1000);
  require(cfg.diag.checkpoint_every >= 1, "diag.checkpoint_every", "must be at least 1");
  const auto bins = r.count("diag.bins", 100);
  require(bins >= 2 && bins <= 100000, "diag.bins", "must lie in [2, 100000]");
  cfg.diag.bins = static_cast<int>(bins);
  cfg.diag.smoothing = r.real("diag.smoothing", kDefaultSmoothing);
  require(cfg.diag.smoothing > 0.0, "diag.smoothing", "must be positive");
  cfg.diag.mesh = detail::default_mesh(target);
  if (r.has("diag.mesh_lo") || r.has("diag.mesh_hi")) {
    const double lo = r.real("diag.mesh_lo"), hi = r.real("diag.mesh_hi");
    require(hi > lo, "diag.mesh_hi", "must exceed diag.mesh_lo");
    cfg.diag.mesh.x_min = cfg.diag.mesh.y_min = lo;
    cfg.diag.mesh.x_max = cfg.diag.mesh.y_max = hi;
  }
  if (r.has("diag.mesh_cells")) {
    const auto cells = r.count("diag.mesh_cells");
    require(cells >= 1 && cells <= 4000, "diag.mesh_cells", "must lie in [1, 4000]");
    cfg.diag.mesh.nx = cfg.diag.mesh.ny = static_cast<int>(cells);
  }
  return cfg;
}

/// Parses a config document, expanding `preset = name` includes from
/// preset_dir. Entries of the document override those of its preset.
inline RawConfig parse_config_text(std::string_view text, const std::string& origin = "<inline>",
                                   const std::filesystem::path& preset_dir = default_preset_dir()) {
  RawConfig raw;
  std::set<std::string> visiting;
  detail::parse_into(raw, text, origin, preset_dir, visiting);
  return raw;
}

/// Accepts a path to a config file or a preset name such as "bimodal/ckam".
inline RawConfig parse_config_argument(const std::string& arg,
                                       const std::filesystem::path& preset_dir = default_preset_dir()) {
  if (std::filesystem::is_regular_file(arg)) {
    return parse_config_text(detail::read_file(arg), arg, preset_dir);
  }
  const auto path = detail::preset_path(preset_dir, arg);
  if (std::filesystem::is_regular_file(path)) {
    return parse_config_text("preset = " + arg + "\n", arg, preset_dir);
  }
  throw ConfigError("config error: '" + arg + "' is neither a config file nor a known preset");
}

/// Sets key = value on raw entries, as a command-line override would.
inline void set_override(RawConfig& raw, const std::string& key, std::string value) {
  if (!detail::find_key(key) || key == "preset") {
    throw ConfigError("config error: " + key + ": unknown key");
  }
  raw[key] = std::move(value);
}

inline ExperimentConfig load_config(std::string_view text,
                                    const std::filesystem::path& preset_dir = default_preset_dir()) {
  return build_config(parse_config_text(text, "<inline>", preset_dir));
}

/// Preset names ("family/sampler") found under preset_dir, sorted.
inline std::vector<std::string> list_presets(const std::filesystem::path& preset_dir = default_preset_dir()) {
  std::vector<std::string> names;
  if (!std::filesystem::is_directory(preset_dir)) return names;
  for (const auto& e : std::filesystem::recursive_directory_iterator(preset_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cfg") {
      auto rel = std::filesystem::relative(e.path(), preset_dir);
      rel.replace_extension();
      names.push_back(rel.generic_string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace ckam::harness
