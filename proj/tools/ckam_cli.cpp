// Command-line experiment runner.
//
//   ckam run <config>... [--seed S] [--budget-iters N | --budget-seconds X]
//                        [--out DIR] [--jobs K] [--virtual-clock]
//   ckam presets list
//   ckam validate <config>
//
// <config> is a config file path or a preset name such as bimodal/ckam.
// Exit codes: 0 success, 2 config error, 3 runtime error.
// CKAM_LOG=quiet|info|debug controls stderr verbosity (default info).

#include <ckam/harness/output.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace {

namespace h = ckam::harness;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("CKAM_LOG");
  if (!env) return LogLevel::Info;
  const std::string v(env);
  if (v == "quiet" || v == "0") return LogLevel::Quiet;
  if (v == "debug" || v == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

std::mutex log_mutex;

void log(LogLevel level, const std::string& msg) {
  if (log_level() < level) return;
  const std::lock_guard lock(log_mutex);
  std::cerr << msg << '\n';
}

struct RunJob {
  std::string label;
  h::ExperimentConfig config;
  std::filesystem::path out_dir;
};

// "bimodal/ckam" -> "bimodal_ckam"; "configs/my.cfg" -> "my"
std::string run_label(const std::string& arg) {
  std::filesystem::path p(arg);
  std::string s = std::filesystem::is_regular_file(p) ? p.stem().string() : arg;
  for (char& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s;
}

struct RunArgs {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget_iters;
  std::optional<double> budget_seconds;
  std::string out = "out";
  unsigned jobs = 1;
  bool virtual_clock = false;
};

int command_run(const RunArgs& args, const std::filesystem::path& preset_dir) {
  std::vector<RunJob> jobs;
  for (const auto& arg : args.configs) {
    auto raw = h::parse_config_argument(arg, preset_dir);
    if (args.seed) h::set_override(raw, "run.seed", std::to_string(*args.seed));
    if (args.budget_iters) {
      raw.erase("run.budget_seconds");
      h::set_override(raw, "run.budget_iters", std::to_string(*args.budget_iters));
    }
    if (args.budget_seconds) {
      raw.erase("run.budget_iters");
      h::set_override(raw, "run.budget_seconds", h::format_real(*args.budget_seconds));
    }
    if (args.virtual_clock) h::set_override(raw, "run.virtual_clock", "true");
    auto cfg = h::build_config(raw);
    const std::string label = run_label(arg) + "_seed" + std::to_string(cfg.seed);
    jobs.push_back({label, std::move(cfg), std::filesystem::path(args.out) / label});
  }
  for (std::size_t i = 0; i < jobs.size(); ++i)
    for (std::size_t j = i + 1; j < jobs.size(); ++j)
      if (jobs[i].out_dir == jobs[j].out_dir) {
        throw h::ConfigError("config error: runs '" + jobs[i].label +
                             "' share an output directory");
      }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      try {
        log(LogLevel::Info, "[run] " + job.label + " started");
        const auto result = h::run_experiment(job.config);
        h::emit_outputs(job.out_dir, job.config, result);
        log(LogLevel::Info, "[run] " + job.label + " done: " +
                                std::to_string(result.summary.iterations) + " iterations, " +
                                std::to_string(result.summary.sample_count) + " samples -> " +
                                job.out_dir.string());
        if (!result.checkpoints.empty()) {
          log(LogLevel::Debug, "[run] " + job.label + " final sym_kl " +
                                   h::format_real(result.checkpoints.back().sym_kl) + " ess " +
                                   h::format_real(result.checkpoints.back().ess));
        }
      } catch (const std::exception& e) {
        failed = true;
        log(LogLevel::Quiet, std::string("error: ") + job.label + ": " + e.what());
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(args.jobs, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return failed ? kExitRuntime : 0;
}

int command_validate(const std::string& arg, const std::filesystem::path& preset_dir) {
  const auto cfg = h::build_config(h::parse_config_argument(arg, preset_dir));
  std::cout << "ok: " << h::to_string(cfg.sampler) << " on " << cfg.target_name << " (d="
            << cfg.dimension << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cKAM and baseline adaptive MCMC experiment runner"};
  app.require_subcommand(1);
  std::string preset_dir = h::default_preset_dir().string();
  app.add_option("--preset-dir", preset_dir, "Directory holding preset .cfg files");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one or more experiments");
  run->add_option("config", run_args.configs, "Config files or preset names")->required();
  run->add_option("--seed", run_args.seed, "Override run.seed");
  auto* iters = run->add_option("--budget-iters", run_args.budget_iters, "Iteration budget");
  auto* secs = run->add_option("--budget-seconds", run_args.budget_seconds, "Wall-clock budget");
  iters->excludes(secs);
  run->add_option("--out", run_args.out, "Output directory (one subdirectory per run)");
  run->add_option("--jobs", run_args.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--virtual-clock", run_args.virtual_clock, "Count iterations instead of seconds");

  auto* presets = app.add_subcommand("presets", "Preset operations");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "List shipped presets");

  std::string validate_arg;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_arg, "Config file or preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return command_run(run_args, preset_dir);
    if (*list) {
      for (const auto& name : h::list_presets(preset_dir)) std::cout << name << '\n';
      return 0;
    }
    if (*validate) return command_validate(validate_arg, preset_dir);
  } catch (const h::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
