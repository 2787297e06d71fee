// Command-line front end: run one seeded experiment, sweep seeds, or print
// the default configuration.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ransim/config.hpp"
#include "ransim/experiment.hpp"
#include "ransim/output.hpp"

namespace {

ransim::ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) return ransim::ExperimentConfig{};
  return ransim::load_config(path);
}

void print_summary_line(const ransim::Summary& s, std::ostream& os) {
  os << "seed " << s.seed;
  for (const auto& p : s.phases) {
    os << " | " << p.name << " v=[";
    for (std::size_t k = 0; k < p.steady_violation_rate.size(); ++k) {
      if (k) os << ' ';
      os << (p.steady_violation_rate[k] ? ransim::fixed6(*p.steady_violation_rate[k]) : "-");
    }
    os << "] r=" << ransim::fixed6(p.mean_reward);
  }
  os << '\n';
}

void run_one(const ransim::ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
  const auto result = ransim::run_experiment(cfg, seed);
  ransim::emit_outputs(cfg, result, out);
  print_summary_line(result.summary, std::cout);
}

/// Parses "a..b" (inclusive) or a single seed.
std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw CLI::ValidationError("--seeds", "bad seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  const std::uint64_t lo = num(dots == std::string::npos ? text : text.substr(0, dots));
  const std::uint64_t hi = dots == std::string::npos ? lo : num(text.substr(dots + 2));
  if (hi < lo) throw CLI::ValidationError("--seeds", "empty range '" + text + "'");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of DRL-driven RAN slicing under budget-constrained jamming"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one seeded experiment and write its artifacts");
  run->add_option("--config", config_path, "Configuration file (defaults when omitted)");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string seeds_text;
  std::string sweep_config;
  std::string sweep_out = "sweep";
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run independent experiments over a seed range");
  sweep->add_option("--config", sweep_config, "Configuration file (defaults when omitted)");
  sweep->add_option("--seeds", seeds_text, "Seed range a..b (inclusive)")->required();
  sweep->add_option("--out", sweep_out, "Root directory; one seed_<n>/ per seed");
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  app.add_subcommand("print-default-config", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand("print-default-config")) {
      std::cout << ransim::render_config(ransim::ExperimentConfig{});
      return 0;
    }
    if (run->parsed()) {
      seed_given = seed_opt->count() > 0;
      auto cfg = load_or_default(config_path);
      if (seed_given) cfg.seed = seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
      run_one(cfg, cfg.seed, cfg.output_dir);
      return 0;
    }
    if (sweep->parsed()) {
      const auto cfg = load_or_default(sweep_config);
      for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
      const auto seeds = parse_seed_range(seeds_text);
      std::atomic<std::size_t> next{0};
      std::mutex io;
      std::exception_ptr failure;
      auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            const auto result = ransim::run_experiment(cfg, seeds[i]);
            const auto dir = std::filesystem::path(sweep_out) / ("seed_" + std::to_string(seeds[i]));
            ransim::emit_outputs(cfg, result, dir);
            std::lock_guard lock(io);
            print_summary_line(result.summary, std::cout);
          } catch (...) {
            std::lock_guard lock(io);
            if (!failure) failure = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned j = 0; j < std::min<std::size_t>(jobs, seeds.size()); ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
      return 0;
    }
  } catch (const ransim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ransim::DivergenceError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
