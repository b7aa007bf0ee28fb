// gmix run <config> [--out DIR] [--threads N]
//
// Exit status: 0 success, 1 unexpected failure, 2 invalid configuration or
// parameters, 3 capacity limit, 4 a self-check flag failed.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gmix/config.hpp"
#include "gmix/error.hpp"
#include "gmix/experiments.hpp"

namespace {

int report(const std::string& kind, const std::string& origin, const std::string& message, int code) {
  nlohmann::ordered_json err{{"error", kind}, {"origin", origin}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

std::uint64_t parse_seed(const char* text) {
  std::size_t used = 0;
  const std::string s(text);
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw gmix::ConfigError("cli", "GMIX_SEED must be a nonnegative integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-coupling and renewal-bound experiments"};
  app.require_subcommand(1);
  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment described by an INI config file");
  std::string config_path;
  std::string out_dir;
  int threads = -1;
  run_cmd->add_option("config", config_path, "Experiment configuration")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides experiment.output)");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("usage", "cli", e.what(), 2);
  }

  try {
    gmix::ExperimentConfig cfg = gmix::load_config(config_path);
    if (const char* env = std::getenv("GMIX_SEED"); env && *env) cfg.seed = parse_seed(env);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;

    const gmix::RunOutcome outcome = gmix::run(cfg);
    for (const auto& [name, ok] : outcome.flags) std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    std::cout << "outputs written to " << outcome.output_dir.string() << '\n';
    return cfg.self_check && !outcome.all_pass ? 4 : 0;
  } catch (const gmix::ConfigError& e) {
    return report("config", e.origin(), e.what(), 2);
  } catch (const gmix::DomainError& e) {
    return report("domain", e.origin(), e.what(), 2);
  } catch (const gmix::PipelineError& e) {
    return report("pipeline", e.origin(), e.what(), 2);
  } catch (const gmix::CapacityError& e) {
    return report("capacity", e.origin(), e.what(), 3);
  } catch (const gmix::Error& e) {
    return report("runtime", e.origin(), e.what(), 1);
  } catch (const std::exception& e) {
    return report("runtime", "unknown", e.what(), 1);
  }
}
