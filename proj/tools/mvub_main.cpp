#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mvub/experiment.hpp"

namespace {

// Seed precedence: --seed flag, then the MV_SEED environment variable, then
// the config file.
std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("MV_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw mvub::ConfigError("MV_SEED is not an unsigned integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unbiased stationary-distribution estimation for mean-field SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> threads_flag;
  std::optional<std::string> out_flag;

  const char* mode_names[] = {"run", "mse", "kde", "diagnose", "cost"};
  const char* mode_help[] = {
      "estimate a functional over M replicates",
      "mean squared error study over replicate counts",
      "kernel density estimate of the stationary marginals",
      "two-start synchronous-coupling contraction diagnostic",
      "analytic cost table over (level, horizon)"};
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(mode_names[i], mode_help[i]);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed_flag, "master seed (overrides MV_SEED and the config)");
    sub->add_option("--threads", threads_flag, "worker threads (0 = hardware)");
    sub->add_option("--out", out_flag, "output directory (overrides the config)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    mvub::ExperimentConfig config = mvub::load_config(config_path);
    if (!config.mode.empty() && config.mode != mode)
      throw mvub::ConfigError("config mode \"" + config.mode + "\" does not match subcommand \"" +
                              mode + "\"");
    config.mode = mode;
    if (const auto env = env_seed()) config.seed = *env;
    if (seed_flag) config.seed = *seed_flag;
    if (threads_flag) config.threads = *threads_flag;
    if (out_flag) config.out = *out_flag;
    mvub::run_experiment(config);
  } catch (const mvub::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mvub::ReplicateError& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  } catch (const mvub::BlowUpError& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
