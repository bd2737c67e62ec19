#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "ranxrl/config.hpp"
#include "ranxrl/runner.hpp"

namespace {

void print_run_summary(const ranxrl::RunSummary& sum) {
  std::printf("mode=%s seed=%llu timesteps=%ld train_iterations=%ld "
              "explainer_calls=%ld wall=%.1fs\n",
              ranxrl::to_string(sum.mode).c_str(),
              static_cast<unsigned long long>(sum.seed), sum.timesteps,
              sum.train_iterations, sum.explainer_calls, sum.wall_seconds);
  for (const ranxrl::SliceSummary& s : sum.slices)
    std::printf("  %-10s mean_reward=%.4f mean_latency=%.6fs "
                "drop_fraction=%.6f violations=%.4f\n",
                s.name.c_str(), s.mean_env_reward, s.mean_latency_s,
                s.mean_drop_fraction, s.sla_violation_fraction);
  std::printf("  window mean total env reward: %.6f\n",
              sum.mean_total_env_reward);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slice resource allocation experiments with "
               "attribution-guided agents"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode_str;
  std::string out_path;
  std::string in_dir;
  std::string checkpoint_dir;
  std::uint64_t seed = 0;
  int slice_index = 0;
  int probes = 8;

  CLI::App* run = app.add_subcommand("run", "train agents and write metrics");
  run->add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--mode", mode_str, "rl or xrl")->required();
  CLI::Option* seed_opt = run->add_option(
      "--seed", seed, "single seed (default: every seed in the config)");
  run->add_option("--out", out_path, "output directory")->required();

  CLI::App* waterfall = app.add_subcommand(
      "export-waterfall", "explain states visited by trained checkpoints");
  waterfall->add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  waterfall
      ->add_option("--checkpoint", checkpoint_dir,
                   "directory holding slice_<i>.qnet files")
      ->required()
      ->check(CLI::ExistingDirectory);
  waterfall->add_option("--slice", slice_index, "slice index to explain")
      ->required();
  waterfall->add_option("--seed", seed, "rollout seed")->default_val(1);
  waterfall->add_option("--probes", probes, "states to explain")
      ->default_val(8);
  waterfall->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* summarize =
      app.add_subcommand("summarize", "rebuild CSV summaries from metrics");
  summarize->add_option("--in", in_dir, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ranxrl::ExperimentConfig config =
          ranxrl::load_experiment_config(config_path);
      const ranxrl::Mode mode = ranxrl::mode_from_string(mode_str);
      if (const char* env_out = std::getenv("RANXRL_OUT");
          env_out != nullptr && env_out[0] != '\0')
        out_path = env_out;
      if (seed_opt->count() > 0) {
        print_run_summary(ranxrl::run_single(config, mode, seed, out_path));
      } else {
        for (const ranxrl::RunSummary& sum :
             ranxrl::run_experiment(config, mode, out_path))
          print_run_summary(sum);
      }
    } else if (waterfall->parsed()) {
      const ranxrl::ExperimentConfig config =
          ranxrl::load_experiment_config(config_path);
      ranxrl::export_waterfall(config, checkpoint_dir, slice_index, seed,
                               probes, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (summarize->parsed()) {
      std::fputs(ranxrl::summarize_run(in_dir).c_str(), stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
