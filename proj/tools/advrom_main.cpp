#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "advrom/errors.hpp"
#include "advrom/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct SharedFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
  cmd->add_option("--config", flags.config_path, "path to the JSON run config")->required();
  cmd->add_option("--out", flags.out_dir, "override the configured output directory");
  cmd->add_option("--seed", flags.seed, "override the configured global seed");
  cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

advrom::RunConfig load_config(const SharedFlags& flags) {
  advrom::RunConfig cfg = advrom::RunConfig::from_file(flags.config_path);
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.seed) cfg.seed = *flags.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial reduced-order forecasting pipeline"};
  app.require_subcommand(1);

  SharedFlags flags;
  std::string forecaster_mode = "adversarial";

  CLI::App* gen = app.add_subcommand("gen-data", "generate or import the snapshot corpus");
  add_shared(gen, flags);
  CLI::App* fit = app.add_subcommand("fit-rom", "fit the PCA reduced-order model");
  add_shared(fit, flags);
  CLI::App* aae = app.add_subcommand("train-aae", "train the adversarial autoencoder");
  add_shared(aae, flags);
  CLI::App* train = app.add_subcommand("train-forecaster", "train a latent-space forecaster");
  add_shared(train, flags);
  train->add_option("--mode", forecaster_mode, "adversarial or classic")
      ->check(CLI::IsMember({"adversarial", "classic"}));
  CLI::App* eval = app.add_subcommand("evaluate", "forecast-error ensembles and comparison report");
  add_shared(eval, flags);
  CLI::App* fig2 = app.add_subcommand("reproduce-fig2", "emit the two comparison panels as CSV");
  add_shared(fig2, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const advrom::RunConfig cfg = load_config(flags);
    if (gen->parsed()) advrom::cmd_gen_data(cfg, flags.quiet);
    if (fit->parsed()) advrom::cmd_fit_rom(cfg, flags.quiet);
    if (aae->parsed()) advrom::cmd_train_aae(cfg, flags.quiet);
    if (train->parsed()) {
      advrom::cmd_train_forecaster(cfg, advrom::forecaster_mode_from_string(forecaster_mode),
                                   flags.quiet);
    }
    if (eval->parsed()) advrom::cmd_evaluate(cfg, flags.quiet);
    if (fig2->parsed()) advrom::cmd_reproduce_fig2(cfg, flags.quiet);
    return kExitOk;
  } catch (const advrom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const advrom::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const advrom::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const advrom::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
