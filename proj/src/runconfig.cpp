#include "advrom/runconfig.hpp"

#include <fstream>
#include <sstream>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"
#include "advrom/rng.hpp"
#include "json.hpp"

namespace advrom {

namespace {

using nlohmann::json;

// Collects violations so one failed run reports everything wrong at once.
struct Collector {
  std::vector<std::string> problems;

  void fail(const std::string& where, const std::string& what) {
    problems.push_back(where + ": " + what);
  }

  void check_known_keys(const json& obj, const std::string& where,
                        std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* k : known) {
        if (key == k) {
          ok = true;
          break;
        }
      }
      if (!ok) fail(where + "." + key, "unknown key");
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(where + "." + std::string(key), "wrong type");
    }
  }
};

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path.string());
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports byte offsets; recover the line number for the message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be a JSON object");

  RunConfig cfg;
  Collector c;
  c.check_known_keys(root, "config",
                     {"seed", "output_dir", "data", "split", "rom", "aae", "forecaster",
                      "evaluation"});
  c.read(root, "config", "seed", cfg.seed);
  std::string out_dir;
  c.read(root, "config", "output_dir", out_dir);
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  if (root.contains("data")) {
    const json& data = root.at("data");
    c.check_known_keys(data, "data", {"synthetic", "snapshot_path", "export_csv"});
    c.read(data, "data", "export_csv", cfg.export_csv);
    if (data.contains("snapshot_path")) {
      std::string p;
      c.read(data, "data", "snapshot_path", p);
      if (!p.empty()) cfg.snapshot_path = p;
    }
    if (data.contains("synthetic")) {
      const json& syn = data.at("synthetic");
      c.check_known_keys(syn, "data.synthetic",
                         {"grid_nx", "grid_ny", "n_steps", "n_modes", "noise_amplitude", "dt"});
      c.read(syn, "data.synthetic", "grid_nx", cfg.synthetic.grid_nx);
      c.read(syn, "data.synthetic", "grid_ny", cfg.synthetic.grid_ny);
      c.read(syn, "data.synthetic", "n_steps", cfg.synthetic.n_steps);
      c.read(syn, "data.synthetic", "n_modes", cfg.synthetic.n_modes);
      c.read(syn, "data.synthetic", "noise_amplitude", cfg.synthetic.noise_amplitude);
      c.read(syn, "data.synthetic", "dt", cfg.synthetic.dt);
    }
  }

  if (root.contains("split")) {
    const json& split = root.at("split");
    c.check_known_keys(split, "split", {"train_fraction"});
    c.read(split, "split", "train_fraction", cfg.train_fraction);
  }

  if (root.contains("rom")) {
    const json& rom = root.at("rom");
    c.check_known_keys(rom, "rom", {"tau_grid"});
    if (rom.contains("tau_grid")) {
      try {
        cfg.tau_grid.clear();
        for (const auto& v : rom.at("tau_grid")) cfg.tau_grid.push_back(v.get<Eigen::Index>());
      } catch (const json::exception&) {
        c.fail("rom.tau_grid", "must be an array of positive integers");
      }
    }
  }

  if (root.contains("aae")) {
    const json& aae = root.at("aae");
    c.check_known_keys(aae, "aae",
                       {"latent_dim", "batch_size", "epochs", "lambda_rec", "learning_rate"});
    c.read(aae, "aae", "latent_dim", cfg.aae_latent_dim);
    c.read(aae, "aae", "batch_size", cfg.aae_batch_size);
    c.read(aae, "aae", "epochs", cfg.aae_epochs);
    c.read(aae, "aae", "lambda_rec", cfg.aae_lambda_rec);
    c.read(aae, "aae", "learning_rate", cfg.aae_learning_rate);
  }

  if (root.contains("forecaster")) {
    const json& fc = root.at("forecaster");
    c.check_known_keys(fc, "forecaster",
                       {"time_lag", "batch_size", "epochs", "lambda_rec", "learning_rate",
                        "dropout_rate", "train_fraction", "disc_input"});
    c.read(fc, "forecaster", "time_lag", cfg.forecaster_time_lag);
    c.read(fc, "forecaster", "batch_size", cfg.forecaster_batch_size);
    c.read(fc, "forecaster", "epochs", cfg.forecaster_epochs);
    c.read(fc, "forecaster", "lambda_rec", cfg.forecaster_lambda_rec);
    c.read(fc, "forecaster", "learning_rate", cfg.forecaster_learning_rate);
    c.read(fc, "forecaster", "dropout_rate", cfg.forecaster_dropout);
    c.read(fc, "forecaster", "train_fraction", cfg.forecaster_train_fraction);
    if (fc.contains("disc_input")) {
      std::string kind;
      c.read(fc, "forecaster", "disc_input", kind);
      if (kind == "context") {
        cfg.forecaster_disc_input = DiscInput::kContextConditioned;
      } else if (kind == "delta-only") {
        cfg.forecaster_disc_input = DiscInput::kDeltaOnly;
      } else {
        c.fail("forecaster.disc_input", "must be \"context\" or \"delta-only\"");
      }
    }
  }

  if (root.contains("evaluation")) {
    const json& ev = root.at("evaluation");
    c.check_known_keys(ev, "evaluation",
                       {"start_begin", "start_count", "horizon", "divergence_multiplier"});
    c.read(ev, "evaluation", "start_begin", cfg.eval_start_begin);
    c.read(ev, "evaluation", "start_count", cfg.eval_start_count);
    c.read(ev, "evaluation", "horizon", cfg.eval_horizon);
    c.read(ev, "evaluation", "divergence_multiplier", cfg.divergence_multiplier);
  }

  if (!c.problems.empty()) {
    std::ostringstream msg;
    msg << origin << ": invalid config:";
    for (const auto& p : c.problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
  return cfg;
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };

  if (!snapshot_path) {
    try {
      synthetic.validate();
    } catch (const ConfigError& e) {
      problems.emplace_back(e.what());
    }
  } else {
    check(std::filesystem::exists(*snapshot_path),
          "data.snapshot_path does not exist: " + snapshot_path->string());
  }
  check(train_fraction > 0.0 && train_fraction < 1.0, "split.train_fraction must lie in (0, 1)");
  check(!tau_grid.empty(), "rom.tau_grid must not be empty");
  for (const auto tau : tau_grid) check(tau >= 1, "rom.tau_grid entries must be positive");
  check(aae_latent_dim == 4 || aae_latent_dim == 8 || aae_latent_dim == 16 || aae_latent_dim == 32,
        "aae.latent_dim must be one of 4, 8, 16, 32");
  check(aae_batch_size >= 2, "aae.batch_size must be at least 2");
  check(aae_epochs >= 1, "aae.epochs must be positive");
  check(aae_lambda_rec >= 0.0, "aae.lambda_rec must be non-negative");
  check(aae_learning_rate > 0.0, "aae.learning_rate must be positive");
  check(forecaster_time_lag >= 1, "forecaster.time_lag must be at least 1");
  check(forecaster_batch_size >= 2, "forecaster.batch_size must be at least 2");
  check(forecaster_epochs >= 1, "forecaster.epochs must be positive");
  check(forecaster_lambda_rec >= 0.0, "forecaster.lambda_rec must be non-negative");
  check(forecaster_learning_rate > 0.0, "forecaster.learning_rate must be positive");
  check(forecaster_dropout >= 0.0 && forecaster_dropout < 1.0,
        "forecaster.dropout_rate must lie in [0, 1)");
  check(forecaster_train_fraction > 0.0 && forecaster_train_fraction <= 1.0,
        "forecaster.train_fraction must lie in (0, 1]");
  check(eval_start_begin >= 0, "evaluation.start_begin must be non-negative");
  check(eval_start_count >= 1, "evaluation.start_count must be positive");
  check(eval_horizon >= 1, "evaluation.horizon must be positive");
  check(divergence_multiplier > 0.0, "evaluation.divergence_multiplier must be positive");

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

std::string RunConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["data"]["export_csv"] = export_csv;
  if (snapshot_path) {
    j["data"]["snapshot_path"] = snapshot_path->string();
  } else {
    j["data"]["synthetic"] = {{"grid_nx", synthetic.grid_nx},
                              {"grid_ny", synthetic.grid_ny},
                              {"n_steps", synthetic.n_steps},
                              {"n_modes", synthetic.n_modes},
                              {"noise_amplitude", synthetic.noise_amplitude},
                              {"dt", synthetic.dt}};
  }
  j["split"]["train_fraction"] = train_fraction;
  j["rom"]["tau_grid"] = tau_grid;
  j["aae"] = {{"latent_dim", aae_latent_dim},
              {"batch_size", aae_batch_size},
              {"epochs", aae_epochs},
              {"lambda_rec", aae_lambda_rec},
              {"learning_rate", aae_learning_rate}};
  j["forecaster"] = {
      {"time_lag", forecaster_time_lag},
      {"batch_size", forecaster_batch_size},
      {"epochs", forecaster_epochs},
      {"lambda_rec", forecaster_lambda_rec},
      {"learning_rate", forecaster_learning_rate},
      {"dropout_rate", forecaster_dropout},
      {"train_fraction", forecaster_train_fraction},
      {"disc_input",
       forecaster_disc_input == DiscInput::kContextConditioned ? "context" : "delta-only"}};
  j["evaluation"] = {{"start_begin", eval_start_begin},
                     {"start_count", eval_start_count},
                     {"horizon", eval_horizon},
                     {"divergence_multiplier", divergence_multiplier}};
  return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const {
  const std::string text = canonical_json();
  return io::fnv1a64_bytes(text.data(), text.size());
}

std::uint64_t RunConfig::derived_seed(const std::string& label) const {
  return Rng(seed).derive(label).seed();
}

}  // namespace advrom
