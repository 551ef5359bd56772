#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcom/common.hpp"

namespace semcom {

enum class DatasetName { mnist, cifar10, synthetic };
enum class PerturbMethod { fgsm, pgd };

std::string to_string(DatasetName d);
std::string to_string(PerturbMethod m);

struct PerturbationConfig {
  PerturbMethod method = PerturbMethod::fgsm;
  double epsilon = 0.1;
  int steps = 1;
  double step_size = 0.025;   // pgd default: epsilon/4
  int grad_realizations = 4;  // channel draws averaged per gradient
};

// Flat key/value experiment configuration. See docs in README for the schema.
struct ExperimentConfig {
  DatasetName dataset = DatasetName::synthetic;
  int latent_dim = 32;
  double w_sem = 1.0;
  double w_mse = 5.0;
  double w_ssim = 1.0;
  double w_p = 0.0;
  double train_snr_low_db = -5.0;
  double train_snr_high_db = 15.0;
  double eve_snr_low_db = -5.0;
  double eve_snr_high_db = 10.0;
  std::vector<double> eval_snr_list_db = {-5.0, 0.0, 5.0, 10.0};
  int epochs = 30;
  int batch_size = 64;
  std::int64_t seed = 1;
  std::optional<PerturbationConfig> perturbation;
  int n_real = 8;
  std::optional<int> subset_size;
  std::optional<int> test_subset_size;
  double dropout_conv = 0.25;
  double dropout_cls = 0.5;
  double learning_rate = 1e-3;
  double learning_rate_eve = 1e-3;
  int eve_steps_per_round = 1;
  int legit_steps_per_round = 1;
  int log_every = 1;

  void validate() const;  // throws ConfigError on any out-of-domain field
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);
// Canonical serialization: one sorted "key=value" per line. Used for hashing
// and for the persisted resolved config.
std::string serialize_config(const ExperimentConfig& c);
void save_config(const ExperimentConfig& c, const std::string& path);
// Apply one "key=value" override (CLI --key=value).
void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value);
std::string config_hash(const ExperimentConfig& c);

struct RunRecord {
  std::string run_id;
  std::string run_dir;  // out_dir/run_id
  ExperimentConfig config;
  std::vector<std::string> checkpoint_paths;
  std::string metrics_log_path;
  std::string created_at;
};

// Creates out_dir/<run_id>/{config,checkpoints/} and persists the resolved
// config before any compute starts.
RunRecord create_run(const ExperimentConfig& c, const std::string& out_dir,
                     const std::string& tag);

}  // namespace semcom
