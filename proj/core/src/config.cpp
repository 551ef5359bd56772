#include "semcom/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semcom/rng.hpp"

namespace semcom {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_real(key, trim(item)));
  }
  return out;
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace

std::string to_string(DatasetName d) {
  switch (d) {
    case DatasetName::mnist: return "mnist";
    case DatasetName::cifar10: return "cifar10";
    case DatasetName::synthetic: return "synthetic";
  }
  return "?";
}

std::string to_string(PerturbMethod m) {
  return m == PerturbMethod::fgsm ? "fgsm" : "pgd";
}

void ExperimentConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("latent_dim: must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
  if (epochs < 0) throw ConfigError("epochs: must be >= 0");
  if (w_sem < 0 || w_mse < 0 || w_ssim < 0)
    throw ConfigError("loss weights: must be >= 0");
  if (w_p < 0) throw ConfigError("w_p: must be >= 0");
  if (train_snr_low_db > train_snr_high_db)
    throw ConfigError("train_snr range: low > high");
  if (eve_snr_low_db > eve_snr_high_db)
    throw ConfigError("eve_snr range: low > high");
  if (eval_snr_list_db.empty()) throw ConfigError("eval_snr_list_db: empty");
  if (n_real < 1) throw ConfigError("n_real: must be >= 1");
  if (subset_size && *subset_size < 1) throw ConfigError("subset_size: must be >= 1");
  if (test_subset_size && *test_subset_size < 1)
    throw ConfigError("test_subset_size: must be >= 1");
  if (dropout_conv < 0 || dropout_conv >= 1) throw ConfigError("dropout_conv: must be in [0,1)");
  if (dropout_cls < 0 || dropout_cls >= 1) throw ConfigError("dropout_cls: must be in [0,1)");
  if (learning_rate <= 0 || learning_rate_eve <= 0)
    throw ConfigError("learning rates: must be > 0");
  if (eve_steps_per_round < 1 || legit_steps_per_round < 1)
    throw ConfigError("steps per round: must be >= 1");
  if (log_every < 1) throw ConfigError("log_every: must be >= 1");
  if (perturbation) {
    const auto& p = *perturbation;
    if (p.epsilon <= 0) throw ConfigError("perturb.epsilon: must be > 0");
    if (p.steps < 1) throw ConfigError("perturb.steps: must be >= 1");
    if (p.method == PerturbMethod::fgsm && p.steps != 1)
      throw ConfigError("perturb.steps: fgsm requires steps=1");
    if (p.step_size <= 0) throw ConfigError("perturb.alpha: must be > 0");
    if (p.grad_realizations < 1) throw ConfigError("perturb.m: must be >= 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  bool have_alpha = false;
  std::map<std::string, std::string> kv;

  // Tokenize on whitespace; '#' starts a comment that runs to end of line.
  std::stringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream toks(line);
    std::string tok;
    while (toks >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config token is not key=value: '" + tok + "'");
      std::string key = trim(tok.substr(0, eq));
      std::string val = trim(tok.substr(eq + 1));
      if (key.empty()) throw ConfigError("config token has empty key: '" + tok + "'");
      kv[key] = val;
    }
  }

  for (const auto& [key, val] : kv) {
    if (key == "dataset") {
      if (val == "mnist") c.dataset = DatasetName::mnist;
      else if (val == "cifar10") c.dataset = DatasetName::cifar10;
      else if (val == "synthetic") c.dataset = DatasetName::synthetic;
      else throw ConfigError("config key 'dataset': unknown value '" + val + "'");
    } else if (key == "latent_dim") c.latent_dim = static_cast<int>(parse_int(key, val));
    else if (key == "w_sem") c.w_sem = parse_real(key, val);
    else if (key == "w_mse") c.w_mse = parse_real(key, val);
    else if (key == "w_ssim") c.w_ssim = parse_real(key, val);
    else if (key == "w_p") c.w_p = parse_real(key, val);
    else if (key == "train_snr_low_db") c.train_snr_low_db = parse_real(key, val);
    else if (key == "train_snr_high_db") c.train_snr_high_db = parse_real(key, val);
    else if (key == "eve_snr_low_db") c.eve_snr_low_db = parse_real(key, val);
    else if (key == "eve_snr_high_db") c.eve_snr_high_db = parse_real(key, val);
    else if (key == "eval_snr_list_db") c.eval_snr_list_db = parse_list(key, val);
    else if (key == "epochs") c.epochs = static_cast<int>(parse_int(key, val));
    else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(key, val));
    else if (key == "seed") c.seed = parse_int(key, val);
    else if (key == "n_real") c.n_real = static_cast<int>(parse_int(key, val));
    else if (key == "subset_size") c.subset_size = static_cast<int>(parse_int(key, val));
    else if (key == "test_subset_size") c.test_subset_size = static_cast<int>(parse_int(key, val));
    else if (key == "dropout_conv") c.dropout_conv = parse_real(key, val);
    else if (key == "dropout_cls") c.dropout_cls = parse_real(key, val);
    else if (key == "learning_rate") c.learning_rate = parse_real(key, val);
    else if (key == "learning_rate_eve") c.learning_rate_eve = parse_real(key, val);
    else if (key == "eve_steps_per_round") c.eve_steps_per_round = static_cast<int>(parse_int(key, val));
    else if (key == "legit_steps_per_round") c.legit_steps_per_round = static_cast<int>(parse_int(key, val));
    else if (key == "log_every") c.log_every = static_cast<int>(parse_int(key, val));
    else if (key == "perturb.method") {
      if (!c.perturbation) c.perturbation.emplace();
      if (val == "fgsm") c.perturbation->method = PerturbMethod::fgsm;
      else if (val == "pgd") c.perturbation->method = PerturbMethod::pgd;
      else throw ConfigError("config key 'perturb.method': unknown value '" + val + "'");
    } else if (key == "perturb.epsilon") {
      if (!c.perturbation) c.perturbation.emplace();
      c.perturbation->epsilon = parse_real(key, val);
    } else if (key == "perturb.steps") {
      if (!c.perturbation) c.perturbation.emplace();
      c.perturbation->steps = static_cast<int>(parse_int(key, val));
    } else if (key == "perturb.alpha") {
      if (!c.perturbation) c.perturbation.emplace();
      c.perturbation->step_size = parse_real(key, val);
      have_alpha = true;
    } else if (key == "perturb.m") {
      if (!c.perturbation) c.perturbation.emplace();
      c.perturbation->grad_realizations = static_cast<int>(parse_int(key, val));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  if (c.perturbation && !have_alpha)
    c.perturbation->step_size = c.perturbation->epsilon / 4.0;

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  kv["dataset"] = to_string(c.dataset);
  kv["latent_dim"] = std::to_string(c.latent_dim);
  kv["w_sem"] = fmt(c.w_sem);
  kv["w_mse"] = fmt(c.w_mse);
  kv["w_ssim"] = fmt(c.w_ssim);
  kv["w_p"] = fmt(c.w_p);
  kv["train_snr_low_db"] = fmt(c.train_snr_low_db);
  kv["train_snr_high_db"] = fmt(c.train_snr_high_db);
  kv["eve_snr_low_db"] = fmt(c.eve_snr_low_db);
  kv["eve_snr_high_db"] = fmt(c.eve_snr_high_db);
  {
    std::string l;
    for (std::size_t i = 0; i < c.eval_snr_list_db.size(); ++i)
      l += (i ? "," : "") + fmt(c.eval_snr_list_db[i]);
    kv["eval_snr_list_db"] = l;
  }
  kv["epochs"] = std::to_string(c.epochs);
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["seed"] = std::to_string(c.seed);
  kv["n_real"] = std::to_string(c.n_real);
  if (c.subset_size) kv["subset_size"] = std::to_string(*c.subset_size);
  if (c.test_subset_size) kv["test_subset_size"] = std::to_string(*c.test_subset_size);
  kv["dropout_conv"] = fmt(c.dropout_conv);
  kv["dropout_cls"] = fmt(c.dropout_cls);
  kv["learning_rate"] = fmt(c.learning_rate);
  kv["learning_rate_eve"] = fmt(c.learning_rate_eve);
  kv["eve_steps_per_round"] = std::to_string(c.eve_steps_per_round);
  kv["legit_steps_per_round"] = std::to_string(c.legit_steps_per_round);
  kv["log_every"] = std::to_string(c.log_every);
  if (c.perturbation) {
    kv["perturb.method"] = to_string(c.perturbation->method);
    kv["perturb.epsilon"] = fmt(c.perturbation->epsilon);
    kv["perturb.steps"] = std::to_string(c.perturbation->steps);
    kv["perturb.alpha"] = fmt(c.perturbation->step_size);
    kv["perturb.m"] = std::to_string(c.perturbation->grad_realizations);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write config file: " + path);
  f << serialize_config(c);
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
  // Round-trip through the parser so overrides share its validation. The
  // override is applied on top of the serialized current state.
  std::string text = serialize_config(c) + key + "=" + value + "\n";
  // Last writer wins: rebuild the map in file order.
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::string merged;
  while (std::getline(ss, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const auto& [k, v] : kv) merged += k + "=" + v + "\n";
  c = parse_config(merged);
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = fnv1a64(serialize_config(c));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunRecord create_run(const ExperimentConfig& c, const std::string& out_dir,
                     const std::string& tag) {
  namespace fs = std::filesystem;
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::gmtime(&t));

  RunRecord r;
  r.created_at = stamp;
  std::string base = tag + "-" + stamp + "-" + config_hash(c).substr(0, 8);
  std::string run_id = base;
  int suffix = 1;
  while (fs::exists(fs::path(out_dir) / run_id))
    run_id = base + "-" + std::to_string(suffix++);
  r.run_id = run_id;
  r.config = c;

  fs::path dir = fs::path(out_dir) / run_id;
  r.run_dir = dir.string();
  std::error_code ec;
  fs::create_directories(dir / "checkpoints", ec);
  if (ec) throw IoError("cannot create run directory: " + dir.string());
  save_config(c, (dir / "config").string());
  r.metrics_log_path = (dir / "metrics.csv").string();
  return r;
}

}  // namespace semcom
