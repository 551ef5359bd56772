// semcom: single entry point for training, evaluation, sweeps, and plots.
//
// Usage: semcom <verb> [options] [--key=value config overrides]
// Verbs: train-baseline, train-minmax, train-eve, eval, gap-sweep,
//        perturb-eval, plot
// Exit codes: 0 ok, 1 runtime error, 2 usage/config error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcom/evaluation.hpp"
#include "semcom/perturbation.hpp"
#include "semcom/training.hpp"

namespace fs = std::filesystem;
using namespace semcom;

namespace {

// Any unrecognized --key=value (including --perturb.*) becomes a config
// override; last writer wins.
void apply_extra_overrides(ExperimentConfig& cfg, const std::vector<std::string>& extras) {
  for (const auto& raw : extras) {
    if (raw.rfind("--", 0) != 0)
      throw ConfigError("unrecognized argument (overrides look like --key=value): " + raw);
    auto eq = raw.find('=');
    if (eq == std::string::npos || eq <= 2)
      throw ConfigError("override must be --key=value, got: " + raw);
    apply_override(cfg, raw.substr(2, eq - 2), raw.substr(eq + 1));
  }
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string data_root;
  std::int64_t seed = -1;  // -1 = keep config value
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "Config file (key=value lines)");
  sub->add_option("--seed", o.seed, "Master seed (overrides config)");
  sub->add_option("--out", o.out_dir, "Output directory for run folders");
  sub->add_option("--data-root", o.data_root, "Dataset root (else $SEMCOM_DATA_ROOT)");
  sub->allow_extras();
}

ExperimentConfig resolve_config(const CommonOpts& o, CLI::App* sub) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  apply_extra_overrides(cfg, sub->remaining());
  if (o.seed >= 0) cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

struct Data {
  LabeledImageSet train, test;
};

Data load_data(const ExperimentConfig& cfg, RandomStreams& streams,
               const std::string& data_root) {
  Stream& rng = streams.get("data_subset");
  Data d;
  d.train = load_dataset(cfg.dataset, Split::train, cfg.subset_size, rng, data_root);
  d.test = load_dataset(cfg.dataset, Split::test, cfg.test_subset_size, rng, data_root);
  return d;
}

// Checkpoints live in <run>/checkpoints/final.ckpt next to the run's persisted
// config. Load the bundle against that config (its hash is what the checkpoint
// was sealed with) and sync the architecture-determining keys into this
// invocation's config so data loading and evaluation match the model.
ModelBundle load_bundle(const std::string& ckpt_path, ExperimentConfig& cfg,
                        RandomStreams& streams) {
  fs::path run_cfg = fs::path(ckpt_path).parent_path().parent_path() / "config";
  if (fs::exists(run_cfg)) {
    ExperimentConfig rcfg = load_config(run_cfg.string());
    cfg.latent_dim = rcfg.latent_dim;
    cfg.dataset = rcfg.dataset;
    cfg.w_p = rcfg.w_p;  // protection level is a property of the encoder
    return load_checkpoint(ckpt_path, rcfg, streams);
  }
  return load_checkpoint(ckpt_path, cfg, streams);
}

void finish_run(const RunRecord& run, const TrainResult& r) {
  std::string ckpt = run.run_dir + "/checkpoints/final.ckpt";
  save_checkpoint(r.bundle, ckpt);
  write_metrics_csv(r.curve, run.metrics_log_path);
  std::cout << "checkpoint: " << ckpt << "\nmetrics: " << run.metrics_log_path << "\n";
}

int cmd_train(const CommonOpts& o, CLI::App* sub, bool minmax) {
  ExperimentConfig cfg = resolve_config(o, sub);
  RunRecord run = create_run(cfg, o.out_dir, minmax ? "minmax" : "baseline");
  std::cout << "run: " << run.run_id << "\n";
  RandomStreams streams(static_cast<std::uint64_t>(cfg.seed));
  Data d = load_data(cfg, streams, o.data_root);
  TrainResult r = minmax ? train_minmax(cfg, d.train, d.test, streams)
                         : train_baseline(cfg, d.train, d.test, streams);
  finish_run(run, r);
  return 0;
}

int cmd_train_eve(const CommonOpts& o, CLI::App* sub, const std::string& ckpt_path,
                  int epochs) {
  ExperimentConfig cfg = resolve_config(o, sub);
  RandomStreams streams(static_cast<std::uint64_t>(cfg.seed));
  ModelBundle bundle = load_bundle(ckpt_path, cfg, streams);
  RunRecord run = create_run(cfg, o.out_dir, "eve");
  std::cout << "run: " << run.run_id << "\n";
  bundle.config_hash = config_hash(cfg);  // reseal under this run's config
  Data d = load_data(cfg, streams, o.data_root);
  train_eve(bundle, cfg, d.train, streams, epochs);
  std::string out_ckpt = run.run_dir + "/checkpoints/final.ckpt";
  save_checkpoint(bundle, out_ckpt);
  std::cout << "checkpoint: " << out_ckpt << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& o, CLI::App* sub, const std::string& ckpt_path) {
  ExperimentConfig cfg = resolve_config(o, sub);
  RandomStreams streams(static_cast<std::uint64_t>(cfg.seed));
  ModelBundle bundle = load_bundle(ckpt_path, cfg, streams);
  RunRecord run = create_run(cfg, o.out_dir, "eval");
  Data d = load_data(cfg, streams, o.data_root);
  EvalReport rep = evaluate(bundle, d.test, cfg.eval_snr_list_db, cfg.n_real, streams, cfg);
  std::string csv = run.run_dir + "/report.csv";
  export_report(rep, csv);
  std::cout << "report: " << csv << "\n";
  return 0;
}

// Each --run DIR is a prior training run directory; its own persisted config
// supplies w_P and the checkpoint hash. Eval parameters (SNR grid, n_real,
// seed) come from this invocation's config/overrides.
int cmd_gap_sweep(const CommonOpts& o, CLI::App* sub, const std::vector<std::string>& runs,
                  double bob_snr) {
  ExperimentConfig cfg = resolve_config(o, sub);
  RunRecord run = create_run(cfg, o.out_dir, "gapsweep");
  RandomStreams streams(static_cast<std::uint64_t>(cfg.seed));
  Data d = load_data(cfg, streams, o.data_root);

  std::vector<ModelBundle> bundles;
  std::vector<double> wps;
  bundles.reserve(runs.size());
  for (const auto& rdir : runs) {
    ExperimentConfig rcfg = load_config(rdir + "/config");
    bundles.push_back(load_checkpoint(rdir + "/checkpoints/final.ckpt", rcfg, streams));
    wps.push_back(rcfg.w_p);
  }
  std::vector<std::pair<double, ModelBundle*>> by_wp;
  for (std::size_t i = 0; i < bundles.size(); ++i) by_wp.emplace_back(wps[i], &bundles[i]);

  EvalReport rep =
      gap_sweep(by_wp, d.test, cfg.eval_snr_list_db, cfg.n_real, streams, cfg, bob_snr);
  std::string csv = run.run_dir + "/report.csv";
  export_report(rep, csv);
  std::cout << "report: " << csv << "\n";
  return 0;
}

int cmd_perturb_eval(const CommonOpts& o, CLI::App* sub, const std::string& ckpt_path,
                     double bob_snr) {
  ExperimentConfig cfg = resolve_config(o, sub);
  if (!cfg.perturbation)
    throw ConfigError("perturb-eval needs --perturb.method=fgsm|pgd (plus optional "
                      "--perturb.epsilon/steps/alpha/m)");
  RandomStreams streams(static_cast<std::uint64_t>(cfg.seed));
  ModelBundle bundle = load_bundle(ckpt_path, cfg, streams);
  RunRecord run = create_run(cfg, o.out_dir, "perturb");
  Data d = load_data(cfg, streams, o.data_root);

  EvalReport rep = evaluate_with_jammer(bundle, zero_delta_fn(), d.test,
                                        cfg.eval_snr_list_db, cfg.n_real, streams, cfg,
                                        bob_snr, 1.0, 1.0, "none");
  const PerturbationConfig& p = *cfg.perturbation;
  std::string tag = to_string(p.method);
  if (p.method == PerturbMethod::pgd) tag += "-" + std::to_string(p.steps);
  EvalReport rp = evaluate_with_jammer(bundle, make_delta_fn(p), d.test,
                                       cfg.eval_snr_list_db, cfg.n_real, streams, cfg,
                                       bob_snr, 1.0, 1.0, tag);
  rep.rows.insert(rep.rows.end(), rp.rows.begin(), rp.rows.end());

  std::string csv = run.run_dir + "/report.csv";
  export_report(rep, csv);
  auto files = plot_report(rep, run.run_dir + "/fig");
  std::cout << "report: " << csv << "\n";
  for (const auto& f : files) std::cout << "plot: " << f << "\n";
  return 0;
}

int cmd_plot(const std::string& report_path, std::string prefix) {
  EvalReport rep = import_report(report_path);
  if (prefix.empty()) {
    fs::path p(report_path);
    prefix = (p.parent_path() / "fig").string();
  }
  for (const auto& f : plot_report(rep, prefix)) std::cout << "plot: " << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving semantic communication simulator"};
  app.require_subcommand(1);

  CommonOpts o_base, o_minmax, o_eve, o_eval, o_gap, o_pert;
  std::string ckpt_eve, ckpt_eval, ckpt_pert, report_path, plot_prefix;
  std::vector<std::string> gap_runs;
  int eve_epochs = -1;
  double bob_snr_gap = 10.0, bob_snr_pert = 10.0;

  auto* sb = app.add_subcommand("train-baseline", "Train Alice+Bob without privacy term");
  add_common(sb, o_base);

  auto* sm = app.add_subcommand("train-minmax", "Alternating min-max training vs Eve");
  add_common(sm, o_minmax);

  auto* se = app.add_subcommand("train-eve", "Best-response Eve against a frozen encoder");
  add_common(se, o_eve);
  se->add_option("--checkpoint", ckpt_eve, "Bundle checkpoint")->required();
  se->add_option("--epochs", eve_epochs, "Eve epochs (default: config epochs)");

  auto* sv = app.add_subcommand("eval", "Utility/leakage metrics over the SNR grid");
  add_common(sv, o_eval);
  sv->add_option("--checkpoint", ckpt_eval, "Bundle checkpoint")->required();

  auto* sg = app.add_subcommand("gap-sweep", "Bob-Eve gap sweep over prior runs");
  add_common(sg, o_gap);
  sg->add_option("--run", gap_runs, "Prior run directory (repeatable)")->required();
  sg->add_option("--bob-snr", bob_snr_gap, "Fixed Bob SNR in dB");

  auto* sp = app.add_subcommand("perturb-eval", "Jammer perturbation evaluation");
  add_common(sp, o_pert);
  sp->add_option("--checkpoint", ckpt_pert, "Bundle checkpoint (trained Eve)")->required();
  sp->add_option("--bob-snr", bob_snr_pert, "Fixed Bob SNR in dB");

  auto* sl = app.add_subcommand("plot", "Render SVG plots from a report CSV");
  sl->add_option("--report", report_path, "report.csv path")->required();
  sl->add_option("--prefix", plot_prefix, "Output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sb->parsed()) return cmd_train(o_base, sb, false);
    if (sm->parsed()) return cmd_train(o_minmax, sm, true);
    if (se->parsed()) return cmd_train_eve(o_eve, se, ckpt_eve, eve_epochs);
    if (sv->parsed()) return cmd_eval(o_eval, sv, ckpt_eval);
    if (sg->parsed()) return cmd_gap_sweep(o_gap, sg, gap_runs, bob_snr_gap);
    if (sp->parsed()) return cmd_perturb_eval(o_pert, sp, ckpt_pert, bob_snr_pert);
    if (sl->parsed()) return cmd_plot(report_path, plot_prefix);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
