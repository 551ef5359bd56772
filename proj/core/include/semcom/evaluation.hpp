#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semcom/config.hpp"
#include "semcom/dataset.hpp"
#include "semcom/models.hpp"

namespace semcom {

struct EvalMetrics {
  double bob_acc = 0, eve_acc = 0, bob_cce = 0, eve_cce = 0;
  double mse = 0, psnr_db = 0, ssim = 0;
};

// Mean metrics over the set, averaged over n_real independent channel draws.
// Bob and Eve observe independent fading/noise at their own SNRs. Dropout off,
// batchnorm on running statistics. identity_noiseless forces h=1, sigma2=0 on
// both links (the infinite-SNR proxy).
EvalMetrics eval_at_snr(ModelBundle& bundle, const LabeledImageSet& data,
                        double bob_snr_db, double eve_snr_db, int n_real,
                        RandomStreams& streams, int batch_size,
                        bool identity_noiseless = false);

struct EvalRow {
  std::string dataset;
  int latent_dim = 0;
  double w_p = 0;
  std::string perturb = "none";
  double eve_snr_db = 0, bob_snr_db = 0;
  double bob_acc = 0, eve_acc = 0, gap = 0, psnr_db = 0, ssim = 0;
  int n_samples = 0, n_real = 0;
  long long seed = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::string config_hash;
};

// Fig. 3 shape: utility metrics versus link SNR (Bob and Eve evaluated at the
// same SNR per row).
EvalReport evaluate(ModelBundle& bundle, const LabeledImageSet& data,
                    const std::vector<double>& snr_list, int n_real,
                    RandomStreams& streams, const ExperimentConfig& cfg);

// Fig. 5 shape: Bob fixed at bob_snr_db, Eve swept; one bundle per w_P. Every
// bundle must carry a trained (best-response) Eve.
EvalReport gap_sweep(const std::vector<std::pair<double, ModelBundle*>>& bundles_by_wp,
                     const LabeledImageSet& data, const std::vector<double>& eve_snr_list,
                     int n_real, RandomStreams& streams, const ExperimentConfig& cfg,
                     double bob_snr_db = 10.0);

struct FidelityPenalty {
  double delta_psnr_db = 0;  // positive = degradation under protection
  double delta_ssim = 0;
};

FidelityPenalty fidelity_penalty(ModelBundle& bundle_protected, ModelBundle& bundle_baseline,
                                 const LabeledImageSet& data, double snr_db,
                                 RandomStreams& streams, int batch_size, int n_real);

void export_report(const EvalReport& report, const std::string& path);
EvalReport import_report(const std::string& path);

// Line plots (SVG) of each metric versus Eve SNR, one series per condition.
// Returns the files written.
std::vector<std::string> plot_report(const EvalReport& report, const std::string& path_prefix);

}  // namespace semcom
