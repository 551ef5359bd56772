#include "semcom/evaluation.hpp"

#include <fstream>
#include <sstream>

#include "semcom/channel.hpp"
#include "semcom/metrics.hpp"

namespace semcom {

EvalMetrics eval_at_snr(ModelBundle& bundle, const LabeledImageSet& data,
                        double bob_snr_db, double eve_snr_db, int n_real,
                        RandomStreams& streams, int batch_size, bool identity_noiseless) {
  if (data.n == 0) throw ContractViolation("eval_at_snr: empty dataset");
  Stream& fad = streams.get("eval_fading");
  Stream& noi = streams.get("eval_noise");
  const bool do_ssim = data.shape.h >= 11 && data.shape.w >= 11;

  double bob_acc = 0, eve_acc = 0, bob_cce = 0, eve_cce = 0, mse_acc = 0, ssim_acc = 0;
  long count = 0;
  for (int r = 0; r < n_real; ++r) {
    for (int start = 0; start < data.n; start += batch_size) {
      std::vector<int> idx;
      for (int i = start; i < std::min(data.n, start + batch_size); ++i) idx.push_back(i);
      const int B = static_cast<int>(idx.size());
      Tensor x = data.batch_nchw(idx);
      auto labels = data.batch_labels(idx);

      Tensor z_t = bundle.encoder.forward(x, false);
      LatentSignal zn = power_normalize(LatentSignal::from_tensor(z_t));

      ChannelRealization ch_b = identity_noiseless ? identity_channel(B)
                                                   : sample_fading(B, bob_snr_db, fad);
      LatentSignal y_bob = transmit(zn, ch_b, noi);
      ChannelRealization ch_e = identity_noiseless ? identity_channel(B)
                                                   : sample_fading(B, eve_snr_db, fad);
      LatentSignal y_eve = transmit(zn, ch_e, noi);

      Tensor bob_logits = bundle.bob_cls.forward(y_bob.to_tensor(), false);
      Tensor recon = bundle.recon.forward(y_bob.to_tensor(), false);
      Tensor eve_logits = bundle.eve_cls.forward(y_eve.to_tensor(), false);

      bob_acc += accuracy(bob_logits, labels) * B;
      eve_acc += accuracy(eve_logits, labels) * B;
      bob_cce += cce(bob_logits, labels) * B;
      eve_cce += cce(eve_logits, labels) * B;
      mse_acc += mse(recon, x) * B;
      if (do_ssim) ssim_acc += ssim(recon, x) * B;
      count += B;
    }
  }
  EvalMetrics m;
  m.bob_acc = bob_acc / count;
  m.eve_acc = eve_acc / count;
  m.bob_cce = bob_cce / count;
  m.eve_cce = eve_cce / count;
  m.mse = mse_acc / count;
  m.psnr_db = psnr_from_mse(m.mse);
  m.ssim = do_ssim ? ssim_acc / count : 0.0;
  return m;
}

namespace {

EvalRow make_row(const ExperimentConfig& cfg, const ModelBundle& bundle,
                 const EvalMetrics& m, double eve_snr, double bob_snr, double w_p,
                 int n_samples, int n_real, long long seed) {
  EvalRow row;
  row.dataset = to_string(cfg.dataset);
  row.latent_dim = bundle.latent_dim;
  row.w_p = w_p;
  row.eve_snr_db = eve_snr;
  row.bob_snr_db = bob_snr;
  row.bob_acc = m.bob_acc;
  row.eve_acc = m.eve_acc;
  row.gap = m.bob_acc - m.eve_acc;
  row.psnr_db = m.psnr_db;
  row.ssim = m.ssim;
  row.n_samples = n_samples;
  row.n_real = n_real;
  row.seed = seed;
  return row;
}

}  // namespace

EvalReport evaluate(ModelBundle& bundle, const LabeledImageSet& data,
                    const std::vector<double>& snr_list, int n_real,
                    RandomStreams& streams, const ExperimentConfig& cfg) {
  if (snr_list.empty()) throw ContractViolation("evaluate: empty SNR list");
  EvalReport report;
  report.config_hash = bundle.config_hash;
  for (double snr : snr_list) {
    EvalMetrics m = eval_at_snr(bundle, data, snr, snr, n_real, streams, cfg.batch_size);
    report.rows.push_back(make_row(cfg, bundle, m, snr, snr, cfg.w_p, data.n, n_real,
                                   static_cast<long long>(streams.master_seed())));
  }
  return report;
}

EvalReport gap_sweep(const std::vector<std::pair<double, ModelBundle*>>& bundles_by_wp,
                     const LabeledImageSet& data, const std::vector<double>& eve_snr_list,
                     int n_real, RandomStreams& streams, const ExperimentConfig& cfg,
                     double bob_snr_db) {
  if (eve_snr_list.empty()) throw ContractViolation("gap_sweep: empty SNR list");
  EvalReport report;
  for (const auto& [w_p, bundle] : bundles_by_wp) {
    if (!bundle->eve_trained)
      throw ContractViolation("gap_sweep: bundle for w_p=" + std::to_string(w_p) +
                              " has no trained Eve");
    for (double eve_snr : eve_snr_list) {
      EvalMetrics m =
          eval_at_snr(*bundle, data, bob_snr_db, eve_snr, n_real, streams, cfg.batch_size);
      report.rows.push_back(make_row(cfg, *bundle, m, eve_snr, bob_snr_db, w_p, data.n,
                                     n_real, static_cast<long long>(streams.master_seed())));
    }
    if (report.config_hash.empty()) report.config_hash = bundle->config_hash;
  }
  return report;
}

FidelityPenalty fidelity_penalty(ModelBundle& bundle_protected, ModelBundle& bundle_baseline,
                                 const LabeledImageSet& data, double snr_db,
                                 RandomStreams& streams, int batch_size, int n_real) {
  if (bundle_protected.latent_dim != bundle_baseline.latent_dim ||
      bundle_protected.shape.h != bundle_baseline.shape.h ||
      bundle_protected.shape.w != bundle_baseline.shape.w ||
      bundle_protected.shape.c != bundle_baseline.shape.c ||
      bundle_protected.num_classes != bundle_baseline.num_classes)
    throw ContractViolation("fidelity_penalty: bundles built from mismatched configs");
  EvalMetrics mp = eval_at_snr(bundle_protected, data, snr_db, snr_db, n_real, streams,
                               batch_size);
  EvalMetrics mb = eval_at_snr(bundle_baseline, data, snr_db, snr_db, n_real, streams,
                               batch_size);
  // positive = degradation under protection
  return {mb.psnr_db - mp.psnr_db, mb.ssim - mp.ssim};
}

void export_report(const EvalReport& report, const std::string& path) {
  if (report.rows.empty()) throw ContractViolation("export_report: empty report");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write report: " + path);
  f << "dataset,latent_dim,w_P,perturb,eve_snr_db,bob_snr_db,bob_acc,eve_acc,gap,"
       "psnr_db,ssim,n_samples,n_real,seed\n";
  f.precision(10);
  for (const auto& r : report.rows) {
    f << r.dataset << ',' << r.latent_dim << ',' << r.w_p << ',' << r.perturb << ','
      << r.eve_snr_db << ',' << r.bob_snr_db << ',' << r.bob_acc << ',' << r.eve_acc
      << ',' << r.gap << ',' << r.psnr_db << ',' << r.ssim << ',' << r.n_samples << ','
      << r.n_real << ',' << r.seed << '\n';
  }
  if (!f) throw IoError("short write to report: " + path);
}

EvalReport import_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open report: " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty report file: " + path);
  EvalReport report;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 14) throw IoError("malformed report row: " + line);
    EvalRow r;
    r.dataset = cols[0];
    r.latent_dim = std::stoi(cols[1]);
    r.w_p = std::stod(cols[2]);
    r.perturb = cols[3];
    r.eve_snr_db = std::stod(cols[4]);
    r.bob_snr_db = std::stod(cols[5]);
    r.bob_acc = std::stod(cols[6]);
    r.eve_acc = std::stod(cols[7]);
    r.gap = std::stod(cols[8]);
    r.psnr_db = std::stod(cols[9]);
    r.ssim = std::stod(cols[10]);
    r.n_samples = std::stoi(cols[11]);
    r.n_real = std::stoi(cols[12]);
    r.seed = std::stoll(cols[13]);
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace semcom
