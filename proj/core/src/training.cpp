#include "semcom/training.hpp"

#include <cmath>
#include <fstream>

#include "semcom/channel.hpp"
#include "semcom/evaluation.hpp"
#include "semcom/metrics.hpp"

namespace semcom {
namespace {

std::vector<Param*> legit_params(ModelBundle& b) {
  std::vector<Param*> out;
  b.encoder.collect(out);
  b.recon.collect(out);
  b.bob_cls.collect(out);
  return out;
}

struct StepOut {
  BobLossParts parts;
  double eve_cce = 0;
};

// One legitimate update: encoder -> normalize -> channel -> both Bob branches,
// plus the privacy term through a frozen Eve on an independent Eve-channel
// draw when w_p > 0.
StepOut legit_step(ModelBundle& b, const Tensor& x, const std::vector<int>& labels,
                   const ExperimentConfig& cfg, const LossWeights& w, RandomStreams& st,
                   Adam& opt) {
  const int B = x.shape[0];
  Stream& fading = st.get("fading");
  Stream& noise = st.get("noise");

  Tensor z_t = b.encoder.forward(x, true);
  NormalizeContext nctx;
  LatentSignal zn = power_normalize(LatentSignal::from_tensor(z_t), &nctx);
  double snr = fading.uniform(cfg.train_snr_low_db, cfg.train_snr_high_db);
  ChannelRealization ch = sample_fading(B, snr, fading);
  LatentSignal y = transmit(zn, ch, noise);
  Tensor y_t = y.to_tensor();

  Tensor logits = b.bob_cls.forward(y_t, true);
  Tensor recon = b.recon.forward(y_t, true);
  Tensor glog, grec;
  BobLossParts parts = bob_loss(logits, labels, recon, x, w, &glog, &grec);
  if (!std::isfinite(parts.total))
    throw TrainingDivergence("legitimate loss is not finite (diverged)");

  b.encoder.zero_grads();
  b.bob_cls.zero_grads();
  b.recon.zero_grads();
  Tensor gy_t = b.bob_cls.backward(glog);
  Tensor g2 = b.recon.backward(grec);
  for (std::size_t i = 0; i < gy_t.size(); ++i) gy_t.v[i] += g2.v[i];
  LatentSignal gz = transmit_backward(ch, LatentSignal::from_tensor(gy_t));

  StepOut out;
  if (w.w_p > 0) {
    Stream& efad = st.get("eve_fading");
    Stream& enoi = st.get("eve_noise");
    double esnr = efad.uniform(cfg.eve_snr_low_db, cfg.eve_snr_high_db);
    ChannelRealization ech = sample_fading(B, esnr, efad);
    LatentSignal ye = transmit(zn, ech, enoi);
    Tensor elog = b.eve_cls.forward(ye.to_tensor(), false);  // Eve frozen, eval mode
    Tensor eg;
    out.eve_cce = cce(elog, labels, &eg);
    b.eve_cls.zero_grads();
    Tensor gye_t = b.eve_cls.backward(eg);
    b.eve_cls.zero_grads();  // Eve parameter grads are discarded in this phase
    LatentSignal gze = transmit_backward(ech, LatentSignal::from_tensor(gye_t));
    const float wp = static_cast<float>(w.w_p);
    gz.i -= wp * gze.i;
    gz.q -= wp * gze.q;
  }

  LatentSignal graw = power_normalize_backward(nctx, gz);
  b.encoder.backward(graw.to_tensor());
  opt.step();
  out.parts = parts;
  return out;
}

// One Eve update against the frozen encoder (eval-mode transmit path).
double eve_step(ModelBundle& b, const Tensor& x, const std::vector<int>& labels,
                const ExperimentConfig& cfg, RandomStreams& st, Adam& opt_eve) {
  const int B = x.shape[0];
  Stream& efad = st.get("eve_fading");
  Stream& enoi = st.get("eve_noise");
  Tensor z_t = b.encoder.forward(x, false);
  LatentSignal zn = power_normalize(LatentSignal::from_tensor(z_t));
  double esnr = efad.uniform(cfg.eve_snr_low_db, cfg.eve_snr_high_db);
  ChannelRealization ech = sample_fading(B, esnr, efad);
  LatentSignal ye = transmit(zn, ech, enoi);
  Tensor elog = b.eve_cls.forward(ye.to_tensor(), true);
  Tensor eg;
  double loss = cce(elog, labels, &eg);
  if (!std::isfinite(loss)) throw TrainingDivergence("eve loss is not finite (diverged)");
  b.eve_cls.zero_grads();
  b.eve_cls.backward(eg);
  opt_eve.step();
  return loss;
}

void log_epoch(ModelBundle& b, const LabeledImageSet& test, const ExperimentConfig& cfg,
               RandomStreams& st, int epoch, const std::string& phase, bool bob_fixed_10db,
               TrainingCurve& curve) {
  for (double snr : cfg.eval_snr_list_db) {
    double bob_snr = bob_fixed_10db ? 10.0 : snr;
    EvalMetrics m = eval_at_snr(b, test, bob_snr, snr, 1, st, cfg.batch_size);
    CurvePoint p;
    p.epoch = epoch;
    p.phase = phase;
    p.snr_db = snr;
    p.bob_acc = m.bob_acc;
    p.eve_acc = m.eve_acc;
    p.bob_loss = cfg.w_sem * m.bob_cce + cfg.w_mse * m.mse + cfg.w_ssim * (1.0 - m.ssim);
    p.eve_cce = m.eve_cce;
    p.psnr = m.psnr_db;
    p.ssim = m.ssim;
    curve.push_back(p);
  }
}

}  // namespace

void write_metrics_csv(const TrainingCurve& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write metrics csv: " + path);
  f << "epoch,phase,snr_db,bob_acc,eve_acc,bob_loss,eve_cce,psnr,ssim\n";
  f.precision(10);
  for (const auto& p : curve)
    f << p.epoch << ',' << p.phase << ',' << p.snr_db << ',' << p.bob_acc << ','
      << p.eve_acc << ',' << p.bob_loss << ',' << p.eve_cce << ',' << p.psnr << ','
      << p.ssim << '\n';
}

TrainResult train_baseline(const ExperimentConfig& cfg, const LabeledImageSet& train,
                           const LabeledImageSet& test, RandomStreams& streams) {
  cfg.validate();
  TrainResult r;
  r.bundle = build_bundle(cfg, train.shape, train.num_classes, streams);
  r.bundle.mode = TrainingMode::baseline;
  LossWeights w{cfg.w_sem, cfg.w_mse, cfg.w_ssim, 0.0};
  Adam opt(legit_params(r.bundle), cfg.learning_rate);
  BatchIterator it(train.n, cfg.batch_size, streams.get("data"));
  std::vector<int> idx;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    it.start_epoch();
    while (it.next(idx)) {
      Tensor x = train.batch_nchw(idx);
      legit_step(r.bundle, x, train.batch_labels(idx), cfg, w, streams, opt);
    }
    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs)
      log_epoch(r.bundle, test, cfg, streams, epoch, "baseline", false, r.curve);
  }
  return r;
}

TrainResult train_minmax(const ExperimentConfig& cfg, const LabeledImageSet& train,
                         const LabeledImageSet& test, RandomStreams& streams) {
  cfg.validate();
  TrainResult r;
  r.bundle = build_bundle(cfg, train.shape, train.num_classes, streams);
  r.bundle.mode = TrainingMode::minmax;
  LossWeights w{cfg.w_sem, cfg.w_mse, cfg.w_ssim, cfg.w_p};
  Adam opt(legit_params(r.bundle), cfg.learning_rate);
  Adam opt_eve(r.bundle.eve_cls.params(), cfg.learning_rate_eve);

  BatchIterator legit_it(train.n, cfg.batch_size, streams.get("data"));
  BatchIterator eve_it(train.n, cfg.batch_size, streams.get("eve_data"));
  eve_it.start_epoch();

  std::vector<int> idx;
  auto next_eve_batch = [&](std::vector<int>& out) {
    if (!eve_it.next(out)) {
      eve_it.start_epoch();
      eve_it.next(out);
    }
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    legit_it.start_epoch();
    bool more = true;
    while (more) {
      // phase A: Eve best-responds, encoder/Bob frozen
      for (int k = 0; k < cfg.eve_steps_per_round; ++k) {
        next_eve_batch(idx);
        Tensor x = train.batch_nchw(idx);
        eve_step(r.bundle, x, train.batch_labels(idx), cfg, streams, opt_eve);
      }
      // phase B: legitimate pair updates, Eve frozen
      for (int k = 0; k < cfg.legit_steps_per_round && more; ++k) {
        if (!legit_it.next(idx)) {
          more = false;
          break;
        }
        Tensor x = train.batch_nchw(idx);
        legit_step(r.bundle, x, train.batch_labels(idx), cfg, w, streams, opt);
      }
    }
    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs)
      log_epoch(r.bundle, test, cfg, streams, epoch, "minmax", true, r.curve);
  }
  r.bundle.eve_trained = cfg.epochs > 0;
  return r;
}

void train_eve(ModelBundle& bundle, const ExperimentConfig& cfg,
               const LabeledImageSet& train, RandomStreams& streams, int epochs) {
  cfg.validate();
  if (epochs < 0) epochs = cfg.epochs;
  Adam opt_eve(bundle.eve_cls.params(), cfg.learning_rate_eve);
  BatchIterator it(train.n, cfg.batch_size, streams.get("eve_data"));
  std::vector<int> idx;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    it.start_epoch();
    while (it.next(idx)) {
      Tensor x = train.batch_nchw(idx);
      eve_step(bundle, x, train.batch_labels(idx), cfg, streams, opt_eve);
    }
  }
  bundle.eve_trained = bundle.eve_trained || epochs > 0;
}

}  // namespace semcom
