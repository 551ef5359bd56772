#include "semcom/perturbation.hpp"

#include <cmath>

#include "semcom/metrics.hpp"

namespace semcom {
namespace {

inline float sign_of(float v) { return v > 0.f ? 1.f : (v < 0.f ? -1.f : 0.f); }

// Gradient of Eve's CCE w.r.t. the jammer's delta, averaged over m sampled
// Eve-channel realizations. At craft time the perturbation is modeled as
// riding the source channel (the jammer mirrors Alice's transmission), so the
// gradient w.r.t. delta coincides with the gradient w.r.t. the transmitted
// signal; averaging over independent draws the expected gradient would be
// rotated to zero and the attack would degenerate into noise jamming.
LatentSignal averaged_grad(Sequential& eve_model, const LatentSignal& x,
                           const LatentSignal& delta, const std::vector<int>& labels,
                           int m, double eve_snr_db, RandomStreams& streams) {
  Stream& fad = streams.get("perturbation");
  Stream& noi = streams.get("perturbation_noise");
  const int B = x.batch(), d = x.dim();
  LatentSignal acc = LatentSignal::zeros(B, d);
  for (int j = 0; j < m; ++j) {
    ChannelRealization ch = sample_fading(B, eve_snr_db, fad);
    LatentSignal y = transmit_superposed(x, delta, ch, ch, noi);
    Tensor logits = eve_model.forward(y.to_tensor(), false);
    Tensor glog;
    cce(logits, labels, &glog);
    eve_model.zero_grads();
    Tensor gy_t = eve_model.backward(glog);
    eve_model.zero_grads();
    LatentSignal gy = LatentSignal::from_tensor(gy_t);
    LatentSignal g = transmit_backward(ch, gy);
    acc.i += g.i;
    acc.q += g.q;
  }
  acc.i /= static_cast<float>(m);
  acc.q /= static_cast<float>(m);
  return acc;
}

void clip_box(LatentSignal& delta, float eps) {
  for (int b = 0; b < delta.batch(); ++b)
    for (int k = 0; k < delta.dim(); ++k) {
      delta.i(b, k) = std::clamp(delta.i(b, k), -eps, eps);
      delta.q(b, k) = std::clamp(delta.q(b, k), -eps, eps);
    }
}

}  // namespace

LatentSignal fgsm_perturb(Sequential& eve_model, const LatentSignal& x,
                          const std::vector<int>& labels, const PerturbationConfig& spec,
                          double eve_snr_db, RandomStreams& streams) {
  if (spec.method != PerturbMethod::fgsm)
    throw ContractViolation("fgsm_perturb: spec.method is not fgsm");
  if (!x.normalized) throw ContractViolation("fgsm_perturb: x is not power-normalized");
  LatentSignal zero = LatentSignal::zeros(x.batch(), x.dim());
  // With delta = 0 the gradient w.r.t. the transmitted signal equals the
  // gradient w.r.t. delta through the source channel.
  LatentSignal g = averaged_grad(eve_model, x, zero, labels, spec.grad_realizations,
                                 eve_snr_db, streams);
  const float eps = static_cast<float>(spec.epsilon);
  LatentSignal delta = LatentSignal::zeros(x.batch(), x.dim());
  for (int b = 0; b < x.batch(); ++b)
    for (int k = 0; k < x.dim(); ++k) {
      delta.i(b, k) = eps * sign_of(g.i(b, k));
      delta.q(b, k) = eps * sign_of(g.q(b, k));
    }
  return delta;
}

LatentSignal pgd_perturb(Sequential& eve_model, const LatentSignal& x,
                         const std::vector<int>& labels, const PerturbationConfig& spec,
                         double eve_snr_db, RandomStreams& streams) {
  if (spec.method != PerturbMethod::pgd)
    throw ContractViolation("pgd_perturb: spec.method is not pgd");
  if (!x.normalized) throw ContractViolation("pgd_perturb: x is not power-normalized");
  const float eps = static_cast<float>(spec.epsilon);
  const float alpha = static_cast<float>(spec.step_size);
  LatentSignal delta = LatentSignal::zeros(x.batch(), x.dim());
  for (int t = 0; t < spec.steps; ++t) {
    LatentSignal g = averaged_grad(eve_model, x, delta, labels, spec.grad_realizations,
                                   eve_snr_db, streams);
    for (int b = 0; b < x.batch(); ++b)
      for (int k = 0; k < x.dim(); ++k) {
        delta.i(b, k) += alpha * sign_of(g.i(b, k));
        delta.q(b, k) += alpha * sign_of(g.q(b, k));
      }
    clip_box(delta, eps);
  }
  return delta;
}

DeltaFn zero_delta_fn() {
  return [](Sequential&, const LatentSignal& x, const std::vector<int>&, double,
            RandomStreams&) { return LatentSignal::zeros(x.batch(), x.dim()); };
}

DeltaFn make_delta_fn(const PerturbationConfig& spec) {
  if (spec.method == PerturbMethod::fgsm)
    return [spec](Sequential& eve, const LatentSignal& x, const std::vector<int>& labels,
                  double snr, RandomStreams& st) {
      return fgsm_perturb(eve, x, labels, spec, snr, st);
    };
  return [spec](Sequential& eve, const LatentSignal& x, const std::vector<int>& labels,
                double snr, RandomStreams& st) {
    return pgd_perturb(eve, x, labels, spec, snr, st);
  };
}

EvalReport evaluate_with_jammer(ModelBundle& bundle, const DeltaFn& delta_fn,
                                const LabeledImageSet& data,
                                const std::vector<double>& eval_snrs, int n_real,
                                RandomStreams& streams, const ExperimentConfig& cfg,
                                double bob_snr_db, double jammer_bob_gain,
                                double jammer_eve_gain, const std::string& perturb_tag) {
  if (!bundle.eve_trained)
    throw ContractViolation(
        "evaluate_with_jammer: leakage assessment requires a trained Eve");
  if (eval_snrs.empty()) throw ContractViolation("evaluate_with_jammer: empty SNR list");

  EvalReport report;
  report.config_hash = bundle.config_hash;
  Stream& fad = streams.get("eval_fading");
  Stream& noi = streams.get("eval_noise");

  for (double eve_snr : eval_snrs) {
    double bob_acc = 0, eve_acc = 0, mse_acc = 0, ssim_acc = 0;
    long count = 0;
    const bool do_ssim = data.shape.h >= 11 && data.shape.w >= 11;
    for (int r = 0; r < n_real; ++r) {
      for (int start = 0; start < data.n; start += cfg.batch_size) {
        std::vector<int> idx;
        for (int i = start; i < std::min(data.n, start + cfg.batch_size); ++i)
          idx.push_back(i);
        const int B = static_cast<int>(idx.size());
        Tensor x = data.batch_nchw(idx);
        auto labels = data.batch_labels(idx);

        Tensor z_t = bundle.encoder.forward(x, false);
        LatentSignal zn = power_normalize(LatentSignal::from_tensor(z_t));
        LatentSignal delta = delta_fn(bundle.eve_cls, zn, labels, eve_snr, streams);

        // Co-located jammer: the perturbation rides the same fading
        // realization as the source toward each receiver (the channels to Bob
        // and to Eve still differ); an independent jammer draw would rotate
        // delta by a uniform random phase relative to the signal and reduce
        // any crafted attack to noise jamming. Scalar gains model jammer
        // power control.
        ChannelRealization ch_b = sample_fading(B, bob_snr_db, fad);
        ChannelRealization jam_b = ch_b;
        jam_b.hr *= static_cast<float>(jammer_bob_gain);
        jam_b.hi *= static_cast<float>(jammer_bob_gain);
        LatentSignal y_bob = transmit_superposed(zn, delta, ch_b, jam_b, noi);

        ChannelRealization ch_e = sample_fading(B, eve_snr, fad);
        ChannelRealization jam_e = ch_e;
        jam_e.hr *= static_cast<float>(jammer_eve_gain);
        jam_e.hi *= static_cast<float>(jammer_eve_gain);
        LatentSignal y_eve = transmit_superposed(zn, delta, ch_e, jam_e, noi);

        Tensor bob_logits = bundle.bob_cls.forward(y_bob.to_tensor(), false);
        Tensor recon = bundle.recon.forward(y_bob.to_tensor(), false);
        Tensor eve_logits = bundle.eve_cls.forward(y_eve.to_tensor(), false);

        bob_acc += accuracy(bob_logits, labels) * B;
        eve_acc += accuracy(eve_logits, labels) * B;
        mse_acc += mse(recon, x) * B;
        if (do_ssim) ssim_acc += ssim(recon, x) * B;
        count += B;
      }
    }
    EvalRow row;
    row.dataset = to_string(cfg.dataset);
    row.latent_dim = bundle.latent_dim;
    row.w_p = cfg.w_p;
    row.perturb = perturb_tag;
    row.eve_snr_db = eve_snr;
    row.bob_snr_db = bob_snr_db;
    row.bob_acc = bob_acc / count;
    row.eve_acc = eve_acc / count;
    row.gap = row.bob_acc - row.eve_acc;
    row.psnr_db = psnr_from_mse(mse_acc / count);
    row.ssim = do_ssim ? ssim_acc / count : 0.0;
    row.n_samples = data.n;
    row.n_real = n_real;
    row.seed = streams.master_seed();
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace semcom
