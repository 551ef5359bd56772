#pragma once

#include <vector>

#include "semcom/tensor.hpp"

namespace semcom {

struct LossWeights {
  double w_sem = 1.0;
  double w_mse = 5.0;
  double w_ssim = 1.0;
  double w_p = 0.0;
};

// Mean categorical cross entropy over the batch; logits [B, K]. If grad is
// given it receives d(loss)/d(logits) (softmax minus one-hot, over B).
double cce(const Tensor& logits, const std::vector<int>& labels, Tensor* grad = nullptr);

double accuracy(const Tensor& logits, const std::vector<int>& labels);

// Mean squared error over all elements; grad_a optional.
double mse(const Tensor& a, const Tensor& b, Tensor* grad_a = nullptr);

// Mean SSIM over batch/channels with an 11x11 Gaussian window (sigma 1.5),
// C1=(0.01)^2, C2=(0.03)^2 for dynamic range 1, valid windows only.
// Images are NCHW in [0,1]. grad_a optional.
double ssim(const Tensor& a, const Tensor& b, Tensor* grad_a = nullptr);

// 10*log10(1/MSE), capped at 100 dB when MSE < 1e-10.
double psnr_from_mse(double mse_value);
double psnr(const Tensor& a, const Tensor& b);

struct BobLossParts {
  double cce = 0, mse = 0, ssim = 0, total = 0;
};

// w_sem*CCE + w_mse*MSE + w_ssim*(1 - SSIM). Optional gradients w.r.t. the
// classifier logits and the reconstruction.
BobLossParts bob_loss(const Tensor& logits, const std::vector<int>& labels,
                      const Tensor& recon, const Tensor& target, const LossWeights& w,
                      Tensor* grad_logits = nullptr, Tensor* grad_recon = nullptr);

// bob - w_p * eve_cce; the quantity the legitimate update minimizes.
inline double legitimate_objective(double bob, double eve_cce, double w_p) {
  return bob - w_p * eve_cce;
}

}  // namespace semcom
