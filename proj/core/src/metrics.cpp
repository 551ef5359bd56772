#include "semcom/metrics.hpp"

#include <array>
#include <cmath>

namespace semcom {
namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWin * kWin>& gaussian_window() {
  static const auto w = [] {
    std::array<double, kWin * kWin> out{};
    double sum = 0;
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) {
        double dy = y - (kWin - 1) / 2.0, dx = x - (kWin - 1) / 2.0;
        out[y * kWin + x] = std::exp(-(dy * dy + dx * dx) / (2 * kSigma * kSigma));
        sum += out[y * kWin + x];
      }
    for (auto& v : out) v /= sum;
    return out;
  }();
  return w;
}

}  // namespace

double cce(const Tensor& logits, const std::vector<int>& labels, Tensor* grad) {
  const int B = logits.shape[0];
  const int K = static_cast<int>(logits.size()) / B;
  if (K < 2) throw ContractViolation("cce: need at least 2 classes");
  if (static_cast<int>(labels.size()) != B) throw ContractViolation("cce: label count mismatch");
  auto L = logits.mat(B, K);
  if (grad) *grad = Tensor(logits.shape);
  double loss = 0;
  for (int b = 0; b < B; ++b) {
    int y = labels[b];
    if (y < 0 || y >= K) throw ContractViolation("cce: label out of range");
    double mx = L.row(b).maxCoeff();
    double denom = 0;
    for (int k = 0; k < K; ++k) denom += std::exp(double(L(b, k)) - mx);
    double log_denom = std::log(denom);
    loss += -(double(L(b, y)) - mx - log_denom);
    if (grad) {
      auto G = grad->mat(B, K);
      for (int k = 0; k < K; ++k) {
        double p = std::exp(double(L(b, k)) - mx) / denom;
        G(b, k) = static_cast<float>((p - (k == y ? 1.0 : 0.0)) / B);
      }
    }
  }
  return loss / B;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels) {
  const int B = logits.shape[0];
  const int K = static_cast<int>(logits.size()) / B;
  auto L = logits.mat(B, K);
  int correct = 0;
  for (int b = 0; b < B; ++b) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (L(b, k) > L(b, best)) best = k;
    if (best == labels[b]) ++correct;
  }
  return double(correct) / B;
}

double mse(const Tensor& a, const Tensor& b, Tensor* grad_a) {
  if (a.shape != b.shape) throw ContractViolation("mse: shape mismatch");
  const std::size_t n = a.size();
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = double(a.v[i]) - b.v[i];
    acc += d * d;
  }
  if (grad_a) {
    *grad_a = Tensor(a.shape);
    for (std::size_t i = 0; i < n; ++i)
      grad_a->v[i] = static_cast<float>(2.0 * (double(a.v[i]) - b.v[i]) / n);
  }
  return acc / n;
}

double ssim(const Tensor& a, const Tensor& b, Tensor* grad_a) {
  if (a.shape != b.shape) throw ContractViolation("ssim: shape mismatch");
  if (a.shape.size() != 4) throw ContractViolation("ssim: expected NCHW images");
  const int B = a.shape[0], C = a.shape[1], H = a.shape[2], W = a.shape[3];
  if (H < kWin || W < kWin)
    throw ContractViolation("ssim: image smaller than the 11x11 window");
  const auto& win = gaussian_window();
  const long positions = long(H - kWin + 1) * (W - kWin + 1);
  const double total = double(B) * C * positions;

  if (grad_a) *grad_a = Tensor(a.shape);
  double acc = 0;
  for (int bc = 0; bc < B * C; ++bc) {
    const float* xa = a.data() + std::size_t(bc) * H * W;
    const float* xb = b.data() + std::size_t(bc) * H * W;
    float* ga = grad_a ? grad_a->data() + std::size_t(bc) * H * W : nullptr;
    for (int oy = 0; oy + kWin <= H; ++oy) {
      for (int ox = 0; ox + kWin <= W; ++ox) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int wy = 0; wy < kWin; ++wy)
          for (int wx = 0; wx < kWin; ++wx) {
            double w = win[wy * kWin + wx];
            double va = xa[(oy + wy) * W + ox + wx];
            double vb = xb[(oy + wy) * W + ox + wx];
            mx += w * va;
            my += w * vb;
            sxx += w * va * va;
            syy += w * vb * vb;
            sxy += w * va * vb;
          }
        double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        double a1 = 2 * mx * my + kC1, a2 = 2 * cxy + kC2;
        double b1 = mx * mx + my * my + kC1, b2 = vx + vy + kC2;
        double s = (a1 * a2) / (b1 * b2);
        acc += s;
        if (ga) {
          double ds_dmx = 2 * (my * a2 * b1 - mx * a1 * a2) / (b1 * b1 * b2);
          double ds_dvx = -a1 * a2 / (b1 * b2 * b2);
          double ds_dcxy = 2 * a1 / (b1 * b2);
          for (int wy = 0; wy < kWin; ++wy)
            for (int wx = 0; wx < kWin; ++wx) {
              double w = win[wy * kWin + wx];
              double va = xa[(oy + wy) * W + ox + wx];
              double vb = xb[(oy + wy) * W + ox + wx];
              double d = w * (ds_dmx + 2 * (va - mx) * ds_dvx + (vb - my) * ds_dcxy);
              ga[(oy + wy) * W + ox + wx] += static_cast<float>(d / total);
            }
        }
      }
    }
  }
  return acc / total;
}

double psnr_from_mse(double mse_value) {
  if (mse_value < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse_value);
}

double psnr(const Tensor& a, const Tensor& b) { return psnr_from_mse(mse(a, b)); }

BobLossParts bob_loss(const Tensor& logits, const std::vector<int>& labels,
                      const Tensor& recon, const Tensor& target, const LossWeights& w,
                      Tensor* grad_logits, Tensor* grad_recon) {
  BobLossParts parts;
  Tensor gmse, gssim;
  const bool use_ssim = w.w_ssim != 0.0;
  parts.cce = cce(logits, labels, grad_logits);
  parts.mse = mse(recon, target, grad_recon ? &gmse : nullptr);
  if (use_ssim) parts.ssim = ssim(recon, target, grad_recon ? &gssim : nullptr);
  parts.total = w.w_sem * parts.cce + w.w_mse * parts.mse +
                (use_ssim ? w.w_ssim * (1.0 - parts.ssim) : 0.0);
  if (grad_logits)
    for (auto& g : grad_logits->v) g = static_cast<float>(g * w.w_sem);
  if (grad_recon) {
    *grad_recon = Tensor(recon.shape);
    for (std::size_t i = 0; i < grad_recon->size(); ++i)
      grad_recon->v[i] = static_cast<float>(
          w.w_mse * gmse.v[i] - (use_ssim ? w.w_ssim * gssim.v[i] : 0.0));
  }
  return parts;
}

}  // namespace semcom
