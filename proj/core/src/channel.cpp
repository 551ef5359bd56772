#include "semcom/channel.hpp"

#include <cmath>

namespace semcom {

LatentSignal LatentSignal::from_tensor(const Tensor& t) {
  const int B = t.shape[0];
  const int d = static_cast<int>(t.size()) / (2 * B);
  LatentSignal s;
  s.i.resize(B, d);
  s.q.resize(B, d);
  auto M = t.mat(B, 2 * d);
  s.i = M.leftCols(d);
  s.q = M.rightCols(d);
  return s;
}

Tensor LatentSignal::to_tensor() const {
  const int B = batch(), d = dim();
  Tensor t({B, 2, d});
  auto M = t.mat(B, 2 * d);
  M.leftCols(d) = i;
  M.rightCols(d) = q;
  return t;
}

double noise_sigma2_for(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

ChannelRealization sample_fading(int batch, double snr_db, Stream& rng) {
  if (batch < 0) throw ContractViolation("sample_fading: negative batch");
  ChannelRealization ch;
  ch.snr_db = snr_db;
  ch.noise_sigma2 = noise_sigma2_for(snr_db);
  ch.hr.resize(batch);
  ch.hi.resize(batch);
  const double s = std::sqrt(0.5);
  for (int b = 0; b < batch; ++b) {
    ch.hr[b] = static_cast<float>(s * rng.normal());
    ch.hi[b] = static_cast<float>(s * rng.normal());
  }
  return ch;
}

ChannelRealization identity_channel(int batch, double noise_sigma2) {
  ChannelRealization ch;
  ch.snr_db = noise_sigma2 > 0 ? -10.0 * std::log10(noise_sigma2) : 300.0;
  ch.noise_sigma2 = noise_sigma2;
  ch.hr = Vec::Ones(batch);
  ch.hi = Vec::Zero(batch);
  return ch;
}

LatentSignal power_normalize(const LatentSignal& z, NormalizeContext* ctx) {
  // Already unit-power rows: re-scaling is the identity, so return the input
  // unchanged (idempotence). The backward pass still needs a real context, so
  // only short-circuit when no gradient bookkeeping was requested.
  if (z.normalized && ctx == nullptr) return z;
  const int B = z.batch(), d = z.dim();
  LatentSignal out;
  out.i.resize(B, d);
  out.q.resize(B, d);
  out.normalized = true;
  Vec scale(B), inv_sq(B);
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  for (int b = 0; b < B; ++b) {
    double sq = z.i.row(b).cast<double>().squaredNorm() +
                z.q.row(b).cast<double>().squaredNorm();
    if (sq <= 0.0 || !std::isfinite(sq))
      throw ContractViolation("power_normalize: zero or non-finite row norm");
    double nrm = std::sqrt(sq);
    scale[b] = static_cast<float>(sqrt_d / nrm);
    inv_sq[b] = static_cast<float>(1.0 / sq);
    out.i.row(b) = z.i.row(b) * scale[b];
    out.q.row(b) = z.q.row(b) * scale[b];
  }
  if (ctx) {
    ctx->i_in = z.i;
    ctx->q_in = z.q;
    ctx->scale = scale;
    ctx->inv_sq_norm = inv_sq;
  }
  return out;
}

LatentSignal power_normalize_backward(const NormalizeContext& ctx, const LatentSignal& gy) {
  const int B = static_cast<int>(ctx.i_in.rows());
  LatentSignal gx;
  gx.i.resizeLike(ctx.i_in);
  gx.q.resizeLike(ctx.q_in);
  for (int b = 0; b < B; ++b) {
    // y = c z with c = sqrt(d)/||z||:  gz = c g - c (g.z)/||z||^2 z
    float c = ctx.scale[b];
    float gz = ctx.i_in.row(b).dot(gy.i.row(b)) + ctx.q_in.row(b).dot(gy.q.row(b));
    float k = c * gz * ctx.inv_sq_norm[b];
    gx.i.row(b) = c * gy.i.row(b) - k * ctx.i_in.row(b);
    gx.q.row(b) = c * gy.q.row(b) - k * ctx.q_in.row(b);
  }
  return gx;
}

namespace {

void add_noise(LatentSignal& y, double noise_sigma2, Stream& noise) {
  if (noise_sigma2 <= 0.0) return;
  const double s = std::sqrt(noise_sigma2 / 2.0);
  for (int b = 0; b < y.batch(); ++b)
    for (int k = 0; k < y.dim(); ++k) {
      y.i(b, k) += static_cast<float>(s * noise.normal());
      y.q(b, k) += static_cast<float>(s * noise.normal());
    }
}

}  // namespace

LatentSignal transmit(const LatentSignal& x, const ChannelRealization& ch, Stream& noise) {
  if (!x.normalized)
    throw ContractViolation("transmit: input signal is not power-normalized");
  if (ch.batch() != x.batch()) throw ContractViolation("transmit: batch mismatch");
  LatentSignal y;
  y.i.resizeLike(x.i);
  y.q.resizeLike(x.q);
  for (int b = 0; b < x.batch(); ++b) {
    float hr = ch.hr[b], hi = ch.hi[b];
    y.i.row(b) = hr * x.i.row(b) - hi * x.q.row(b);
    y.q.row(b) = hi * x.i.row(b) + hr * x.q.row(b);
  }
  add_noise(y, ch.noise_sigma2, noise);
  return y;
}

LatentSignal transmit_backward(const ChannelRealization& ch, const LatentSignal& gy) {
  LatentSignal gx;
  gx.i.resizeLike(gy.i);
  gx.q.resizeLike(gy.q);
  for (int b = 0; b < gy.batch(); ++b) {
    float hr = ch.hr[b], hi = ch.hi[b];
    gx.i.row(b) = hr * gy.i.row(b) + hi * gy.q.row(b);
    gx.q.row(b) = -hi * gy.i.row(b) + hr * gy.q.row(b);
  }
  return gx;
}

LatentSignal transmit_superposed(const LatentSignal& x, const LatentSignal& delta,
                                 const ChannelRealization& ch_src,
                                 const ChannelRealization& ch_jam, Stream& noise) {
  if (!x.normalized)
    throw ContractViolation("transmit_superposed: source signal is not power-normalized");
  if (delta.i.rows() != x.i.rows() || delta.i.cols() != x.i.cols())
    throw ContractViolation("transmit_superposed: delta shape mismatch");
  LatentSignal y;
  y.i.resizeLike(x.i);
  y.q.resizeLike(x.q);
  for (int b = 0; b < x.batch(); ++b) {
    float hr = ch_src.hr[b], hi = ch_src.hi[b];
    float gr = ch_jam.hr[b], gi = ch_jam.hi[b];
    y.i.row(b) = hr * x.i.row(b) - hi * x.q.row(b) + gr * delta.i.row(b) - gi * delta.q.row(b);
    y.q.row(b) = hi * x.i.row(b) + hr * x.q.row(b) + gi * delta.i.row(b) + gr * delta.q.row(b);
  }
  add_noise(y, ch_src.noise_sigma2, noise);
  return y;
}

}  // namespace semcom
