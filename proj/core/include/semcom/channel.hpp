#pragma once

#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

// A batch of complex baseband blocks as paired I/Q real matrices [B, d].
// Canonical flat layout is [B, 2, d]: I plane then Q plane per row.
struct LatentSignal {
  Mat i, q;
  bool normalized = false;

  int batch() const { return static_cast<int>(i.rows()); }
  int dim() const { return static_cast<int>(i.cols()); }

  static LatentSignal zeros(int batch, int dim) {
    LatentSignal s;
    s.i = Mat::Zero(batch, dim);
    s.q = Mat::Zero(batch, dim);
    return s;
  }

  // <-> flat [B, 2d] tensors (encoder output / classifier input)
  static LatentSignal from_tensor(const Tensor& t);
  Tensor to_tensor() const;
};

// Per-block complex fading coefficient plus noise variance from the SNR
// setpoint. noise_sigma2 is the total complex noise variance 10^(-snr/10).
struct ChannelRealization {
  Vec hr, hi;  // one complex h per block
  double snr_db = 0.0;
  double noise_sigma2 = 1.0;

  int batch() const { return static_cast<int>(hr.size()); }
};

double noise_sigma2_for(double snr_db);

// h components ~ N(0, 1/2) each, so E[|h|^2] = 1 (Rayleigh magnitude).
ChannelRealization sample_fading(int batch, double snr_db, Stream& rng);

// Identity channel at a given noise level; used for noise-free overrides.
ChannelRealization identity_channel(int batch, double noise_sigma2 = 0.0);

struct NormalizeContext {
  Mat i_in, q_in;    // pre-normalization signal
  Vec scale;         // sqrt(d)/||row||
  Vec inv_sq_norm;   // 1/||row||^2
};

// Scales each row to mean complex power 1 per channel use. Throws
// ContractViolation on a zero-norm row.
LatentSignal power_normalize(const LatentSignal& z, NormalizeContext* ctx = nullptr);
// Pulls a gradient at the normalized output back to the raw encoder output.
LatentSignal power_normalize_backward(const NormalizeContext& ctx, const LatentSignal& gy);

// y = h*x + n with independent real/imag noise of variance noise_sigma2/2.
// Requires x.normalized.
LatentSignal transmit(const LatentSignal& x, const ChannelRealization& ch, Stream& noise);
// d(loss)/dx given d(loss)/dy; the complex multiply is the 2x2 rotation on I/Q.
LatentSignal transmit_backward(const ChannelRealization& ch, const LatentSignal& gy);

// y = h_src*x + g_jam*delta + n. delta keeps its own budget; it is not
// power-normalized here.
LatentSignal transmit_superposed(const LatentSignal& x, const LatentSignal& delta,
                                 const ChannelRealization& ch_src,
                                 const ChannelRealization& ch_jam, Stream& noise);

}  // namespace semcom
