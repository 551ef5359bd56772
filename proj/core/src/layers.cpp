#include <cmath>
#include <cstring>

#include "semcom/nn.hpp"

namespace semcom {
namespace {

// He-uniform, seeded from the init stream.
void init_uniform(Tensor& t, int fan_in, Stream& s) {
  double bound = std::sqrt(6.0 / fan_in);
  for (auto& x : t.v) x = static_cast<float>(s.uniform(-bound, bound));
}

// im2col for 3x3 / stride 1 / pad 1: col is [cin*9, h*w], row-major.
void im2col_3x3(const float* x, int cin, int h, int w, float* col) {
  const int hw = h * w;
  for (int c = 0; c < cin; ++c) {
    const float* xc = x + std::size_t(c) * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        float* dst = col + (std::size_t(c) * 9 + ky * 3 + kx) * hw;
        for (int y = 0; y < h; ++y) {
          int sy = y + ky - 1;
          if (sy < 0 || sy >= h) {
            std::memset(dst + std::size_t(y) * w, 0, sizeof(float) * w);
            continue;
          }
          const float* src = xc + std::size_t(sy) * w;
          float* d = dst + std::size_t(y) * w;
          int x0 = std::max(0, 1 - kx);          // first valid output x
          int x1 = std::min(w, w + 1 - kx);      // one past last valid
          for (int xx = 0; xx < x0; ++xx) d[xx] = 0.f;
          for (int xx = x1; xx < w; ++xx) d[xx] = 0.f;
          for (int xx = x0; xx < x1; ++xx) d[xx] = src[xx + kx - 1];
        }
      }
    }
  }
}

// Scatter-add transpose of im2col_3x3.
void col2im_3x3(const float* col, int cin, int h, int w, float* x) {
  const int hw = h * w;
  std::memset(x, 0, sizeof(float) * std::size_t(cin) * hw);
  for (int c = 0; c < cin; ++c) {
    float* xc = x + std::size_t(c) * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const float* src = col + (std::size_t(c) * 9 + ky * 3 + kx) * hw;
        for (int y = 0; y < h; ++y) {
          int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          float* xrow = xc + std::size_t(sy) * w;
          const float* s = src + std::size_t(y) * w;
          int x0 = std::max(0, 1 - kx);
          int x1 = std::min(w, w + 1 - kx);
          for (int xx = x0; xx < x1; ++xx) xrow[xx + kx - 1] += s[xx];
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int in, int out, Stream& init, std::string name) : in_(in), out_(out) {
  w_.name = name + ".w";
  w_.w = Tensor({out, in});
  w_.g = Tensor({out, in});
  b_.name = name + ".b";
  b_.w = Tensor({out});
  b_.g = Tensor({out});
  init_uniform(w_.w, in, init);
}

Tensor Dense::forward(const Tensor& x, bool) {
  x_ = x;
  const int B = x.shape[0];
  Tensor y({B, out_});
  auto X = x.mat(B, in_);
  auto W = w_.w.mat(out_, in_);
  auto Y = y.mat(B, out_);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b_.w.data(), out_);
  return y;
}

Tensor Dense::backward(const Tensor& gy) {
  const int B = x_.shape[0];
  auto GY = gy.mat(B, out_);
  auto X = x_.mat(B, in_);
  auto GW = w_.g.mat(out_, in_);
  GW.noalias() += GY.transpose() * X;
  Eigen::Map<Eigen::RowVectorXf>(b_.g.data(), out_) += GY.colwise().sum();
  Tensor gx(x_.shape);
  gx.mat(B, in_).noalias() = GY * w_.w.mat(out_, in_);
  return gx;
}

void Dense::collect(std::vector<Param*>& out) {
  out.push_back(&w_);
  out.push_back(&b_);
}

// ---------------------------------------------------------------- ReLU / Sigmoid

Tensor ReLU::forward(const Tensor& x, bool) {
  Tensor y = x;
  for (auto& v : y.v) v = v > 0.f ? v : 0.f;
  y_ = y;
  return y;
}

Tensor ReLU::backward(const Tensor& gy) {
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.v.size(); ++i)
    if (y_.v[i] <= 0.f) gx.v[i] = 0.f;
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x, bool) {
  Tensor y = x;
  for (auto& v : y.v) v = 1.f / (1.f + std::exp(-v));
  y_ = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& gy) {
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= y_.v[i] * (1.f - y_.v[i]);
  return gx;
}

// ---------------------------------------------------------------- Dropout

Tensor Dropout::forward(const Tensor& x, bool train) {
  active_ = train && rate_ > 0.0;
  if (!active_) return x;
  const float scale = static_cast<float>(1.0 / (1.0 - rate_));
  mask_.resize(x.size());
  Tensor y = x;
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    mask_[i] = stream_->uniform() < rate_ ? 0.f : scale;
    y.v[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& gy) {
  if (!active_) return gy;
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= mask_[i];
  return gx;
}

// ---------------------------------------------------------------- Reshape

Tensor Reshape::forward(const Tensor& x, bool) {
  in_shape_ = x.shape;
  std::vector<int> s{x.shape[0]};
  s.insert(s.end(), dims_.begin(), dims_.end());
  return x.reshaped(std::move(s));
}

Tensor Reshape::backward(const Tensor& gy) { return gy.reshaped(in_shape_); }

// ---------------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, std::string name, double momentum, double eps)
    : c_(channels), momentum_(momentum), eps_(eps) {
  gamma_.name = name + ".gamma";
  gamma_.w = Tensor({c_});
  gamma_.g = Tensor({c_});
  for (auto& v : gamma_.w.v) v = 1.f;
  beta_.name = name + ".beta";
  beta_.w = Tensor({c_});
  beta_.g = Tensor({c_});
  running_mean_.name = name + ".running_mean";
  running_mean_.w = Tensor({c_});
  running_var_.name = name + ".running_var";
  running_var_.w = Tensor({c_});
  for (auto& v : running_var_.w.v) v = 1.f;
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  in_shape_ = x.shape;
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const std::size_t hw = std::size_t(H) * W;
  const std::size_t n = std::size_t(B) * hw;
  last_train_ = train;
  Tensor y(x.shape);
  invstd_.assign(c_, 0.f);
  if (train) {
    xhat_ = Tensor(x.shape);
    for (int c = 0; c < c_; ++c) {
      double sum = 0, sq = 0;
      for (int b = 0; b < B; ++b) {
        const float* p = x.data() + (std::size_t(b) * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          sum += p[i];
          sq += double(p[i]) * p[i];
        }
      }
      double mean = sum / n;
      double var = sq / n - mean * mean;
      if (var < 0) var = 0;
      float is = static_cast<float>(1.0 / std::sqrt(var + eps_));
      invstd_[c] = is;
      float g = gamma_.w.v[c], be = beta_.w.v[c], mu = static_cast<float>(mean);
      for (int b = 0; b < B; ++b) {
        std::size_t off = (std::size_t(b) * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          float xh = (x.v[off + i] - mu) * is;
          xhat_.v[off + i] = xh;
          y.v[off + i] = g * xh + be;
        }
      }
      running_mean_.w.v[c] = static_cast<float>((1 - momentum_) * running_mean_.w.v[c] +
                                                momentum_ * mean);
      running_var_.w.v[c] = static_cast<float>((1 - momentum_) * running_var_.w.v[c] +
                                               momentum_ * var);
    }
  } else {
    for (int c = 0; c < c_; ++c) {
      float mu = running_mean_.w.v[c];
      float is = static_cast<float>(1.0 / std::sqrt(running_var_.w.v[c] + eps_));
      invstd_[c] = is;
      float g = gamma_.w.v[c], be = beta_.w.v[c];
      for (int b = 0; b < B; ++b) {
        std::size_t off = (std::size_t(b) * c_ + c) * hw;
        const float* px = x.data() + off;
        float* py = y.data() + off;
        for (std::size_t i = 0; i < hw; ++i) py[i] = g * (px[i] - mu) * is + be;
      }
    }
    // eval-mode backward only needs invstd; xhat_ unused
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
  const int B = in_shape_[0], H = in_shape_[2], W = in_shape_[3];
  const std::size_t hw = std::size_t(H) * W;
  const double n = double(B) * hw;
  Tensor gx(in_shape_);
  if (last_train_) {
    for (int c = 0; c < c_; ++c) {
      double sum_gy = 0, sum_gy_xh = 0;
      for (int b = 0; b < B; ++b) {
        std::size_t off = (std::size_t(b) * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          sum_gy += gy.v[off + i];
          sum_gy_xh += double(gy.v[off + i]) * xhat_.v[off + i];
        }
      }
      gamma_.g.v[c] += static_cast<float>(sum_gy_xh);
      beta_.g.v[c] += static_cast<float>(sum_gy);
      float g_is_n = static_cast<float>(gamma_.w.v[c] * invstd_[c] / n);
      float sg = static_cast<float>(sum_gy), sgx = static_cast<float>(sum_gy_xh);
      for (int b = 0; b < B; ++b) {
        std::size_t off = (std::size_t(b) * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i)
          gx.v[off + i] = g_is_n * (static_cast<float>(n) * gy.v[off + i] - sg -
                                    xhat_.v[off + i] * sgx);
      }
    }
  } else {
    for (int c = 0; c < c_; ++c) {
      float k = gamma_.w.v[c] * invstd_[c];
      for (int b = 0; b < B; ++b) {
        std::size_t off = (std::size_t(b) * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) gx.v[off + i] = k * gy.v[off + i];
      }
    }
  }
  return gx;
}

void BatchNorm2d::collect(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void BatchNorm2d::collect_buffers(std::vector<Param*>& out) {
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

// ---------------------------------------------------------------- MaxPool2

Tensor MaxPool2::forward(const Tensor& x, bool) {
  in_shape_ = x.shape;
  const int B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const int Ho = H / 2, Wo = W / 2;
  Tensor y({B, C, Ho, Wo});
  argmax_.resize(y.size());
  for (int bc = 0; bc < B * C; ++bc) {
    const float* xin = x.data() + std::size_t(bc) * H * W;
    float* yout = y.data() + std::size_t(bc) * Ho * Wo;
    int* am = argmax_.data() + std::size_t(bc) * Ho * Wo;
    for (int oy = 0; oy < Ho; ++oy) {
      for (int ox = 0; ox < Wo; ++ox) {
        int best = (2 * oy) * W + 2 * ox;
        float bv = xin[best];
        const int cand[3] = {(2 * oy) * W + 2 * ox + 1, (2 * oy + 1) * W + 2 * ox,
                             (2 * oy + 1) * W + 2 * ox + 1};
        for (int idx : cand)
          if (xin[idx] > bv) {
            bv = xin[idx];
            best = idx;
          }
        yout[oy * Wo + ox] = bv;
        am[oy * Wo + ox] = best;
      }
    }
  }
  return y;
}

Tensor MaxPool2::backward(const Tensor& gy) {
  const int B = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
  const int Ho = H / 2, Wo = W / 2;
  Tensor gx(in_shape_);
  for (int bc = 0; bc < B * C; ++bc) {
    const float* g = gy.data() + std::size_t(bc) * Ho * Wo;
    const int* am = argmax_.data() + std::size_t(bc) * Ho * Wo;
    float* out = gx.data() + std::size_t(bc) * H * W;
    for (int i = 0; i < Ho * Wo; ++i) out[am[i]] += g[i];
  }
  return gx;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int cin, int cout, Stream& init, std::string name) : cin_(cin), cout_(cout) {
  w_.name = name + ".w";
  w_.w = Tensor({cout, cin * 9});
  w_.g = Tensor({cout, cin * 9});
  b_.name = name + ".b";
  b_.w = Tensor({cout});
  b_.g = Tensor({cout});
  init_uniform(w_.w, cin * 9, init);
}

Tensor Conv2d::forward(const Tensor& x, bool) {
  x_ = x;
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const int hw = H * W, K = cin_ * 9;
  Tensor y({B, cout_, H, W});
  Mat col(K, hw);
  auto Wm = w_.w.mat(cout_, K);
  for (int b = 0; b < B; ++b) {
    im2col_3x3(x.data() + std::size_t(b) * cin_ * hw, cin_, H, W, col.data());
    MatMap Y(y.data() + std::size_t(b) * cout_ * hw, cout_, hw);
    Y.noalias() = Wm * col;
    Y.colwise() += Eigen::Map<const Vec>(b_.w.data(), cout_);
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  const int B = x_.shape[0], H = x_.shape[2], W = x_.shape[3];
  const int hw = H * W, K = cin_ * 9;
  Tensor gx(x_.shape);
  Mat col(K, hw), colg(K, hw);
  auto Wm = w_.w.mat(cout_, K);
  auto GW = w_.g.mat(cout_, K);
  Eigen::Map<Vec> gb(b_.g.data(), cout_);
  for (int b = 0; b < B; ++b) {
    CMatMap GY(gy.data() + std::size_t(b) * cout_ * hw, cout_, hw);
    im2col_3x3(x_.data() + std::size_t(b) * cin_ * hw, cin_, H, W, col.data());
    GW.noalias() += GY * col.transpose();
    gb += GY.rowwise().sum();
    colg.noalias() = Wm.transpose() * GY;
    col2im_3x3(colg.data(), cin_, H, W, gx.data() + std::size_t(b) * cin_ * hw);
  }
  return gx;
}

void Conv2d::collect(std::vector<Param*>& out) {
  out.push_back(&w_);
  out.push_back(&b_);
}

// ---------------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int cin, int cout, Stream& init, std::string name)
    : cin_(cin), cout_(cout) {
  w_.name = name + ".w";
  w_.w = Tensor({cin, cout * 9});
  w_.g = Tensor({cin, cout * 9});
  b_.name = name + ".b";
  b_.w = Tensor({cout});
  b_.g = Tensor({cout});
  init_uniform(w_.w, cin * 9, init);
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool) {
  x_ = x;
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const int Ho = 2 * H, Wo = 2 * W;
  const int hw = H * W, K2 = cout_ * 9;
  Tensor y({B, cout_, Ho, Wo});
  Mat col(K2, hw);
  auto Wm = w_.w.mat(cin_, K2);
  for (int b = 0; b < B; ++b) {
    CMatMap X(x.data() + std::size_t(b) * cin_ * hw, cin_, hw);
    col.noalias() = Wm.transpose() * X;
    float* yb = y.data() + std::size_t(b) * cout_ * Ho * Wo;
    for (int co = 0; co < cout_; ++co) {
      float* yc = yb + std::size_t(co) * Ho * Wo;
      float bias = b_.w.v[co];
      for (int i = 0; i < Ho * Wo; ++i) yc[i] = bias;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const float* src = col.data() + (std::size_t(co) * 9 + ky * 3 + kx) * hw;
          for (int iy = 0; iy < H; ++iy) {
            int oy = 2 * iy + ky - 1;
            if (oy < 0 || oy >= Ho) continue;
            float* yrow = yc + std::size_t(oy) * Wo;
            const float* s = src + std::size_t(iy) * W;
            for (int ix = 0; ix < W; ++ix) {
              int ox = 2 * ix + kx - 1;
              if (ox < 0 || ox >= Wo) continue;
              yrow[ox] += s[ix];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
  const int B = x_.shape[0], H = x_.shape[2], W = x_.shape[3];
  const int Ho = 2 * H, Wo = 2 * W;
  const int hw = H * W, K2 = cout_ * 9;
  Tensor gx(x_.shape);
  Mat colg(K2, hw);
  auto Wm = w_.w.mat(cin_, K2);
  auto GW = w_.g.mat(cin_, K2);
  for (int b = 0; b < B; ++b) {
    const float* gyb = gy.data() + std::size_t(b) * cout_ * Ho * Wo;
    // gather gy back into column layout (transpose of the forward scatter)
    for (int co = 0; co < cout_; ++co) {
      const float* gc = gyb + std::size_t(co) * Ho * Wo;
      double bsum = 0;
      for (int i = 0; i < Ho * Wo; ++i) bsum += gc[i];
      b_.g.v[co] += static_cast<float>(bsum);
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          float* dst = colg.data() + (std::size_t(co) * 9 + ky * 3 + kx) * hw;
          for (int iy = 0; iy < H; ++iy) {
            int oy = 2 * iy + ky - 1;
            float* d = dst + std::size_t(iy) * W;
            if (oy < 0 || oy >= Ho) {
              std::memset(d, 0, sizeof(float) * W);
              continue;
            }
            const float* grow = gc + std::size_t(oy) * Wo;
            for (int ix = 0; ix < W; ++ix) {
              int ox = 2 * ix + kx - 1;
              d[ix] = (ox < 0 || ox >= Wo) ? 0.f : grow[ox];
            }
          }
        }
      }
    }
    CMatMap X(x_.data() + std::size_t(b) * cin_ * hw, cin_, hw);
    GW.noalias() += X * colg.transpose();
    MatMap GX(gx.data() + std::size_t(b) * cin_ * hw, cin_, hw);
    GX.noalias() = Wm * colg;
  }
  return gx;
}

void ConvTranspose2d::collect(std::vector<Param*>& out) {
  out.push_back(&w_);
  out.push_back(&b_);
}

// ---------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x, bool train) {
  Tensor cur = x;
  for (auto& l : layers_) cur = l->forward(cur, train);
  return cur;
}

Tensor Sequential::backward(const Tensor& gy) {
  Tensor cur = gy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
  return cur;
}

void Sequential::collect(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect(out);
}

void Sequential::collect_buffers(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect_buffers(out);
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  collect(out);
  return out;
}

std::vector<Param*> Sequential::all_state() {
  std::vector<Param*> out;
  collect(out);
  collect_buffers(out);
  return out;
}

std::size_t Sequential::parameter_count() {
  std::size_t n = 0;
  for (Param* p : params()) n += p->w.size();
  return n;
}

void Sequential::zero_grads() {
  for (Param* p : params()) std::fill(p->g.v.begin(), p->g.v.end(), 0.f);
}

}  // namespace semcom
