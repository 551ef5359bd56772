#include <cmath>

#include "semcom/nn.hpp"

namespace semcom {

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.emplace_back(p->w.size(), 0.f);
    v_.emplace_back(p->w.size(), 0.f);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, t_);
  const double bc2 = 1.0 - std::pow(b2_, t_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      float g = p->g.v[j];
      m[j] = static_cast<float>(b1_ * m[j] + (1 - b1_) * g);
      v[j] = static_cast<float>(b2_ * v[j] + (1 - b2_) * double(g) * g);
      double mh = m[j] / bc1, vh = v[j] / bc2;
      p->w.v[j] -= static_cast<float>(lr_ * mh / (std::sqrt(vh) + eps_));
    }
  }
}

void Adam::zero_grads() {
  for (Param* p : params_) std::fill(p->g.v.begin(), p->g.v.end(), 0.f);
}

}  // namespace semcom
