#include "sleepfuse/adam.hpp"

#include <cmath>

namespace sleepfuse::num {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr <= 0.0) throw ConfigError("Adam learning rate must be positive");
  offsets_.reserve(params_.size());
  for (const Tensor& p : params_) {
    if (!p.defined() || !p.requires_grad())
      throw StateError("Adam parameters must be defined tensors with requires_grad");
    offsets_.push_back(total_);
    total_ += p.size();
  }
  m_.assign(total_, 0.0);
  v_.assign(total_, 0.0);
}

void Adam::step() {
  for (const Tensor& p : params_)
    if (!p.grad_allocated())
      throw StateError("Adam step with missing gradient (parameter " + shape_str(p) +
                       " never reached by backward)");

  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));

  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    const std::vector<double>& g = p.grad();
    double* w = p.data();
    const std::size_t base = offsets_[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m_[base + i] = cfg_.beta1 * m_[base + i] + (1.0 - cfg_.beta1) * g[i];
      v_[base + i] = cfg_.beta2 * v_[base + i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m_[base + i] / bc1;
      const double v_hat = v_[base + i] / bc2;
      w[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
    p.zero_grad();
  }
}

}  // namespace sleepfuse::num
