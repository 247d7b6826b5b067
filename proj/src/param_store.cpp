#include "afford/param_store.hpp"

#include <cmath>

#include "afford/error.hpp"

namespace afford {

void AdamConfig::validate() const {
  if (learning_rate <= 0.0) throw NumericError("adam: learning_rate must be positive");
  if (beta1 <= 0.0 || beta1 >= 1.0) throw NumericError("adam: beta1 must be in (0,1)");
  if (beta2 <= 0.0 || beta2 >= 1.0) throw NumericError("adam: beta2 must be in (0,1)");
  if (epsilon <= 0.0) throw NumericError("adam: epsilon must be positive");
  if (decay_factor <= 0.0 || decay_factor > 1.0) {
    throw NumericError("adam: decay_factor must be in (0,1]");
  }
  if (decay_after_epochs < 0) throw NumericError("adam: decay_after_epochs must be >= 0");
}

double AdamConfig::effective_lr(int epoch) const {
  int k = std::max(0, epoch - decay_after_epochs);
  if (decay_once) return k > 0 ? learning_rate * decay_factor : learning_rate;
  return learning_rate * std::pow(decay_factor, k);
}

Param& ParamStore::add(const std::string& name, Tensor init) {
  if (params_.count(name)) throw NumericError("parameter '" + name + "' already exists");
  Param p;
  p.grad = Tensor::zeros(init.shape());
  p.m = Tensor::zeros(init.shape());
  p.v = Tensor::zeros(init.shape());
  p.value = std::move(init);
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  return it->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw NumericError("unknown parameter '" + name + "'");
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw NumericError("unknown parameter '" + name + "'");
  return it->second;
}

int64_t ParamStore::value_count() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

double ParamStore::global_grad_norm() const {
  double s = 0.0;
  for (const auto& [name, p] : params_) {
    for (int i = 0; i < p.grad.size(); ++i) s += p.grad[i] * p.grad[i];
  }
  return std::sqrt(s);
}

void ParamStore::clip_gradients(double max_norm) {
  double norm = global_grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  double scale = max_norm / norm;
  for (auto& [name, p] : params_) {
    for (int i = 0; i < p.grad.size(); ++i) p.grad[i] *= scale;
  }
}

void ParamStore::adam_step(const AdamConfig& config, int epoch) {
  config.validate();
  for (const auto& [name, p] : params_) {
    if (!p.grad.all_finite()) {
      throw NumericError("training divergence: non-finite gradient for parameter '" + name + "'");
    }
  }
  if (config.clip_norm > 0.0) clip_gradients(config.clip_norm);

  step_ += 1;
  double lr = config.effective_lr(epoch);
  double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_));
  for (auto& [name, p] : params_) {
    for (int i = 0; i < p.value.size(); ++i) {
      double g = p.grad[i];
      p.m[i] = config.beta1 * p.m[i] + (1.0 - config.beta1) * g;
      p.v[i] = config.beta2 * p.v[i] + (1.0 - config.beta2) * g * g;
      double mhat = p.m[i] / bc1;
      double vhat = p.v[i] / bc2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + config.epsilon);
    }
    p.grad.fill(0.0);
  }
}

}  // namespace afford
