#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afford/tensor.hpp"

namespace afford {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_factor = 0.85;
  int decay_after_epochs = 10;
  bool decay_once = false;  // one-time decay instead of per-epoch compounding
  double clip_norm = 0.0;   // 0 disables global-norm clipping

  void validate() const;
  // epoch is 1-based; decay kicks in from epoch decay_after_epochs + 1.
  double effective_lr(int epoch) const;
};

struct Param {
  Tensor value;
  Tensor grad;
  Tensor m;  // first moment
  Tensor v;  // second moment
};

// Named parameters with per-parameter gradient accumulators and Adam state.
// Iteration order is the lexicographic name order, which fixes the update
// and serialization order for determinism.
class ParamStore {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  std::map<std::string, Param>& entries() { return params_; }
  const std::map<std::string, Param>& entries() const { return params_; }
  size_t size() const { return params_.size(); }
  int64_t value_count() const;

  void zero_grads();
  double global_grad_norm() const;
  void clip_gradients(double max_norm);

  int64_t step() const { return step_; }
  void set_step(int64_t s) { step_ = s; }

  // Standard Adam with bias correction at the schedule's effective learning
  // rate for `epoch`. Clips first when configured, zeroes gradients after.
  void adam_step(const AdamConfig& config, int epoch);

 private:
  std::map<std::string, Param> params_;
  int64_t step_ = 0;
};

inline void adam_step(ParamStore& store, const AdamConfig& config, int epoch) {
  store.adam_step(config, epoch);
}

}  // namespace afford
