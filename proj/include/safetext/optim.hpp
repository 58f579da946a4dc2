#pragma once

#include <cstdint>
#include <vector>

#include "safetext/graph.hpp"
#include "safetext/tensor.hpp"

namespace safetext::optim {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators, one pair per parameter, plus the shared
// step counter. Moments are lazily allocated on the first step.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;
};

// One bias-corrected Adam update, in place. params and grads are aligned.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state,
               const AdamConfig& cfg);

double global_norm(const std::vector<const Tensor*>& grads);

// Scales every gradient by max_norm/norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_global_norm(const std::vector<Tensor*>& grads, double max_norm);

// ParameterSet-bound convenience used by the training loop.
class Adam {
 public:
  Adam(const ad::ParameterSet& params, AdamConfig cfg);
  void step(ad::ParameterSet& params);
  const AdamState& state() const { return state_; }

 private:
  AdamConfig cfg_;
  AdamState state_;
};

double clip_global_norm(ad::ParameterSet& params, double max_norm);

}  // namespace safetext::optim
