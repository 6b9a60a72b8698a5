#pragma once
// Adam optimizer with bias correction over a flat view of the parameter list.

#include <cstddef>
#include <vector>

#include "sleepfuse/tensor.hpp"

namespace sleepfuse::num {

struct AdamConfig {
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

  // One update over all parameters; zeroes their gradients afterwards.
  // Throws StateError if any parameter has never received a gradient buffer.
  void step();

  std::size_t step_count() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }
  std::size_t parameter_count() const { return total_; }

 private:
  std::vector<Tensor> params_;
  std::vector<double> m_, v_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
  std::size_t steps_ = 0;
  AdamConfig cfg_;
};

}  // namespace sleepfuse::num
