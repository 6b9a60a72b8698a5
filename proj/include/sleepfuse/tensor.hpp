#pragma once
// Dense row-major f64 tensors with reverse-mode automatic differentiation on
// an explicit tape. Every model operation is built from the primitives below;
// the tape is rebuilt per forward pass (dynamic graph). Ops called with a
// null tape run eagerly with no gradient tracking, which is the inference
// path.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sleepfuse/common.hpp"
#include "sleepfuse/rng.hpp"

namespace sleepfuse::num {

namespace detail {
struct TensorImpl {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::optional<std::vector<double>> grad;

  void ensure_grad() {
    if (!grad) grad.emplace(data.size(), 0.0);
  }
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // 1xN row vector.
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return impl_->shape; }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t rank() const { return impl_->shape.size(); }

  // 2-D accessors; rows()/cols() also accept 1-D tensors as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return impl_->data.data(); }
  const double* data() const { return impl_->data.data(); }
  std::vector<double>& values() { return impl_->data; }
  const std::vector<double>& values() const { return impl_->data; }

  double& at(std::size_t flat) { return impl_->data[flat]; }
  double at(std::size_t flat) const { return impl_->data[flat]; }
  double& operator()(std::size_t r, std::size_t c) { return impl_->data[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool value);

  // Gradient buffer. Reading the gradient of a requires_grad tensor that no
  // backward pass ever touched yields zeros; reading one of a non-grad tensor
  // is a StateError.
  bool grad_allocated() const { return impl_->grad.has_value(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  // Deep copy of the payload (gradient state not copied).
  Tensor clone() const;

  std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

std::string shape_str(const std::vector<std::size_t>& shape);
std::string shape_str(const Tensor& t);

// Records backward closures in forward order and replays them in reverse.
// Single-threaded by design: one tape per training context.
class Tape {
 public:
  void record(std::function<void()> backward_step) { nodes_.push_back(std::move(backward_step)); }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss)=1 and replays the tape. The loss must be a scalar
  // produced on this tape. Calling backward twice without reset() is refused.
  void backward(const Tensor& loss);
  void reset();

 private:
  std::vector<std::function<void()>> nodes_;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Primitive operations. All propagate requires_grad and record backward rules
// when a tape is supplied.
// ---------------------------------------------------------------------------

// [MxK]·[KxN] -> [MxN]. dA += dC·B^T, dB += A^T·dC.
Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);

Tensor transpose(const Tensor& x, Tape* tape = nullptr);

// Elementwise. Binary ops take equal shapes, or one operand broadcastable
// along the leading dimension ([1xN] or [N] against [MxN]).
Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor scale(const Tensor& x, double c, Tape* tape = nullptr);
Tensor tanh_op(const Tensor& x, Tape* tape = nullptr);
Tensor sigmoid(const Tensor& x, Tape* tape = nullptr);
Tensor relu(const Tensor& x, Tape* tape = nullptr);

// Softmax along the last axis, computed with max subtraction.
Tensor softmax_lastdim(const Tensor& x, Tape* tape = nullptr);

// Normalizes each last-axis slice to mean 0 / variance 1 (epsilon inside the
// square root), then applies gain and bias of length P.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Tape* tape = nullptr,
                  double eps = 1e-5);

// Inverted dropout: zeroes with probability `rate` and scales survivors by
// 1/(1-rate) in training mode; identity in eval mode.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng, Tape* tape = nullptr);

// Mean over the batch of -log softmax(logits)[true class]. Labels must be
// exactly one-hot rows. Gradient is (softmax - onehot)/B.
Tensor cross_entropy_loss(const Tensor& logits, const Tensor& onehot, Tape* tape = nullptr);

Tensor concat_rows(const std::vector<Tensor>& parts, Tape* tape = nullptr);
Tensor concat_cols(const std::vector<Tensor>& parts, Tape* tape = nullptr);
Tensor slice_rows(const Tensor& x, std::size_t row0, std::size_t nrows, Tape* tape = nullptr);
Tensor slice_cols(const Tensor& x, std::size_t col0, std::size_t ncols, Tape* tape = nullptr);

}  // namespace sleepfuse::num
