#include "sleepfuse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace sleepfuse::num {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_matrix(const Tensor& t, const char* what) {
  if (!t.defined() || t.rank() == 0 || t.rank() > 2)
    throw ShapeError(std::string(what) + " expects a 1-D or 2-D tensor, got " + shape_str(t));
}

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

// Marks the output differentiable and pre-allocates gradient buffers for
// everything the node touches, so that "grad populated" holds even for
// parameters that end up disconnected from the loss.
bool prepare_node(Tape* tape, std::initializer_list<const Tensor*> inputs, Tensor& out) {
  if (tape == nullptr) return false;
  bool any = false;
  for (const Tensor* t : inputs) any = any || t->requires_grad();
  if (!any) return false;
  out.set_requires_grad(true);
  out.impl()->ensure_grad();
  for (const Tensor* t : inputs)
    if (t->requires_grad()) t->impl()->ensure_grad();
  return true;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data, bool requires_grad) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (std::size_t d : shape)
    if (d == 0) throw ShapeError("tensor dimensions must be >= 1, got " + shape_str(shape));
  if (shape_product(shape) != data.size())
    throw ShapeError("shape " + shape_str(shape) + " does not match data length " +
                     std::to_string(data.size()));
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::vector<double> data(shape_product(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
  std::vector<double> data(shape_product(shape), value);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return Tensor({1, n}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const { return rank() == 1 ? 1 : impl_->shape[rank() - 2]; }
std::size_t Tensor::cols() const { return impl_->shape[rank() - 1]; }

Tensor& Tensor::set_requires_grad(bool value) {
  impl_->requires_grad = value;
  return *this;
}

std::vector<double>& Tensor::grad() {
  if (!impl_->requires_grad)
    throw StateError("gradient requested for a tensor that does not require grad");
  impl_->ensure_grad();
  return *impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (!impl_->requires_grad)
    throw StateError("gradient requested for a tensor that does not require grad");
  impl_->ensure_grad();
  return *impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_->grad) std::fill(impl_->grad->begin(), impl_->grad->end(), 0.0);
}

Tensor Tensor::clone() const {
  return Tensor(impl_->shape, impl_->data, impl_->requires_grad);
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::string shape_str(const Tensor& t) {
  return t.defined() ? shape_str(t.shape()) : std::string("[undefined]");
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ShapeError("backward requires a scalar loss, got " + shape_str(loss));
  if (consumed_)
    throw StateError("backward already ran on this tape; call reset() before reusing it");
  consumed_ = true;
  if (loss.requires_grad()) {
    loss.impl()->ensure_grad();
    (*loss.impl()->grad)[0] += 1.0;
  }
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
  check_matrix(a, "matmul");
  check_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2)
    throw ShapeError("matmul inner dimensions disagree: " + shape_str(a) + " vs " + shape_str(b));

  Tensor out = Tensor::zeros({m, n});
  {
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double av = pa[i * k + p];
        if (av == 0.0) continue;
        const double* brow = pb + p * n;
        double* orow = po + i * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
  }

  if (prepare_node(tape, {&a, &b}, out)) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record([ai, bi, oi, m, k, n] {
      const std::vector<double>& go = *oi->grad;
      if (ai->requires_grad) {
        std::vector<double>& ga = *ai->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const double g = go[i * n + j];
            if (g == 0.0) continue;
            const double* brow = bi->data.data();
            for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += g * brow[p * n + j];
          }
      }
      if (bi->requires_grad) {
        std::vector<double>& gb = *bi->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double av = ai->data[i * k + p];
            if (av == 0.0) continue;
            const double* grow = go.data() + i * n;
            double* gbrow = gb.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
          }
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& x, Tape* tape) {
  check_matrix(x, "transpose");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = x.data()[i * n + j];

  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, m, n] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += go[j * m + i];
    });
  }
  return out;
}

namespace {

enum class Broadcast { None, Left, Right };  // which operand is the broadcast row

Broadcast binary_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::None;
  const bool a_row = a.rows() == 1;
  const bool b_row = b.rows() == 1;
  if (b_row && a.cols() == b.cols() && a.rows() >= 1) return Broadcast::Right;
  if (a_row && b.cols() == a.cols() && b.rows() >= 1) return Broadcast::Left;
  throw ShapeError(std::string(op) + " shapes incompatible: " + shape_str(a) + " vs " +
                   shape_str(b));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
  check_matrix(a, "add");
  check_matrix(b, "add");
  const Broadcast bc = binary_broadcast(a, b, "add");
  const Tensor& big = (bc == Broadcast::Left) ? b : a;
  Tensor out = Tensor::zeros(big.shape());
  const std::size_t m = big.rows(), n = big.cols();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double av = (bc == Broadcast::Left) ? a.data()[j] : a.data()[i * n + j];
      const double bv = (bc == Broadcast::Right) ? b.data()[j] : b.data()[i * n + j];
      out.data()[i * n + j] = av + bv;
    }

  if (prepare_node(tape, {&a, &b}, out)) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record([ai, bi, oi, bc, m, n] {
      const std::vector<double>& go = *oi->grad;
      if (ai->requires_grad) {
        std::vector<double>& ga = *ai->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            ga[(bc == Broadcast::Left) ? j : i * n + j] += go[i * n + j];
      }
      if (bi->requires_grad) {
        std::vector<double>& gb = *bi->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            gb[(bc == Broadcast::Right) ? j : i * n + j] += go[i * n + j];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
  check_matrix(a, "mul");
  check_matrix(b, "mul");
  const Broadcast bc = binary_broadcast(a, b, "mul");
  const Tensor& big = (bc == Broadcast::Left) ? b : a;
  Tensor out = Tensor::zeros(big.shape());
  const std::size_t m = big.rows(), n = big.cols();
  auto a_at = [&](std::size_t i, std::size_t j) {
    return (bc == Broadcast::Left) ? a.data()[j] : a.data()[i * n + j];
  };
  auto b_at = [&](std::size_t i, std::size_t j) {
    return (bc == Broadcast::Right) ? b.data()[j] : b.data()[i * n + j];
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.data()[i * n + j] = a_at(i, j) * b_at(i, j);

  if (prepare_node(tape, {&a, &b}, out)) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record([ai, bi, oi, bc, m, n] {
      const std::vector<double>& go = *oi->grad;
      auto aval = [&](std::size_t i, std::size_t j) {
        return (bc == Broadcast::Left) ? ai->data[j] : ai->data[i * n + j];
      };
      auto bval = [&](std::size_t i, std::size_t j) {
        return (bc == Broadcast::Right) ? bi->data[j] : bi->data[i * n + j];
      };
      if (ai->requires_grad) {
        std::vector<double>& ga = *ai->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            ga[(bc == Broadcast::Left) ? j : i * n + j] += go[i * n + j] * bval(i, j);
      }
      if (bi->requires_grad) {
        std::vector<double>& gb = *bi->grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            gb[(bc == Broadcast::Right) ? j : i * n + j] += go[i * n + j] * aval(i, j);
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double c, Tape* tape) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out.at(i) = c * x.at(i);
  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, c] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += c * go[i];
    });
  }
  return out;
}

namespace {

template <class Fwd, class Back>
Tensor unary_pointwise(const Tensor& x, Tape* tape, Fwd fwd, Back back_from_xy) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out.at(i) = fwd(x.at(i));
  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, back_from_xy] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      for (std::size_t i = 0; i < gx.size(); ++i)
        gx[i] += go[i] * back_from_xy(xi->data[i], oi->data[i]);
    });
  }
  return out;
}

}  // namespace

Tensor tanh_op(const Tensor& x, Tape* tape) {
  return unary_pointwise(
      x, tape, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x, Tape* tape) {
  return unary_pointwise(
      x, tape,
      [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x, Tape* tape) {
  return unary_pointwise(
      x, tape, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax_lastdim(const Tensor& x, Tape* tape) {
  const std::size_t n = x.cols();
  const std::size_t rows = x.size() / n;
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    double* yr = out.data() + r * n;
    double mx = xr[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= sum;
  }

  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, rows, n] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      const std::vector<double>& y = oi->data;
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += go[r * n + j] * y[r * n + j];
        for (std::size_t j = 0; j < n; ++j)
          gx[r * n + j] += y[r * n + j] * (go[r * n + j] - dot);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Tape* tape,
                  double eps) {
  const std::size_t p = x.cols();
  if (p < 2) throw ShapeError("layer_norm needs slices of length >= 2, got " + shape_str(x));
  if (gain.size() != p || bias.size() != p)
    throw ShapeError("layer_norm gain/bias must have length " + std::to_string(p) + ", got " +
                     shape_str(gain) + " and " + shape_str(bias));
  const std::size_t rows = x.size() / p;

  Tensor out = Tensor::zeros(x.shape());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * p;
    double mean = 0.0;
    for (std::size_t j = 0; j < p; ++j) mean += xr[j];
    mean /= static_cast<double>(p);
    double var = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(p);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < p; ++j) {
      xhat[r * p + j] = (xr[j] - mean) * is;
      out.data()[r * p + j] = gain.data()[j] * xhat[r * p + j] + bias.data()[j];
    }
  }

  if (prepare_node(tape, {&x, &gain, &bias}, out)) {
    ImplPtr xi = x.impl(), gi = gain.impl(), bi = bias.impl(), oi = out.impl();
    auto xhat_s = std::make_shared<std::vector<double>>(std::move(xhat));
    auto istd_s = std::make_shared<std::vector<double>>(std::move(inv_std));
    tape->record([xi, gi, bi, oi, xhat_s, istd_s, rows, p] {
      const std::vector<double>& go = *oi->grad;
      const std::vector<double>& xh = *xhat_s;
      for (std::size_t r = 0; r < rows; ++r) {
        if (gi->requires_grad) {
          std::vector<double>& gg = *gi->grad;
          for (std::size_t j = 0; j < p; ++j) gg[j] += go[r * p + j] * xh[r * p + j];
        }
        if (bi->requires_grad) {
          std::vector<double>& gb = *bi->grad;
          for (std::size_t j = 0; j < p; ++j) gb[j] += go[r * p + j];
        }
        if (xi->requires_grad) {
          std::vector<double>& gx = *xi->grad;
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (std::size_t j = 0; j < p; ++j) {
            const double dxh = go[r * p + j] * gi->data[j];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xh[r * p + j];
          }
          mean_dxhat /= static_cast<double>(p);
          mean_dxhat_xhat /= static_cast<double>(p);
          for (std::size_t j = 0; j < p; ++j) {
            const double dxh = go[r * p + j] * gi->data[j];
            gx[r * p + j] +=
                (*istd_s)[r] * (dxh - mean_dxhat - xh[r * p + j] * mean_dxhat_xhat);
          }
        }
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng, Tape* tape) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;

  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    (*mask)[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    out.at(i) = x.at(i) * (*mask)[i];
  }

  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, mask] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * (*mask)[i];
    });
  }
  return out;
}

Tensor cross_entropy_loss(const Tensor& logits, const Tensor& onehot, Tape* tape) {
  check_matrix(logits, "cross_entropy_loss");
  if (logits.shape() != onehot.shape())
    throw ShapeError("cross_entropy_loss logits " + shape_str(logits) + " and labels " +
                     shape_str(onehot) + " must match");
  const std::size_t b = logits.rows(), k = logits.cols();

  std::vector<std::size_t> true_class(b);
  for (std::size_t r = 0; r < b; ++r) {
    std::size_t ones = 0, idx = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = onehot(r, j);
      if (v == 1.0) {
        ++ones;
        idx = j;
      } else if (v != 0.0) {
        throw ValidationError("label row " + std::to_string(r) + " is not one-hot");
      }
    }
    if (ones != 1) throw ValidationError("label row " + std::to_string(r) + " is not one-hot");
    true_class[r] = idx;
  }

  auto probs = std::make_shared<std::vector<double>>(b * k);
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double* xr = logits.data() + r * k;
    double mx = xr[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      (*probs)[r * k + j] = std::exp(xr[j] - mx);
      sum += (*probs)[r * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) (*probs)[r * k + j] /= sum;
    total += (mx + std::log(sum)) - xr[true_class[r]];
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(b));

  if (prepare_node(tape, {&logits}, out)) {
    ImplPtr xi = logits.impl(), oi = out.impl();
    auto truth = std::make_shared<std::vector<std::size_t>>(std::move(true_class));
    tape->record([xi, oi, probs, truth, b, k] {
      std::vector<double>& gx = *xi->grad;
      const double g = (*oi->grad)[0] / static_cast<double>(b);
      for (std::size_t r = 0; r < b; ++r)
        for (std::size_t j = 0; j < k; ++j)
          gx[r * k + j] += g * ((*probs)[r * k + j] - (j == (*truth)[r] ? 1.0 : 0.0));
    });
  }
  return out;
}

namespace {

Tensor concat_impl(const std::vector<Tensor>& parts, bool rows_axis, Tape* tape) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const std::size_t fixed = rows_axis ? parts[0].cols() : parts[0].rows();
  std::size_t total = 0;
  bool any_grad = false;
  for (const Tensor& t : parts) {
    check_matrix(t, "concat");
    const std::size_t f = rows_axis ? t.cols() : t.rows();
    if (f != fixed)
      throw ShapeError("concat parts disagree: " + shape_str(parts[0]) + " vs " + shape_str(t));
    total += rows_axis ? t.rows() : t.cols();
    any_grad = any_grad || t.requires_grad();
  }

  const std::size_t m = rows_axis ? total : fixed;
  const std::size_t n = rows_axis ? fixed : total;
  Tensor out = Tensor::zeros({m, n});
  std::size_t off = 0;
  for (const Tensor& t : parts) {
    const std::size_t tr = t.rows(), tc = t.cols();
    for (std::size_t i = 0; i < tr; ++i)
      for (std::size_t j = 0; j < tc; ++j) {
        if (rows_axis)
          out(off + i, j) = t.data()[i * tc + j];
        else
          out(i, off + j) = t.data()[i * tc + j];
      }
    off += rows_axis ? tr : tc;
  }

  if (tape != nullptr && any_grad) {
    out.set_requires_grad(true);
    out.impl()->ensure_grad();
    std::vector<ImplPtr> impls;
    impls.reserve(parts.size());
    for (const Tensor& t : parts) {
      if (t.requires_grad()) t.impl()->ensure_grad();
      impls.push_back(t.impl());
    }
    ImplPtr oi = out.impl();
    tape->record([impls, oi, rows_axis, m, n] {
      const std::vector<double>& go = *oi->grad;
      std::size_t off = 0;
      for (const ImplPtr& ti : impls) {
        const std::size_t tr = ti->shape.size() == 1 ? 1 : ti->shape[0];
        const std::size_t tc = ti->shape.back();
        if (ti->requires_grad) {
          std::vector<double>& gt = *ti->grad;
          for (std::size_t i = 0; i < tr; ++i)
            for (std::size_t j = 0; j < tc; ++j)
              gt[i * tc + j] += rows_axis ? go[(off + i) * n + j] : go[i * n + (off + j)];
        }
        off += rows_axis ? tr : tc;
      }
    });
  }
  return out;
}

Tensor slice_impl(const Tensor& x, bool rows_axis, std::size_t at, std::size_t count,
                  Tape* tape) {
  check_matrix(x, "slice");
  const std::size_t m = x.rows(), n = x.cols();
  const std::size_t limit = rows_axis ? m : n;
  if (count == 0 || at + count > limit)
    throw ShapeError("slice [" + std::to_string(at) + "," + std::to_string(at + count) +
                     ") out of range for " + shape_str(x));

  const std::size_t om = rows_axis ? count : m;
  const std::size_t on = rows_axis ? n : count;
  Tensor out = Tensor::zeros({om, on});
  for (std::size_t i = 0; i < om; ++i)
    for (std::size_t j = 0; j < on; ++j)
      out(i, j) = rows_axis ? x.data()[(at + i) * n + j] : x.data()[i * n + (at + j)];

  if (prepare_node(tape, {&x}, out)) {
    ImplPtr xi = x.impl(), oi = out.impl();
    tape->record([xi, oi, rows_axis, at, om, on, n] {
      std::vector<double>& gx = *xi->grad;
      const std::vector<double>& go = *oi->grad;
      for (std::size_t i = 0; i < om; ++i)
        for (std::size_t j = 0; j < on; ++j) {
          const std::size_t dst = rows_axis ? (at + i) * n + j : i * n + (at + j);
          gx[dst] += go[i * on + j];
        }
    });
  }
  return out;
}

}  // namespace

Tensor concat_rows(const std::vector<Tensor>& parts, Tape* tape) {
  return concat_impl(parts, true, tape);
}

Tensor concat_cols(const std::vector<Tensor>& parts, Tape* tape) {
  return concat_impl(parts, false, tape);
}

Tensor slice_rows(const Tensor& x, std::size_t row0, std::size_t nrows, Tape* tape) {
  return slice_impl(x, true, row0, nrows, tape);
}

Tensor slice_cols(const Tensor& x, std::size_t col0, std::size_t ncols, Tape* tape) {
  return slice_impl(x, false, col0, ncols, tape);
}

}  // namespace sleepfuse::num
