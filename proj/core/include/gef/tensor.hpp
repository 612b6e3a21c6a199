#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gef/errors.hpp"

namespace gef {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  bool is_leaf = true;
  bool touched = false;  // received gradient during the current backward pass

  void accumulate(std::size_t i, double g) {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    grad[i] += g;
    touched = true;
  }
  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    touched = true;
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor of doubles. Copies share storage; use clone() for a
/// deep copy. Rank 0 (scalar), 1 and 2 are supported by the op suite; ops view
/// every tensor as rows() x cols() where cols() is the last dimension.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  /// Gradient buffer; zeros when nothing has been accumulated yet.
  std::vector<double> grad() const;
  void zero_grad();

  Tensor clone() const;

  detail::TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& shared() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  friend Tensor make_tensor(Shape, std::vector<double>, bool);

  std::shared_ptr<detail::TensorNode> node_;
};

Tensor make_tensor(Shape shape, std::vector<double> values, bool requires_grad);

/// Records differentiable operations for one forward pass. Constructing a Tape
/// makes it the active tape of the calling thread until it is destroyed; ops
/// whose inputs require gradients record themselves on the active tape.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  using BackwardFn = std::function<void(detail::TensorNode& out)>;

  void record(const Tensor& output, BackwardFn fn);

  /// Propagates d(loss)/d(x) to every reachable leaf with requires_grad.
  /// Leaf gradients accumulate across calls; intermediate gradients are reset.
  void backward(const Tensor& loss);

  std::size_t size() const { return records_.size(); }

  static Tape* active();

 private:
  struct Record {
    std::shared_ptr<detail::TensorNode> output;
    BackwardFn fn;
  };
  std::vector<Record> records_;
  Tape* previous_ = nullptr;
};

/// Suspends recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape* saved_;
};

/// Backward through the active tape.
void backward(const Tensor& loss);

/// NaN/Inf checking on tensor construction and every op output. On by default.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// ---- op suite -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise sum. `b` may also be a row of length a.cols(), broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor one_minus(const Tensor& a);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor abs(const Tensor& x);

/// Concatenate along the last dimension (all parts share rows()).
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
/// Stack along the first dimension (all parts share cols()).
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Mean over rows: [r x c] -> [1 x c].
Tensor mean_rows(const Tensor& x);
/// Max over rows: [r x c] -> [1 x c]; gradient routes to the first maximiser.
Tensor max_rows(const Tensor& x);
/// Sum over the last dimension: [r x c] -> [r x 1].
Tensor sum_cols(const Tensor& x);

Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);
/// Per-row negative log-likelihood of `targets`: [b x n] -> [b x 1].
Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets);
/// Mean over the batch of cross_entropy_rows.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);
/// One element per row: out[r] = x[r, index[r]]; [b x n] -> [b x 1].
Tensor pick(const Tensor& x, std::span<const int> index);

/// Gathers rows of `table`; gradients scatter-add back into the table.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
/// Sliding windows of `width` consecutive rows, flattened:
/// [L x d] -> [(L - width + 1) x (width * d)].
Tensor unfold_rows(const Tensor& x, std::size_t width);
/// Row-wise select: out[r] = mask[r] ? a[r] : b[r].
Tensor select_rows(const std::vector<bool>& mask, const Tensor& a, const Tensor& b);

/// Value copy with no gradient path.
Tensor detach(const Tensor& x);

}  // namespace gef
