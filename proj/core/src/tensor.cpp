#include "gef/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gef {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

thread_local Tape* g_active_tape = nullptr;

bool g_finite_checks = true;

using Node = detail::TensorNode;
using NodePtr = std::shared_ptr<Node>;

void check_finite(const Tensor& t, const char* op) {
  if (!g_finite_checks) return;
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

bool any_requires_grad(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

// Records `fn` when recording is active and an input needs gradients.
void link(const Tensor& out, std::initializer_list<const Tensor*> inputs, Tape::BackwardFn fn,
          const char* op) {
  check_finite(out, op);
  Tape* tape = Tape::active();
  if (tape == nullptr || !any_requires_grad(inputs)) return;
  tape->record(out, std::move(fn));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

Shape matrix_shape(std::size_t rows, std::size_t cols) { return Shape{rows, cols}; }

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

// ---- Tensor ----------------------------------------------------------------

Tensor make_tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t d : shape)
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_str(shape));
  if (shape_numel(shape) != values.size())
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  if (g_finite_checks)
    for (double v : values)
      if (!std::isfinite(v)) throw NumericError("non-finite value in tensor data");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_numel(shape);
  return make_tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return make_tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return make_tensor(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return make_tensor(Shape{}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const auto n = values.size();
  return make_tensor(Shape{1, n}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::numel() const { return node_ ? node_->value.size() : 0; }

std::size_t Tensor::cols() const {
  const auto& s = shape();
  return s.empty() ? 1 : s.back();
}

std::size_t Tensor::rows() const { return numel() / cols(); }

std::span<const double> Tensor::values() const {
  require_defined(*this, "values");
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  require_defined(*this, "mutable_values");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) throw IndexError("tensor index out of range");
  return node_->value[r * cols() + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return !node_ || node_->is_leaf; }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::vector<double> Tensor::grad() const {
  require_defined(*this, "grad");
  if (node_->grad.empty()) return std::vector<double>(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::clone() const {
  require_defined(*this, "clone");
  return make_tensor(node_->shape, node_->value, node_->requires_grad);
}

// ---- Tape --------------------------------------------------------------------

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const Tensor& output, BackwardFn fn) {
  output.node()->requires_grad = true;
  output.node()->is_leaf = false;
  records_.push_back(Record{output.shared(), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.numel() != 1)
    throw ContractError("backward requires a scalar loss, got " + shape_str(loss.shape()));
  Node* root = loss.node();
  const bool recorded = std::any_of(records_.begin(), records_.end(),
                                    [root](const Record& r) { return r.output.get() == root; });
  if (!recorded) {
    if (root->is_leaf && root->requires_grad) {
      root->accumulate(0, 1.0);
      return;
    }
    throw ContractError("backward: loss was not recorded on this tape");
  }
  for (auto& r : records_) {
    r.output->grad.clear();
    r.output->touched = false;
  }
  root->accumulate(0, 1.0);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (!it->output->touched) continue;
    it->fn(*it->output);
  }
}

NoGradGuard::NoGradGuard() : saved_(g_active_tape) { g_active_tape = nullptr; }
NoGradGuard::~NoGradGuard() { g_active_tape = saved_; }

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw ContractError("backward: no active tape");
  tape->backward(loss);
}

void set_finite_checks(bool enabled) { g_finite_checks = enabled; }
bool finite_checks_enabled() { return g_finite_checks; }

// ---- ops ---------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
    throw DimensionError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const auto m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  MatMap(out.data(), m, n).noalias() =
      ConstMatMap(a.values().data(), m, k) * ConstMatMap(b.values().data(), k, n);
  Tensor c = make_tensor(matrix_shape(m, n), std::move(out), false);
  NodePtr an = a.shared(), bn = b.shared();
  link(c, {&a, &b},
       [an, bn, m, k, n](Node& o) {
         ConstMatMap dc(o.grad.data(), m, n);
         if (an->requires_grad) {
           MatMap(an->grad_buffer().data(), m, k).noalias() +=
               dc * ConstMatMap(bn->value.data(), k, n).transpose();
         }
         if (bn->requires_grad) {
           MatMap(bn->grad_buffer().data(), k, n).noalias() +=
               ConstMatMap(an->value.data(), m, k).transpose() * dc;
         }
       },
       "matmul");
  return c;
}

namespace {

enum class Broadcast { kNone, kRow };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (b.numel() == a.cols() && b.rows() == 1) return Broadcast::kRow;
  throw DimensionError(std::string(op) + ": " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  const Broadcast kind = broadcast_kind(a, b, "add");
  const auto n = a.numel(), cols = a.cols();
  std::vector<double> out(n);
  const auto av = a.values(), bv = b.values();
  if (kind == Broadcast::kNone) {
    for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i % cols];
  }
  Tensor c = make_tensor(a.shape(), std::move(out), false);
  NodePtr an = a.shared(), bn = b.shared();
  link(c, {&a, &b},
       [an, bn, kind, n, cols](Node& o) {
         if (an->requires_grad) {
           auto& g = an->grad_buffer();
           for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i];
         }
         if (bn->requires_grad) {
           auto& g = bn->grad_buffer();
           if (kind == Broadcast::kNone) {
             for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i];
           } else {
             for (std::size_t i = 0; i < n; ++i) g[i % cols] += o.grad[i];
           }
         }
       },
       "add");
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_defined(a, "sub");
  require_defined(b, "sub");
  if (a.shape() != b.shape())
    throw DimensionError("sub: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const auto n = a.numel();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] - b.values()[i];
  Tensor c = make_tensor(a.shape(), std::move(out), false);
  NodePtr an = a.shared(), bn = b.shared();
  link(c, {&a, &b},
       [an, bn, n](Node& o) {
         if (an->requires_grad) {
           auto& g = an->grad_buffer();
           for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i];
         }
         if (bn->requires_grad) {
           auto& g = bn->grad_buffer();
           for (std::size_t i = 0; i < n; ++i) g[i] -= o.grad[i];
         }
       },
       "sub");
  return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  if (a.shape() != b.shape())
    throw DimensionError("mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const auto n = a.numel();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] * b.values()[i];
  Tensor c = make_tensor(a.shape(), std::move(out), false);
  NodePtr an = a.shared(), bn = b.shared();
  link(c, {&a, &b},
       [an, bn, n](Node& o) {
         if (an->requires_grad) {
           auto& g = an->grad_buffer();
           for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i] * bn->value[i];
         }
         if (bn->requires_grad) {
           auto& g = bn->grad_buffer();
           for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i] * an->value[i];
         }
       },
       "mul");
  return c;
}

namespace {

// Shared scaffolding for y = f(x) elementwise with dy/dx = df(x, y).
template <typename F, typename DF>
Tensor unary(const Tensor& x, F f, DF df, const char* op) {
  require_defined(x, op);
  const auto n = x.numel();
  std::vector<double> out(n);
  const auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = f(xv[i]);
  Tensor y = make_tensor(x.shape(), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, n, df](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i] * df(xn->value[i], o.value[i]);
       },
       op);
  return y;
}

}  // namespace

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; }, "scale");
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(
      a, [value](double x) { return x + value; }, [](double, double) { return 1.0; },
      "add_scalar");
}

Tensor one_minus(const Tensor& a) {
  return unary(
      a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; }, "one_minus");
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; },
      "tanh");
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; }, "relu");
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; }, "exp");
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }, "abs");
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat: no parts");
  const auto rows = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat");
    if (p.rows() != rows) throw DimensionError("concat: row count mismatch");
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::vector<NodePtr> nodes;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const auto c = p.cols();
    const auto v = p.values();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.begin() + r * c, c, out.begin() + r * total + off);
    nodes.push_back(p.shared());
    offsets.push_back(off);
    off += c;
  }
  Tensor y = make_tensor(matrix_shape(rows, total), std::move(out), false);
  check_finite(y, "concat");
  Tape* tape = Tape::active();
  const bool needs = std::any_of(parts.begin(), parts.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
  if (tape != nullptr && needs) {
    tape->record(y, [nodes, offsets, rows, total](Node& o) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto& n = *nodes[i];
        if (!n.requires_grad) continue;
        const auto c = n.shape.empty() ? 1 : n.shape.back();
        auto& g = n.grad_buffer();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < c; ++j) g[r * c + j] += o.grad[r * total + offsets[i] + j];
      }
    });
  }
  return y;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const auto cols = parts[0].cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != cols) throw DimensionError("concat_rows: column count mismatch");
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  std::vector<NodePtr> nodes;
  for (const auto& p : parts) {
    out.insert(out.end(), p.values().begin(), p.values().end());
    nodes.push_back(p.shared());
  }
  Tensor y = make_tensor(matrix_shape(rows, cols), std::move(out), false);
  check_finite(y, "concat_rows");
  Tape* tape = Tape::active();
  const bool needs = std::any_of(parts.begin(), parts.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
  if (tape != nullptr && needs) {
    tape->record(y, [nodes](Node& o) {
      std::size_t off = 0;
      for (const auto& np : nodes) {
        const auto n = np->value.size();
        if (np->requires_grad) {
          auto& g = np->grad_buffer();
          for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[off + i];
        }
        off += n;
      }
    });
  }
  return y;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_defined(x, "slice_cols");
  const auto rows = x.rows(), cols = x.cols();
  if (begin >= end || end > cols) throw IndexError("slice_cols: bad range");
  const auto w = end - begin;
  std::vector<double> out(rows * w);
  const auto v = x.values();
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(v.begin() + r * cols + begin, w, out.begin() + r * w);
  Tensor y = make_tensor(matrix_shape(rows, w), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, rows, cols, begin, w](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < rows; ++r)
           for (std::size_t j = 0; j < w; ++j) g[r * cols + begin + j] += o.grad[r * w + j];
       },
       "slice_cols");
  return y;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_defined(x, "slice_rows");
  const auto rows = x.rows(), cols = x.cols();
  if (begin >= end || end > rows) throw IndexError("slice_rows: bad range");
  std::vector<double> out(x.values().begin() + begin * cols, x.values().begin() + end * cols);
  Tensor y = make_tensor(matrix_shape(end - begin, cols), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, begin, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t i = 0; i < o.grad.size(); ++i) g[begin * cols + i] += o.grad[i];
       },
       "slice_rows");
  return y;
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tensor y = make_tensor(Shape{}, {s}, false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn](Node& o) {
         auto& g = xn->grad_buffer();
         for (auto& gi : g) gi += o.grad[0];
       },
       "sum");
  return y;
}

Tensor mean(const Tensor& x) {
  require_defined(x, "mean");
  const double n = static_cast<double>(x.numel());
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tensor y = make_tensor(Shape{}, {s / n}, false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, n](Node& o) {
         auto& g = xn->grad_buffer();
         for (auto& gi : g) gi += o.grad[0] / n;
       },
       "mean");
  return y;
}

Tensor mean_rows(const Tensor& x) {
  require_defined(x, "mean_rows");
  const auto rows = x.rows(), cols = x.cols();
  std::vector<double> out(cols, 0.0);
  const auto v = x.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += v[r * cols + c];
  for (auto& o : out) o /= static_cast<double>(rows);
  Tensor y = make_tensor(matrix_shape(1, cols), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, rows, cols](Node& o) {
         auto& g = xn->grad_buffer();
         const double inv = 1.0 / static_cast<double>(rows);
         for (std::size_t r = 0; r < rows; ++r)
           for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += o.grad[c] * inv;
       },
       "mean_rows");
  return y;
}

Tensor max_rows(const Tensor& x) {
  require_defined(x, "max_rows");
  const auto rows = x.rows(), cols = x.cols();
  const auto v = x.values();
  std::vector<double> out(cols);
  std::vector<std::size_t> arg(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    out[c] = v[c];
    for (std::size_t r = 1; r < rows; ++r) {
      if (v[r * cols + c] > out[c]) {
        out[c] = v[r * cols + c];
        arg[c] = r;
      }
    }
  }
  Tensor y = make_tensor(matrix_shape(1, cols), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, arg, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t c = 0; c < cols; ++c) g[arg[c] * cols + c] += o.grad[c];
       },
       "max_rows");
  return y;
}

Tensor sum_cols(const Tensor& x) {
  require_defined(x, "sum_cols");
  const auto rows = x.rows(), cols = x.cols();
  std::vector<double> out(rows, 0.0);
  const auto v = x.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r] += v[r * cols + c];
  Tensor y = make_tensor(matrix_shape(rows, 1), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, rows, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < rows; ++r)
           for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += o.grad[r];
       },
       "sum_cols");
  return y;
}

namespace {

// Row-wise max-subtracted softmax into `out`.
void softmax_rows(std::span<const double> in, std::size_t rows, std::size_t cols,
                  std::vector<double>& out) {
  out.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      z += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
  }
}

void check_targets(std::span<const int> targets, std::size_t rows, std::size_t cols,
                   const char* op) {
  if (targets.size() != rows)
    throw DimensionError(std::string(op) + ": " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(rows) + " rows");
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= cols)
      throw IndexError(std::string(op) + ": target " + std::to_string(t) + " out of range [0, " +
                       std::to_string(cols) + ")");
}

}  // namespace

Tensor softmax(const Tensor& x) {
  require_defined(x, "softmax");
  const auto rows = x.rows(), cols = x.cols();
  std::vector<double> out;
  softmax_rows(x.values(), rows, cols, out);
  Tensor y = make_tensor(x.shape(), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, rows, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < rows; ++r) {
           const double* yv = o.value.data() + r * cols;
           const double* gy = o.grad.data() + r * cols;
           double dot = 0.0;
           for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * yv[c];
           for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += yv[c] * (gy[c] - dot);
         }
       },
       "softmax");
  return y;
}

Tensor log_softmax(const Tensor& x) {
  require_defined(x, "log_softmax");
  const auto rows = x.rows(), cols = x.cols();
  const auto v = x.values();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = v.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(xr[c] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xr[c] - lz;
  }
  Tensor y = make_tensor(x.shape(), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, rows, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < rows; ++r) {
           double gs = 0.0;
           for (std::size_t c = 0; c < cols; ++c) gs += o.grad[r * cols + c];
           for (std::size_t c = 0; c < cols; ++c)
             g[r * cols + c] += o.grad[r * cols + c] - std::exp(o.value[r * cols + c]) * gs;
         }
       },
       "log_softmax");
  return y;
}

Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets) {
  require_defined(logits, "cross_entropy");
  const auto rows = logits.rows(), cols = logits.cols();
  check_targets(targets, rows, cols, "cross_entropy");
  std::vector<double> probs;
  softmax_rows(logits.values(), rows, cols, probs);
  std::vector<double> out(rows);
  const auto v = logits.values();
  for (std::size_t r = 0; r < rows; ++r) {
    // log-sum-exp form keeps saturated rows exact instead of log(1 - tiny)
    const double* xr = v.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(xr[c] - mx);
    out[r] = std::max(0.0, mx + std::log(z) - xr[targets[r]]);
  }
  Tensor y = make_tensor(matrix_shape(rows, 1), std::move(out), false);
  NodePtr xn = logits.shared();
  std::vector<int> tgt(targets.begin(), targets.end());
  link(y, {&logits},
       [xn, probs = std::move(probs), tgt = std::move(tgt), rows, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < rows; ++r) {
           const double gr = o.grad[r];
           for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += gr * probs[r * cols + c];
           g[r * cols + static_cast<std::size_t>(tgt[r])] -= gr;
         }
       },
       "cross_entropy");
  return y;
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  return mean(cross_entropy_rows(logits, targets));
}

Tensor pick(const Tensor& x, std::span<const int> index) {
  require_defined(x, "pick");
  const auto rows = x.rows(), cols = x.cols();
  check_targets(index, rows, cols, "pick");
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = x.values()[r * cols + index[r]];
  Tensor y = make_tensor(matrix_shape(rows, 1), std::move(out), false);
  NodePtr xn = x.shared();
  std::vector<int> idx(index.begin(), index.end());
  link(y, {&x},
       [xn, idx = std::move(idx), cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t r = 0; r < idx.size(); ++r)
           g[r * cols + static_cast<std::size_t>(idx[r])] += o.grad[r];
       },
       "pick");
  return y;
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  require_defined(table, "embedding_lookup");
  if (table.rank() != 2) throw DimensionError("embedding_lookup: table must be a matrix");
  if (ids.empty()) throw ContractError("embedding_lookup: empty id list");
  const auto vocab = table.rows(), dim = table.cols();
  std::vector<double> out(ids.size() * dim);
  const auto tv = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab)
      throw IndexError("embedding_lookup: id " + std::to_string(ids[i]) + " out of range");
    std::copy_n(tv.begin() + static_cast<std::size_t>(ids[i]) * dim, dim, out.begin() + i * dim);
  }
  Tensor y = make_tensor(matrix_shape(ids.size(), dim), std::move(out), false);
  NodePtr tn = table.shared();
  std::vector<int> idv(ids.begin(), ids.end());
  link(y, {&table},
       [tn, idv = std::move(idv), dim](Node& o) {
         auto& g = tn->grad_buffer();
         for (std::size_t i = 0; i < idv.size(); ++i) {
           const auto base = static_cast<std::size_t>(idv[i]) * dim;
           for (std::size_t j = 0; j < dim; ++j) g[base + j] += o.grad[i * dim + j];
         }
       },
       "embedding_lookup");
  return y;
}

Tensor unfold_rows(const Tensor& x, std::size_t width) {
  require_defined(x, "unfold_rows");
  const auto rows = x.rows(), cols = x.cols();
  if (width == 0 || width > rows)
    throw DimensionError("unfold_rows: window " + std::to_string(width) + " over " +
                         std::to_string(rows) + " rows");
  const auto windows = rows - width + 1, wcols = width * cols;
  std::vector<double> out(windows * wcols);
  const auto v = x.values();
  for (std::size_t w = 0; w < windows; ++w)
    std::copy_n(v.begin() + w * cols, wcols, out.begin() + w * wcols);
  Tensor y = make_tensor(matrix_shape(windows, wcols), std::move(out), false);
  NodePtr xn = x.shared();
  link(y, {&x},
       [xn, windows, wcols, cols](Node& o) {
         auto& g = xn->grad_buffer();
         for (std::size_t w = 0; w < windows; ++w)
           for (std::size_t j = 0; j < wcols; ++j) g[w * cols + j] += o.grad[w * wcols + j];
       },
       "unfold_rows");
  return y;
}

Tensor select_rows(const std::vector<bool>& mask, const Tensor& a, const Tensor& b) {
  require_defined(a, "select_rows");
  require_defined(b, "select_rows");
  if (a.shape() != b.shape()) throw DimensionError("select_rows: operand shapes differ");
  const auto rows = a.rows(), cols = a.cols();
  if (mask.size() != rows) throw DimensionError("select_rows: mask length mismatch");
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = mask[r] ? a.values() : b.values();
    std::copy_n(src.begin() + r * cols, cols, out.begin() + r * cols);
  }
  Tensor y = make_tensor(a.shape(), std::move(out), false);
  NodePtr an = a.shared(), bn = b.shared();
  link(y, {&a, &b},
       [an, bn, mask, rows, cols](Node& o) {
         for (std::size_t r = 0; r < rows; ++r) {
           Node& target = mask[r] ? *an : *bn;
           if (!target.requires_grad) continue;
           auto& g = target.grad_buffer();
           for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += o.grad[r * cols + c];
         }
       },
       "select_rows");
  return y;
}

Tensor detach(const Tensor& x) {
  require_defined(x, "detach");
  return make_tensor(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), false);
}

}  // namespace gef
