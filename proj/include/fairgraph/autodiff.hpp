#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairgraph/errors.hpp"
#include "fairgraph/matrix.hpp"

namespace fairgraph::ad {

// Named, trainable tensor. Owned by model code; tapes reference it by address,
// and gradient maps are keyed by that address.
struct Param {
  std::string name;
  Matrix value;
};

using GradMap = std::unordered_map<const Param*, Matrix>;

class Tape;

// Handle into the active tape. Cheap to copy; valid while the tape lives.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& val() const;
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }
};

// Recorded computation graph. Nodes are appended in evaluation order, so the
// list is already a topological order; backward walks it once in reverse.
class Tape {
 public:
  // backward_fn(tape, self): read grad_of(self), accumulate into inputs.
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(Matrix m) { return push(std::move(m), false, nullptr, {}, {}); }

  Value leaf(Param& p) { return push(p.value, true, &p, {}, {}); }

  // Frozen view of a parameter: participates in the forward pass only.
  Value frozen(const Param& p) { return push(p.value, false, nullptr, {}, {}); }

  const Matrix& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // Gradients of a scalar loss w.r.t. every trainable leaf that feeds it.
  // Fan-out accumulates additively; nodes outside the loss's ancestry are
  // never visited.
  GradMap backward(Value loss) {
    if (loss.tape != this) throw DimensionError("backward: value from another tape");
    const auto& ln = nodes_[static_cast<std::size_t>(loss.id)];
    if (ln.value.rows != 1 || ln.value.cols != 1)
      throw DimensionError("backward: loss must be scalar, got " + std::to_string(ln.value.rows) +
                           "x" + std::to_string(ln.value.cols));

    std::vector<char> reachable(nodes_.size(), 0);
    mark_ancestors(loss.id, reachable);

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto& n = nodes_[i];
      if (reachable[i] && n.needs_grad) n.grad = Matrix(n.value.rows, n.value.cols);
    }
    nodes_[static_cast<std::size_t>(loss.id)].grad.data[0] = 1.0;

    for (int i = loss.id; i >= 0; --i) {
      auto& n = nodes_[static_cast<std::size_t>(i)];
      if (!reachable[static_cast<std::size_t>(i)] || !n.needs_grad || !n.backward_fn) continue;
      n.backward_fn(*this, i);
    }

    GradMap out;
    for (auto& n : nodes_)
      if (n.param && n.grad.size() > 0) {
        auto [it, inserted] = out.try_emplace(n.param, n.grad);
        if (!inserted) {  // same Param bound to several leaves
          for (std::size_t k = 0; k < n.grad.size(); ++k) it->second.data[k] += n.grad.data[k];
        }
      }
    return out;
  }

  // Sign pattern of every relu input on this tape, in recording order.
  // Gradient checking uses it to detect kink crossings between probes.
  std::vector<std::uint8_t> relu_sign_pattern() const {
    std::vector<std::uint8_t> out;
    for (int id : relu_nodes_) {
      const int src = nodes_[static_cast<std::size_t>(id)].inputs[0];
      for (double v : nodes_[static_cast<std::size_t>(src)].value.data)
        out.push_back(v > 0.0 ? 1 : 0);
    }
    return out;
  }

  std::size_t size() const { return nodes_.size(); }

  // --- used by kernel implementations ---

  Value push(Matrix value, bool needs_grad, const Param* param, std::vector<int> inputs,
             BackwardFn backward_fn) {
    Node n;
    n.value = std::move(value);
    n.inputs = std::move(inputs);
    n.backward_fn = std::move(backward_fn);
    n.param = param;
    n.needs_grad = needs_grad;
    for (int in : n.inputs)
      if (nodes_[static_cast<std::size_t>(in)].needs_grad) n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<int>(nodes_.size()) - 1};
  }

  void accumulate(int id, const Matrix& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) return;
    for (std::size_t k = 0; k < g.size(); ++k) n.grad.data[k] += g.data[k];
  }

  bool input_needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  void note_relu(int id) { relu_nodes_.push_back(id); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> inputs;
    BackwardFn backward_fn;
    const Param* param = nullptr;
    bool needs_grad = false;
  };

  void mark_ancestors(int root, std::vector<char>& reachable) const {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      if (reachable[static_cast<std::size_t>(id)]) continue;
      reachable[static_cast<std::size_t>(id)] = 1;
      for (int in : nodes_[static_cast<std::size_t>(id)].inputs) stack.push_back(in);
    }
  }

  std::vector<Node> nodes_;
  std::vector<int> relu_nodes_;
};

inline const Matrix& Value::val() const { return tape->value_of(id); }

namespace detail {
inline void check_same_tape(Value a, Value b, const char* who) {
  if (a.tape != b.tape) throw DimensionError(std::string(who) + ": values from different tapes");
}
inline void check_same_shape(Value a, Value b, const char* who) {
  check_same_tape(a, b, who);
  if (!a.val().same_shape(b.val()))
    throw DimensionError(std::string(who) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels. Each registers its exact analytic adjoint on the tape.
// ---------------------------------------------------------------------------

inline Value matmul(Value a, Value b) {
  detail::check_same_tape(a, b, "matmul");
  Tape& t = *a.tape;
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
  Matrix y = matmul_plain(a.val(), b.val());
  const int ia = a.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& av = tp.value_of(ia);
    const Matrix& bv = tp.value_of(ib);
    if (tp.input_needs_grad(ia)) {  // dA = G * B^T
      Matrix da(av.rows, av.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (int k = 0; k < av.cols; ++k) da(i, k) += gij * bv(k, j);
        }
      tp.accumulate(ia, da);
    }
    if (tp.input_needs_grad(ib)) {  // dB = A^T * G
      Matrix db(bv.rows, bv.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int k = 0; k < av.cols; ++k) {
          const double aik = av(i, k);
          if (aik == 0.0) continue;
          for (int j = 0; j < g.cols; ++j) db(k, j) += aik * g(i, j);
        }
      tp.accumulate(ib, db);
    }
  });
}

// y = S * X with S a constant sparse matrix. The caller keeps S alive for the
// tape's lifetime. Adjoint is dX = S^T * G, read straight off the CSR.
inline Value spmm(const Csr& s, Value x) {
  Tape& t = *x.tape;
  if (s.cols != x.rows()) throw DimensionError("sparse_dense_matmul: dimension mismatch");
  Matrix y = s.multiply(x.val());
  const int ix = x.id;
  const Csr* sp = &s;
  return t.push(std::move(y), false, nullptr, {ix}, [ix, sp](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    tp.accumulate(ix, sp->multiply_transposed(tp.grad_of(self)));
  });
}

inline Value add(Value a, Value b) {
  detail::check_same_shape(a, b, "add");
  Tape& t = *a.tape;
  Matrix y = a.val();
  const Matrix& bv = b.val();
  for (std::size_t k = 0; k < y.size(); ++k) y.data[k] += bv.data[k];
  const int ia = a.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ia, ib}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad_of(self));
    tp.accumulate(ib, tp.grad_of(self));
  });
}

inline Value sub(Value a, Value b) {
  detail::check_same_shape(a, b, "sub");
  Tape& t = *a.tape;
  Matrix y = a.val();
  const Matrix& bv = b.val();
  for (std::size_t k = 0; k < y.size(); ++k) y.data[k] -= bv.data[k];
  const int ia = a.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ia, ib}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad_of(self));
    if (tp.input_needs_grad(ib)) {
      Matrix g = tp.grad_of(self);
      for (auto& v : g.data) v = -v;
      tp.accumulate(ib, g);
    }
  });
}

// Hadamard product.
inline Value mul(Value a, Value b) {
  detail::check_same_shape(a, b, "mul");
  Tape& t = *a.tape;
  Matrix y = a.val();
  const Matrix& bv = b.val();
  for (std::size_t k = 0; k < y.size(); ++k) y.data[k] *= bv.data[k];
  const int ia = a.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.input_needs_grad(ia)) {
      Matrix da = g;
      const Matrix& bv2 = tp.value_of(ib);
      for (std::size_t k = 0; k < da.size(); ++k) da.data[k] *= bv2.data[k];
      tp.accumulate(ia, da);
    }
    if (tp.input_needs_grad(ib)) {
      Matrix db = g;
      const Matrix& av2 = tp.value_of(ia);
      for (std::size_t k = 0; k < db.size(); ++k) db.data[k] *= av2.data[k];
      tp.accumulate(ib, db);
    }
  });
}

inline Value scale(Value x, double c) {
  Tape& t = *x.tape;
  Matrix y = x.val();
  for (auto& v : y.data) v *= c;
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix, c](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    for (auto& v : g.data) v *= c;
    tp.accumulate(ix, g);
  });
}

// y_ij = x_ij + b_j with b a 1 x d row.
inline Value add_bias(Value x, Value b) {
  detail::check_same_tape(x, b, "add_bias");
  if (b.rows() != 1 || b.cols() != x.cols()) throw DimensionError("add_bias: bias must be 1x" + std::to_string(x.cols()));
  Tape& t = *x.tape;
  Matrix y = x.val();
  const Matrix& bv = b.val();
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) y(i, j) += bv(0, j);
  const int ix = x.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ix, ib}, [ix, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(ix, g);
    if (tp.input_needs_grad(ib)) {
      Matrix db(1, g.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) db(0, j) += g(i, j);
      tp.accumulate(ib, db);
    }
  });
}

// Subgradient at exactly 0 is 0.
inline Value relu(Value x) {
  Tape& t = *x.tape;
  Matrix y = x.val();
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  const int ix = x.id;
  Value out = t.push(std::move(y), false, nullptr, {ix}, [ix](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    const Matrix& xv = tp.value_of(ix);
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!(xv.data[k] > 0.0)) g.data[k] = 0.0;
    tp.accumulate(ix, g);
  });
  t.note_relu(out.id);
  return out;
}

// Rows scaled to unit L2 norm; the norm is clamped below at eps, and in the
// clamped regime the map is linear (the clamp constant has zero derivative).
inline Value l2_normalize_rows(Value x, double eps = 1e-12) {
  if (eps <= 0.0) throw DimensionError("l2_normalize_rows: eps must be positive");
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  Matrix y(xv.rows, xv.cols);
  std::vector<double> norms(static_cast<std::size_t>(xv.rows));
  for (int i = 0; i < xv.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < xv.cols; ++j) s += xv(i, j) * xv(i, j);
    const double r = std::max(std::sqrt(s), eps);
    norms[static_cast<std::size_t>(i)] = r;
    for (int j = 0; j < xv.cols; ++j) y(i, j) = xv(i, j) / r;
  }
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix},
                [ix, eps, norms = std::move(norms)](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    const Matrix& xv2 = tp.value_of(ix);
    Matrix dx(xv2.rows, xv2.cols);
    for (int i = 0; i < xv2.rows; ++i) {
      const double r = norms[static_cast<std::size_t>(i)];
      double xg = 0.0;
      for (int j = 0; j < xv2.cols; ++j) xg += xv2(i, j) * g(i, j);
      const bool clamped = r <= eps;
      for (int j = 0; j < xv2.cols; ++j) {
        // quotient rule: d(x/r)/dx = I/r - x x^T / r^3; clamped rows are x/eps
        dx(i, j) = clamped ? g(i, j) / eps : g(i, j) / r - xv2(i, j) * xg / (r * r * r);
      }
    }
    tp.accumulate(ix, dx);
  });
}

// Subtract each column's mean over rows. Linear, self-adjoint.
inline Value center_columns(Value x) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  Matrix y(xv.rows, xv.cols);
  for (int j = 0; j < xv.cols; ++j) {
    double m = 0.0;
    for (int i = 0; i < xv.rows; ++i) m += xv(i, j);
    m /= xv.rows;
    for (int i = 0; i < xv.rows; ++i) y(i, j) = xv(i, j) - m;
  }
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    Matrix dx(g.rows, g.cols);
    for (int j = 0; j < g.cols; ++j) {
      double m = 0.0;
      for (int i = 0; i < g.rows; ++i) m += g(i, j);
      m /= g.rows;
      for (int i = 0; i < g.rows; ++i) dx(i, j) = g(i, j) - m;
    }
    tp.accumulate(ix, dx);
  });
}

// y = target * x / max(||x||_F, eps).
inline Value frobenius_rescale(Value x, double target, double eps = 1e-12) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  const double r = std::max(xv.frobenius_norm(), eps);
  Matrix y = xv;
  for (auto& v : y.data) v = v * target / r;
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix, target, eps, r](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    const Matrix& xv2 = tp.value_of(ix);
    Matrix dx(g.rows, g.cols);
    if (r <= eps) {
      for (std::size_t k = 0; k < g.size(); ++k) dx.data[k] = g.data[k] * target / eps;
    } else {
      double xg = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) xg += xv2.data[k] * g.data[k];
      for (std::size_t k = 0; k < g.size(); ++k)
        dx.data[k] = target * (g.data[k] / r - xv2.data[k] * xg / (r * r * r));
    }
    tp.accumulate(ix, dx);
  });
}

// y[i, :] = x[ids[i], :]. Duplicate ids accumulate in the adjoint.
inline Value row_gather(Value x, std::vector<int> ids) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  for (int id : ids)
    if (id < 0 || id >= xv.rows) throw DimensionError("row_gather: id out of range");
  Matrix y(static_cast<int>(ids.size()), xv.cols);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < xv.cols; ++j) y(static_cast<int>(i), j) = xv(ids[i], j);
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix},
                [ix, ids = std::move(ids)](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    const Matrix& xv2 = tp.value_of(ix);
    Matrix dx(xv2.rows, xv2.cols);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < g.cols; ++j) dx(ids[i], j) += g(static_cast<int>(i), j);
    tp.accumulate(ix, dx);
  });
}

// y_i = x[i, ids[i]] as an n x 1 column (label pick for cross-entropy).
inline Value select_per_row(Value x, std::vector<int> ids) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  if (static_cast<int>(ids.size()) != xv.rows)
    throw DimensionError("select_per_row: ids length must equal row count");
  for (int id : ids)
    if (id < 0 || id >= xv.cols) throw DimensionError("select_per_row: column id out of range");
  Matrix y(xv.rows, 1);
  for (int i = 0; i < xv.rows; ++i) y(i, 0) = xv(i, ids[static_cast<std::size_t>(i)]);
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix},
                [ix, ids = std::move(ids)](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    const Matrix& xv2 = tp.value_of(ix);
    Matrix dx(xv2.rows, xv2.cols);
    for (int i = 0; i < xv2.rows; ++i) dx(i, ids[static_cast<std::size_t>(i)]) = g(i, 0);
    tp.accumulate(ix, dx);
  });
}

inline Value concat_cols(const std::vector<Value>& xs) {
  if (xs.empty()) throw DimensionError("concat_cols: empty input list");
  Tape& t = *xs[0].tape;
  const int rows = xs[0].rows();
  int total = 0;
  std::vector<int> inputs;
  std::vector<int> widths;
  for (const Value& v : xs) {
    detail::check_same_tape(xs[0], v, "concat_cols");
    if (v.rows() != rows) throw DimensionError("concat_cols: row count mismatch");
    inputs.push_back(v.id);
    widths.push_back(v.cols());
    total += v.cols();
  }
  Matrix y(rows, total);
  int off = 0;
  for (const Value& v : xs) {
    const Matrix& m = v.val();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < m.cols; ++j) y(i, off + j) = m(i, j);
    off += m.cols;
  }
  return t.push(std::move(y), false, nullptr, inputs,
                [inputs, widths](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    int off2 = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (tp.input_needs_grad(inputs[k])) {
        Matrix dk(g.rows, widths[k]);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < widths[k]; ++j) dk(i, j) = g(i, off2 + j);
        tp.accumulate(inputs[k], dk);
      }
      off2 += widths[k];
    }
  });
}

// Row-wise log(sum(exp)), stabilized by max subtraction.
inline Value log_sum_exp_rows(Value x) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  Matrix y(xv.rows, 1);
  for (int i = 0; i < xv.rows; ++i) {
    double mx = xv(i, 0);
    for (int j = 1; j < xv.cols; ++j) mx = std::max(mx, xv(i, j));
    double s = 0.0;
    for (int j = 0; j < xv.cols; ++j) s += std::exp(xv(i, j) - mx);
    y(i, 0) = mx + std::log(s);
  }
  const int ix = x.id;
  Matrix ycopy = y;
  return t.push(std::move(y), false, nullptr, {ix},
                [ix, ycopy = std::move(ycopy)](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const Matrix& g = tp.grad_of(self);
    const Matrix& xv2 = tp.value_of(ix);
    Matrix dx(xv2.rows, xv2.cols);
    for (int i = 0; i < xv2.rows; ++i)
      for (int j = 0; j < xv2.cols; ++j)
        dx(i, j) = g(i, 0) * std::exp(xv2(i, j) - ycopy(i, 0));  // softmax row
    tp.accumulate(ix, dx);
  });
}

inline Value sum(Value x) {
  Tape& t = *x.tape;
  double s = 0.0;
  for (double v : x.val().data) s += v;
  const int ix = x.id;
  return t.push(Matrix::scalar(s), false, nullptr, {ix}, [ix](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const double g = tp.grad_of(self).data[0];
    const Matrix& xv = tp.value_of(ix);
    tp.accumulate(ix, Matrix::full(xv.rows, xv.cols, g));
  });
}

inline Value mean(Value x) {
  Tape& t = *x.tape;
  const Matrix& xv = x.val();
  const double n = static_cast<double>(xv.size());
  double s = 0.0;
  for (double v : xv.data) s += v;
  const int ix = x.id;
  return t.push(Matrix::scalar(s / n), false, nullptr, {ix}, [ix, n](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    const double g = tp.grad_of(self).data[0] / n;
    const Matrix& xv2 = tp.value_of(ix);
    tp.accumulate(ix, Matrix::full(xv2.rows, xv2.cols, g));
  });
}

inline Value square(Value x) {
  Tape& t = *x.tape;
  Matrix y = x.val();
  for (auto& v : y.data) v *= v;
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    const Matrix& xv = tp.value_of(ix);
    for (std::size_t k = 0; k < g.size(); ++k) g.data[k] *= 2.0 * xv.data[k];
    tp.accumulate(ix, g);
  });
}

inline Value exp_elem(Value x) {
  Tape& t = *x.tape;
  Matrix y = x.val();
  for (auto& v : y.data) v = std::exp(v);
  Matrix ycopy = y;
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix},
                [ix, ycopy = std::move(ycopy)](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    for (std::size_t k = 0; k < g.size(); ++k) g.data[k] *= ycopy.data[k];
    tp.accumulate(ix, g);
  });
}

inline Value log_elem(Value x) {
  Tape& t = *x.tape;
  Matrix y = x.val();
  for (auto& v : y.data) {
    if (v <= 0.0) throw DimensionError("log: nonpositive input");
    v = std::log(v);
  }
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    const Matrix& xv = tp.value_of(ix);
    for (std::size_t k = 0; k < g.size(); ++k) g.data[k] /= xv.data[k];
    tp.accumulate(ix, g);
  });
}

// y_i = <a_i, b_i> as an n x 1 column.
inline Value dot_rows(Value a, Value b) {
  detail::check_same_shape(a, b, "dot_rows");
  Tape& t = *a.tape;
  const Matrix& av = a.val();
  const Matrix& bv = b.val();
  Matrix y(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += av(i, j) * bv(i, j);
    y(i, 0) = s;
  }
  const int ia = a.id, ib = b.id;
  return t.push(std::move(y), false, nullptr, {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& av2 = tp.value_of(ia);
    const Matrix& bv2 = tp.value_of(ib);
    if (tp.input_needs_grad(ia)) {
      Matrix da(av2.rows, av2.cols);
      for (int i = 0; i < av2.rows; ++i)
        for (int j = 0; j < av2.cols; ++j) da(i, j) = g(i, 0) * bv2(i, j);
      tp.accumulate(ia, da);
    }
    if (tp.input_needs_grad(ib)) {
      Matrix db(bv2.rows, bv2.cols);
      for (int i = 0; i < bv2.rows; ++i)
        for (int j = 0; j < bv2.cols; ++j) db(i, j) = g(i, 0) * av2(i, j);
      tp.accumulate(ib, db);
    }
  });
}

// Gradient reversal: forward is the identity, backward multiplies the
// incoming adjoint by -alpha.
inline Value grl(Value x, double alpha) {
  if (alpha < 0.0) throw DimensionError("grl: alpha must be nonnegative");
  Tape& t = *x.tape;
  Matrix y = x.val();
  const int ix = x.id;
  return t.push(std::move(y), false, nullptr, {ix}, [ix, alpha](Tape& tp, int self) {
    if (!tp.input_needs_grad(ix)) return;
    Matrix g = tp.grad_of(self);
    for (auto& v : g.data) v *= -alpha;
    tp.accumulate(ix, g);
  });
}

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(double c, Value x) { return scale(x, c); }

}  // namespace fairgraph::ad
