#include "bandit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bandit/errors.hpp"

namespace bandit {

double logsumexp(std::span<const double> x, double sign) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, sign * v);
  double s = 0.0;
  for (double v : x) s += std::exp(sign * v - hi);
  return hi + std::log(s);
}

void softmax_into(std::span<const double> x, double sign, std::span<double> out) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, sign * v);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(sign * x[i] - hi);
    s += out[i];
  }
  const double inv = 1.0 / s;
  for (auto& v : out) v *= inv;
}

std::vector<double> softmax_values(std::span<const double> logits, bool negated) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  std::vector<double> out(logits.size());
  softmax_into(logits, negated ? -1.0 : 1.0, out);
  return out;
}

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank)
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + to_string(t.shape()));
}

}  // namespace

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::val(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::value(Var v) const {
  if (v.id >= nodes_.size()) throw IndexError("graph node out of range");
  return val(v.id);
}

bool Graph::needs(std::initializer_list<Var> vs) const {
  for (Var v : vs)
    if (nodes_[v.id].needs_grad) return true;
  return false;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::parameter(const ParamSet& params, std::size_t slot) {
  if (bound_ && bound_ != &params)
    throw ContractError("graph parameters must come from a single parameter set");
  if (slot >= params.size()) throw IndexError("parameter slot out of range");
  bound_ = &params;
  Node n;
  n.op = Op::Parameter;
  n.external = &params[slot];
  n.index = slot;
  n.needs_grad = true;
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  require_rank(x, 2, "matmul");
  require_rank(y, 2, "matmul");
  if (x.dim(1) != y.dim(0))
    throw ShapeError("matmul: shape mismatch " + to_string(x.shape()) + " x " +
                     to_string(y.shape()));
  const std::size_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      const double* yr = y.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += xv * yr[j];
    }
  Node node;
  node.op = Op::MatMul;
  node.inputs = {a.id, b.id};
  node.value = std::move(out);
  node.needs_grad = needs({a, b});
  return push(std::move(node));
}

Var Graph::matvec(Var matrix, Var x) {
  const Tensor& w = val(matrix.id);
  const Tensor& v = val(x.id);
  require_rank(w, 2, "matvec");
  require_rank(v, 1, "matvec");
  if (w.dim(1) != v.dim(0))
    throw ShapeError("matvec: shape mismatch " + to_string(w.shape()) + " x " +
                     to_string(v.shape()));
  const std::size_t m = w.dim(0), k = w.dim(1);
  Tensor out({m});
  const double* vd = v.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* wr = w.data() + i * k;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += wr[j] * vd[j];
    out[i] = s;
  }
  Node node;
  node.op = Op::MatVec;
  node.inputs = {matrix.id, x.id};
  node.value = std::move(out);
  node.needs_grad = needs({matrix, x});
  return push(std::move(node));
}

Var Graph::vecmat(Var x, Var matrix) {
  const Tensor& v = val(x.id);
  const Tensor& w = val(matrix.id);
  require_rank(w, 2, "vecmat");
  require_rank(v, 1, "vecmat");
  if (w.dim(0) != v.dim(0))
    throw ShapeError("vecmat: shape mismatch " + to_string(v.shape()) + " x " +
                     to_string(w.shape()));
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor out({n});
  for (std::size_t i = 0; i < m; ++i) {
    const double xv = v[i];
    const double* wr = w.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += xv * wr[j];
  }
  Node node;
  node.op = Op::VecMat;
  node.inputs = {x.id, matrix.id};
  node.value = std::move(out);
  node.needs_grad = needs({x, matrix});
  return push(std::move(node));
}

Var Graph::binary(Op op, Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  const char* name = op == Op::Add ? "add" : op == Op::Sub ? "sub" : "mul";
  const bool same = x.shape() == y.shape();
  if (!same && x.size() != 1 && y.size() != 1)
    throw ShapeError(std::string(name) + ": shape mismatch " + to_string(x.shape()) + " vs " +
                     to_string(y.shape()));
  const Tensor& big = (same || y.size() == 1) ? x : y;
  Tensor out(big.shape());
  const std::size_t n = out.size();
  const std::size_t sx = x.size() == 1 && n != 1 ? 0 : 1;
  const std::size_t sy = y.size() == 1 && n != 1 ? 0 : 1;
  const double* xd = x.data();
  const double* yd = y.data();
  double* od = out.data();
  switch (op) {
    case Op::Add:
      for (std::size_t i = 0; i < n; ++i) od[i] = xd[i * sx] + yd[i * sy];
      break;
    case Op::Sub:
      for (std::size_t i = 0; i < n; ++i) od[i] = xd[i * sx] - yd[i * sy];
      break;
    default:
      for (std::size_t i = 0; i < n; ++i) od[i] = xd[i * sx] * yd[i * sy];
      break;
  }
  Node node;
  node.op = op;
  node.inputs = {a.id, b.id};
  node.value = std::move(out);
  node.needs_grad = needs({a, b});
  return push(std::move(node));
}

Var Graph::add(Var a, Var b) { return binary(Op::Add, a, b); }
Var Graph::sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var Graph::mul(Var a, Var b) { return binary(Op::Mul, a, b); }

Var Graph::unary(Op op, Var a, Tensor value) {
  Node node;
  node.op = op;
  node.inputs = {a.id};
  node.value = std::move(value);
  node.needs_grad = needs({a});
  return push(std::move(node));
}

Var Graph::neg(Var a) {
  Tensor out = val(a.id);
  out.scale(-1.0);
  return unary(Op::Neg, a, std::move(out));
}

Var Graph::scale(Var a, double factor) {
  Tensor out = val(a.id);
  out.scale(factor);
  Var v = unary(Op::Scale, a, std::move(out));
  nodes_[v.id].arg = factor;
  return v;
}

Var Graph::tanh(Var a) {
  Tensor out = val(a.id);
  for (auto& v : out.values()) v = std::tanh(v);
  return unary(Op::Tanh, a, std::move(out));
}

Var Graph::sigmoid(Var a) {
  Tensor out = val(a.id);
  for (auto& v : out.values())
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return unary(Op::Sigmoid, a, std::move(out));
}

Var Graph::exp(Var a) {
  Tensor out = val(a.id);
  for (auto& v : out.values()) v = std::exp(v);
  return unary(Op::Exp, a, std::move(out));
}

Var Graph::log(Var a) {
  Tensor out = val(a.id);
  for (auto& v : out.values()) {
    if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
    v = std::log(v);
  }
  return unary(Op::Log, a, std::move(out));
}

Var Graph::sum(Var a) {
  double s = 0.0;
  for (double v : val(a.id).values()) s += v;
  return unary(Op::Sum, a, Tensor::scalar(s));
}

Var Graph::dot(Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  require_same_shape(x, y, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  Node node;
  node.op = Op::Dot;
  node.inputs = {a.id, b.id};
  node.value = Tensor::scalar(s);
  node.needs_grad = needs({a, b});
  return push(std::move(node));
}

Var Graph::softmax(Var logits) {
  const Tensor& x = val(logits.id);
  require_rank(x, 1, "softmax");
  Tensor out(x.shape());
  softmax_into(x.values(), 1.0, out.values());
  return unary(Op::Softmax, logits, std::move(out));
}

Var Graph::log_softmax_at(Var logits, std::size_t k, bool negated) {
  const Tensor& x = val(logits.id);
  require_rank(x, 1, "log_softmax_at");
  if (k >= x.size())
    throw IndexError("log_softmax_at: index " + std::to_string(k) + " out of range for " +
                     std::to_string(x.size()) + " logits");
  const double sign = negated ? -1.0 : 1.0;
  const double lp = sign * x[k] - logsumexp(x.values(), sign);
  Var v = unary(Op::LogSoftmaxAt, logits, Tensor::scalar(lp));
  nodes_[v.id].index = k;
  nodes_[v.id].flag = negated;
  return v;
}

Var Graph::embedding(Var table, std::size_t row) {
  const Tensor& t = val(table.id);
  require_rank(t, 2, "embedding");
  if (row >= t.dim(0))
    throw IndexError("embedding: row " + std::to_string(row) + " out of range for table " +
                     to_string(t.shape()));
  auto r = t.row(row);
  Var v = unary(Op::Embedding, table, Tensor::vector({r.begin(), r.end()}));
  nodes_[v.id].index = row;
  return v;
}

Var Graph::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t n = val(rows[0].id).size();
  Tensor out({rows.size(), n});
  Node node;
  node.op = Op::StackRows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& r = val(rows[i].id);
    require_rank(r, 1, "stack_rows");
    if (r.size() != n) throw ShapeError("stack_rows: rows of different length");
    std::copy(r.data(), r.data() + n, out.data() + i * n);
    node.inputs.push_back(rows[i].id);
    node.needs_grad = node.needs_grad || nodes_[rows[i].id].needs_grad;
  }
  node.value = std::move(out);
  return push(std::move(node));
}

Var Graph::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  std::vector<double> out;
  Node node;
  node.op = Op::Concat;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    require_rank(t, 1, "concat");
    out.insert(out.end(), t.data(), t.data() + t.size());
    node.inputs.push_back(p.id);
    node.needs_grad = node.needs_grad || nodes_[p.id].needs_grad;
  }
  node.value = Tensor::vector(std::move(out));
  return push(std::move(node));
}

Var Graph::additive_energy(Var query, Var keys, Var v) {
  const Tensor& q = val(query.id);
  const Tensor& k = val(keys.id);
  const Tensor& w = val(v.id);
  require_rank(q, 1, "additive_energy");
  require_rank(k, 2, "additive_energy");
  require_rank(w, 1, "additive_energy");
  const std::size_t h = q.size();
  if (k.dim(1) != h || w.size() != h)
    throw ShapeError("additive_energy: shape mismatch query " + to_string(q.shape()) +
                     ", keys " + to_string(k.shape()) + ", v " + to_string(w.shape()));
  const std::size_t t = k.dim(0);
  Tensor out({t});
  for (std::size_t r = 0; r < t; ++r) {
    const double* kr = k.data() + r * h;
    double s = 0.0;
    for (std::size_t j = 0; j < h; ++j) s += w[j] * std::tanh(q[j] + kr[j]);
    out[r] = s;
  }
  Node node;
  node.op = Op::AdditiveEnergy;
  node.inputs = {query.id, keys.id, v.id};
  node.value = std::move(out);
  node.needs_grad = needs({query, keys, v});
  return push(std::move(node));
}

GradientMap Graph::gradients(Var root, const ParamSet& params) const {
  GradientMap grads = params.zeros_like();
  backward(root, grads);
  return grads;
}

void Graph::backward(Var root, GradientMap& grads) const {
  if (root.id >= nodes_.size()) throw IndexError("backward: root out of range");
  if (val(root.id).size() != 1)
    throw ContractError("backward requires a scalar root, got shape " +
                        to_string(val(root.id).shape()));
  std::vector<Tensor> g(root.id + 1);
  g[root.id] = Tensor::scalar(1.0);

  auto acc = [&](std::uint32_t id) -> Tensor* {
    if (!nodes_[id].needs_grad) return nullptr;
    if (g[id].empty()) g[id] = Tensor(val(id).shape());
    return &g[id];
  };

  for (std::int64_t idx = root.id; idx >= 0; --idx) {
    const auto id = static_cast<std::uint32_t>(idx);
    const Node& n = nodes_[id];
    if (g[id].empty() || !n.needs_grad) continue;
    const Tensor& gy = g[id];
    const Tensor& y = val(id);
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Parameter: {
        if (n.index >= grads.size()) throw IndexError("backward: gradient map too small");
        grads[n.index].axpy(1.0, gy);
        break;
      }
      case Op::MatMul: {
        const Tensor& a = val(n.inputs[0]);
        const Tensor& b = val(n.inputs[1]);
        const std::size_t m = a.dim(0), k = a.dim(1), cols = b.dim(1);
        if (Tensor* ga = acc(n.inputs[0]))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < cols; ++j) s += gy[i * cols + j] * b[p * cols + j];
              (*ga)[i * k + p] += s;
            }
        if (Tensor* gb = acc(n.inputs[1]))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double av = a[i * k + p];
              for (std::size_t j = 0; j < cols; ++j) (*gb)[p * cols + j] += av * gy[i * cols + j];
            }
        break;
      }
      case Op::MatVec: {
        const Tensor& w = val(n.inputs[0]);
        const Tensor& x = val(n.inputs[1]);
        const std::size_t m = w.dim(0), k = w.dim(1);
        if (Tensor* gw = acc(n.inputs[0]))
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = gy[i];
            double* row = gw->data() + i * k;
            for (std::size_t j = 0; j < k; ++j) row[j] += gi * x[j];
          }
        if (Tensor* gx = acc(n.inputs[1]))
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = gy[i];
            const double* row = w.data() + i * k;
            double* gxd = gx->data();
            for (std::size_t j = 0; j < k; ++j) gxd[j] += gi * row[j];
          }
        break;
      }
      case Op::VecMat: {
        const Tensor& x = val(n.inputs[0]);
        const Tensor& w = val(n.inputs[1]);
        const std::size_t m = w.dim(0), cols = w.dim(1);
        if (Tensor* gx = acc(n.inputs[0]))
          for (std::size_t i = 0; i < m; ++i) {
            const double* row = w.data() + i * cols;
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += row[j] * gy[j];
            (*gx)[i] += s;
          }
        if (Tensor* gw = acc(n.inputs[1]))
          for (std::size_t i = 0; i < m; ++i) {
            const double xi = x[i];
            double* row = gw->data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) row[j] += xi * gy[j];
          }
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul: {
        const Tensor& a = val(n.inputs[0]);
        const Tensor& b = val(n.inputs[1]);
        const std::size_t size = y.size();
        const std::size_t sa = a.size() == 1 && size != 1 ? 0 : 1;
        const std::size_t sb = b.size() == 1 && size != 1 ? 0 : 1;
        const double sign_b = n.op == Op::Sub ? -1.0 : 1.0;
        if (Tensor* ga = acc(n.inputs[0]))
          for (std::size_t i = 0; i < size; ++i)
            (*ga)[i * sa] += n.op == Op::Mul ? gy[i] * b[i * sb] : gy[i];
        if (Tensor* gb = acc(n.inputs[1]))
          for (std::size_t i = 0; i < size; ++i)
            (*gb)[i * sb] += n.op == Op::Mul ? gy[i] * a[i * sa] : sign_b * gy[i];
        break;
      }
      case Op::Neg:
        if (Tensor* ga = acc(n.inputs[0])) ga->axpy(-1.0, gy);
        break;
      case Op::Scale:
        if (Tensor* ga = acc(n.inputs[0])) ga->axpy(n.arg, gy);
        break;
      case Op::Tanh:
        if (Tensor* ga = acc(n.inputs[0]))
          for (std::size_t i = 0; i < y.size(); ++i) (*ga)[i] += gy[i] * (1.0 - y[i] * y[i]);
        break;
      case Op::Sigmoid:
        if (Tensor* ga = acc(n.inputs[0]))
          for (std::size_t i = 0; i < y.size(); ++i) (*ga)[i] += gy[i] * y[i] * (1.0 - y[i]);
        break;
      case Op::Exp:
        if (Tensor* ga = acc(n.inputs[0]))
          for (std::size_t i = 0; i < y.size(); ++i) (*ga)[i] += gy[i] * y[i];
        break;
      case Op::Log:
        if (Tensor* ga = acc(n.inputs[0])) {
          const Tensor& a = val(n.inputs[0]);
          for (std::size_t i = 0; i < y.size(); ++i) (*ga)[i] += gy[i] / a[i];
        }
        break;
      case Op::Sum:
        if (Tensor* ga = acc(n.inputs[0]))
          for (auto& v : ga->values()) v += gy[0];
        break;
      case Op::Dot: {
        const Tensor& a = val(n.inputs[0]);
        const Tensor& b = val(n.inputs[1]);
        if (Tensor* ga = acc(n.inputs[0])) ga->axpy(gy[0], b);
        if (Tensor* gb = acc(n.inputs[1])) gb->axpy(gy[0], a);
        break;
      }
      case Op::Softmax:
        if (Tensor* ga = acc(n.inputs[0])) {
          double inner = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) inner += gy[i] * y[i];
          for (std::size_t i = 0; i < y.size(); ++i) (*ga)[i] += y[i] * (gy[i] - inner);
        }
        break;
      case Op::LogSoftmaxAt:
        if (Tensor* ga = acc(n.inputs[0])) {
          const Tensor& x = val(n.inputs[0]);
          const double sign = n.flag ? -1.0 : 1.0;
          std::vector<double> p(x.size());
          softmax_into(x.values(), sign, p);
          // d/dx_j [s x_k - lse(s x)] = s (delta_jk - p_j)
          for (std::size_t j = 0; j < x.size(); ++j)
            (*ga)[j] += gy[0] * sign * ((j == n.index ? 1.0 : 0.0) - p[j]);
        }
        break;
      case Op::Embedding:
        if (Tensor* ga = acc(n.inputs[0])) {
          auto row = ga->row(n.index);
          for (std::size_t j = 0; j < row.size(); ++j) row[j] += gy[j];
        }
        break;
      case Op::StackRows: {
        const std::size_t cols = y.dim(1);
        for (std::size_t r = 0; r < n.inputs.size(); ++r)
          if (Tensor* gr = acc(n.inputs[r]))
            for (std::size_t j = 0; j < cols; ++j) (*gr)[j] += gy[r * cols + j];
        break;
      }
      case Op::Concat: {
        std::size_t offset = 0;
        for (auto in : n.inputs) {
          const std::size_t len = val(in).size();
          if (Tensor* gp = acc(in))
            for (std::size_t j = 0; j < len; ++j) (*gp)[j] += gy[offset + j];
          offset += len;
        }
        break;
      }
      case Op::AdditiveEnergy: {
        const Tensor& q = val(n.inputs[0]);
        const Tensor& k = val(n.inputs[1]);
        const Tensor& w = val(n.inputs[2]);
        const std::size_t h = q.size(), t = k.dim(0);
        Tensor* gq = acc(n.inputs[0]);
        Tensor* gk = acc(n.inputs[1]);
        Tensor* gw = acc(n.inputs[2]);
        for (std::size_t r = 0; r < t; ++r) {
          const double ge = gy[r];
          const double* kr = k.data() + r * h;
          for (std::size_t j = 0; j < h; ++j) {
            const double u = std::tanh(q[j] + kr[j]);
            if (gw) (*gw)[j] += ge * u;
            const double gpre = ge * w[j] * (1.0 - u * u);
            if (gq) (*gq)[j] += gpre;
            if (gk) (*gk)[r * h + j] += gpre;
          }
        }
        break;
      }
    }
  }
}

}  // namespace bandit
