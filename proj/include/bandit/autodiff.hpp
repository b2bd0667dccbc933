#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bandit/param_set.hpp"
#include "bandit/tensor.hpp"

namespace bandit {

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = 0;
  friend bool operator==(Var, Var) = default;
};

/// log(sum(exp(sign * x))) computed with max-subtraction.
double logsumexp(std::span<const double> x, double sign = 1.0);
void softmax_into(std::span<const double> x, double sign, std::span<double> out);
/// softmax(x), or softmax(-x) when `negated`.
std::vector<double> softmax_values(std::span<const double> logits, bool negated = false);

/// Per-example reverse-mode tape. Nodes are appended in evaluation order, so
/// the node list is always topologically sorted. Parameter leaves reference
/// tensors owned elsewhere; they must outlive the graph and stay unchanged
/// until backward() has run.
class Graph {
 public:
  Graph() { nodes_.reserve(256); }
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var scalar(double value) { return constant(Tensor::scalar(value)); }
  /// Leaf bound to `params[slot]`; its gradient is reported under `slot`.
  Var parameter(const ParamSet& params, std::size_t slot);

  Var matmul(Var a, Var b);
  Var matvec(Var matrix, Var x);   // [m,k] x [k] -> [m]
  Var vecmat(Var x, Var matrix);   // [m] x [m,n] -> [n]

  // Binary ops require equal shapes, or one operand of size 1 (scalar).
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var log(Var a);

  Var sum(Var a);
  Var dot(Var a, Var b);
  Var softmax(Var logits);
  /// logits[k] - logsumexp(logits), or the same on -logits when `negated`.
  Var log_softmax_at(Var logits, std::size_t k, bool negated = false);
  Var embedding(Var table, std::size_t row);
  Var stack_rows(std::span<const Var> rows);
  Var concat(std::span<const Var> parts);
  /// e_t = v . tanh(query + keys[t]) for every row t of keys.
  Var additive_energy(Var query, Var keys, Var v);

  const Tensor& value(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Reverse pass from a scalar root; parameter gradients are added into
  /// `grads` (which must have the layout of the bound ParamSet).
  void backward(Var root, GradientMap& grads) const;
  /// Convenience: fresh gradient map shaped like `params`.
  GradientMap gradients(Var root, const ParamSet& params) const;

 private:
  enum class Op : std::uint8_t {
    Constant, Parameter, MatMul, MatVec, VecMat, Add, Sub, Mul, Neg, Scale, Tanh,
    Sigmoid, Exp, Log, Sum, Dot, Softmax, LogSoftmaxAt, Embedding, StackRows,
    Concat, AdditiveEnergy
  };

  struct Node {
    Op op = Op::Constant;
    std::vector<std::uint32_t> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    std::size_t index = 0;  // parameter slot, embedding row, softmax target
    double arg = 0.0;
    bool flag = false;
    bool needs_grad = false;
  };

  Var push(Node node);
  const Tensor& val(std::uint32_t id) const;
  bool needs(std::initializer_list<Var> vs) const;
  Var binary(Op op, Var a, Var b);
  Var unary(Op op, Var a, Tensor value);

  std::vector<Node> nodes_;
  const ParamSet* bound_ = nullptr;
};

}  // namespace bandit
