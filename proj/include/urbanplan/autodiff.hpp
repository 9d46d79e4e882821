#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "urbanplan/tensor.hpp"

namespace urban {

// Named trainable tensor. The gradient buffer always matches the value shape
// and is owned here; graphs accumulate into it on backward().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

  void reset_grad() { std::fill(grad.values().begin(), grad.values().end(), 0.0); }
};

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid as long as the graph lives.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
};

// Define-by-run reverse-mode tape over dense tensors. Nodes are created in
// topological order, so the backward sweep is a reverse iteration.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Constant leaf; no gradient flows into it.
  Var input(Tensor t);
  // Differentiable leaf bound to a parameter. Repeated binds of the same
  // parameter return the same node.
  Var param(Parameter& p);

  // Runs the backward sweep from a scalar loss and adds the resulting leaf
  // gradients into each bound Parameter::grad. One sweep per graph.
  void backward(Var loss);

  Var make(Tensor value, std::vector<std::uint32_t> parents,
           std::function<void(Graph&, std::uint32_t)> back, bool needs_grad);

  const Tensor& value_of(std::uint32_t id) const { return nodes_[id].value; }
  bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }
  // Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad_of(std::uint32_t id);
  bool has_grad(std::uint32_t id) const { return !nodes_[id].grad.empty(); }
  const std::vector<std::uint32_t>& parents_of(std::uint32_t id) const {
    return nodes_[id].parents;
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::uint32_t> parents;
    std::function<void(Graph&, std::uint32_t)> back;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, std::uint32_t>> bindings_;
  std::unordered_map<const Parameter*, std::uint32_t> bound_;
  bool swept_ = false;
};

// Elementwise and linear-algebra ops. All validate shapes and throw
// std::invalid_argument on mismatch.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
// s - a
Var rsub_scalar(double s, Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var exp_elem(Var a);
// Natural log; input must be strictly positive.
Var log_elem(Var a);
// Pass-through gradient inside [lo, hi], zero outside.
Var clamp(Var a, double lo, double hi);
// Clamps the value but always passes the gradient through, so saturated
// scores keep a recovery signal.
Var clamp_passthrough(Var a, double lo, double hi);
Var softmax_rows(Var a);
// Sum of all entries -> shape {1,1}.
Var sum_all(Var a);
// {R,C} -> {1,C} mean over rows.
Var mean_rows(Var a);
// a {R,C} + row {1,C} broadcast over rows.
Var add_rowvec(Var a, Var row);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t c0, std::size_t c1);
Var reshape(Var a, std::vector<std::size_t> shape);
// Vertically repeats a {R,C} block `times` times -> {R*times, C}.
Var tile_rows(Var a, std::size_t times);
// Numerically stable sum of elementwise binary cross-entropy between
// sigmoid(scores) and constant targets in [0,1]. Returns {1,1}.
Var bce_logits_sum(Var scores, const Tensor& targets);

}  // namespace urban
