#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "safetext/tensor.hpp"

namespace safetext::ad {

using NodeId = std::int32_t;

// A named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

// Ordered, name-addressable parameter collection. Addresses are stable, so
// graphs may hold Parameter pointers across forward/backward.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& at(std::size_t i) { return *items_[i]; }
  const Parameter& at(std::size_t i) const { return *items_[i]; }
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::size_t size() const { return items_.size(); }
  void zero_grad();
  // FNV-1a over all parameter values, in collection order. Used by purity and
  // determinism checks.
  std::uint64_t value_fingerprint() const;

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reverse-mode tape. Nodes are appended in topological order by construction;
// backward() walks the tape once in reverse. Single-threaded per instance.
class Graph {
 public:
  // Constant leaf, never differentiated.
  NodeId input(Tensor v);
  // Differentiable leaf; its gradient is retained and queryable.
  NodeId input_grad(Tensor v);
  // Leaf over a parameter (no copy). One node per parameter per graph; the
  // accumulated gradient is flushed into p.grad at the end of backward().
  NodeId param(Parameter& p);

  const Tensor& val(NodeId id) const;
  bool wants_grad(NodeId id) const { return nodes_[id].requires_grad; }

  // Valid after backward(); throws if no gradient reached the node.
  const Tensor& grad(NodeId id) const;
  bool has_grad(NodeId id) const { return !nodes_[id].grad.empty(); }

  // Reverse sweep from a scalar loss node. May be called once per graph.
  void backward(NodeId loss);

  std::size_t node_count() const { return nodes_.size(); }

  // --- op-builder plumbing (used by the op free functions) ---
  NodeId make(Tensor value, std::vector<NodeId> parents,
              std::function<void(Graph&, NodeId)> backprop);
  // Zero-initialized gradient accumulator for a node (allocated on demand).
  Tensor& grad_buf(NodeId id);

 private:
  struct Node {
    Tensor value;                    // owned unless external
    const Tensor* external = nullptr;
    Tensor grad;
    Parameter* par = nullptr;
    std::vector<NodeId> parents;
    std::function<void(Graph&, NodeId)> backprop;
    bool requires_grad = false;
  };
  // deque: val()/grad() references stay valid while later nodes are appended
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
  bool ran_backward_ = false;
};

// ---- differentiable operations ----

NodeId add(Graph& g, NodeId a, NodeId b);
NodeId sub(Graph& g, NodeId a, NodeId b);
NodeId mul(Graph& g, NodeId a, NodeId b);  // elementwise
NodeId scale(Graph& g, NodeId a, double c);
// x viewed as rows of width bias.size(); bias broadcast over rows
NodeId add_bias(Graph& g, NodeId x, NodeId bias);
NodeId matmul(Graph& g, NodeId a, NodeId b);  // {m,k} x {k,n}
NodeId sigmoid(Graph& g, NodeId x);
NodeId tanh_op(Graph& g, NodeId x);
NodeId sum(Graph& g, NodeId x);
NodeId mean(Graph& g, NodeId x);
NodeId select(Graph& g, NodeId x, std::size_t flat_index);  // scalar pick
NodeId softmax_rows(Graph& g, NodeId x);
// mean negative log-likelihood over rows, fused for stability
NodeId softmax_xent(Graph& g, NodeId logits, std::vector<std::int32_t> labels);
// mean elementwise binary cross-entropy on logits, fused for stability
NodeId sigmoid_bce(Graph& g, NodeId logits, Tensor targets);
NodeId concat_cols(Graph& g, const std::vector<NodeId>& parts);
NodeId reshape(Graph& g, NodeId x, std::vector<std::size_t> shape);
// table {V,D} gathered by ids (length b*t) -> {b,t,D}
NodeId embedding_lookup(Graph& g, NodeId table,
                        std::shared_ptr<const std::vector<std::int32_t>> ids,
                        std::size_t b, std::size_t t);

// x {m,k} * W {k,n} + bias {n}
inline NodeId affine(Graph& g, NodeId x, NodeId w, NodeId b) {
  return add_bias(g, matmul(g, x, w), b);
}

double sigmoid_scalar(double x);

}  // namespace safetext::ad
