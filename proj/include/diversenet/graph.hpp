#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "diversenet/tensor.hpp"

namespace diversenet {

enum class Act { relu, tanh, sigmoid, identity };

const char* act_name(Act a);
Act act_from_name(const std::string& name);

using NodeId = std::uint32_t;

// Reverse-mode tape over dense tensors. Values are computed eagerly as nodes
// are recorded; creation order is a topological order, so backward() is a
// single reverse sweep that visits each reached node exactly once.
class Graph {
 public:
  // Leaf holding a value. Gradients are available for every node after
  // backward(), so parameters and inputs are both plain leaves.
  NodeId leaf(Tensor value);

  // [m x n] * [n x p] -> [m x p]
  NodeId matmul(NodeId a, NodeId b);

  // [m x n] + [n], bias broadcast over rows.
  NodeId add_bias(NodeId a, NodeId bias);

  // Elementwise nonlinearity; d(relu)/dx at 0 is taken as 0.
  NodeId activation(NodeId a, Act kind);

  // Feature-axis concatenation of [m x n1] and [m x n2].
  NodeId concat_features(NodeId a, NodeId b);

  // Mean over elements of (a - target)^2; scalar output.
  NodeId sq_error(NodeId a, const Tensor& target);

  // Hard min/max over scalar nodes; ties resolve to the lowest index.
  // Backward routes the incoming gradient to the selected input only.
  std::pair<NodeId, std::size_t> select_min(std::span<const NodeId> losses);
  std::pair<NodeId, std::size_t> select_max(std::span<const NodeId> losses);

  // Sum of scalar nodes.
  NodeId sum(std::span<const NodeId> scalars);

  // Elementwise sum of two same-shape nodes.
  NodeId add(NodeId a, NodeId b);

  // Scale by a constant.
  NodeId scale(NodeId a, double factor);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }

  // Gradient of the last backward() root w.r.t. this node. Nodes the sweep
  // never reached report a zero tensor.
  const Tensor& grad(NodeId id);

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse creation order.
  // root must be a scalar node.
  void backward(NodeId root);

  std::size_t n_nodes() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op {
    leaf,
    matmul,
    add_bias,
    activation,
    concat,
    sq_error,
    select_min,
    select_max,
    sum,
    add,
    scale
  };

  struct Node {
    Op op;
    NodeId a = 0;
    NodeId b = 0;
    std::vector<NodeId> list;  // select_* / sum inputs
    Tensor value;
    Tensor saved;       // sq_error target
    std::size_t aux = 0;  // selected index, concat split column
    Act act = Act::identity;
    double factor = 1.0;
  };

  NodeId push(Node node);
  Tensor& grad_buf(NodeId id);
  void backprop_node(NodeId id);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// Matrix product helper shared by forward and backward passes.
// c[m x p] += a[m x n] * b[n x p] when a/b are read with the given strides.
void matmul_accumulate(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t n, std::size_t p);

}  // namespace diversenet
