#include "diversenet/graph.hpp"

#include <cmath>
#include <string>

#include "diversenet/errors.hpp"

namespace diversenet {

const char* act_name(Act a) {
  switch (a) {
    case Act::relu: return "relu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
    case Act::identity: return "identity";
  }
  return "identity";
}

Act act_from_name(const std::string& name) {
  if (name == "relu") return Act::relu;
  if (name == "tanh") return Act::tanh;
  if (name == "sigmoid") return Act::sigmoid;
  if (name == "identity") return Act::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

void matmul_accumulate(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    double* crow = c + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b + k * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += av * brow[j];
    }
  }
}

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(Tensor value) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.rows()) {
    throw DimensionError("matmul shape mismatch: " + ta.shape_str() + " * " + tb.shape_str());
  }
  std::size_t m = ta.rows(), k = ta.cols(), p = tb.cols();
  Node n;
  n.op = Op::matmul;
  n.a = a;
  n.b = b;
  n.value = Tensor({m, p});
  matmul_accumulate(ta.data(), tb.data(), n.value.data(), m, k, p);
  return push(std::move(n));
}

NodeId Graph::add_bias(NodeId a, NodeId bias) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[bias].value;
  if (ta.ndim() != 2 || tb.ndim() != 1 || ta.cols() != tb.extent(0)) {
    throw DimensionError("add_bias shape mismatch: " + ta.shape_str() + " + " + tb.shape_str());
  }
  Node n;
  n.op = Op::add_bias;
  n.a = a;
  n.b = bias;
  n.value = ta;
  std::size_t rows = ta.rows(), cols = ta.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = n.value.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += tb[c];
  }
  return push(std::move(n));
}

NodeId Graph::activation(NodeId a, Act kind) {
  Node n;
  n.op = Op::activation;
  n.a = a;
  n.act = kind;
  n.value = nodes_[a].value;
  for (double& v : n.value.values()) {
    switch (kind) {
      case Act::relu: v = v > 0.0 ? v : 0.0; break;
      case Act::tanh: v = std::tanh(v); break;
      case Act::sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
      case Act::identity: break;
    }
  }
  return push(std::move(n));
}

NodeId Graph::concat_features(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.ndim() != 2 || tb.ndim() != 2 || ta.rows() != tb.rows()) {
    throw DimensionError("concat_features shape mismatch: " + ta.shape_str() + " | " +
                         tb.shape_str());
  }
  std::size_t rows = ta.rows(), n1 = ta.cols(), n2 = tb.cols();
  Node n;
  n.op = Op::concat;
  n.a = a;
  n.b = b;
  n.aux = n1;
  n.value = Tensor({rows, n1 + n2});
  for (std::size_t r = 0; r < rows; ++r) {
    double* out = n.value.data() + r * (n1 + n2);
    const double* pa = ta.data() + r * n1;
    const double* pb = tb.data() + r * n2;
    for (std::size_t c = 0; c < n1; ++c) out[c] = pa[c];
    for (std::size_t c = 0; c < n2; ++c) out[n1 + c] = pb[c];
  }
  return push(std::move(n));
}

NodeId Graph::sq_error(NodeId a, const Tensor& target) {
  const Tensor& ta = nodes_[a].value;
  if (!ta.same_shape(target)) {
    throw DimensionError("sq_error shape mismatch: " + ta.shape_str() + " vs " +
                         target.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    double d = ta[i] - target[i];
    acc += d * d;
  }
  Node n;
  n.op = Op::sq_error;
  n.a = a;
  n.saved = target;
  n.value = Tensor::scalar(acc / static_cast<double>(ta.size()));
  return push(std::move(n));
}

std::pair<NodeId, std::size_t> Graph::select_min(std::span<const NodeId> losses) {
  if (losses.empty()) throw ArgumentError("select_min over an empty list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (nodes_[losses[i]].value.size() != 1) {
      throw DimensionError("select_min input " + std::to_string(i) + " is not scalar");
    }
    if (nodes_[losses[i]].value.item() < nodes_[losses[best]].value.item()) best = i;
  }
  Node n;
  n.op = Op::select_min;
  n.list.assign(losses.begin(), losses.end());
  n.aux = best;
  n.value = nodes_[losses[best]].value;
  return {push(std::move(n)), best};
}

std::pair<NodeId, std::size_t> Graph::select_max(std::span<const NodeId> losses) {
  if (losses.empty()) throw ArgumentError("select_max over an empty list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (nodes_[losses[i]].value.size() != 1) {
      throw DimensionError("select_max input " + std::to_string(i) + " is not scalar");
    }
    if (nodes_[losses[i]].value.item() > nodes_[losses[best]].value.item()) best = i;
  }
  Node n;
  n.op = Op::select_max;
  n.list.assign(losses.begin(), losses.end());
  n.aux = best;
  n.value = nodes_[losses[best]].value;
  return {push(std::move(n)), best};
}

NodeId Graph::sum(std::span<const NodeId> scalars) {
  if (scalars.empty()) throw ArgumentError("sum over an empty list");
  double acc = 0.0;
  for (NodeId id : scalars) {
    if (nodes_[id].value.size() != 1) throw DimensionError("sum input is not scalar");
    acc += nodes_[id].value.item();
  }
  Node n;
  n.op = Op::sum;
  n.list.assign(scalars.begin(), scalars.end());
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb)) {
    throw DimensionError("add shape mismatch: " + ta.shape_str() + " vs " + tb.shape_str());
  }
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (std::size_t i = 0; i < tb.size(); ++i) n.value[i] += tb[i];
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::scale;
  n.a = a;
  n.factor = factor;
  n.value = nodes_[a].value;
  for (double& v : n.value.values()) v *= factor;
  return push(std::move(n));
}

Tensor& Graph::grad_buf(NodeId id) {
  if (grads_[id].shape() != nodes_[id].value.shape()) {
    grads_[id] = Tensor(nodes_[id].value.shape());
  }
  return grads_[id];
}

const Tensor& Graph::grad(NodeId id) {
  if (grads_.size() != nodes_.size()) grads_.resize(nodes_.size());
  return grad_buf(id);
}

void Graph::backward(NodeId root) {
  if (nodes_[root].value.size() != 1) {
    throw DimensionError("backward root must be scalar, got " + nodes_[root].value.shape_str());
  }
  grads_.assign(nodes_.size(), Tensor());
  grad_buf(root)[0] = 1.0;
  for (std::size_t i = root + 1; i-- > 0;) {
    if (grads_[i].size() == 0) continue;  // not reached from the root
    backprop_node(static_cast<NodeId>(i));
  }
}

void Graph::backprop_node(NodeId id) {
  Node& n = nodes_[id];
  const Tensor& g = grads_[id];
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul: {
      const Tensor& ta = nodes_[n.a].value;
      const Tensor& tb = nodes_[n.b].value;
      std::size_t m = ta.rows(), k = ta.cols(), p = tb.cols();
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      // dA[i,k] += sum_j g[i,j] * B[k,j]
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * p;
        double* garow = ga.data() + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double* brow = tb.data() + kk * p;
          double acc = 0.0;
          for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
          garow[kk] += acc;
        }
      }
      // dB[k,j] += sum_i A[i,k] * g[i,j]
      for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ta.data() + i * k;
        const double* grow = g.data() + i * p;
        for (std::size_t kk = 0; kk < k; ++kk) {
          double av = arow[kk];
          if (av == 0.0) continue;
          double* gbrow = gb.data() + kk * p;
          for (std::size_t j = 0; j < p; ++j) gbrow[j] += av * grow[j];
        }
      }
      break;
    }
    case Op::add_bias: {
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      std::size_t rows = n.value.rows(), cols = n.value.cols();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      for (std::size_t r = 0; r < rows; ++r) {
        const double* grow = g.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gb[c] += grow[c];
      }
      break;
    }
    case Op::activation: {
      Tensor& ga = grad_buf(n.a);
      const Tensor& x = nodes_[n.a].value;
      const Tensor& y = n.value;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double d = 1.0;
        switch (n.act) {
          case Act::relu: d = x[i] > 0.0 ? 1.0 : 0.0; break;
          case Act::tanh: d = 1.0 - y[i] * y[i]; break;
          case Act::sigmoid: d = y[i] * (1.0 - y[i]); break;
          case Act::identity: d = 1.0; break;
        }
        ga[i] += g[i] * d;
      }
      break;
    }
    case Op::concat: {
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      std::size_t rows = n.value.rows();
      std::size_t n1 = n.aux, total = n.value.cols(), n2 = total - n1;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* grow = g.data() + r * total;
        double* par = ga.data() + r * n1;
        double* pbr = gb.data() + r * n2;
        for (std::size_t c = 0; c < n1; ++c) par[c] += grow[c];
        for (std::size_t c = 0; c < n2; ++c) pbr[c] += grow[n1 + c];
      }
      break;
    }
    case Op::sq_error: {
      Tensor& ga = grad_buf(n.a);
      const Tensor& x = nodes_[n.a].value;
      double s = 2.0 * g[0] / static_cast<double>(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) ga[i] += s * (x[i] - n.saved[i]);
      break;
    }
    case Op::select_min:
    case Op::select_max: {
      Tensor& gsel = grad_buf(n.list[n.aux]);
      gsel[0] += g[0];
      break;
    }
    case Op::sum: {
      for (NodeId in : n.list) grad_buf(in)[0] += g[0];
      break;
    }
    case Op::add: {
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
      break;
    }
    case Op::scale: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.factor * g[i];
      break;
    }
  }
}

void Graph::clear() {
  nodes_.clear();
  grads_.clear();
}

}  // namespace diversenet
