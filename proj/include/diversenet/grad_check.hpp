#pragma once

#include <functional>
#include <string>
#include <vector>

#include "diversenet/graph.hpp"
#include "diversenet/tensor.hpp"

namespace diversenet {

// Builds a scalar loss node from a graph and the recorded parameter leaves.
using GraphBuilder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares analytic gradients against central finite differences, per
// parameter block. Relative error is |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(const GraphBuilder& build, const std::vector<NamedTensor>& params,
                           double step, double tol);

}  // namespace diversenet
