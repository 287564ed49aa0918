#include "diversenet/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "diversenet/errors.hpp"

namespace diversenet {

namespace {

double eval_loss(const GraphBuilder& build, const std::vector<NamedTensor>& params) {
  Graph g;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const auto& p : params) ids.push_back(g.leaf(p.tensor));
  NodeId root = build(g, ids);
  double v = g.value(root).item();
  if (!std::isfinite(v)) throw NumericalError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const GraphBuilder& build, const std::vector<NamedTensor>& params,
                           double step, double tol) {
  if (step <= 0.0) throw ArgumentError("grad_check requires step > 0");

  // Analytic pass.
  Graph g;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const auto& p : params) ids.push_back(g.leaf(p.tensor));
  NodeId root = build(g, ids);
  if (!std::isfinite(g.value(root).item())) {
    throw NumericalError("grad_check: loss is not finite");
  }
  g.backward(root);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (NodeId id : ids) analytic.push_back(g.grad(id));

  GradCheckReport report;
  report.tolerance = tol;
  std::vector<NamedTensor> probe = params;
  for (std::size_t b = 0; b < params.size(); ++b) {
    GradCheckBlock block;
    block.name = params[b].name;
    Tensor& t = probe[b].tensor;
    for (std::size_t i = 0; i < t.size(); ++i) {
      double orig = t[i];
      t[i] = orig + step;
      double up = eval_loss(build, probe);
      t[i] = orig - step;
      double down = eval_loss(build, probe);
      t[i] = orig;
      double numeric = (up - down) / (2.0 * step);
      double a = analytic[b][i];
      double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
      block.max_rel_error = std::max(block.max_rel_error, std::fabs(a - numeric) / denom);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace diversenet
