#include "diversenet/losses.hpp"

#include <algorithm>
#include <string>

#include "diversenet/errors.hpp"

namespace diversenet {

const char* pair_loss_name(PairLossKind k) {
  (void)k;
  return "squared_error";
}

PairLossKind pair_loss_from_name(const std::string& name) {
  if (name == "squared_error") return PairLossKind::squared_error;
  throw ConfigError("unknown pair loss '" + name + "'");
}

PairLossFn make_pair_loss(PairLossKind kind) {
  (void)kind;
  return [](Graph& g, NodeId pred, const Tensor& label) { return g.sq_error(pred, label); };
}

LossMatrix loss_matrix(Graph& g, std::span<const NodeId> prediction_rows,
                       std::span<const Tensor> labels, const PairLossFn& pair_loss) {
  if (prediction_rows.empty()) throw ArgumentError("loss_matrix with no predictions");
  if (labels.empty()) throw ArgumentError("loss_matrix with an empty label set");
  LossMatrix m;
  m.n_rows = prediction_rows.size();
  m.n_cols = labels.size();
  m.entries.reserve(m.n_rows * m.n_cols);
  for (NodeId row : prediction_rows) {
    for (const Tensor& y : labels) m.entries.push_back(pair_loss(g, row, y));
  }
  return m;
}

NodeId loss_standard_set(Graph& g, const LossMatrix& m) {
  if (m.n_rows != 1) {
    throw UsageError("loss_standard_set requires exactly one prediction row, got " +
                     std::to_string(m.n_rows));
  }
  return g.sum(m.entries);
}

NodeId loss_div(Graph& g, const LossMatrix& m) {
  if (m.n_cols == 0 || m.entries.empty()) throw ArgumentError("loss_div on an empty matrix");
  std::vector<NodeId> col_mins;
  col_mins.reserve(m.n_cols);
  std::vector<NodeId> column(m.n_rows);
  for (std::size_t c = 0; c < m.n_cols; ++c) {
    for (std::size_t r = 0; r < m.n_rows; ++r) column[r] = m.at(r, c);
    col_mins.push_back(g.select_min(column).first);
  }
  return g.sum(col_mins);
}

NodeId loss_catchup(Graph& g, const LossMatrix& m) {
  if (m.entries.empty()) throw ArgumentError("loss_catchup on an empty matrix");
  std::vector<NodeId> row_mins;
  row_mins.reserve(m.n_rows);
  std::vector<NodeId> row(m.n_cols);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    for (std::size_t c = 0; c < m.n_cols; ++c) row[c] = m.at(r, c);
    row_mins.push_back(g.select_min(row).first);
  }
  NodeId worst = g.select_max(row_mins).first;
  return g.scale(worst, 1.0 / static_cast<double>(m.n_rows));
}

NodeId loss_combined(Graph& g, const LossMatrix& m, const LossConfig& cfg) {
  if (cfg.beta < 0.0) throw ConfigError("beta must be >= 0");
  return g.add(loss_div(g, m), g.scale(loss_catchup(g, m), cfg.beta));
}

NodeId loss_div_single(Graph& g, const LossMatrix& m) {
  if (m.n_cols != 1) {
    throw UsageError("loss_div_single requires exactly one label, got " +
                     std::to_string(m.n_cols));
  }
  std::vector<NodeId> column(m.n_rows);
  for (std::size_t r = 0; r < m.n_rows; ++r) column[r] = m.at(r, 0);
  return g.select_min(column).first;
}

AssignmentTrace assignment_trace(const Graph& g, const LossMatrix& m) {
  if (m.entries.empty()) throw ArgumentError("assignment_trace on an empty matrix");
  AssignmentTrace trace;
  trace.column_match.resize(m.n_cols);
  trace.row_min.resize(m.n_rows);
  for (std::size_t c = 0; c < m.n_cols; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < m.n_rows; ++r) {
      if (g.value(m.at(r, c)).item() < g.value(m.at(best, c)).item()) best = r;
    }
    trace.column_match[c] = best;
  }
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    double best = g.value(m.at(r, 0)).item();
    for (std::size_t c = 1; c < m.n_cols; ++c) {
      best = std::min(best, g.value(m.at(r, c)).item());
    }
    trace.row_min[r] = best;
  }
  trace.catchup_row = 0;
  for (std::size_t r = 1; r < m.n_rows; ++r) {
    if (trace.row_min[r] > trace.row_min[trace.catchup_row]) trace.catchup_row = r;
  }
  return trace;
}

}  // namespace diversenet
