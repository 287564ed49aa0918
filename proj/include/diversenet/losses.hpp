#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "diversenet/graph.hpp"
#include "diversenet/tensor.hpp"

namespace diversenet {

enum class PairLossKind { squared_error };

const char* pair_loss_name(PairLossKind k);
PairLossKind pair_loss_from_name(const std::string& name);

struct LossConfig {
  double beta = 1.0;
  PairLossKind pair_loss = PairLossKind::squared_error;
};

// Pairwise loss grid: rows index predictions (control values or ensemble
// members), columns index ground-truth labels. Entries are scalar nodes
// differentiable back to their prediction row.
struct LossMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<NodeId> entries;  // row-major

  NodeId at(std::size_t r, std::size_t c) const { return entries[r * n_cols + c]; }
};

// A scalar comparator between one prediction node and one label; any
// differentiable scalar op can be swapped in.
using PairLossFn = std::function<NodeId(Graph&, NodeId, const Tensor&)>;

PairLossFn make_pair_loss(PairLossKind kind);

LossMatrix loss_matrix(Graph& g, std::span<const NodeId> prediction_rows,
                       std::span<const Tensor> labels,
                       const PairLossFn& pair_loss = make_pair_loss(PairLossKind::squared_error));

// Sum over labels of the pair loss; requires a single prediction row.
NodeId loss_standard_set(Graph& g, const LossMatrix& m);

// Sum over labels of the min over predictions; gradient reaches only the
// matched (argmin) row of each column.
NodeId loss_div(Graph& g, const LossMatrix& m);

// (1/n_rows) * max over rows of (min over labels); updates the worst slot.
NodeId loss_catchup(Graph& g, const LossMatrix& m);

// loss_div + beta * loss_catchup.
NodeId loss_combined(Graph& g, const LossMatrix& m, const LossConfig& cfg);

// Min over predictions for a single-label column.
NodeId loss_div_single(Graph& g, const LossMatrix& m);

// Diagnostic readout of the matching; no gradients involved.
struct AssignmentTrace {
  std::vector<std::size_t> column_match;  // argmin row per column
  std::vector<double> row_min;            // min over columns per row
  std::size_t catchup_row = 0;            // argmax over row_min
};

AssignmentTrace assignment_trace(const Graph& g, const LossMatrix& m);

}  // namespace diversenet
