#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diversenet/model.hpp"

namespace diversenet {

// Per test item: M prediction vectors, one per control value or member.
struct PredictionSet {
  std::size_t n_slots = 0;
  std::vector<std::vector<std::vector<double>>> preds;  // [item][slot][dim]

  std::size_t n_items() const { return preds.size(); }
};

using LabelSets = std::vector<std::vector<std::vector<double>>>;  // [item][label][dim]
using SingleLabels = std::vector<std::vector<double>>;            // [item][dim]

// Mean squared error between one prediction and one label.
double pair_error(const std::vector<double>& a, const std::vector<double>& b);

struct OracleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Draw k of the M predictions uniformly without replacement per item and
// resample; the error of a draw is the min pair error to the ground truth.
// Estimates average over resamples then items. k = M is exhaustive and has
// zero standard error. Per-item sampling streams derive from (seed, item).
OracleEstimate oracle_error_single_est(const PredictionSet& preds, const SingleLabels& gt,
                                       std::size_t k, std::uint64_t seed,
                                       std::size_t n_resamples);
double oracle_error_single(const PredictionSet& preds, const SingleLabels& gt, std::size_t k,
                           std::uint64_t seed, std::size_t n_resamples);

// Multi-label form: each label in the set is scored against the best of the
// drawn predictions; errors pool over every (item, label) pair.
OracleEstimate oracle_error_multi_est(const PredictionSet& preds, const LabelSets& gts,
                                      std::size_t k, std::uint64_t seed,
                                      std::size_t n_resamples);
double oracle_error_multi(const PredictionSet& preds, const LabelSets& gts, std::size_t k,
                          std::uint64_t seed, std::size_t n_resamples);

// Exact expectation over all C(M, k) subsets; exercised by the monotonicity
// checks at small M.
double oracle_error_multi_exhaustive(const PredictionSet& preds, const LabelSets& gts,
                                     std::size_t k);

struct OracleCurve {
  std::vector<std::size_t> ks;  // 1..M
  std::vector<double> mean_error;
  std::vector<double> std_error;
  std::size_t n_items = 0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  std::string method;
};

OracleCurve oracle_curve(const PredictionSet& preds, const LabelSets& gts, std::uint64_t seed,
                         std::size_t n_resamples, const std::string& method);

void write_oracle_curve_csv(const OracleCurve& curve, const std::filesystem::path& path);

// Mean over items and output dimensions of the population variance across
// the M predictions.
double prediction_variance(const PredictionSet& preds);

struct DegeneracyReport {
  std::vector<bool> flags;  // per slot
  std::size_t n_degenerate = 0;
  double tau = 0.0;
  std::vector<double> mean_nearest;  // per slot, mean distance to nearest label
};

// A slot is degenerate when its prediction stays further than tau from every
// ground-truth label on every test item.
DegeneracyReport degeneracy_report(const PredictionSet& preds, const LabelSets& gts, double tau);

// 3x the best slot's mean nearest-label distance (floored to stay positive).
double default_degeneracy_tau(const PredictionSet& preds, const LabelSets& gts);

// Predictions at equally spaced continuous control values over [lo, hi].
std::vector<std::vector<double>> sweep_continuous(const Model& model,
                                                  const std::vector<double>& x, double lo,
                                                  double hi, std::size_t steps);

}  // namespace diversenet
