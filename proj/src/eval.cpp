#include "diversenet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

double pair_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw DimensionError("pair_error dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

namespace {

void check_prediction_set(const PredictionSet& preds) {
  if (preds.preds.empty() || preds.n_slots == 0) {
    throw ArgumentError("empty prediction set");
  }
  for (const auto& item : preds.preds) {
    if (item.size() != preds.n_slots) {
      throw ArgumentError("prediction set items disagree on slot count");
    }
  }
}

double min_error_over(const std::vector<std::vector<double>>& slots,
                      const std::vector<std::size_t>& chosen, const std::vector<double>& y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s : chosen) best = std::min(best, pair_error(slots[s], y));
  return best;
}

OracleEstimate estimate(const PredictionSet& preds, const LabelSets& gts, std::size_t k,
                        std::uint64_t seed, std::size_t n_resamples) {
  check_prediction_set(preds);
  if (gts.size() != preds.n_items()) {
    throw ArgumentError("prediction set and ground truth disagree on item count");
  }
  std::size_t m = preds.n_slots;
  if (k < 1 || k > m) {
    throw ArgumentError("k=" + std::to_string(k) + " out of range for M=" + std::to_string(m));
  }
  std::size_t n_labels = 0;
  for (const auto& ys : gts) {
    if (ys.empty()) throw ArgumentError("empty label set in ground truth");
    n_labels += ys.size();
  }

  if (k == m) {
    // Exhaustive draw: no sampling variance.
    std::vector<std::size_t> all(m);
    for (std::size_t s = 0; s < m; ++s) all[s] = s;
    double acc = 0.0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (const auto& y : gts[i]) acc += min_error_over(preds.preds[i], all, y);
    }
    return {acc / static_cast<double>(n_labels), 0.0};
  }

  if (n_resamples == 0) throw ArgumentError("n_resamples must be >= 1 for k < M");
  std::vector<double> resample_sums(n_resamples, 0.0);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    Rng rng(mix_seed(seed, i));
    for (std::size_t r = 0; r < n_resamples; ++r) {
      std::vector<std::size_t> chosen = rng.sample_without_replacement(m, k);
      for (const auto& y : gts[i]) {
        resample_sums[r] += min_error_over(preds.preds[i], chosen, y);
      }
    }
  }
  double mean = 0.0;
  for (double s : resample_sums) mean += s / static_cast<double>(n_labels);
  mean /= static_cast<double>(n_resamples);
  double var = 0.0;
  for (double s : resample_sums) {
    double d = s / static_cast<double>(n_labels) - mean;
    var += d * d;
  }
  double std_error = n_resamples > 1
                         ? std::sqrt(var / static_cast<double>(n_resamples - 1) /
                                     static_cast<double>(n_resamples))
                         : 0.0;
  return {mean, std_error};
}

}  // namespace

OracleEstimate oracle_error_multi_est(const PredictionSet& preds, const LabelSets& gts,
                                      std::size_t k, std::uint64_t seed,
                                      std::size_t n_resamples) {
  return estimate(preds, gts, k, seed, n_resamples);
}

double oracle_error_multi(const PredictionSet& preds, const LabelSets& gts, std::size_t k,
                          std::uint64_t seed, std::size_t n_resamples) {
  return estimate(preds, gts, k, seed, n_resamples).mean;
}

OracleEstimate oracle_error_single_est(const PredictionSet& preds, const SingleLabels& gt,
                                       std::size_t k, std::uint64_t seed,
                                       std::size_t n_resamples) {
  LabelSets sets;
  sets.reserve(gt.size());
  for (const auto& y : gt) sets.push_back({y});
  return estimate(preds, sets, k, seed, n_resamples);
}

double oracle_error_single(const PredictionSet& preds, const SingleLabels& gt, std::size_t k,
                           std::uint64_t seed, std::size_t n_resamples) {
  return oracle_error_single_est(preds, gt, k, seed, n_resamples).mean;
}

double oracle_error_multi_exhaustive(const PredictionSet& preds, const LabelSets& gts,
                                     std::size_t k) {
  check_prediction_set(preds);
  std::size_t m = preds.n_slots;
  if (k < 1 || k > m) {
    throw ArgumentError("k=" + std::to_string(k) + " out of range for M=" + std::to_string(m));
  }
  std::size_t n_labels = 0;
  for (const auto& ys : gts) n_labels += ys.size();

  // Enumerate all k-subsets of 0..m-1.
  std::vector<std::size_t> chosen(k);
  for (std::size_t i = 0; i < k; ++i) chosen[i] = i;
  double acc = 0.0;
  std::size_t n_subsets = 0;
  while (true) {
    ++n_subsets;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (const auto& y : gts[i]) acc += min_error_over(preds.preds[i], chosen, y);
    }
    // next combination
    std::size_t pos = k;
    while (pos > 0 && chosen[pos - 1] == m - k + pos - 1) --pos;
    if (pos == 0) break;
    ++chosen[pos - 1];
    for (std::size_t i = pos; i < k; ++i) chosen[i] = chosen[i - 1] + 1;
  }
  return acc / (static_cast<double>(n_subsets) * static_cast<double>(n_labels));
}

OracleCurve oracle_curve(const PredictionSet& preds, const LabelSets& gts, std::uint64_t seed,
                         std::size_t n_resamples, const std::string& method) {
  OracleCurve curve;
  curve.n_items = preds.n_items();
  curve.n_resamples = n_resamples;
  curve.seed = seed;
  curve.method = method;
  for (std::size_t k = 1; k <= preds.n_slots; ++k) {
    OracleEstimate est = oracle_error_multi_est(preds, gts, k, seed, n_resamples);
    curve.ks.push_back(k);
    curve.mean_error.push_back(est.mean);
    curve.std_error.push_back(est.std_error);
  }
  return curve;
}

void write_oracle_curve_csv(const OracleCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << "k,mean_error,stderr,n_items,n_resamples,method\n";
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    out << curve.ks[i] << "," << fmt_double(curve.mean_error[i]) << ","
        << fmt_double(curve.std_error[i]) << "," << curve.n_items << "," << curve.n_resamples
        << "," << curve.method << "\n";
  }
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

double prediction_variance(const PredictionSet& preds) {
  check_prediction_set(preds);
  if (preds.n_slots < 2) throw ArgumentError("prediction_variance requires M >= 2");
  double total = 0.0;
  for (const auto& slots : preds.preds) {
    std::size_t dim = slots[0].size();
    double item_acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      double mean = 0.0;
      for (const auto& p : slots) mean += p[d];
      mean /= static_cast<double>(slots.size());
      double var = 0.0;
      for (const auto& p : slots) {
        double diff = p[d] - mean;
        var += diff * diff;
      }
      item_acc += var / static_cast<double>(slots.size());
    }
    total += item_acc / static_cast<double>(dim);
  }
  return total / static_cast<double>(preds.n_items());
}

namespace {

std::vector<double> mean_nearest_per_slot(const PredictionSet& preds, const LabelSets& gts) {
  std::vector<double> mean_nearest(preds.n_slots, 0.0);
  for (std::size_t i = 0; i < preds.n_items(); ++i) {
    for (std::size_t s = 0; s < preds.n_slots; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : gts[i]) best = std::min(best, pair_error(preds.preds[i][s], y));
      mean_nearest[s] += best;
    }
  }
  for (double& v : mean_nearest) v /= static_cast<double>(preds.n_items());
  return mean_nearest;
}

}  // namespace

DegeneracyReport degeneracy_report(const PredictionSet& preds, const LabelSets& gts, double tau) {
  check_prediction_set(preds);
  if (tau <= 0.0) throw ArgumentError("degeneracy tau must be > 0");
  if (gts.size() != preds.n_items()) {
    throw ArgumentError("prediction set and ground truth disagree on item count");
  }
  DegeneracyReport report;
  report.tau = tau;
  report.flags.assign(preds.n_slots, true);
  for (std::size_t i = 0; i < preds.n_items(); ++i) {
    for (std::size_t s = 0; s < preds.n_slots; ++s) {
      if (!report.flags[s]) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : gts[i]) best = std::min(best, pair_error(preds.preds[i][s], y));
      if (best <= tau) report.flags[s] = false;
    }
  }
  report.mean_nearest = mean_nearest_per_slot(preds, gts);
  for (bool f : report.flags) {
    if (f) ++report.n_degenerate;
  }
  return report;
}

double default_degeneracy_tau(const PredictionSet& preds, const LabelSets& gts) {
  std::vector<double> mean_nearest = mean_nearest_per_slot(preds, gts);
  double best = *std::min_element(mean_nearest.begin(), mean_nearest.end());
  return std::max(3.0 * best, 1e-9);
}

std::vector<std::vector<double>> sweep_continuous(const Model& model,
                                                  const std::vector<double>& x, double lo,
                                                  double hi, std::size_t steps) {
  if (steps < 2) throw ArgumentError("sweep_continuous requires steps >= 2");
  if (model.config().control_mode != ControlMode::continuous) {
    throw UsageError("sweep_continuous requires a continuous-control model");
  }
  if (model.config().control_dim != 1) {
    throw UsageError("sweep_continuous sweeps a scalar control");
  }
  Tensor input = Tensor::row(x);
  std::vector<std::vector<double>> out;
  out.reserve(steps);
  for (const ControlValue& c : spaced_controls(lo, hi, steps)) {
    out.push_back(model.forward(c, input).values());
  }
  return out;
}

}  // namespace diversenet
