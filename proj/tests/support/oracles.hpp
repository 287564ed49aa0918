#pragma once

// Test-side oracles, deliberately independent of the library's
// implementation paths: plain double loops over plain containers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracles {

using Matrix = std::vector<std::vector<double>>;  // [row][col]

inline double brute_loss_div(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m[0].size(); ++c) {
    double best = m[0][c];
    for (std::size_t r = 1; r < m.size(); ++r) best = std::min(best, m[r][c]);
    acc += best;
  }
  return acc;
}

inline double brute_loss_catchup(const Matrix& m) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : m) {
    double best = row[0];
    for (std::size_t c = 1; c < row.size(); ++c) best = std::min(best, row[c]);
    worst = std::max(worst, best);
  }
  return worst * (1.0 / static_cast<double>(m.size()));
}

inline double brute_loss_combined(const Matrix& m, double beta) {
  return brute_loss_div(m) + beta * brute_loss_catchup(m);
}

inline double brute_standard_set(const Matrix& m) {
  double acc = 0.0;
  for (double v : m[0]) acc += v;
  return acc;
}

inline std::vector<std::size_t> brute_column_matches(const Matrix& m) {
  std::vector<std::size_t> matches(m[0].size());
  for (std::size_t c = 0; c < m[0].size(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < m.size(); ++r) {
      if (m[r][c] < m[best][c]) best = r;
    }
    matches[c] = best;
  }
  return matches;
}

inline std::size_t brute_catchup_row(const Matrix& m) {
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < m.size(); ++r) {
    double row_min = m[r][0];
    for (std::size_t c = 1; c < m[r].size(); ++c) row_min = std::min(row_min, m[r][c]);
    if (row_min > best_val) {
      best_val = row_min;
      best = r;
    }
  }
  return best;
}

inline double mean_sq_err(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

// Exact mean oracle error over all k-subsets of the M slots, pooled over
// every (item, label) pair.
inline double brute_oracle_exhaustive(
    const std::vector<std::vector<std::vector<double>>>& preds,
    const std::vector<std::vector<std::vector<double>>>& gts, std::size_t k) {
  std::size_t m = preds[0].size();
  std::vector<bool> mask(m, false);
  std::fill(mask.begin(), mask.begin() + k, true);
  std::sort(mask.begin(), mask.end());
  double acc = 0.0;
  std::size_t n_subsets = 0;
  std::size_t n_labels = 0;
  for (const auto& ys : gts) n_labels += ys.size();
  do {
    ++n_subsets;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      for (const auto& y : gts[i]) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < m; ++s) {
          if (mask[s]) best = std::min(best, mean_sq_err(preds[i][s], y));
        }
        acc += best;
      }
    }
  } while (std::next_permutation(mask.begin(), mask.end()));
  return acc / (static_cast<double>(n_subsets) * static_cast<double>(n_labels));
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double at, double h) {
  return (f(at + h) - f(at - h)) / (2.0 * h);
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace oracles
