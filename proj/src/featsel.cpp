#include "vminpred/featsel.hpp"

#include <algorithm>
#include <cmath>

#include "vminpred/errors.hpp"

namespace vminpred::featsel {

double cfs_merit(const std::vector<std::size_t>& subset,
                 const std::vector<double>& feature_target_corr,
                 const num::Matrix& feature_feature_corr) {
  if (subset.empty()) throw EmptySubset("cfs_merit of an empty subset");
  const std::size_t d = feature_target_corr.size();
  if (feature_feature_corr.rows() != d || feature_feature_corr.cols() != d) {
    throw ShapeMismatch("cfs_merit: correlation matrix does not match r_cf length");
  }
  for (std::size_t i : subset) {
    if (i >= d) throw ShapeMismatch("cfs_merit: subset index out of range");
  }

  const auto k = static_cast<double>(subset.size());
  double r_cf = 0.0;
  for (std::size_t i : subset) r_cf += std::abs(feature_target_corr[i]);
  r_cf /= k;

  double r_ff = 0.0;
  if (subset.size() > 1) {
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < subset.size(); ++a) {
      for (std::size_t b = a + 1; b < subset.size(); ++b) {
        r_ff += std::abs(feature_feature_corr(subset[a], subset[b]));
        ++pairs;
      }
    }
    r_ff /= static_cast<double>(pairs);
  }
  return k * r_cf / std::sqrt(k + k * (k - 1.0) * r_ff);
}

FeatureSubset cfs_select(const num::Matrix& x, const std::vector<double>& y,
                         std::size_t max_k) {
  if (max_k < 1) throw InvalidConfig("cfs_select: max_k must be >= 1");
  const std::size_t d = x.cols();
  if (x.rows() != y.size()) throw ShapeMismatch("cfs_select: row/target count mismatch");

  std::vector<std::vector<double>> cols(d, std::vector<double>(x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = x(i, j);

  const double y_mean = num::mean(y);
  double y_var = 0.0;
  for (double v : y) y_var += (v - y_mean) * (v - y_mean);
  if (y_var == 0.0) throw ZeroVariance("cfs_select: target is constant");

  std::vector<double> r_cf(d);
  for (std::size_t j = 0; j < d; ++j) {
    try {
      r_cf[j] = num::pearson(cols[j], y);
    } catch (const ZeroVariance&) {
      throw ZeroVarianceColumn("cfs_select: feature column " + std::to_string(j) +
                               " is constant");
    }
  }
  num::Matrix r_ff(d, d, 1.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      r_ff(a, b) = r_ff(b, a) = num::pearson(cols[a], cols[b]);
    }
  }

  FeatureSubset best;
  std::vector<bool> used(d, false);
  while (best.indices.size() < std::min(max_k, d)) {
    std::size_t pick = d;
    double pick_merit = best.indices.empty() ? -1.0 : best.merit;
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      std::vector<std::size_t> trial = best.indices;
      trial.push_back(j);
      const double merit = cfs_merit(trial, r_cf, r_ff);
      if (merit > pick_merit) {  // strict: ties keep the lowest index seen first
        pick_merit = merit;
        pick = j;
      }
    }
    if (pick == d) break;  // nothing improves the merit
    used[pick] = true;
    best.indices.push_back(pick);
    best.merit = pick_merit;
  }
  return best;
}

}  // namespace vminpred::featsel
