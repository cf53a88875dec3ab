#pragma once

#include <cstddef>
#include <vector>

#include "vminpred/numkit.hpp"

namespace vminpred::featsel {

struct FeatureSubset {
  std::vector<std::size_t> indices;  // in selection order
  double merit = 0.0;
};

/// Correlation-based merit of a subset: k * mean|r_cf| / sqrt(k + k(k-1) *
/// mean|r_ff|), where r_cf are feature-target correlations and r_ff the
/// pairwise feature correlations. A single-feature subset scores |r_cf|.
double cfs_merit(const std::vector<std::size_t>& subset,
                 const std::vector<double>& feature_target_corr,
                 const num::Matrix& feature_feature_corr);

/// Greedy forward selection maximizing cfs_merit; stops when no addition
/// improves the merit or max_k features are selected. Ties break toward the
/// lowest column index. Every column must have nonzero variance.
FeatureSubset cfs_select(const num::Matrix& x, const std::vector<double>& y,
                         std::size_t max_k);

}  // namespace vminpred::featsel
