#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vminpred/datamodel.hpp"

namespace vminpred::harness {

struct ReportRow {
  data::WaferId wafer_id;
  int zone = 0;
  std::size_t n_test_dies = 0;
  std::vector<double> rmse_mv;  // one entry per method
};

struct ShiftReport {
  data::WaferId reference_wafer;
  std::vector<std::pair<data::WaferId, double>> inter_mv;  // shift from reference wafer
  std::vector<double> intra_mv;                            // per zone, reference zone = 0
};

struct CorrelationSummary {
  double top1_abs_pearson = 0.0;
  std::size_t top1_probe_feature = 0;
  double probe_r2 = 0.0;  // held-out wafers
};

/// Per-(wafer, zone) RMSE table plus summary rows, mirroring the per-zone
/// reporting layout used throughout the evaluation harness.
struct EvalReport {
  std::vector<std::string> method_names;
  std::vector<ReportRow> rows;
  std::vector<double> mean_row;           // unweighted mean of row RMSEs
  std::vector<double> weighted_mean_row;  // die-count weighted, reported separately
  std::optional<ShiftReport> shift_tables;
  std::optional<CorrelationSummary> correlation_summary;
};

/// Aligned plain-text rendering of the report (zone rows, mean rows, and any
/// shift/correlation sections).
std::string render_report_text(const EvalReport& report);

}  // namespace vminpred::harness

namespace vminpred::data {

/// Writes the RMSE table as CSV: header, one row per (wafer, zone), then a
/// single mean row. Column order is wafer_id, zone, n_dies, then one
/// rmse_mv_<method> column per method. Byte-deterministic.
void write_report_csv(const harness::EvalReport& report, const std::string& path);

}  // namespace vminpred::data
