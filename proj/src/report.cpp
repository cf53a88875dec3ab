#include "vminpred/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "vminpred/errors.hpp"

namespace vminpred::data {

void write_report_csv(const harness::EvalReport& report, const std::string& path) {
  if (report.rows.empty()) throw EmptyInput("report has no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  out << "wafer_id,zone,n_dies";
  for (const std::string& name : report.method_names) out << ",rmse_mv_" << name;
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.wafer_id << ',' << row.zone << ',' << row.n_test_dies;
    for (double v : row.rmse_mv) out << ',' << csv::format_g12(v);
    out << '\n';
  }
  out << "mean,-,-";
  for (double v : report.mean_row) out << ',' << csv::format_g12(v);
  out << '\n';
  if (!out) throw IoError("short write to " + path);
}

}  // namespace vminpred::data

namespace vminpred::harness {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_report_text(const EvalReport& report) {
  std::ostringstream os;
  if (!report.rows.empty()) {
    os << "wafer    zone  n_dies";
    for (const std::string& name : report.method_names) {
      os << "  " << name << " (mV)";
    }
    os << '\n';
    auto emit = [&](const std::string& wafer, const std::string& zone,
                    const std::string& n, const std::vector<double>& vals) {
      char head[64];
      std::snprintf(head, sizeof(head), "%-8s %4s  %6s", wafer.c_str(), zone.c_str(),
                    n.c_str());
      os << head;
      for (std::size_t m = 0; m < vals.size(); ++m) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "  %*s",
                      static_cast<int>(report.method_names[m].size()) + 5,
                      fixed2(vals[m]).c_str());
        os << cell;
      }
      os << '\n';
    };
    for (const auto& row : report.rows) {
      emit(row.wafer_id, std::to_string(row.zone), std::to_string(row.n_test_dies),
           row.rmse_mv);
    }
    emit("mean", "-", "-", report.mean_row);
    if (!report.weighted_mean_row.empty()) {
      emit("mean/die", "-", "-", report.weighted_mean_row);
    }
  }
  if (report.shift_tables) {
    const ShiftReport& s = *report.shift_tables;
    os << "\ninter-wafer shift (mV) from wafer " << s.reference_wafer << ":\n";
    for (const auto& [wafer, mv] : s.inter_mv) {
      os << "  " << wafer << "  " << fixed2(mv) << '\n';
    }
    os << "intra-wafer shift (mV) from center zone:\n";
    for (std::size_t j = 0; j < s.intra_mv.size(); ++j) {
      os << "  zone " << j << "  " << fixed2(s.intra_mv[j]) << '\n';
    }
  }
  if (report.correlation_summary) {
    const CorrelationSummary& c = *report.correlation_summary;
    os << "\ntop-1 |pearson| (probe feature " << c.top1_probe_feature
       << "): " << csv::format_g12(c.top1_abs_pearson) << '\n'
       << "held-out probe-model R^2: " << csv::format_g12(c.probe_r2) << '\n';
  }
  return os.str();
}

}  // namespace vminpred::harness
