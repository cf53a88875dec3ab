#include "vminpred/harness.hpp"

#include <algorithm>
#include <set>

namespace vminpred::harness {

namespace {

std::size_t model_dimension(const est::FittedModel& m) {
  if (m.ols) return m.ols->w.size();
  if (m.ba) return m.ba->w.size();
  if (m.rba) return m.rba->w.size();
  throw InvalidConfig("fitted model '" + m.method + "' carries no parameters");
}

double predict_one(const est::FittedModel& m, const data::DieRecord& die,
                   const data::GroupKey& key, const data::ClassProbeTable* probes,
                   const EvalOptions& opt) {
  if (m.ols) return est::predict_ols(*m.ols, die.features);
  if (m.ba) return est::predict_ba(*m.ba, die.features, key.wafer_id, key.zone);
  const std::vector<double>* z = nullptr;
  if (probes != nullptr) {
    auto it = probes->rows.find(key.wafer_id);
    if (it != probes->rows.end()) z = &it->second;
  }
  return est::predict_rba(*m.rba, die.features, key.zone, key.wafer_id, z,
                          opt.rba_probe_path);
}

data::WaferDataset subset_by_wafers(const data::WaferDataset& ds,
                                    const std::set<data::WaferId>& keep) {
  data::WaferDataset out;
  out.d = ds.d;
  out.zone_count = ds.zone_count;
  out.feature_names = ds.feature_names;
  out.meta = ds.meta;
  for (const data::DieRecord& die : ds.dies) {
    if (keep.count(die.wafer_id)) out.dies.push_back(die);
  }
  out.rebuild_groups();
  return out;
}

est::OlsModel fit_pooled_ols(const data::WaferDataset& ds) {
  num::Matrix x;
  std::vector<double> y;
  for (const auto& [key, group] : ds.groups) {
    for (std::size_t r = 0; r < group.x.rows(); ++r) {
      x.append_row(group.x.row(r));
      y.push_back(group.y[r]);
    }
  }
  return est::fit_ols(x, y);
}

}  // namespace

EvalReport evaluate(const std::vector<est::FittedModel>& models,
                    const data::WaferDataset& test, const data::ClassProbeTable* probes,
                    const EvalOptions& opt) {
  if (models.empty()) throw EmptyInput("evaluate: no models");
  if (test.groups.empty()) throw EmptyInput("evaluate: test set has no labeled dies");
  for (const auto& m : models) {
    if (model_dimension(m) != test.d) {
      throw ShapeMismatch("evaluate: model '" + m.method + "' expects d=" +
                          std::to_string(model_dimension(m)) + ", dataset has d=" +
                          std::to_string(test.d));
    }
  }

  EvalReport report;
  std::set<std::string> seen;
  for (const auto& m : models) {
    std::string name = m.method;
    for (int suffix = 2; seen.count(name); ++suffix) {
      name = m.method + "_" + std::to_string(suffix);
    }
    seen.insert(name);
    report.method_names.push_back(name);
  }

  for (const auto& [key, group] : test.groups) {
    ReportRow row;
    row.wafer_id = key.wafer_id;
    row.zone = key.zone;
    row.n_test_dies = group.y.size();
    for (const auto& m : models) {
      std::vector<double> yhat(group.y.size());
      for (std::size_t r = 0; r < group.die_index.size(); ++r) {
        yhat[r] = predict_one(m, test.dies[group.die_index[r]], key, probes, opt);
      }
      row.rmse_mv.push_back(num::rmse(est::residuals(group.y, yhat)) * 1000.0);
    }
    report.rows.push_back(std::move(row));
  }

  report.mean_row.assign(models.size(), 0.0);
  report.weighted_mean_row.assign(models.size(), 0.0);
  double total_dies = 0.0;
  for (const auto& row : report.rows) {
    total_dies += static_cast<double>(row.n_test_dies);
    for (std::size_t m = 0; m < models.size(); ++m) {
      report.mean_row[m] += row.rmse_mv[m];
      report.weighted_mean_row[m] += row.rmse_mv[m] * static_cast<double>(row.n_test_dies);
    }
  }
  for (std::size_t m = 0; m < models.size(); ++m) {
    report.mean_row[m] /= static_cast<double>(report.rows.size());
    report.weighted_mean_row[m] /= total_dies;
  }
  return report;
}

EvalReport run_new_wafer_protocol(const std::vector<data::WaferId>& train_wafers,
                                  const std::vector<data::WaferId>& test_wafers,
                                  const data::WaferDataset& ds,
                                  const data::ClassProbeTable& probes,
                                  const est::RbaOptions& rba_opt) {
  if (train_wafers.empty() || test_wafers.empty()) {
    throw InvalidConfig("new-wafer protocol needs nonempty train and test wafer sets");
  }
  std::set<data::WaferId> train_set(train_wafers.begin(), train_wafers.end());
  std::set<data::WaferId> test_set(test_wafers.begin(), test_wafers.end());
  for (const auto& w : test_set) {
    if (train_set.count(w)) {
      throw InvalidConfig("wafer '" + w + "' is in both the train and test sets");
    }
  }

  data::WaferDataset train_ds = subset_by_wafers(ds, train_set);
  data::WaferDataset test_ds = subset_by_wafers(ds, test_set);
  if (train_ds.groups.empty() || test_ds.groups.empty()) {
    throw UnknownWafer("new-wafer protocol: a wafer set matched no labeled dies");
  }

  est::FittedModel ols{.method = "ols", .ols = fit_pooled_ols(train_ds)};
  est::FittedModel rba{.method = "rba",
                       .rba = est::fit_rba(train_ds, &probes, rba_opt)};

  EvalOptions opt;
  opt.rba_probe_path = true;  // deployment path: never the stored biases
  EvalReport report = evaluate({std::move(ols), std::move(rba)}, test_ds, &probes, opt);
  return report;
}

EvalReport run_correlation_study(const data::WaferDataset& ds,
                                 const data::ClassProbeTable& probes,
                                 std::size_t n_train_wafers,
                                 const est::RbaOptions& rba_opt) {
  const std::vector<data::WaferId> wafers = ds.wafer_ids();
  if (wafers.size() < n_train_wafers + 2) {
    throw TooFewWafers("correlation study needs at least n_train_wafers + 2 wafers (" +
                       std::to_string(wafers.size()) + " available)");
  }

  est::RbaModel model = est::fit_rba(ds, nullptr, rba_opt);
  const data::WaferId& base = wafers.front();
  ShiftReport shifts = est::shift_tables(model, base);

  // Top-1 |Pearson| between each probe feature and the non-base shifts.
  CorrelationSummary summary;
  for (std::size_t f = 0; f < probes.k; ++f) {
    std::vector<double> zf, shift;
    for (const auto& [wafer, mv] : shifts.inter_mv) {
      if (wafer == base) continue;
      auto it = probes.rows.find(wafer);
      if (it == probes.rows.end()) throw UnknownWafer("no probe row for wafer '" + wafer + "'");
      zf.push_back(it->second.at(f));
      shift.push_back(mv);
    }
    const double r = std::abs(num::pearson(zf, shift));
    if (r > summary.top1_abs_pearson) {
      summary.top1_abs_pearson = r;
      summary.top1_probe_feature = f;
    }
  }

  // Probe model on the first n_train_wafers wafers, R^2 on the rest.
  std::map<data::WaferId, double> train_bias;
  for (std::size_t i = 0; i < n_train_wafers; ++i) {
    train_bias[wafers[i]] = model.b_inter.at(wafers[i]);
  }
  est::ProbeBiasModel probe_model = est::fit_probe_bias_model(train_bias, probes);
  std::vector<double> held_true, held_pred;
  for (std::size_t i = n_train_wafers; i < wafers.size(); ++i) {
    auto it = probes.rows.find(wafers[i]);
    if (it == probes.rows.end()) throw UnknownWafer("no probe row for wafer '" + wafers[i] + "'");
    held_true.push_back(model.b_inter.at(wafers[i]));
    held_pred.push_back(num::dot(it->second, probe_model.w_z) + probe_model.b_z);
  }
  summary.probe_r2 = num::r_squared(held_true, held_pred);

  EvalReport report;
  report.shift_tables = std::move(shifts);
  report.correlation_summary = summary;
  return report;
}

std::vector<EfficiencyRow> run_data_efficiency(const data::WaferDataset& ds,
                                               const data::ClassProbeTable* probes,
                                               const std::vector<double>& fractions,
                                               std::uint64_t seed,
                                               const est::RbaOptions& rba_opt) {
  if (fractions.empty()) throw InvalidConfig("data-efficiency study needs fractions");
  std::vector<EfficiencyRow> rows;
  for (double fraction : fractions) {
    auto [train, test] = data::split_train_test(ds, fraction, seed);
    est::FittedModel rba{.method = "rba",
                         .rba = est::fit_rba(train, probes, rba_opt)};
    EvalReport report = evaluate({std::move(rba)}, test, probes);
    rows.push_back({fraction, report.mean_row.at(0)});
  }
  return rows;
}

}  // namespace vminpred::harness
