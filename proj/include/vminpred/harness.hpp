#pragma once

#include <cstdint>
#include <vector>

#include "vminpred/estimators.hpp"
#include "vminpred/report.hpp"

namespace vminpred::harness {

struct EvalOptions {
  bool rba_probe_path = false;  // force probe-derived inter bias for RBA
};

/// Per-(wafer, zone) test RMSE for each model, using each model's own
/// prediction path, plus unweighted and die-weighted mean rows. Models and
/// datasets are not mutated.
EvalReport evaluate(const std::vector<est::FittedModel>& models,
                    const data::WaferDataset& test, const data::ClassProbeTable* probes,
                    const EvalOptions& opt = {});

/// Fits RBA on the training wafers only and predicts every test-wafer die
/// through the probe path (no test-wafer Vmin data is touched at fit time);
/// reports RMSE against an OLS baseline fit on the same training dies.
EvalReport run_new_wafer_protocol(const std::vector<data::WaferId>& train_wafers,
                                  const std::vector<data::WaferId>& test_wafers,
                                  const data::WaferDataset& ds,
                                  const data::ClassProbeTable& probes,
                                  const est::RbaOptions& rba_opt = {});

/// Estimates inter-wafer shifts with RBA on all wafers, reports the top
/// |Pearson| between any probe feature and the shifts, then fits the probe
/// model on the first n_train_wafers wafers and reports its R^2 on the rest.
EvalReport run_correlation_study(const data::WaferDataset& ds,
                                 const data::ClassProbeTable& probes,
                                 std::size_t n_train_wafers,
                                 const est::RbaOptions& rba_opt = {});

/// Training-fraction sweep: RBA mean test RMSE (mV) per fraction.
struct EfficiencyRow {
  double fraction;
  double rmse_mv;
};
std::vector<EfficiencyRow> run_data_efficiency(const data::WaferDataset& ds,
                                               const data::ClassProbeTable* probes,
                                               const std::vector<double>& fractions,
                                               std::uint64_t seed,
                                               const est::RbaOptions& rba_opt = {});

}  // namespace vminpred::harness
