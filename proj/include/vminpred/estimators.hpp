#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vminpred/datamodel.hpp"
#include "vminpred/report.hpp"

namespace vminpred::est {

/// Pooled linear regression: vmin = x.w + b.
struct OlsModel {
  std::vector<double> w;  // volts per feature unit
  double b = 0.0;         // volts
};

/// Shared coefficients plus one voltage bias per (wafer, zone) group.
struct BaModel {
  std::vector<double> w;
  std::map<data::GroupKey, double> biases;  // volts
};

enum class BiasStep { gradient, exact };

struct RbaOptions {
  double eta = 0.1;        // bias-step learning rate
  double rel_tol = 1e-3;   // stop when relative loss improvement drops below
  std::size_t max_iter = 10000;
  BiasStep bias_step = BiasStep::gradient;
  int reference_zone = 0;  // intra bias pinned to 0 here (gauge)
};

/// Linear map from class probe features to a wafer's inter bias.
struct ProbeBiasModel {
  std::vector<double> w_z;
  double b_z = 0.0;  // volts
};

/// Shared coefficients, one bias per wafer, one bias per zone. The per-zone
/// biases are shared across wafers and the reference zone's entry is pinned
/// to 0, which removes the constant-transfer unidentifiability between the
/// two bias blocks.
struct RbaModel {
  std::vector<double> w;
  std::map<data::WaferId, double> b_inter;  // volts
  std::vector<double> b_intra;              // volts, length = zone count
  std::optional<ProbeBiasModel> probe;
  std::vector<double> train_trace;  // loss per step; [0] is the initial loss
  RbaOptions options_used;
  bool converged = true;  // false when max_iter was hit
};

/// Centered least squares with explicit intercept. Requires n > d and a
/// full-column-rank centered design.
OlsModel fit_ols(const num::Matrix& x, const std::vector<double>& y);

double predict_ols(const OlsModel& m, std::span<const double> x);

/// Elementwise y - yhat.
std::vector<double> residuals(const std::vector<double>& y, const std::vector<double>& yhat);

/// Closed form: w from the pooled per-group-centered normal equations
/// (solved by QR on the stacked centered data), then one bias per group as
/// the group's mean target minus mean prediction. Every group needs at
/// least 2 labeled dies.
BaModel fit_ba(const data::WaferDataset& ds);

/// x.w + bias of the die's (wafer, zone) group. Unseen groups are an error:
/// BA has no bias for a wafer it never trained on.
double predict_ba(const BaModel& m, std::span<const double> x, const data::WaferId& wafer,
                  int zone);

/// Alternating minimization: BA-based init, exact w-step on the pooled raw
/// design against bias-adjusted targets, then a bias step (gradient or exact
/// block update) per iteration; stops on relative loss improvement below
/// opt.rel_tol. Re-gauged so b_intra[reference_zone] == 0. When probes are
/// given, a ProbeBiasModel is fit on (z_i, b_inter_i) afterwards.
RbaModel fit_rba(const data::WaferDataset& ds, const data::ClassProbeTable* probes,
                 const RbaOptions& opt = {});

/// OLS of the fitted inter biases on the probe vectors. Needs more wafers
/// than probe features plus one.
ProbeBiasModel fit_probe_bias_model(const std::map<data::WaferId, double>& b_inter,
                                    const data::ClassProbeTable& probes);

/// x.w + inter + b_intra[zone]. The inter bias comes from the stored table
/// when wafer names a training wafer (unless force_probe), otherwise from
/// the probe model applied to z.
double predict_rba(const RbaModel& m, std::span<const double> x, int zone,
                   const std::optional<data::WaferId>& wafer = std::nullopt,
                   const std::vector<double>* z = nullptr, bool force_probe = false);

/// Inter shifts relative to reference_wafer and the intra shift vector,
/// both in millivolts.
harness::ShiftReport shift_tables(const RbaModel& m, const data::WaferId& reference_wafer);

/// Sum of squared residuals for explicit parameters; used by diagnostics
/// and by the finite-difference checks in the test suite.
double rba_loss(const data::WaferDataset& ds, const std::vector<double>& w,
                const std::map<data::WaferId, double>& b_inter,
                const std::vector<double>& b_intra);

/// One bias-step direction (2 * mean group residual) per wafer and per zone.
struct BiasStepDirection {
  std::map<data::WaferId, double> inter;
  std::vector<double> intra;
};
BiasStepDirection rba_bias_step_direction(const data::WaferDataset& ds,
                                          const std::vector<double>& w,
                                          const std::map<data::WaferId, double>& b_inter,
                                          const std::vector<double>& b_intra);

/// A fitted model of any method plus the labels needed for reporting.
struct FittedModel {
  std::string method;  // "ols" | "ba" | "rba"
  std::optional<OlsModel> ols;
  std::optional<BaModel> ba;
  std::optional<RbaModel> rba;
};

}  // namespace vminpred::est
