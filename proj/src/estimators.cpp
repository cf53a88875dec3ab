#include "vminpred/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace vminpred::est {

namespace {

void validate_options(const RbaOptions& opt, int zone_count) {
  if (!(opt.eta > 0.0 && opt.eta < 1.0)) throw InvalidConfig("eta must be in (0, 1)");
  if (!(opt.rel_tol > 0.0)) throw InvalidConfig("rel_tol must be > 0");
  if (opt.max_iter < 1) throw InvalidConfig("max_iter must be >= 1");
  if (opt.reference_zone < 0 || opt.reference_zone >= zone_count) {
    throw InvalidConfig("reference zone " + std::to_string(opt.reference_zone) +
                        " outside 0.." + std::to_string(zone_count - 1));
  }
}

/// Flat view of every labeled die with wafer/zone indices, shared by the
/// RBA iteration and the loss/gradient helpers.
struct Pooled {
  num::Matrix x;
  std::vector<double> y;
  std::vector<std::size_t> wafer_of;  // index into wafers
  std::vector<int> zone_of;
  std::vector<data::WaferId> wafers;  // sorted
  std::vector<std::size_t> wafer_size;
  std::vector<std::size_t> zone_size;
  int zone_count = 0;
};

Pooled pool_labeled(const data::WaferDataset& ds) {
  if (ds.groups.empty()) throw EmptyInput("dataset has no labeled, zoned dies");
  Pooled p;
  p.zone_count = ds.zone_count;
  for (const auto& [key, group] : ds.groups) {
    if (std::find(p.wafers.begin(), p.wafers.end(), key.wafer_id) == p.wafers.end()) {
      p.wafers.push_back(key.wafer_id);  // groups map is sorted by wafer id
    }
    p.zone_count = std::max(p.zone_count, key.zone + 1);
  }
  p.wafer_size.assign(p.wafers.size(), 0);
  p.zone_size.assign(static_cast<std::size_t>(p.zone_count), 0);
  for (const auto& [key, group] : ds.groups) {
    const auto wi = static_cast<std::size_t>(
        std::find(p.wafers.begin(), p.wafers.end(), key.wafer_id) - p.wafers.begin());
    for (std::size_t r = 0; r < group.x.rows(); ++r) {
      p.x.append_row(group.x.row(r));
      p.y.push_back(group.y[r]);
      p.wafer_of.push_back(wi);
      p.zone_of.push_back(key.zone);
    }
    p.wafer_size[wi] += group.x.rows();
    p.zone_size[static_cast<std::size_t>(key.zone)] += group.x.rows();
  }
  return p;
}

double sum_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<double> pooled_residuals(const Pooled& p, const std::vector<double>& w,
                                     const std::vector<double>& b_inter_by_idx,
                                     const std::vector<double>& b_intra) {
  std::vector<double> r(p.y.size());
  for (std::size_t q = 0; q < p.y.size(); ++q) {
    r[q] = p.y[q] - num::dot(p.x.row(q), w) - b_inter_by_idx[p.wafer_of[q]] -
           b_intra[static_cast<std::size_t>(p.zone_of[q])];
  }
  return r;
}

}  // namespace

OlsModel fit_ols(const num::Matrix& x, const std::vector<double>& y) {
  if (x.rows() != y.size()) throw ShapeMismatch("fit_ols: row/target count mismatch");
  if (x.rows() <= x.cols()) {
    throw TooFewSamples("fit_ols: need more samples than features (n > d)");
  }
  num::check_finite(y, "targets");
  auto [xc, xbar] = num::centralize(x);
  const double ybar = num::mean(y);
  std::vector<double> yc(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yc[i] = y[i] - ybar;

  OlsModel m;
  m.w = num::solve_least_squares(xc, yc);
  m.b = ybar - num::dot(xbar, m.w);
  return m;
}

double predict_ols(const OlsModel& m, std::span<const double> x) {
  if (x.size() != m.w.size()) throw ShapeMismatch("predict_ols: feature count mismatch");
  return num::dot(x, m.w) + m.b;
}

std::vector<double> residuals(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size()) throw ShapeMismatch("residuals: length mismatch");
  std::vector<double> r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - yhat[i];
  return r;
}

BaModel fit_ba(const data::WaferDataset& ds) {
  if (ds.groups.empty()) throw EmptyInput("fit_ba: dataset has no labeled, zoned dies");

  // Stack the per-group centered data; QR on the stack solves the pooled
  // per-group normal equations without forming the Gram matrix.
  num::Matrix xc_all;
  std::vector<double> yc_all;
  struct GroupMeans {
    data::GroupKey key;
    std::vector<double> x_mean;
    double y_mean;
  };
  std::vector<GroupMeans> means;

  for (const auto& [key, group] : ds.groups) {
    if (group.y.size() < 2) {
      throw GroupTooSmall("fit_ba: group (" + key.wafer_id + ", zone " +
                          std::to_string(key.zone) + ") has " +
                          std::to_string(group.y.size()) + " labeled dies, need >= 2");
    }
    auto [xc, xbar] = num::centralize(group.x);
    const double ybar = num::mean(group.y);
    for (std::size_t r = 0; r < xc.rows(); ++r) {
      xc_all.append_row(xc.row(r));
      yc_all.push_back(group.y[r] - ybar);
    }
    means.push_back({key, std::move(xbar), ybar});
  }

  BaModel m;
  m.w = num::solve_least_squares(xc_all, yc_all);
  for (const auto& g : means) {
    m.biases[g.key] = g.y_mean - num::dot(g.x_mean, m.w);
  }
  return m;
}

double predict_ba(const BaModel& m, std::span<const double> x, const data::WaferId& wafer,
                  int zone) {
  if (x.size() != m.w.size()) throw ShapeMismatch("predict_ba: feature count mismatch");
  auto it = m.biases.find({wafer, zone});
  if (it == m.biases.end()) {
    throw UnknownGroup("predict_ba: no bias for (" + wafer + ", zone " +
                       std::to_string(zone) + "); BA needs labeled dies from every "
                       "group it predicts for");
  }
  return num::dot(x, m.w) + it->second;
}

RbaModel fit_rba(const data::WaferDataset& ds, const data::ClassProbeTable* probes,
                 const RbaOptions& opt) {
  Pooled p = pool_labeled(ds);
  validate_options(opt, p.zone_count);

  // Step 0: BA closed form, then split each group bias into a per-wafer
  // component (mean over the wafer's zones) and a per-zone remainder.
  BaModel ba = fit_ba(ds);
  const std::size_t n_wafers = p.wafers.size();
  const auto n_zones = static_cast<std::size_t>(p.zone_count);

  std::vector<double> b_inter(n_wafers, 0.0);
  std::vector<double> b_intra(n_zones, 0.0);
  {
    std::vector<std::size_t> wafer_groups(n_wafers, 0);
    for (const auto& [key, bias] : ba.biases) {
      const auto wi = static_cast<std::size_t>(
          std::find(p.wafers.begin(), p.wafers.end(), key.wafer_id) - p.wafers.begin());
      b_inter[wi] += bias;
      ++wafer_groups[wi];
    }
    for (std::size_t i = 0; i < n_wafers; ++i) b_inter[i] /= static_cast<double>(wafer_groups[i]);

    std::vector<std::size_t> zone_groups(n_zones, 0);
    for (const auto& [key, bias] : ba.biases) {
      const auto wi = static_cast<std::size_t>(
          std::find(p.wafers.begin(), p.wafers.end(), key.wafer_id) - p.wafers.begin());
      b_intra[static_cast<std::size_t>(key.zone)] += bias - b_inter[wi];
      ++zone_groups[static_cast<std::size_t>(key.zone)];
    }
    for (std::size_t j = 0; j < n_zones; ++j) {
      if (zone_groups[j] > 0) b_intra[j] /= static_cast<double>(zone_groups[j]);
    }
  }

  RbaModel model;
  model.options_used = opt;
  model.w = ba.w;

  double loss = sum_squares(pooled_residuals(p, model.w, b_inter, b_intra));
  model.train_trace.push_back(loss);

  int rising = 0;
  bool stopped = false;
  std::vector<double> adjusted(p.y.size());
  for (std::size_t t = 1; t <= opt.max_iter; ++t) {
    // w-step: exact least squares on the raw pooled design against
    // bias-adjusted targets; the biases carry all intercept content.
    for (std::size_t q = 0; q < p.y.size(); ++q) {
      adjusted[q] = p.y[q] - b_inter[p.wafer_of[q]] -
                    b_intra[static_cast<std::size_t>(p.zone_of[q])];
    }
    model.w = num::solve_least_squares(p.x, adjusted);

    if (opt.bias_step == BiasStep::gradient) {
      // Simultaneous step b_g += 2*eta*mean(residual of group g). The per-die
      // mean form keeps eta scale-free across group sizes; each die belongs
      // to one wafer and one zone, so the combined step contracts the bias
      // error for any eta < 1/2.
      std::vector<double> r = pooled_residuals(p, model.w, b_inter, b_intra);
      std::vector<double> inter_mean(n_wafers, 0.0);
      std::vector<double> intra_mean(n_zones, 0.0);
      for (std::size_t q = 0; q < r.size(); ++q) {
        inter_mean[p.wafer_of[q]] += r[q];
        intra_mean[static_cast<std::size_t>(p.zone_of[q])] += r[q];
      }
      for (std::size_t i = 0; i < n_wafers; ++i) {
        b_inter[i] += 2.0 * opt.eta * inter_mean[i] / static_cast<double>(p.wafer_size[i]);
      }
      for (std::size_t j = 0; j < n_zones; ++j) {
        if (p.zone_size[j] > 0) {
          b_intra[j] += 2.0 * opt.eta * intra_mean[j] / static_cast<double>(p.zone_size[j]);
        }
      }
    } else {
      // Exact block updates: each bias block set to its optimum given the
      // other block and w (coordinate descent, monotone by construction).
      std::vector<double> acc(n_wafers, 0.0);
      for (std::size_t q = 0; q < p.y.size(); ++q) {
        acc[p.wafer_of[q]] += p.y[q] - num::dot(p.x.row(q), model.w) -
                              b_intra[static_cast<std::size_t>(p.zone_of[q])];
      }
      for (std::size_t i = 0; i < n_wafers; ++i) {
        b_inter[i] = acc[i] / static_cast<double>(p.wafer_size[i]);
      }
      std::vector<double> zacc(n_zones, 0.0);
      for (std::size_t q = 0; q < p.y.size(); ++q) {
        zacc[static_cast<std::size_t>(p.zone_of[q])] +=
            p.y[q] - num::dot(p.x.row(q), model.w) - b_inter[p.wafer_of[q]];
      }
      for (std::size_t j = 0; j < n_zones; ++j) {
        if (p.zone_size[j] > 0) b_intra[j] = zacc[j] / static_cast<double>(p.zone_size[j]);
      }
    }

    const double prev = loss;
    loss = sum_squares(pooled_residuals(p, model.w, b_inter, b_intra));
    model.train_trace.push_back(loss);

    if (loss > prev * (1.0 + 1e-9)) {
      if (++rising >= 3) {
        throw Diverged("fit_rba: loss increased for 3 consecutive iterations (" +
                       std::to_string(prev) + " -> " + std::to_string(loss) + ")");
      }
    } else {
      rising = 0;
    }

    const double improvement = prev > 0.0 ? (prev - loss) / prev : 0.0;
    if (improvement < opt.rel_tol) {
      stopped = true;
      break;
    }
  }
  model.converged = stopped;

  // Gauge: transfer the reference zone's intra bias into the inter block so
  // b_intra[reference_zone] is exactly 0. Loss-invariant.
  const double c = b_intra[static_cast<std::size_t>(opt.reference_zone)];
  for (double& v : b_intra) v -= c;
  b_intra[static_cast<std::size_t>(opt.reference_zone)] = 0.0;
  for (std::size_t i = 0; i < n_wafers; ++i) {
    model.b_inter[p.wafers[i]] = b_inter[i] + c;
  }
  model.b_intra = std::move(b_intra);

  if (probes != nullptr) {
    model.probe = fit_probe_bias_model(model.b_inter, *probes);
  }
  return model;
}

ProbeBiasModel fit_probe_bias_model(const std::map<data::WaferId, double>& b_inter,
                                    const data::ClassProbeTable& probes) {
  const std::size_t n = b_inter.size();
  if (n <= probes.k + 1) {
    throw TooFewWafers("probe bias model needs more wafers than probe features + 1 (" +
                       std::to_string(n) + " wafers, k=" + std::to_string(probes.k) + ")");
  }
  num::Matrix z;
  std::vector<double> target;
  for (const auto& [wafer, bias] : b_inter) {
    auto it = probes.rows.find(wafer);
    if (it == probes.rows.end()) {
      throw UnknownWafer("no class probe row for wafer '" + wafer + "'");
    }
    if (it->second.size() != probes.k) {
      throw ShapeMismatch("probe row for wafer '" + wafer + "' has wrong length");
    }
    z.append_row(it->second);
    target.push_back(bias);
  }

  auto [zc, zbar] = num::centralize(z);
  const double tbar = num::mean(target);
  std::vector<double> tc(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) tc[i] = target[i] - tbar;

  ProbeBiasModel m;
  m.w_z = num::solve_least_squares(zc, tc);
  m.b_z = tbar - num::dot(zbar, m.w_z);
  return m;
}

double predict_rba(const RbaModel& m, std::span<const double> x, int zone,
                   const std::optional<data::WaferId>& wafer, const std::vector<double>* z,
                   bool force_probe) {
  if (x.size() != m.w.size()) throw ShapeMismatch("predict_rba: feature count mismatch");
  if (zone < 0 || static_cast<std::size_t>(zone) >= m.b_intra.size()) {
    throw UnknownGroup("predict_rba: zone " + std::to_string(zone) + " outside 0.." +
                       std::to_string(m.b_intra.size() - 1));
  }

  double inter = 0.0;
  bool have_inter = false;
  if (!force_probe && wafer) {
    auto it = m.b_inter.find(*wafer);
    if (it != m.b_inter.end()) {
      inter = it->second;
      have_inter = true;
    }
  }
  if (!have_inter) {
    if (z != nullptr && m.probe) {
      if (z->size() != m.probe->w_z.size()) {
        throw ShapeMismatch("predict_rba: probe vector length mismatch");
      }
      inter = num::dot(*z, m.probe->w_z) + m.probe->b_z;
      have_inter = true;
    }
  }
  if (!have_inter) {
    throw NoInterBiasSource("predict_rba: wafer is not a training wafer and no probe "
                            "vector/model is available");
  }
  return num::dot(x, m.w) + inter + m.b_intra[static_cast<std::size_t>(zone)];
}

harness::ShiftReport shift_tables(const RbaModel& m, const data::WaferId& reference_wafer) {
  auto ref = m.b_inter.find(reference_wafer);
  if (ref == m.b_inter.end()) {
    throw UnknownWafer("shift_tables: '" + reference_wafer + "' is not a training wafer");
  }
  harness::ShiftReport s;
  s.reference_wafer = reference_wafer;
  for (const auto& [wafer, bias] : m.b_inter) {
    s.inter_mv.emplace_back(wafer, (bias - ref->second) * 1000.0);
  }
  for (double v : m.b_intra) s.intra_mv.push_back(v * 1000.0);
  return s;
}

double rba_loss(const data::WaferDataset& ds, const std::vector<double>& w,
                const std::map<data::WaferId, double>& b_inter,
                const std::vector<double>& b_intra) {
  double loss = 0.0;
  for (const auto& [key, group] : ds.groups) {
    auto it = b_inter.find(key.wafer_id);
    if (it == b_inter.end()) throw UnknownWafer("rba_loss: no inter bias for '" + key.wafer_id + "'");
    if (key.zone < 0 || static_cast<std::size_t>(key.zone) >= b_intra.size()) {
      throw UnknownGroup("rba_loss: zone " + std::to_string(key.zone) + " out of range");
    }
    const double b = it->second + b_intra[static_cast<std::size_t>(key.zone)];
    for (std::size_t r = 0; r < group.x.rows(); ++r) {
      const double e = group.y[r] - num::dot(group.x.row(r), w) - b;
      loss += e * e;
    }
  }
  return loss;
}

BiasStepDirection rba_bias_step_direction(const data::WaferDataset& ds,
                                          const std::vector<double>& w,
                                          const std::map<data::WaferId, double>& b_inter,
                                          const std::vector<double>& b_intra) {
  BiasStepDirection dir;
  dir.intra.assign(b_intra.size(), 0.0);
  std::map<data::WaferId, std::size_t> wafer_n;
  std::vector<std::size_t> zone_n(b_intra.size(), 0);

  for (const auto& [key, group] : ds.groups) {
    auto it = b_inter.find(key.wafer_id);
    if (it == b_inter.end()) throw UnknownWafer("no inter bias for '" + key.wafer_id + "'");
    const double b = it->second + b_intra.at(static_cast<std::size_t>(key.zone));
    for (std::size_t r = 0; r < group.x.rows(); ++r) {
      const double res = group.y[r] - num::dot(group.x.row(r), w) - b;
      dir.inter[key.wafer_id] += res;
      dir.intra[static_cast<std::size_t>(key.zone)] += res;
      ++wafer_n[key.wafer_id];
      ++zone_n[static_cast<std::size_t>(key.zone)];
    }
  }
  for (auto& [wafer, v] : dir.inter) v = 2.0 * v / static_cast<double>(wafer_n[wafer]);
  for (std::size_t j = 0; j < dir.intra.size(); ++j) {
    if (zone_n[j] > 0) dir.intra[j] = 2.0 * dir.intra[j] / static_cast<double>(zone_n[j]);
  }
  return dir;
}

}  // namespace vminpred::est
