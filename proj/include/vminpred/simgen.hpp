#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vminpred/datamodel.hpp"

namespace vminpred::sim {

/// Knobs of the synthetic wafer generator. All voltages in volts. When
/// w_true / w_z_true are left empty, defaults are derived: a fixed
/// coefficient pattern for w_true, and for w_z_true a direction dominated
/// by the first probe feature scaled so the planted inter-wafer bias spread
/// is sigma_inter.
struct SimConfig {
  std::size_t n_wafers = 5;
  std::size_t m_zones = 4;
  std::size_t dies_per_zone = 150;
  std::size_t d = 5;  // parametric features per die
  std::size_t k = 2;  // class probe features per wafer
  std::vector<double> w_true;
  std::vector<double> w_z_true;
  double b_z_true = 0.0;
  double sigma_inter = 0.015;
  double sigma_intra = 0.005;
  double sigma_noise = 0.003;
  double sigma_probe_noise = 0.0015;
  double feature_shift_scale = 0.5;  // per-wafer/zone feature mean offset (covariate shift)
  double base_vmin = 0.55;
  std::uint64_t seed = 42;
  // Robustness knob, off by default: per-(wafer, zone) deviation from the
  // shared intra profile, violating the constant-across-wafers assumption.
  double intra_perturb_sigma = 0.0;
};

/// Planted parameters in the same gauge the estimators use (zone 0 intra
/// bias pinned to 0). b_inter_true holds the full effective per-wafer
/// offset, base_vmin folded in, so fitted biases compare directly; b_z_true
/// here is likewise the effective probe-model intercept.
struct GroundTruth {
  std::vector<double> w_true;
  std::map<data::WaferId, double> b_inter_true;
  std::vector<double> b_intra_true;
  std::vector<double> w_z_true;
  double b_z_true = 0.0;
  std::map<data::WaferId, std::vector<double>> z_true;
  std::size_t clipped_dies = 0;
};

struct SimResult {
  data::WaferDataset dies;
  data::ClassProbeTable probes;
  GroundTruth truth;
};

/// Deterministic per seed. Die coordinates are laid out on a disc (sunflower
/// spiral) and zones come from assign_zones on those coordinates, so
/// re-deriving zones from the emitted CSV reproduces them exactly.
SimResult generate(const SimConfig& cfg);

/// Human-readable planted-parameter listing in mV, laid out like the fitted
/// shift tables for direct diffing.
std::string describe(const GroundTruth& gt);

SimConfig load_sim_config(const std::string& path);
void write_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace vminpred::sim
