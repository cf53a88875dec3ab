#include "vminpred/simgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vminpred/numkit.hpp"
#include "vminpred/rng.hpp"

namespace vminpred::sim {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;
constexpr double kDiscRadius = 40.0;
constexpr double kVminFloor = 1e-3;  // volts; positivity clip

void validate(const SimConfig& cfg) {
  if (cfg.n_wafers < 1 || cfg.m_zones < 1 || cfg.dies_per_zone < 1) {
    throw InvalidConfig("wafer/zone/die counts must be >= 1");
  }
  if (cfg.d < 1 || cfg.k < 1) throw InvalidConfig("d and k must be >= 1");
  if (cfg.sigma_inter < 0 || cfg.sigma_intra < 0 || cfg.sigma_noise < 0 ||
      cfg.sigma_probe_noise < 0 || cfg.intra_perturb_sigma < 0) {
    throw InvalidConfig("noise scales must be >= 0");
  }
  if (!(cfg.base_vmin > 0)) throw InvalidConfig("base_vmin must be > 0");
  if (cfg.feature_shift_scale < 0) throw InvalidConfig("feature_shift_scale must be >= 0");
  if (!cfg.w_true.empty() && cfg.w_true.size() != cfg.d) {
    throw InvalidConfig("w_true length must equal d");
  }
  if (!cfg.w_z_true.empty() && cfg.w_z_true.size() != cfg.k) {
    throw InvalidConfig("w_z_true length must equal k");
  }
}

std::vector<double> default_w_true(std::size_t d) {
  static const double pattern[] = {0.010, -0.006, 0.004, 0.002, -0.003};
  std::vector<double> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = pattern[j % 5];
  return w;
}

std::vector<double> default_w_z_true(std::size_t k, double sigma_inter) {
  // First probe feature dominates; with z ~ N(0, I) the planted inter bias
  // has standard deviation sigma_inter.
  std::vector<double> w(k, 0.0);
  if (sigma_inter == 0.0) return w;
  if (k == 1) {
    w[0] = sigma_inter;
    return w;
  }
  const double lead = 0.98;
  const double rest = std::sqrt(1.0 - lead * lead) / std::sqrt(static_cast<double>(k - 1));
  w[0] = lead * sigma_inter;
  for (std::size_t j = 1; j < k; ++j) w[j] = rest * sigma_inter;
  return w;
}

data::WaferId wafer_name(std::size_t i, std::size_t n) {
  int width = 2;
  for (std::size_t v = n; v >= 100; v /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "W%0*zu", width, i + 1);
  return buf;
}

}  // namespace

SimResult generate(const SimConfig& cfg) {
  validate(cfg);
  const std::vector<double> w_true =
      cfg.w_true.empty() ? default_w_true(cfg.d) : cfg.w_true;
  const std::vector<double> w_z_true =
      cfg.w_z_true.empty() ? default_w_z_true(cfg.k, cfg.sigma_inter) : cfg.w_z_true;

  num::Rng rng(cfg.seed);
  SimResult out;
  out.truth.w_true = w_true;
  out.truth.w_z_true = w_z_true;
  out.truth.b_z_true = cfg.b_z_true + cfg.base_vmin;

  // Shared intra profile, zone 0 pinned to 0 (the estimator gauge).
  out.truth.b_intra_true.assign(cfg.m_zones, 0.0);
  for (std::size_t j = 1; j < cfg.m_zones; ++j) {
    out.truth.b_intra_true[j] = rng.normal(0.0, cfg.sigma_intra);
  }

  // Per-wafer draws: probe vector, effective inter bias, feature shift, and
  // the optional intra perturbation.
  std::vector<std::vector<double>> wafer_feature_shift(cfg.n_wafers);
  std::vector<std::vector<double>> intra_perturb(cfg.n_wafers,
                                                 std::vector<double>(cfg.m_zones, 0.0));
  std::vector<data::WaferId> wafer_ids(cfg.n_wafers);
  for (std::size_t i = 0; i < cfg.n_wafers; ++i) {
    wafer_ids[i] = wafer_name(i, cfg.n_wafers);
    std::vector<double> z(cfg.k);
    for (double& v : z) v = rng.normal();
    const double inter = cfg.base_vmin + num::dot(z, w_z_true) + cfg.b_z_true +
                         rng.normal(0.0, cfg.sigma_probe_noise);
    out.truth.b_inter_true[wafer_ids[i]] = inter;
    out.truth.z_true[wafer_ids[i]] = z;
    out.probes.rows[wafer_ids[i]] = std::move(z);

    wafer_feature_shift[i].resize(cfg.d);
    for (double& v : wafer_feature_shift[i]) {
      v = cfg.feature_shift_scale * rng.normal();
    }
    if (cfg.intra_perturb_sigma > 0) {
      for (double& v : intra_perturb[i]) v = rng.normal(0.0, cfg.intra_perturb_sigma);
    }
  }
  out.probes.k = cfg.k;
  for (std::size_t j = 0; j < cfg.k; ++j) {
    out.probes.probe_names.push_back("z_" + std::to_string(j + 1));
  }

  std::vector<std::vector<double>> zone_feature_shift(cfg.m_zones,
                                                      std::vector<double>(cfg.d));
  for (auto& shift : zone_feature_shift) {
    for (double& v : shift) v = cfg.feature_shift_scale * rng.normal();
  }

  // Coordinates: one sunflower layout per wafer, radii strictly increasing,
  // so equal-count radial banding recovers contiguous index blocks.
  data::WaferDataset& ds = out.dies;
  ds.d = cfg.d;
  ds.meta.test_pattern = "synthetic";
  const std::size_t dies_per_wafer = cfg.m_zones * cfg.dies_per_zone;
  for (std::size_t i = 0; i < cfg.n_wafers; ++i) {
    for (std::size_t q = 0; q < dies_per_wafer; ++q) {
      data::DieRecord die;
      die.wafer_id = wafer_ids[i];
      const double r = kDiscRadius *
                       std::sqrt((static_cast<double>(q) + 0.5) /
                                 static_cast<double>(dies_per_wafer));
      const double theta = static_cast<double>(q) * kGoldenAngle;
      die.die_x = r * std::cos(theta);
      die.die_y = r * std::sin(theta);
      ds.dies.push_back(std::move(die));
    }
  }
  const std::vector<int> zones = data::assign_zones(ds.dies, static_cast<int>(cfg.m_zones));
  for (std::size_t q = 0; q < ds.dies.size(); ++q) ds.dies[q].zone = zones[q];
  ds.zone_count = static_cast<int>(cfg.m_zones);

  for (std::size_t j = 0; j < cfg.d; ++j) {
    ds.feature_names.push_back("f_" + std::to_string(j + 1));
  }

  // Fill features and vmin; the feature means shift per wafer and per zone
  // (covariate shift) while y | x keeps the planted linear law.
  for (std::size_t idx = 0; idx < ds.dies.size(); ++idx) {
    data::DieRecord& die = ds.dies[idx];
    const std::size_t i = idx / dies_per_wafer;
    const auto j = static_cast<std::size_t>(*die.zone);
    die.features.resize(cfg.d);
    for (std::size_t f = 0; f < cfg.d; ++f) {
      die.features[f] = rng.normal() + wafer_feature_shift[i][f] + zone_feature_shift[j][f];
    }
    double y = num::dot(die.features, w_true) + out.truth.b_inter_true[die.wafer_id] +
               out.truth.b_intra_true[j] + intra_perturb[i][j] +
               rng.normal(0.0, cfg.sigma_noise);
    if (y < kVminFloor) {
      y = kVminFloor;
      ++out.truth.clipped_dies;
    }
    die.vmin = y;
  }
  ds.rebuild_groups();
  return out;
}

std::string describe(const GroundTruth& gt) {
  std::ostringstream os;
  auto mv = [](double volts) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.3f mV", volts * 1000.0);
    return std::string(buf);
  };
  os << "planted parameters\n";
  os << "w_true:";
  for (double w : gt.w_true) os << ' ' << w;
  os << '\n';
  if (!gt.b_inter_true.empty()) {
    const auto& ref = *gt.b_inter_true.begin();
    os << "inter-wafer shift from wafer " << ref.first << ":\n";
    for (const auto& [wafer, bias] : gt.b_inter_true) {
      os << "  " << wafer << "  " << mv(bias - ref.second) << '\n';
    }
  }
  os << "intra-wafer shift from center zone:\n";
  for (std::size_t j = 0; j < gt.b_intra_true.size(); ++j) {
    os << "  zone " << j << "  " << mv(gt.b_intra_true[j]) << '\n';
  }
  os << "probe model: w_z =";
  for (double w : gt.w_z_true) os << ' ' << w;
  os << ", b_z = " << gt.b_z_true << " V\n";
  os << "clipped dies: " << gt.clipped_dies << '\n';
  return os.str();
}

namespace {

using nlohmann::json;

}  // namespace

SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }

  SimConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "N_wafers") cfg.n_wafers = value.get<std::size_t>();
      else if (key == "M_zones") cfg.m_zones = value.get<std::size_t>();
      else if (key == "dies_per_zone") cfg.dies_per_zone = value.get<std::size_t>();
      else if (key == "d") cfg.d = value.get<std::size_t>();
      else if (key == "k") cfg.k = value.get<std::size_t>();
      else if (key == "w_true") cfg.w_true = value.get<std::vector<double>>();
      else if (key == "w_z_true") cfg.w_z_true = value.get<std::vector<double>>();
      else if (key == "b_z_true") cfg.b_z_true = value.get<double>();
      else if (key == "sigma_inter") cfg.sigma_inter = value.get<double>();
      else if (key == "sigma_intra") cfg.sigma_intra = value.get<double>();
      else if (key == "sigma_noise") cfg.sigma_noise = value.get<double>();
      else if (key == "sigma_probe_noise") cfg.sigma_probe_noise = value.get<double>();
      else if (key == "feature_shift_scale") cfg.feature_shift_scale = value.get<double>();
      else if (key == "base_vmin") cfg.base_vmin = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "intra_perturb_sigma") cfg.intra_perturb_sigma = value.get<double>();
      else throw InvalidConfig(path + ": unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
  validate(cfg);
  return cfg;
}

void write_ground_truth(const GroundTruth& gt, const std::string& path) {
  json j;
  j["w_true"] = gt.w_true;
  json inter = json::array();
  for (const auto& [wafer, bias] : gt.b_inter_true) {
    inter.push_back({{"wafer_id", wafer}, {"bias", bias}});
  }
  j["b_inter_true"] = inter;
  j["b_intra_true"] = gt.b_intra_true;
  j["w_z_true"] = gt.w_z_true;
  j["b_z_true"] = gt.b_z_true;
  json z = json::array();
  for (const auto& [wafer, probe] : gt.z_true) {
    z.push_back({{"wafer_id", wafer}, {"z", probe}});
  }
  j["z_true"] = z;
  j["clipped_dies"] = gt.clipped_dies;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  GroundTruth gt;
  try {
    gt.w_true = j.at("w_true").get<std::vector<double>>();
    for (const auto& e : j.at("b_inter_true")) {
      gt.b_inter_true[e.at("wafer_id").get<std::string>()] = e.at("bias").get<double>();
    }
    gt.b_intra_true = j.at("b_intra_true").get<std::vector<double>>();
    gt.w_z_true = j.at("w_z_true").get<std::vector<double>>();
    gt.b_z_true = j.at("b_z_true").get<double>();
    for (const auto& e : j.at("z_true")) {
      gt.z_true[e.at("wafer_id").get<std::string>()] = e.at("z").get<std::vector<double>>();
    }
    gt.clipped_dies = j.at("clipped_dies").get<std::size_t>();
  } catch (const json::exception& e) {
    throw SchemaMismatch(path + ": " + e.what());
  }
  return gt;
}

}  // namespace vminpred::sim
