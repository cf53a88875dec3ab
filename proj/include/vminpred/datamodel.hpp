#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vminpred/numkit.hpp"

namespace vminpred::data {

using WaferId = std::string;

/// One chip site. vmin is empty for dies that never got the voltage test;
/// such dies are kept for prediction but excluded from fitting.
struct DieRecord {
  WaferId wafer_id;
  std::optional<double> die_x;  // grid coordinates
  std::optional<double> die_y;
  std::vector<double> features;           // d parametric-test values
  std::optional<double> vmin;             // volts, strictly positive
  std::optional<int> zone;                // 0..M-1, 0 = center
};

struct GroupKey {
  WaferId wafer_id;
  int zone = 0;
  auto operator<=>(const GroupKey&) const = default;
};

/// Labeled dies of one (wafer, zone) group, materialized for fitting.
struct Group {
  num::Matrix x;                        // n_ij x d
  std::vector<double> y;                // volts
  std::vector<std::size_t> die_index;   // positions in WaferDataset::dies
};

struct DatasetMeta {
  std::string test_pattern;
  std::string temperature;
};

struct WaferDataset {
  std::size_t d = 0;   // feature count
  int zone_count = 0;  // M; 0 until zones are assigned or loaded
  std::vector<std::string> feature_names;
  DatasetMeta meta;
  std::vector<DieRecord> dies;
  std::size_t rejected_rows = 0;  // rows dropped at load time (missing features)
  std::map<GroupKey, Group> groups;

  /// Regroups labeled, zoned dies after dies/zones change.
  void rebuild_groups();

  std::vector<WaferId> wafer_ids() const;  // sorted, unique
  std::size_t labeled_count() const;
};

/// Per-wafer class probe feature vectors.
struct ClassProbeTable {
  std::size_t k = 0;
  std::vector<std::string> probe_names;
  std::map<WaferId, std::vector<double>> rows;
};

/// Column names for die CSV ingestion. feature_cols empty means "every
/// column not otherwise claimed, in header order".
struct DieCsvSchema {
  std::string wafer_col = "wafer_id";
  std::string x_col = "die_x";
  std::string y_col = "die_y";
  std::string vmin_col = "vmin";
  std::string zone_col = "zone";  // picked up when present in the header
  std::vector<std::string> feature_cols;
};

/// Loads a die CSV. Rows with a blank vmin cell come back unlabeled; rows
/// with a blank feature cell are rejected and counted in rejected_rows.
WaferDataset load_die_csv(const std::string& path, const DieCsvSchema& schema = {});

/// Writes the standard die CSV (LF line endings, 9 significant digits).
void write_die_csv(const WaferDataset& ds, const std::string& path);

/// Equal-count radial banding per wafer: dies ranked by Euclidean distance
/// from the wafer's coordinate centroid, split into m contiguous bands whose
/// sizes differ by at most one. Band 0 is the center, band m-1 the edge.
/// Radius ties break by (die_x, die_y) lexicographic order.
std::vector<int> assign_zones(std::span<const DieRecord> dies, int m);

/// assign_zones + stores labels, zone_count and rebuilt groups on ds.
void apply_zones(WaferDataset& ds, int m);

/// Stratified per (wafer, zone): ceil(fraction * n) labeled dies to train,
/// the rest to test. Deterministic for a fixed seed. Unlabeled dies are not
/// carried into either split.
std::pair<WaferDataset, WaferDataset> split_train_test(const WaferDataset& ds,
                                                       double fraction,
                                                       std::uint64_t seed);

ClassProbeTable load_probe_csv(const std::string& path);
void write_probe_csv(const ClassProbeTable& table, const std::string& path);

}  // namespace vminpred::data
