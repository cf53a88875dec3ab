#include "vminpred/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "csv.hpp"
#include "vminpred/rng.hpp"

namespace vminpred::data {

void WaferDataset::rebuild_groups() {
  groups.clear();
  for (std::size_t i = 0; i < dies.size(); ++i) {
    const DieRecord& die = dies[i];
    if (!die.vmin || !die.zone) continue;
    if (die.features.size() != d) {
      throw ShapeMismatch("die " + std::to_string(i) + " has " +
                          std::to_string(die.features.size()) + " features, dataset has d=" +
                          std::to_string(d));
    }
    Group& g = groups[{die.wafer_id, *die.zone}];
    g.x.append_row(die.features);
    g.y.push_back(*die.vmin);
    g.die_index.push_back(i);
  }
}

std::vector<WaferId> WaferDataset::wafer_ids() const {
  std::set<WaferId> ids;
  for (const DieRecord& die : dies) ids.insert(die.wafer_id);
  return {ids.begin(), ids.end()};
}

std::size_t WaferDataset::labeled_count() const {
  std::size_t n = 0;
  for (const DieRecord& die : dies)
    if (die.vmin) ++n;
  return n;
}

namespace {

std::size_t require_column(const std::vector<std::string>& header, const std::string& name,
                           const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaMismatch(path + ": required column '" + name + "' not in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

WaferDataset load_die_csv(const std::string& path, const DieCsvSchema& schema) {
  csv::Table t = csv::read_file(path);

  const std::size_t wafer_idx = require_column(t.header, schema.wafer_col, path);
  const std::size_t vmin_idx = require_column(t.header, schema.vmin_col, path);
  const auto zone_idx = find_column(t.header, schema.zone_col);
  const auto x_idx = find_column(t.header, schema.x_col);
  const auto y_idx = find_column(t.header, schema.y_col);
  if ((!x_idx || !y_idx) && !zone_idx) {
    throw SchemaMismatch(path + ": needs '" + schema.x_col + "'/'" + schema.y_col +
                         "' columns or a precomputed '" + schema.zone_col + "' column");
  }

  std::vector<std::size_t> feat_idx;
  if (schema.feature_cols.empty()) {
    std::set<std::size_t> claimed = {wafer_idx, vmin_idx};
    if (zone_idx) claimed.insert(*zone_idx);
    if (x_idx) claimed.insert(*x_idx);
    if (y_idx) claimed.insert(*y_idx);
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (!claimed.count(i)) feat_idx.push_back(i);
  } else {
    for (const std::string& name : schema.feature_cols)
      feat_idx.push_back(require_column(t.header, name, path));
  }
  if (feat_idx.empty()) throw SchemaMismatch(path + ": no feature columns");

  WaferDataset ds;
  ds.d = feat_idx.size();
  for (std::size_t i : feat_idx) ds.feature_names.push_back(t.header[i]);

  int max_zone = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t rowno = r + 2;  // 1-based, after the header
    DieRecord die;
    die.wafer_id = row[wafer_idx];
    if (die.wafer_id.empty()) {
      throw ParseError(path + ": row " + std::to_string(rowno) + " has an empty wafer id");
    }

    bool missing_feature = false;
    for (std::size_t i : feat_idx) {
      if (row[i].empty()) {
        missing_feature = true;
        break;
      }
      die.features.push_back(csv::parse_double(row[i], rowno, t.header[i]));
    }
    if (missing_feature) {
      ++ds.rejected_rows;
      continue;
    }

    if (x_idx && !row[*x_idx].empty())
      die.die_x = csv::parse_double(row[*x_idx], rowno, schema.x_col);
    if (y_idx && !row[*y_idx].empty())
      die.die_y = csv::parse_double(row[*y_idx], rowno, schema.y_col);

    if (!row[vmin_idx].empty()) {
      const double v = csv::parse_double(row[vmin_idx], rowno, schema.vmin_col);
      if (!(v > 0.0)) {
        throw ParseError(path + ": row " + std::to_string(rowno) +
                         ": vmin must be strictly positive, got " + row[vmin_idx]);
      }
      die.vmin = v;
    }

    if (zone_idx && !row[*zone_idx].empty()) {
      const long z = csv::parse_int(row[*zone_idx], rowno, schema.zone_col);
      if (z < 0) {
        throw ParseError(path + ": row " + std::to_string(rowno) + ": zone must be >= 0");
      }
      die.zone = static_cast<int>(z);
      max_zone = std::max(max_zone, static_cast<int>(z));
    }
    ds.dies.push_back(std::move(die));
  }
  if (ds.dies.empty()) throw EmptyFile(path + ": every row was rejected");

  ds.zone_count = max_zone + 1;
  ds.rebuild_groups();
  return ds;
}

void write_die_csv(const WaferDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  const bool with_zone = ds.zone_count > 0;
  out << "wafer_id,die_x,die_y";
  for (const std::string& name : ds.feature_names) out << ',' << name;
  out << ",vmin";
  if (with_zone) out << ",zone";
  out << '\n';

  for (const DieRecord& die : ds.dies) {
    out << die.wafer_id << ',';
    if (die.die_x) out << csv::format_g9(*die.die_x);
    out << ',';
    if (die.die_y) out << csv::format_g9(*die.die_y);
    for (double f : die.features) out << ',' << csv::format_g9(f);
    out << ',';
    if (die.vmin) out << csv::format_g9(*die.vmin);
    if (with_zone) {
      out << ',';
      if (die.zone) out << *die.zone;
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<int> assign_zones(std::span<const DieRecord> dies, int m) {
  if (m < 1) throw InvalidConfig("zone count must be >= 1");

  std::map<WaferId, std::vector<std::size_t>> by_wafer;
  for (std::size_t i = 0; i < dies.size(); ++i) {
    if (!dies[i].die_x || !dies[i].die_y) {
      throw MissingCoordinates("die " + std::to_string(i) + " on wafer '" +
                               dies[i].wafer_id + "' has no coordinates");
    }
    by_wafer[dies[i].wafer_id].push_back(i);
  }

  std::vector<int> zones(dies.size(), 0);
  for (auto& [wafer, idx] : by_wafer) {
    const std::size_t n = idx.size();
    if (n < static_cast<std::size_t>(m)) {
      throw TooFewDies("wafer '" + wafer + "' has " + std::to_string(n) +
                       " dies, fewer than " + std::to_string(m) + " zones");
    }
    double cx = 0.0, cy = 0.0;
    for (std::size_t i : idx) {
      cx += *dies[i].die_x;
      cy += *dies[i].die_y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    std::vector<std::pair<double, std::size_t>> order;  // (radius, die index)
    order.reserve(n);
    for (std::size_t i : idx) {
      order.emplace_back(std::hypot(*dies[i].die_x - cx, *dies[i].die_y - cy), i);
    }
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      if (*dies[a.second].die_x != *dies[b.second].die_x)
        return *dies[a.second].die_x < *dies[b.second].die_x;
      return *dies[a.second].die_y < *dies[b.second].die_y;
    });

    // contiguous rank bands; the first n % m bands take the extra die
    const std::size_t base = n / static_cast<std::size_t>(m);
    const std::size_t extra = n % static_cast<std::size_t>(m);
    std::size_t pos = 0;
    for (int band = 0; band < m; ++band) {
      const std::size_t size = base + (static_cast<std::size_t>(band) < extra ? 1 : 0);
      for (std::size_t q = 0; q < size; ++q) zones[order[pos++].second] = band;
    }
  }
  return zones;
}

void apply_zones(WaferDataset& ds, int m) {
  std::vector<int> zones = assign_zones(ds.dies, m);
  for (std::size_t i = 0; i < ds.dies.size(); ++i) ds.dies[i].zone = zones[i];
  ds.zone_count = m;
  ds.rebuild_groups();
}

std::pair<WaferDataset, WaferDataset> split_train_test(const WaferDataset& ds,
                                                       double fraction,
                                                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidConfig("train fraction must be in (0, 1)");
  }

  WaferDataset train, test;
  for (WaferDataset* part : {&train, &test}) {
    part->d = ds.d;
    part->zone_count = ds.zone_count;
    part->feature_names = ds.feature_names;
    part->meta = ds.meta;
  }

  for (const auto& [key, group] : ds.groups) {
    const std::size_t n = group.die_index.size();
    if (n == 0) throw GroupTooSmall("group (" + key.wafer_id + ", zone " +
                                    std::to_string(key.zone) + ") has no labeled dies");
    std::vector<std::size_t> idx = group.die_index;
    num::Rng rng(num::Rng::mix(seed, key.wafer_id, static_cast<std::uint64_t>(key.zone)));
    rng.shuffle(idx);
    const auto n_train =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));

    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + n_train);
    std::vector<std::size_t> test_idx(idx.begin() + n_train, idx.end());
    std::sort(train_idx.begin(), train_idx.end());  // keep original die order
    std::sort(test_idx.begin(), test_idx.end());
    for (std::size_t i : train_idx) train.dies.push_back(ds.dies[i]);
    for (std::size_t i : test_idx) test.dies.push_back(ds.dies[i]);
  }

  train.rebuild_groups();
  test.rebuild_groups();
  return {std::move(train), std::move(test)};
}

ClassProbeTable load_probe_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t wafer_idx = require_column(t.header, "wafer_id", path);

  ClassProbeTable table;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (i != wafer_idx) table.probe_names.push_back(t.header[i]);
  table.k = table.probe_names.size();
  if (table.k == 0) throw SchemaMismatch(path + ": no probe feature columns");

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t rowno = r + 2;
    const WaferId& wafer = row[wafer_idx];
    if (wafer.empty()) throw ParseError(path + ": row " + std::to_string(rowno) +
                                        " has an empty wafer id");
    if (table.rows.count(wafer)) {
      throw DuplicateWafer(path + ": wafer '" + wafer + "' appears twice");
    }
    std::vector<double> z;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (i == wafer_idx) continue;
      z.push_back(csv::parse_double(row[i], rowno, t.header[i]));
    }
    table.rows.emplace(wafer, std::move(z));
  }
  return table;
}

void write_probe_csv(const ClassProbeTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "wafer_id";
  for (const std::string& name : table.probe_names) out << ',' << name;
  out << '\n';
  for (const auto& [wafer, z] : table.rows) {
    out << wafer;
    for (double v : z) out << ',' << csv::format_g9(v);
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace vminpred::data
