#include "vminpred/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace vminpred::est {

namespace {

using nlohmann::json;

json biases_to_json(const std::map<data::GroupKey, double>& biases) {
  json arr = json::array();
  for (const auto& [key, bias] : biases) {
    arr.push_back({{"wafer_id", key.wafer_id}, {"zone", key.zone}, {"bias", bias}});
  }
  return arr;
}

json inter_to_json(const std::map<data::WaferId, double>& b_inter) {
  json arr = json::array();
  for (const auto& [wafer, bias] : b_inter) {
    arr.push_back({{"wafer_id", wafer}, {"bias", bias}});
  }
  return arr;
}

const char* bias_step_name(BiasStep s) {
  return s == BiasStep::gradient ? "gradient" : "exact";
}

BiasStep bias_step_from(const std::string& s) {
  if (s == "gradient") return BiasStep::gradient;
  if (s == "exact") return BiasStep::exact;
  throw SchemaMismatch("unknown bias_step '" + s + "'");
}

}  // namespace

void save_model(const FittedModel& m, const std::string& path) {
  json j;
  j["format"] = "vminpred-model";
  j["version"] = 1;
  j["method"] = m.method;
  if (m.method == "ols") {
    j["w"] = m.ols->w;
    j["b"] = m.ols->b;
  } else if (m.method == "ba") {
    j["w"] = m.ba->w;
    j["biases"] = biases_to_json(m.ba->biases);
  } else if (m.method == "rba") {
    const RbaModel& r = *m.rba;
    j["w"] = r.w;
    j["b_inter"] = inter_to_json(r.b_inter);
    j["b_intra"] = r.b_intra;
    if (r.probe) {
      j["probe"] = {{"w_z", r.probe->w_z}, {"b_z", r.probe->b_z}};
    }
    j["train_trace"] = r.train_trace;
    j["converged"] = r.converged;
    j["options_used"] = {{"eta", r.options_used.eta},
                         {"rel_tol", r.options_used.rel_tol},
                         {"max_iter", r.options_used.max_iter},
                         {"bias_step", bias_step_name(r.options_used.bias_step)},
                         {"reference_zone", r.options_used.reference_zone}};
  } else {
    throw InvalidConfig("save_model: unknown method '" + m.method + "'");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    if (j.at("format") != "vminpred-model") {
      throw SchemaMismatch(path + ": not a vminpred model file");
    }
    FittedModel m;
    m.method = j.at("method").get<std::string>();
    if (m.method == "ols") {
      OlsModel ols;
      ols.w = j.at("w").get<std::vector<double>>();
      ols.b = j.at("b").get<double>();
      m.ols = std::move(ols);
    } else if (m.method == "ba") {
      BaModel ba;
      ba.w = j.at("w").get<std::vector<double>>();
      for (const auto& e : j.at("biases")) {
        ba.biases[{e.at("wafer_id").get<std::string>(), e.at("zone").get<int>()}] =
            e.at("bias").get<double>();
      }
      m.ba = std::move(ba);
    } else if (m.method == "rba") {
      RbaModel r;
      r.w = j.at("w").get<std::vector<double>>();
      for (const auto& e : j.at("b_inter")) {
        r.b_inter[e.at("wafer_id").get<std::string>()] = e.at("bias").get<double>();
      }
      r.b_intra = j.at("b_intra").get<std::vector<double>>();
      if (j.contains("probe")) {
        ProbeBiasModel probe;
        probe.w_z = j["probe"].at("w_z").get<std::vector<double>>();
        probe.b_z = j["probe"].at("b_z").get<double>();
        r.probe = std::move(probe);
      }
      r.train_trace = j.at("train_trace").get<std::vector<double>>();
      r.converged = j.at("converged").get<bool>();
      const json& o = j.at("options_used");
      r.options_used.eta = o.at("eta").get<double>();
      r.options_used.rel_tol = o.at("rel_tol").get<double>();
      r.options_used.max_iter = o.at("max_iter").get<std::size_t>();
      r.options_used.bias_step = bias_step_from(o.at("bias_step").get<std::string>());
      r.options_used.reference_zone = o.at("reference_zone").get<int>();
      m.rba = std::move(r);
    } else {
      throw SchemaMismatch(path + ": unknown method '" + m.method + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw SchemaMismatch(path + ": " + e.what());
  }
}

}  // namespace vminpred::est
