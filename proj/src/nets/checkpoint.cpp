#include "prd/nets/checkpoint.hpp"

#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"

namespace prd::nets {

using nlohmann::json;

json params_to_json(const ParamSet& params) {
  json out = json::array();
  for (const auto& p : params) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) data.push_back(p.value(r, c));
    }
    out.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"data", data}});
  }
  return out;
}

void params_from_json(const json& j, ParamSet& params) {
  if (!j.is_array() || j.size() != params.size()) {
    throw ConfigError("checkpoint parameter list does not match the network");
  }
  for (const auto& entry : j) {
    const std::string name = entry.at("name").get<std::string>();
    if (!params.contains(name)) throw ConfigError("checkpoint has unknown parameter " + name);
    Parameter& p = params.at(name);
    const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols()) {
      throw ConfigError("checkpoint shape mismatch for " + name);
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != p.value.size()) {
      throw ConfigError("checkpoint data length mismatch for " + name);
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) p.value(r, c) = data[k++];
    }
  }
}

namespace {

json popart_to_json(const PopArt& popart) {
  const PopArtStats& s = popart.stats();
  return {{"mean_ema", s.mean_ema}, {"second_ema", s.second_ema}, {"debias", s.debias},
          {"beta", s.beta},         {"sigma_min", s.sigma_min},   {"count", s.count}};
}

PopArtStats popart_from_json(const json& j) {
  PopArtStats s;
  s.mean_ema = j.at("mean_ema").get<double>();
  s.second_ema = j.at("second_ema").get<double>();
  s.debias = j.at("debias").get<double>();
  s.beta = j.at("beta").get<double>();
  s.sigma_min = j.at("sigma_min").get<double>();
  s.count = j.at("count").get<long long>();
  return s;
}

}  // namespace

json checkpoint_to_json(const Model& model, const json& metadata) {
  const ModelConfig& c = model.config;
  json doc;
  doc["format"] = "prd-marl-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["model"] = {{"obs_dim", c.obs_dim},       {"state_dim", c.state_dim},
                  {"num_actions", c.num_actions}, {"num_agents", c.num_agents},
                  {"hidden", c.hidden},         {"attention_dim", c.attention_dim},
                  {"popart_beta", c.popart_beta}};
  doc["metadata"] = metadata;
  doc["policy"] = {{"params", params_to_json(model.policy.params())}};
  doc["q"] = {{"params", params_to_json(model.q.params())}, {"popart", popart_to_json(model.q.popart())}};
  doc["v"] = {{"params", params_to_json(model.v.params())}, {"popart", popart_to_json(model.v.popart())}};
  return doc;
}

Model model_from_checkpoint(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "prd-marl-checkpoint") {
      throw ConfigError("not a checkpoint document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    const json& m = doc.at("model");
    ModelConfig c;
    c.obs_dim = m.at("obs_dim").get<int>();
    c.state_dim = m.at("state_dim").get<int>();
    c.num_actions = m.at("num_actions").get<int>();
    c.num_agents = m.at("num_agents").get<int>();
    c.hidden = m.at("hidden").get<int>();
    c.attention_dim = m.at("attention_dim").get<int>();
    c.popart_beta = m.at("popart_beta").get<double>();
    Model model = make_model(c, 0);
    params_from_json(doc.at("policy").at("params"), model.policy.params());
    params_from_json(doc.at("q").at("params"), model.q.params());
    params_from_json(doc.at("v").at("params"), model.v.params());
    model.q.popart().set_stats(popart_from_json(doc.at("q").at("popart")));
    model.v.popart().set_stats(popart_from_json(doc.at("v").at("popart")));
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const json& metadata) {
  atomic_write_file(path, checkpoint_to_json(model, metadata).dump());
}

json read_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace prd::nets
