#include "augwm/checkpoint.hpp"

#include "augwm/csv.hpp"
#include "augwm/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace augwm {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec json_vec(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + ": non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string("checkpoint: missing field '") + key + "'");
  return *it;
}

json mlp_json(const Mlp& net) {
  json layers = json::array();
  for (const DenseLayer& l : net.layers()) {
    // Weights row-major.
    json w = json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    layers.push_back({{"weight", std::move(w)}, {"bias", vec_json(l.bias)}});
  }
  return {{"sizes", net.sizes()}, {"activation", std::string(to_string(net.activation()))}, {"layers", layers}};
}

Mlp json_mlp(const json& j) {
  const auto sizes = field(j, "sizes").get<std::vector<std::size_t>>();
  if (sizes.size() < 2) throw ValidationError("checkpoint: network needs at least two layer sizes");
  Mlp net = Mlp::zeros(sizes, parse_activation(field(j, "activation").get<std::string>()));
  const json& layers = field(j, "layers");
  if (!layers.is_array() || layers.size() != sizes.size() - 1)
    throw ValidationError("checkpoint: layer count does not match sizes");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    DenseLayer& l = net.layers()[k];
    const Vec w = json_vec(field(layers[k], "weight"), "weight");
    const Vec b = json_vec(field(layers[k], "bias"), "bias");
    if (w.size() != l.weight.size() || b.size() != l.bias.size())
      throw ValidationError("checkpoint: layer " + std::to_string(k) + " has the wrong shape");
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = w[r * l.weight.cols() + c];
    l.bias = b;
  }
  return net;
}

// Written through a temporary and renamed, so a crash never leaves a torn file.
void write_text(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(1) + "\n"); }

json read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    json j = json::parse(in);
    if (field(j, "version").get<int>() != kFormatVersion)
      throw ValidationError("checkpoint: unsupported version");
    return j;
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

}  // namespace

std::string mlp_to_json(const Mlp& net) { return mlp_json(net).dump(); }

Mlp mlp_from_json(const std::string& text) {
  try {
    return json_mlp(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(0, e.what());
  }
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  if (model.empty()) throw ValidationError("save_model: empty ensemble");
  json members = json::array();
  for (const Mlp& m : model.members()) members.push_back(mlp_json(m));
  json j = {{"version", kFormatVersion},
            {"kind", "ensemble"},
            {"s_dim", model.s_dim()},
            {"a_dim", model.a_dim()},
            {"norm", {{"mean", vec_json(model.norm().mean)}, {"std", vec_json(model.norm().std)}}},
            {"validation_nll", model.validation_nll},
            {"training_config", model.training_config},
            {"members", members}};
  write_text(path, j);
}

EnsembleModel load_model(const std::filesystem::path& path) {
  const json j = read_text(path);
  try {
    if (field(j, "kind") != "ensemble") throw ValidationError("checkpoint: not an ensemble model");
    std::vector<Mlp> members;
    for (const json& m : field(j, "members")) members.push_back(json_mlp(m));
    const json& norm = field(j, "norm");
    NormStats stats{json_vec(field(norm, "mean"), "norm.mean"), json_vec(field(norm, "std"), "norm.std")};
    EnsembleModel model(std::move(members), std::move(stats), field(j, "s_dim").get<std::size_t>(),
                        field(j, "a_dim").get<std::size_t>());
    model.validation_nll = field(j, "validation_nll").get<std::vector<double>>();
    model.training_config = field(j, "training_config").get<std::string>();
    return model;
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

void save_policy(const Actor& actor, const Critics& critics, const std::filesystem::path& path) {
  json j = {{"version", kFormatVersion},
            {"kind", "policy"},
            {"s_dim", actor.s_dim},
            {"a_dim", actor.a_dim},
            {"ctx_dim", actor.ctx_dim},
            {"gamma", critics.gamma},
            {"alpha", critics.alpha},
            {"actor", mlp_json(actor.net)},
            {"q1", mlp_json(critics.q1)},
            {"q2", mlp_json(critics.q2)},
            {"q1_target", mlp_json(critics.q1_target)},
            {"q2_target", mlp_json(critics.q2_target)}};
  write_text(path, j);
}

PolicyCheckpoint load_policy(const std::filesystem::path& path) {
  const json j = read_text(path);
  try {
    if (field(j, "kind") != "policy") throw ValidationError("checkpoint: not a policy");
    const auto s = field(j, "s_dim").get<std::size_t>();
    const auto a = field(j, "a_dim").get<std::size_t>();
    const auto c = field(j, "ctx_dim").get<std::size_t>();
    PolicyCheckpoint out;
    out.actor = Actor(json_mlp(field(j, "actor")), s, a, c);
    out.critics = Critics(json_mlp(field(j, "q1")), json_mlp(field(j, "q2")), s, a, c, field(j, "gamma").get<double>(),
                          field(j, "alpha").get<double>());
    out.critics.q1_target = json_mlp(field(j, "q1_target"));
    out.critics.q2_target = json_mlp(field(j, "q2_target"));
    if (out.critics.q1_target.sizes() != out.critics.q1.sizes() ||
        out.critics.q2_target.sizes() != out.critics.q2.sizes())
      throw ValidationError("checkpoint: target network shape mismatch");
    return out;
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

}  // namespace augwm
