#include "augwm/dataset_io.hpp"

#include "augwm/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace augwm {
namespace {

using nlohmann::json;

json to_json_array(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec from_json_array(const json& j, std::size_t line, const char* field) {
  if (!j.is_array()) throw ParseError(line, std::string("field '") + field + "' is not an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(line, std::string("field '") + field + "' holds a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < d.size(); ++i) validate_transition(d[i], d.s_dim(), d.a_dim(), i);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");

  out << json{{"s_dim", d.s_dim()}, {"a_dim", d.a_dim()}, {"version", 1}}.dump() << '\n';
  for (const auto& t : d.transitions()) {
    json rec;
    rec["s"] = to_json_array(t.state);
    rec["a"] = to_json_array(t.action);
    rec["r"] = t.reward;
    rec["s2"] = to_json_array(t.next_state);
    rec["d"] = t.done;
    out << rec.dump() << '\n';
  }
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");

  std::string text;
  std::size_t line = 0;
  if (!std::getline(in, text)) throw ParseError(1, "missing header");
  ++line;

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(line, std::string("malformed header: ") + e.what());
  }
  if (!header.is_object()) throw ParseError(line, "header is not an object");
  const json& version = require(header, "version", line);
  if (!version.is_number_integer() || version.get<int>() != 1)
    throw ParseError(line, "unsupported dataset version");
  const json& sj = require(header, "s_dim", line);
  const json& aj = require(header, "a_dim", line);
  if (!sj.is_number_unsigned() || !aj.is_number_unsigned())
    throw ParseError(line, "s_dim/a_dim must be non-negative integers");

  Dataset d(sj.get<std::size_t>(), aj.get<std::size_t>());
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(line, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line, "record is not an object");

    Transition t;
    t.state = from_json_array(require(rec, "s", line), line, "s");
    t.action = from_json_array(require(rec, "a", line), line, "a");
    const json& r = require(rec, "r", line);
    if (!r.is_number()) throw ParseError(line, "field 'r' is not a number");
    t.reward = r.get<double>();
    t.next_state = from_json_array(require(rec, "s2", line), line, "s2");
    const json& done = require(rec, "d", line);
    if (!done.is_boolean()) throw ParseError(line, "field 'd' is not a boolean");
    t.done = done.get<bool>();

    try {
      d.add(std::move(t));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return d;
}

}  // namespace augwm
