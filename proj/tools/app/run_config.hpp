#pragma once

#include <augwm/context_adapter.hpp>
#include <augwm/eval.hpp>
#include <augwm/toy_envs.hpp>
#include <augwm/trainer.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace augwm::app {

struct KeySpec {
  std::string key;
  std::string default_value;
  std::string doc;
  /// "published", "published-scaled", "desk-scale" or "plumbing".
  std::string origin;
};

/// Every recognised key in documentation order.
const std::vector<KeySpec>& config_keys();

struct PresetSpec {
  std::string name;
  std::string doc;
  std::vector<std::pair<std::string, std::string>> values;
};

const std::vector<PresetSpec>& presets();

/// Flat key = value map. Layers, lowest first: defaults, preset, config
/// file, command line.
class RunConfig {
 public:
  RunConfig();

  /// Throws ValidationError for unknown keys.
  void set(std::string_view key, std::string value);
  void apply_preset(std::string_view name);
  /// `key = value` lines; `#` starts a comment; `[section]` prefixes the
  /// following keys with "section.". Throws ParseError with the line number.
  void merge_text(std::string_view text);
  void merge_file(const std::filesystem::path& path);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<std::size_t> get_sizes(std::string_view key) const;
  std::vector<std::uint64_t> get_u64s(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  /// Every key in table order, `key = value` per line; merge_text of the
  /// result reproduces this configuration.
  std::string snapshot() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

struct SwitchOption {
  std::size_t t = 100;
  double after_mass = 0.75;
  double after_damping = 0.5;
};

/// "t=100,after_mass=0.75,after_damping=0.5"; empty text means no switch run.
std::optional<SwitchOption> parse_switch(std::string_view text);

EnvKind env_kind(const RunConfig& c);
PolicyMix policy_mix(const RunConfig& c);
DynamicsParams data_params(const RunConfig& c);
/// Resolves train.epochs = auto to 100 without augmentation and 225 with it.
TrainConfig train_config(const RunConfig& c);
AdaptConfig adapt_config(const RunConfig& c);
GridEvalOptions grid_options(const RunConfig& c);
std::vector<ContextMode> eval_modes(const RunConfig& c);

/// Builds every derived structure so that bad values fail before any work.
void validate(const RunConfig& c);

}  // namespace augwm::app
