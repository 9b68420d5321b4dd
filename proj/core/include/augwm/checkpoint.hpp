#pragma once

#include "augwm/sac.hpp"
#include "augwm/world_model.hpp"

#include <filesystem>
#include <string>

namespace augwm {

/// JSON round trip for a single network. Doubles are written with enough
/// digits to reload bit-identically.
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

/// Members, normalization statistics and training metadata.
void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);

struct PolicyCheckpoint {
  Actor actor;
  Critics critics;
};

/// Actor and twin critics (with targets). Optimizer moments are not stored;
/// loaded policies are for evaluation.
void save_policy(const Actor& actor, const Critics& critics, const std::filesystem::path& path);
PolicyCheckpoint load_policy(const std::filesystem::path& path);

}  // namespace augwm
