#pragma once

#include "augwm/core_types.hpp"

#include <filesystem>

namespace augwm {

/// Writes `d` as JSON Lines: a header object {"s_dim","a_dim","version":1}
/// followed by one {"s","a","r","s2","d"} object per transition. Numbers use
/// shortest round-trip formatting, so `load_dataset` restores `d` exactly.
void save_dataset(const Dataset& d, const std::filesystem::path& path);

/// Throws ParseError (with 1-based line) on malformed input and
/// ValidationError on dimension or finiteness violations.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace augwm
