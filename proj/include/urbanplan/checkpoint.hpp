#pragma once

#include <string>
#include <utility>
#include <vector>

#include "urbanplan/autodiff.hpp"

namespace urban {

// Single-file checkpoint: magic + manifest (names, shapes) followed by one
// little-endian float64 payload per parameter. Byte layout in docs/formats.md.
void save_checkpoint(const std::string& path,
                     const std::vector<const Parameter*>& params);

// Loads by name; every requested parameter must be present with a matching
// shape. Throws std::runtime_error naming the first missing parameter.
void load_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params);

std::vector<std::pair<std::string, std::vector<std::size_t>>>
read_checkpoint_manifest(const std::string& path);

}  // namespace urban
