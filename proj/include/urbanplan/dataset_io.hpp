#pragma once

#include <string>

#include "urbanplan/synth.hpp"

namespace urban {

// Writes <dir>/manifest.json and <dir>/samples.jsonl (one sample per line).
// Schema documented in docs/formats.md.
void save_dataset(const Dataset& dataset, const std::string& dir);

Dataset load_dataset(const std::string& dir);

}  // namespace urban
