#pragma once

#include <string>

#include "urbanplan/pipeline.hpp"

namespace urban {

// Plan file: zones, raw and clamped configurations, generation metadata.
void save_plan_json(const GeneratedPlan& plan, int instruction,
                    std::uint64_t seed, const std::string& path);
GeneratedPlan load_plan_json(const std::string& path);

// One N x N comma-separated raster per category: <prefix>_cat00.csv ...
void export_plan_csv(const GeneratedPlan& plan, const std::string& prefix);

// One binary portable graymap per category, max-normalized per raster;
// all-zero rasters come out black.
void export_plan_pgm(const GeneratedPlan& plan, const std::string& prefix);

}  // namespace urban
