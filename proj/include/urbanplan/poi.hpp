#pragma once

#include <array>
#include <string_view>

namespace urban {

// Fixed 20-category POI taxonomy; codes are dense and stable.
inline constexpr int kPoiCategoryCount = 20;

inline constexpr std::array<std::string_view, kPoiCategoryCount>
    kPoiCategoryNames = {
        "road",            "car service",      "car repair",
        "motorbike service", "food service",   "shopping",
        "daily life service", "recreation service", "medical service",
        "lodging",         "tourist attraction", "real estate",
        "government place", "education",       "transportation",
        "finance",         "company",          "road furniture",
        "specific address", "public service",
};

// Categories whose mass defines the green rate proxy.
inline constexpr std::array<int, 2> kGreenCategories = {7, 10};
// Business categories; their mass moves opposite to the green rate.
inline constexpr std::array<int, 2> kBusinessCategories = {15, 16};

inline constexpr int kInstructionLevels = 5;

}  // namespace urban
