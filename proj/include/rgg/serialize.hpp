#pragma once

#include <string>

#include <json.hpp>

#include "rgg/density.hpp"

namespace rgg {

/// Parse a DensitySpec; errors name the JSON pointer of the offending field.
DensitySpec density_from_json(const nlohmann::json& j, const std::string& pointer = "");

nlohmann::json density_to_json(const DensitySpec& spec);

}  // namespace rgg

template <>
struct nlohmann::adl_serializer<rgg::DensitySpec> {
    static rgg::DensitySpec from_json(const json& j) { return rgg::density_from_json(j); }
    static void to_json(json& j, const rgg::DensitySpec& spec) { j = rgg::density_to_json(spec); }
};
