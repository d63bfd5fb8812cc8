#include "rgg/serialize.hpp"

#include "rgg/error.hpp"

namespace rgg {

namespace {

double number_at(const nlohmann::json& j, const char* key, const std::string& pointer) {
    const std::string where = pointer + "/" + key;
    if (!j.contains(key)) {
        throw UsageError(where + ": missing field");
    }
    if (!j.at(key).is_number()) {
        throw UsageError(where + ": expected a number");
    }
    return j.at(key).get<double>();
}

template <class Build>
DensitySpec checked(Build&& build, const std::string& where) {
    try {
        return build();
    } catch (const UsageError& e) {
        throw UsageError(where + ": " + e.what());
    }
}

}  // namespace

DensitySpec density_from_json(const nlohmann::json& j, const std::string& pointer) {
    if (!j.is_object()) {
        throw UsageError((pointer.empty() ? std::string("/") : pointer) + ": expected an object");
    }
    if (!j.contains("dimension") || !j.at("dimension").is_number_integer()) {
        throw UsageError(pointer + "/dimension: expected an integer");
    }
    const int d = j.at("dimension").get<int>();
    if (d < 2) {
        throw UsageError(pointer + "/dimension: must be >= 2");
    }
    if (!j.contains("family") || !j.at("family").is_object() || j.at("family").size() != 1) {
        throw UsageError(pointer + "/family: expected {\"heavy_tail\":{...}} or {\"light_tail\":{...}}");
    }
    const auto& family = j.at("family");
    if (family.contains("heavy_tail")) {
        const std::string where = pointer + "/family/heavy_tail";
        const double alpha = number_at(family.at("heavy_tail"), "alpha", where);
        return checked([&] { return DensitySpec::heavy_tail(d, alpha); }, where + "/alpha");
    }
    if (family.contains("light_tail")) {
        const std::string where = pointer + "/family/light_tail";
        const auto& light = family.at("light_tail");
        const double v = number_at(light, "v", where);
        const double scale = light.contains("scale") ? number_at(light, "scale", where) : 1.0;
        return checked([&] { return DensitySpec::light_tail(d, v, scale); }, where);
    }
    throw UsageError(pointer + "/family: unknown family '" + family.begin().key() + "'");
}

nlohmann::json density_to_json(const DensitySpec& spec) {
    nlohmann::json j;
    j["dimension"] = spec.dimension();
    if (spec.is_light()) {
        j["family"]["light_tail"] = {{"v", spec.light().v}, {"scale", spec.light().scale}};
    } else {
        j["family"]["heavy_tail"] = {{"alpha", spec.heavy().alpha}};
    }
    return j;
}

}  // namespace rgg
