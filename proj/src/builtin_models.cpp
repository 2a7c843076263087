#include "brw/builtin_models.hpp"

#include "brw/errors.hpp"

namespace brw {

namespace {

JumpDistribution nearest_neighbor() {
    return JumpDistribution::create({{-1, 0.5}, {1, 0.5}});
}

ModelSpec special_binary(double p0, double p1, const std::string& label) {
    return ModelSpec::create(nearest_neighbor(), OffspringDistribution::create({p0, p1}),
                             Mode::subcritical, label);
}

}  // namespace

ModelSpec builtin_model(const std::string& name) {
    if (name == "special-binary-m05") return special_binary(0.5, 0.5, name);
    if (name == "special-binary-m08") return special_binary(0.2, 0.8, name);
    if (name == "special-binary-m09") return special_binary(0.1, 0.9, name);
    if (name == "period2-binary-m08") {
        return ModelSpec::create(JumpDistribution::create({{-2, 0.5}, {2, 0.5}}),
                                 OffspringDistribution::create({0.2, 0.8}), Mode::subcritical,
                                 name);
    }
    if (name == "r2-geom-m07") {
        return ModelSpec::create(
            JumpDistribution::create({{-2, 0.25}, {0, 0.35}, {1, 0.3}, {2, 0.1}}),
            OffspringDistribution::create({0.55, 0.27, 0.11, 0.07}), Mode::subcritical, name);
    }
    if (name == "super-binary") {
        return ModelSpec::create(nearest_neighbor(), OffspringDistribution::create({0.25, 0.0, 0.75}),
                                 Mode::supercritical, name);
    }
    throw ConfigError("unknown builtin model: " + name);
}

std::vector<std::string> builtin_model_names() {
    return {"special-binary-m05", "special-binary-m08", "special-binary-m09",
            "period2-binary-m08", "r2-geom-m07",        "super-binary"};
}

std::vector<std::string> builtin_subcritical_names() {
    return {"special-binary-m05", "special-binary-m08", "special-binary-m09",
            "period2-binary-m08", "r2-geom-m07"};
}

}  // namespace brw
