#pragma once

#include <string>
#include <vector>

#include "brw/model.hpp"

namespace brw {

/// Models the verify suite runs on, also shipped as data/models/*.model.
///
///   special-binary-m05 / m08 / m09 : nearest-neighbor jump, offspring {p0, p1}
///   period2-binary-m08             : jump a_{-2} = a_2 = 1/2, offspring {0.2, 0.8}
///   r2-geom-m07                    : jump a_{-2}=1/4, a_0=7/20, a_1=3/10, a_2=1/10,
///                                    trimmed-geometric offspring with mean 7/10
///   super-binary                   : supercritical {p0=1/4, p2=3/4}, nearest-neighbor
ModelSpec builtin_model(const std::string& name);

std::vector<std::string> builtin_model_names();
std::vector<std::string> builtin_subcritical_names();

}  // namespace brw
