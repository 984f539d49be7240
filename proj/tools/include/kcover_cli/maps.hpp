#pragma once

#include <string>

#include <kcover/envmodel.hpp>

namespace kcover::cli {

/// Builds an environment from a map spec:
///   flat:M | flat:WxH          empty terrain
///   const:M:H                  every cell at height H
///   urban:M:SEED               procedural city blocks, flood-filled heights
///   mask:PATH[:SEED]           footprint PNG, flood-filled heights
///   dataset:DIR:INDEX          terrain channel of a stored sample
///   PATH                       grayscale heightmap PNG scaled by z_ceil
Environment load_map(const std::string& spec, const EnvironmentParams& params = {});

}  // namespace kcover::cli
