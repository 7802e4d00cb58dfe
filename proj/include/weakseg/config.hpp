#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "weakseg/pseudolabel.hpp"

namespace weakseg {

/// Applies the fields present in `overrides` on top of `base`. Recognised keys:
/// epsilon, smooth_kernel, close_kernel, close_iterations, bezier_offset,
/// connectivity, midpoint ("index" | "arclength"), include_line_in_backbone and
/// stages.{use_backbone, use_fill, use_edge_limit}. Unknown keys and wrong types
/// throw InvalidParameter; the merged result is validated.
GrowConfig merge_config(GrowConfig base, const nlohmann::json& overrides);

GrowConfig load_config_file(const std::filesystem::path& path, GrowConfig base = {});

nlohmann::ordered_json to_json(const GrowConfig& cfg);

/// "all", "none" / "center", or a comma list drawn from backbone, fill,
/// edge_limit (alias edge).
StageFlags parse_stages(std::string_view text);

}  // namespace weakseg
