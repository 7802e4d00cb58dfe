#include "weakseg/config.hpp"

#include <fstream>
#include <string>

#include "weakseg/error.hpp"

namespace weakseg {

namespace {

using nlohmann::json;

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InvalidParameter("config: \"" + key + "\" must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw InvalidParameter("config: \"" + key + "\" must be an integer");
  return v.get<int>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw InvalidParameter("config: \"" + key + "\" must be true or false");
  return v.get<bool>();
}

}  // namespace

GrowConfig merge_config(GrowConfig cfg, const json& overrides) {
  if (overrides.is_null()) return cfg;
  if (!overrides.is_object()) throw InvalidParameter("config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "epsilon") {
      cfg.epsilon = number(value, key);
    } else if (key == "smooth_kernel") {
      cfg.smooth_kernel = integer(value, key);
    } else if (key == "close_kernel") {
      cfg.close_kernel = integer(value, key);
    } else if (key == "close_iterations") {
      cfg.close_iterations = integer(value, key);
    } else if (key == "bezier_offset") {
      cfg.bezier_offset = number(value, key);
    } else if (key == "connectivity") {
      cfg.connectivity = integer(value, key);
    } else if (key == "include_line_in_backbone") {
      cfg.include_line_in_backbone = boolean(value, key);
    } else if (key == "midpoint") {
      const std::string mode = value.is_string() ? value.get<std::string>() : "";
      if (mode == "index") {
        cfg.midpoint = MidpointMode::Index;
      } else if (mode == "arclength") {
        cfg.midpoint = MidpointMode::ArcLength;
      } else {
        throw InvalidParameter("config: \"midpoint\" must be \"index\" or \"arclength\"");
      }
    } else if (key == "stages") {
      if (!value.is_object()) throw InvalidParameter("config: \"stages\" must be an object");
      for (const auto& [flag, on] : value.items()) {
        if (flag == "use_backbone") {
          cfg.stages.use_backbone = boolean(on, "stages." + flag);
        } else if (flag == "use_fill") {
          cfg.stages.use_fill = boolean(on, "stages." + flag);
        } else if (flag == "use_edge_limit") {
          cfg.stages.use_edge_limit = boolean(on, "stages." + flag);
        } else {
          throw InvalidParameter("config: unknown stage flag \"" + flag + "\"");
        }
      }
    } else {
      throw InvalidParameter("config: unknown key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

GrowConfig load_config_file(const std::filesystem::path& path, GrowConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("config " + path.string() + ": " + e.what());
  }
  return merge_config(base, doc);
}

nlohmann::ordered_json to_json(const GrowConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["epsilon"] = cfg.epsilon;
  doc["smooth_kernel"] = cfg.smooth_kernel;
  doc["close_kernel"] = cfg.close_kernel;
  doc["close_iterations"] = cfg.close_iterations;
  doc["bezier_offset"] = cfg.bezier_offset;
  doc["connectivity"] = cfg.connectivity;
  doc["midpoint"] = cfg.midpoint == MidpointMode::Index ? "index" : "arclength";
  doc["include_line_in_backbone"] = cfg.include_line_in_backbone;
  doc["stages"] = {{"use_backbone", cfg.stages.use_backbone},
                   {"use_fill", cfg.stages.use_fill},
                   {"use_edge_limit", cfg.stages.use_edge_limit}};
  return doc;
}

StageFlags parse_stages(std::string_view text) {
  if (text == "all") return {true, true, true};
  if (text == "none" || text == "center") return {false, false, false};
  StageFlags flags{false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "backbone") {
      flags.use_backbone = true;
    } else if (item == "fill") {
      flags.use_fill = true;
    } else if (item == "edge_limit" || item == "edge") {
      flags.use_edge_limit = true;
    } else {
      throw InvalidParameter("unknown stage \"" + std::string(item) + "\" (expected backbone, fill, edge_limit)");
    }
    start = end + 1;
  }
  return flags;
}

}  // namespace weakseg
