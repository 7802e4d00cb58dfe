#include "weakseg/weaklabel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "weakseg/error.hpp"

namespace weakseg {

namespace {

using nlohmann::json;

std::string describe(PixelPoint p) {
  return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

std::string prefix(int region) { return "region " + std::to_string(region) + ": "; }

[[noreturn]] void fail(LabelErrorKind kind, int region, const std::string& message) {
  throw LabelError(kind, region, region >= 0 ? prefix(region) + message : message);
}

int read_int(const json& value, int region, const char* what) {
  if (!value.is_number_integer()) {
    fail(LabelErrorKind::Schema, region, std::string(what) + " must be an integer");
  }
  const auto v = value.get<long long>();
  if (v < -(1LL << 30) || v > (1LL << 30)) {
    fail(LabelErrorKind::OutOfBounds, region, std::string(what) + " is out of range");
  }
  return static_cast<int>(v);
}

PixelPoint read_point(const json& value, int region) {
  if (!value.is_array() || value.size() != 2) {
    fail(LabelErrorKind::Schema, region, "a point must be a [row, col] pair");
  }
  return {read_int(value[0], region, "point row"), read_int(value[1], region, "point col")};
}

const json& require(const json& object, const char* key, int region) {
  auto it = object.find(key);
  if (it == object.end()) fail(LabelErrorKind::Schema, region, std::string("missing \"") + key + "\"");
  return *it;
}

std::size_t expected_points(RegionKind kind) { return kind == RegionKind::Body ? 2 : 1; }

}  // namespace

std::string_view to_string(RegionKind kind) noexcept {
  switch (kind) {
    case RegionKind::AnteriorHorn:
      return "anterior_horn";
    case RegionKind::PosteriorHorn:
      return "posterior_horn";
    case RegionKind::Body:
      return "body";
  }
  return "body";
}

std::optional<RegionKind> region_kind_from_string(std::string_view name) noexcept {
  for (auto kind : {RegionKind::AnteriorHorn, RegionKind::PosteriorHorn, RegionKind::Body}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

PixelPoint Polyline::midpoint(MidpointMode mode) const {
  if (mode == MidpointMode::Index || points.size() < 2) {
    return points[(points.size() - 1) / 2];
  }
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    total += std::hypot(points[i].row - points[i - 1].row, points[i].col - points[i - 1].col);
  }
  double remaining = total / 2.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const PixelPoint a = points[i - 1];
    const PixelPoint b = points[i];
    const double len = std::hypot(b.row - a.row, b.col - a.col);
    if (remaining <= len || i + 1 == points.size()) {
      const double t = len > 0.0 ? std::min(remaining / len, 1.0) : 0.0;
      return {round_half_up(a.row + t * (b.row - a.row)), round_half_up(a.col + t * (b.col - a.col))};
    }
    remaining -= len;
  }
  return points.back();
}

std::vector<PixelPoint> Polyline::raster() const {
  std::vector<PixelPoint> out;
  if (points.size() == 1) return {points.front()};
  for (std::size_t i = 1; i < points.size(); ++i) {
    auto seg = rasterize_segment(points[i - 1], points[i]);
    auto begin = seg.begin();
    if (!out.empty()) ++begin;  // shared vertex
    out.insert(out.end(), begin, seg.end());
  }
  return out;
}

void validate(const WeakLabelSet& labels) {
  if (labels.dims.height < 1 || labels.dims.width < 1) {
    fail(LabelErrorKind::Schema, -1, "height and width must be positive");
  }
  std::array<bool, 3> seen{};
  auto in_bounds = [&](PixelPoint p, int region, const char* what) {
    if (!labels.dims.contains(p)) {
      fail(LabelErrorKind::OutOfBounds, region,
           std::string(what) + " " + describe(p) + " outside " + std::to_string(labels.dims.height) +
               "x" + std::to_string(labels.dims.width) + " image");
    }
  };

  for (std::size_t i = 0; i < labels.regions.size(); ++i) {
    const int idx = static_cast<int>(i);
    const auto& region = labels.regions[i];
    const auto name = std::string(to_string(region.kind));
    auto& slot = seen[static_cast<std::size_t>(region.kind)];
    if (slot) fail(LabelErrorKind::DuplicateKind, idx, "duplicate kind " + name);
    slot = true;

    const std::size_t want = expected_points(region.kind);
    const char* unit_p = want == 1 ? " point" : " points";
    const char* unit_l = want == 1 ? " line" : " lines";
    if (region.points.size() != want) {
      fail(LabelErrorKind::Schema, idx,
           name + " requires " + std::to_string(want) + unit_p + " (got " +
               std::to_string(region.points.size()) + ")");
    }
    if (region.lines.size() != want) {
      fail(LabelErrorKind::Schema, idx,
           name + " requires " + std::to_string(want) + unit_l + " (got " +
               std::to_string(region.lines.size()) + ")");
    }
    for (const auto& p : region.points) in_bounds(p, idx, "point");
    if (region.kind == RegionKind::Body && region.points[0].row > region.points[1].row) {
      fail(LabelErrorKind::Schema, idx, "body points must list the upper point first");
    }
    for (std::size_t l = 0; l < region.lines.size(); ++l) {
      const auto& line = region.lines[l];
      if (line.points.size() < 2) {
        fail(LabelErrorKind::Schema, idx, "line " + std::to_string(l) + " requires at least 2 points");
      }
      for (std::size_t k = 0; k < line.points.size(); ++k) {
        in_bounds(line.points[k], idx, "line vertex");
        if (k > 0 && line.points[k] == line.points[k - 1]) {
          fail(LabelErrorKind::Schema, idx,
               "line " + std::to_string(l) + " repeats vertex " + describe(line.points[k]));
        }
      }
      if (region.kind == RegionKind::Body && line.first().row > line.last().row) {
        fail(LabelErrorKind::Schema, idx,
             "body line " + std::to_string(l) + " must run from its upper to its lower endpoint");
      }
    }
  }
}

WeakLabelSet parse_weak_labels(const json& doc) {
  if (!doc.is_object()) fail(LabelErrorKind::Schema, -1, "document must be a JSON object");
  WeakLabelSet out;
  if (auto it = doc.find("image"); it != doc.end()) {
    if (!it->is_string()) fail(LabelErrorKind::Schema, -1, "\"image\" must be a string");
    out.image = it->get<std::string>();
  } else {
    fail(LabelErrorKind::Schema, -1, "missing \"image\"");
  }
  out.dims.height = read_int(require(doc, "height", -1), -1, "height");
  out.dims.width = read_int(require(doc, "width", -1), -1, "width");
  if (out.dims.height < 1 || out.dims.width < 1) {
    fail(LabelErrorKind::Schema, -1, "height and width must be positive");
  }

  const json& regions = require(doc, "regions", -1);
  if (!regions.is_array()) fail(LabelErrorKind::Schema, -1, "\"regions\" must be an array");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const int idx = static_cast<int>(i);
    const json& r = regions[i];
    if (!r.is_object()) fail(LabelErrorKind::Schema, idx, "region must be an object");
    const json& kind = require(r, "kind", idx);
    if (!kind.is_string()) fail(LabelErrorKind::Schema, idx, "\"kind\" must be a string");
    auto parsed = region_kind_from_string(kind.get<std::string>());
    if (!parsed) {
      fail(LabelErrorKind::Schema, idx, "unknown kind \"" + kind.get<std::string>() + "\"");
    }
    RegionAnnotation region;
    region.kind = *parsed;

    const json& points = require(r, "points", idx);
    if (!points.is_array()) fail(LabelErrorKind::Schema, idx, "\"points\" must be an array");
    for (const auto& p : points) region.points.push_back(read_point(p, idx));

    const json& lines = require(r, "lines", idx);
    if (!lines.is_array()) fail(LabelErrorKind::Schema, idx, "\"lines\" must be an array");
    for (const auto& l : lines) {
      if (!l.is_array()) fail(LabelErrorKind::Schema, idx, "a line must be an array of points");
      Polyline line;
      for (const auto& p : l) line.points.push_back(read_point(p, idx));
      region.lines.push_back(std::move(line));
    }
    out.regions.push_back(std::move(region));
  }
  validate(out);
  return out;
}

WeakLabelSet parse_weak_labels(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw LabelError(LabelErrorKind::Syntax, -1, std::string("syntax error: ") + e.what());
  }
  return parse_weak_labels(doc);
}

nlohmann::ordered_json to_json(const WeakLabelSet& labels) {
  using ojson = nlohmann::ordered_json;
  auto point = [](PixelPoint p) { return ojson::array({p.row, p.col}); };
  ojson doc;
  doc["image"] = labels.image;
  doc["height"] = labels.dims.height;
  doc["width"] = labels.dims.width;
  doc["regions"] = ojson::array();
  for (const auto& region : labels.regions) {
    ojson r;
    r["kind"] = std::string(to_string(region.kind));
    r["points"] = ojson::array();
    for (const auto& p : region.points) r["points"].push_back(point(p));
    r["lines"] = ojson::array();
    for (const auto& line : region.lines) {
      ojson l = ojson::array();
      for (const auto& p : line.points) l.push_back(point(p));
      r["lines"].push_back(std::move(l));
    }
    doc["regions"].push_back(std::move(r));
  }
  return doc;
}

std::string serialize_weak_labels(const WeakLabelSet& labels) { return to_json(labels).dump(2) + "\n"; }

Box bounding_box(const RegionAnnotation& region, int margin, std::optional<Dims> clamp_to) {
  bool first = true;
  Box box;
  auto add = [&](PixelPoint p) {
    if (first) {
      box = {p.row, p.row, p.col, p.col};
      first = false;
      return;
    }
    box.row_min = std::min(box.row_min, p.row);
    box.row_max = std::max(box.row_max, p.row);
    box.col_min = std::min(box.col_min, p.col);
    box.col_max = std::max(box.col_max, p.col);
  };
  for (const auto& p : region.points) add(p);
  for (const auto& line : region.lines)
    for (const auto& p : line.points) add(p);

  box.row_min -= margin;
  box.col_min -= margin;
  box.row_max += margin;
  box.col_max += margin;
  if (clamp_to) {
    box.row_min = std::max(box.row_min, 0);
    box.col_min = std::max(box.col_min, 0);
    box.row_max = std::min(box.row_max, clamp_to->height - 1);
    box.col_max = std::min(box.col_max, clamp_to->width - 1);
  }
  return box;
}

}  // namespace weakseg
