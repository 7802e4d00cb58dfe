#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "weakseg/config.hpp"
#include "weakseg/error.hpp"
#include "weakseg/eval.hpp"
#include "weakseg/imaging.hpp"
#include "weakseg/phantom.hpp"
#include "weakseg/pseudolabel.hpp"
#include "weakseg/version.hpp"
#include "weakseg/weaklabel.hpp"

namespace py = pybind11;
using namespace weakseg;

namespace {

using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PyObject* label_error_type = nullptr;
PyObject* geometry_error_type = nullptr;

Dims dims_of(const py::array& a) {
  if (a.ndim() != 2) throw InvalidParameter("expected a 2-D array");
  return {static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1))};
}

GrayImage to_image(const ByteArray& a) {
  const Dims d = dims_of(a);
  return GrayImage(d.height, d.width, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

BinaryMask to_mask(const ByteArray& a) {
  const Dims d = dims_of(a);
  BinaryMask m(d);
  const auto* p = a.data();
  for (int r = 0; r < d.height; ++r)
    for (int c = 0; c < d.width; ++c) m.set(r, c, p[static_cast<std::size_t>(r) * d.width + c] != 0);
  return m;
}

py::array_t<std::uint8_t> from_image(const GrayImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

py::array_t<bool> from_mask(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto* dst = out.mutable_data();
  for (std::size_t i = 0; i < m.bits().size(); ++i) dst[i] = m.bits()[i] != 0;
  return out;
}

std::vector<std::pair<int, int>> to_pairs(const std::vector<PixelPoint>& pts) {
  std::vector<std::pair<int, int>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p.row, p.col);
  return out;
}

GrowConfig config_from(const std::string& overrides) {
  return merge_config(GrowConfig{}, overrides.empty() ? nlohmann::json() : nlohmann::json::parse(overrides));
}

void translate(std::exception_ptr p) {
  try {
    if (p) std::rethrow_exception(p);
  } catch (const LabelError& e) {
    py::object err = py::reinterpret_borrow<py::object>(label_error_type)(e.what());
    err.attr("region_index") = e.region_index();
    PyErr_SetObject(label_error_type, err.ptr());
  } catch (const ConstraintGeometryError& e) {
    py::object err = py::reinterpret_borrow<py::object>(geometry_error_type)(e.what());
    err.attr("region_index") = e.region_index();
    PyErr_SetObject(geometry_error_type, err.ptr());
  } catch (const IoError& e) {
    PyErr_SetString(PyExc_OSError, e.what());
  } catch (const Error& e) {
    PyErr_SetString(PyExc_ValueError, e.what());
  } catch (const nlohmann::json::exception& e) {
    PyErr_SetString(PyExc_ValueError, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_weakseg, m) {
  m.doc() = "Pseudo-label synthesis from point/line weak labels";

  label_error_type = PyErr_NewException("weakseg._weakseg.LabelError", PyExc_ValueError, nullptr);
  geometry_error_type = PyErr_NewException("weakseg._weakseg.ConstraintGeometryError", PyExc_ValueError, nullptr);
  m.add_object("LabelError", py::handle(label_error_type));
  m.add_object("ConstraintGeometryError", py::handle(geometry_error_type));
  py::register_exception_translator(translate);

  m.def("version", [] { return std::string(version()); });
  m.def("effective_config", [](const std::string& overrides) { return to_json(config_from(overrides)).dump(); },
        py::arg("overrides") = "");

  m.def(
      "canonical_labels",
      [](const std::string& text) { return serialize_weak_labels(parse_weak_labels(std::string_view(text))); },
      py::arg("document"));
  m.def(
      "bounding_boxes",
      [](const std::string& text, int margin) {
        const auto labels = parse_weak_labels(std::string_view(text));
        std::vector<py::tuple> out;
        for (const auto& region : labels.regions) {
          const Box b = bounding_box(region, margin, labels.dims);
          out.push_back(py::make_tuple(std::string(to_string(region.kind)), b.row_min, b.row_max, b.col_min, b.col_max));
        }
        return out;
      },
      py::arg("document"), py::arg("margin") = 0);

  m.def(
      "generate",
      [](const ByteArray& image, const std::string& labels, const std::string& config) {
        const auto img = to_image(image);
        const auto parsed = parse_weak_labels(std::string_view(labels));
        const auto cfg = config_from(config);
        PseudoLabelResult result;
        {
          py::gil_scoped_release release;
          result = generate_pseudo_label(img, parsed, cfg);
        }
        py::dict timings;
        timings["smooth"] = result.timings.smooth_ms;
        timings["backbone"] = result.timings.backbone_ms;
        timings["fill"] = result.timings.fill_ms;
        timings["constraint"] = result.timings.constraint_ms;
        timings["grow"] = result.timings.grow_ms;
        timings["close"] = result.timings.close_ms;
        timings["total"] = result.timings.total_ms;
        return py::make_tuple(from_mask(result.mask), result.empty, timings);
      },
      py::arg("image"), py::arg("labels"), py::arg("config") = "");

  m.def(
      "dice",
      [](const ByteArray& x, const ByteArray& y, bool jaccard_style) {
        return dice(to_mask(x), to_mask(y), jaccard_style ? DiceVariant::LiteralUnion : DiceVariant::Standard);
      },
      py::arg("x"), py::arg("y"), py::arg("jaccard_style") = false);
  m.def(
      "bce_dice_loss",
      [](const RealArray& prediction, const ByteArray& target, bool full_bce) {
        const Dims d = dims_of(prediction);
        const ProbabilityMap p(d.height, d.width,
                               std::vector<double>(prediction.data(), prediction.data() + prediction.size()));
        return bce_dice_loss(p, to_mask(target), {.full_bce = full_bce});
      },
      py::arg("prediction"), py::arg("target"), py::arg("full_bce") = false);

  m.def("mean_smooth", [](const ByteArray& a, int k) { return from_image(mean_smooth(to_image(a), k)); },
        py::arg("image"), py::arg("kernel"));
  m.def("dilate", [](const ByteArray& a, int k) { return from_mask(dilate(to_mask(a), k)); }, py::arg("mask"),
        py::arg("kernel"));
  m.def("erode", [](const ByteArray& a, int k) { return from_mask(erode(to_mask(a), k)); }, py::arg("mask"),
        py::arg("kernel"));
  m.def(
      "close", [](const ByteArray& a, int k, int n) { return from_mask(close(to_mask(a), k, n)); }, py::arg("mask"),
      py::arg("kernel"), py::arg("iterations") = 1);
  m.def(
      "rasterize_segment",
      [](std::pair<int, int> a, std::pair<int, int> b) {
        return to_pairs(rasterize_segment({a.first, a.second}, {b.first, b.second}));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "rasterize_bezier",
      [](std::pair<int, int> p0, std::pair<double, double> p1, std::pair<int, int> p2) {
        return to_pairs(rasterize_bezier({p0.first, p0.second}, Vec2{p1.first, p1.second}, {p2.first, p2.second}));
      },
      py::arg("p0"), py::arg("p1"), py::arg("p2"));
  m.def(
      "fill_polygon",
      [](const std::vector<std::pair<int, int>>& vertices, int height, int width) {
        std::vector<PixelPoint> pts;
        for (const auto& [r, c] : vertices) pts.push_back({r, c});
        return from_mask(fill_polygon(pts, {height, width}));
      },
      py::arg("vertices"), py::arg("height"), py::arg("width"));

  m.def(
      "make_phantom",
      [](const std::string& kind, std::uint64_t seed, double noise_sigma, int height, int width) {
        const auto k = region_kind_from_string(kind);
        if (!k) throw InvalidParameter("unknown region kind \"" + kind + "\"");
        PhantomParams p;
        p.kind = *k;
        p.seed = seed;
        p.noise_sigma = noise_sigma;
        p.height = height;
        p.width = width;
        const auto ph = make_phantom(p);
        return py::make_tuple(from_image(ph.image), from_mask(ph.truth), serialize_weak_labels(ph.labels));
      },
      py::arg("kind") = "anterior_horn", py::arg("seed") = 0, py::arg("noise_sigma") = 0.0, py::arg("height") = 224,
      py::arg("width") = 224);
}
