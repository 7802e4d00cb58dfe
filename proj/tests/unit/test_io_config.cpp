#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "weakseg/config.hpp"
#include "weakseg/error.hpp"
#include "weakseg/image_io.hpp"

using namespace weakseg;
namespace fs = std::filesystem;

namespace {

GrayImage random_image(std::mt19937_64& rng, int h, int w) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng() % 256);
  return GrayImage(h, w, px);
}

fs::path scratch_dir(const char* name) {
  auto dir = fs::temp_directory_path() / ("weakseg_test_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("png and pgm round trips") {
  std::mt19937_64 rng(4);
  const auto img = random_image(rng, 13, 29);
  CHECK(decode_image(encode_png(img)) == img);
  CHECK(decode_image(encode_pgm(img)) == img);

  const auto dir = scratch_dir("io");
  write_image(dir / "a.png", img);
  write_image(dir / "a.pgm", img);
  CHECK(read_image(dir / "a.png") == img);
  CHECK(read_image(dir / "a.pgm") == img);
  const auto pgm = read_file(dir / "a.pgm");
  CHECK(pgm[0] == 'P');
  CHECK(pgm[1] == '5');
  const auto png = read_file(dir / "a.png");
  CHECK(png[1] == 'P');
}

TEST_CASE("masks are stored as 0 / 255") {
  BinaryMask m(4, 5);
  m.set(1, 2);
  m.set(3, 4);
  const auto img = mask_to_image(m);
  CHECK(img.at(1, 2) == 255);
  CHECK(img.at(0, 0) == 0);
  CHECK(image_to_mask(img) == m);
  const auto dir = scratch_dir("mask");
  write_mask(dir / "m.png", m);
  CHECK(read_mask(dir / "m.png") == m);
}

TEST_CASE("pgm header with comments") {
  const std::string text = "P5\n# made by hand\n3 2\n255\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  for (std::uint8_t v : {1, 2, 3, 4, 5, 6}) bytes.push_back(v);
  const auto img = decode_image(bytes);
  CHECK(img.dims() == Dims{2, 3});
  CHECK(img.at(1, 2) == 6);
}

TEST_CASE("bad image data") {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(decode_image(junk), IoError);
  auto png = encode_png(GrayImage(8, 8, 7));
  png.resize(png.size() / 2);
  CHECK_THROWS_AS(decode_image(png), IoError);
  const std::string short_pgm = "P5\n4 4\n255\nabc";
  CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>(short_pgm.begin(), short_pgm.end())), IoError);
  CHECK_THROWS_AS(read_image("/nonexistent/none.png"), IoError);
}

TEST_CASE("config merging") {
  const GrowConfig defaults;
  CHECK(defaults.epsilon == 30.0);
  CHECK(defaults.smooth_kernel == 3);
  CHECK(defaults.close_kernel == 3);
  CHECK(defaults.bezier_offset == 3.0);
  CHECK(defaults.connectivity == 8);

  const auto cfg = merge_config(defaults, nlohmann::json::parse(
      R"({"epsilon": 12.5, "connectivity": 4, "midpoint": "arclength", "stages": {"use_fill": false}})"));
  CHECK(cfg.epsilon == 12.5);
  CHECK(cfg.connectivity == 4);
  CHECK(cfg.midpoint == MidpointMode::ArcLength);
  CHECK(cfg.stages.use_backbone);
  CHECK_FALSE(cfg.stages.use_fill);
  CHECK(cfg.smooth_kernel == 3);

  CHECK(merge_config(defaults, nlohmann::json()) == defaults);
  CHECK(merge_config(defaults, nlohmann::json::parse(to_json(cfg).dump())) == cfg);

  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"epsilom": 3})")), InvalidParameter);
  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"epsilon": "3"})")), InvalidParameter);
  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"smooth_kernel": 4})")), InvalidParameter);
  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"connectivity": 6})")), InvalidParameter);
  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"epsilon": -1})")), InvalidParameter);
  CHECK_THROWS_AS(merge_config(defaults, nlohmann::json::parse(R"({"stages": {"use_magic": true}})")),
                  InvalidParameter);
}

TEST_CASE("config files") {
  const auto dir = scratch_dir("config");
  std::ofstream(dir / "c.json") << R"({"epsilon": 20, "bezier_offset": 0})";
  const auto cfg = load_config_file(dir / "c.json");
  CHECK(cfg.epsilon == 20.0);
  CHECK(cfg.bezier_offset == 0.0);
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(load_config_file(dir / "bad.json"), IoError);
  CHECK_THROWS_AS(load_config_file(dir / "missing.json"), IoError);
}

TEST_CASE("stage lists") {
  CHECK(parse_stages("all") == StageFlags{true, true, true});
  CHECK(parse_stages("none") == StageFlags{false, false, false});
  CHECK(parse_stages("center") == StageFlags{false, false, false});
  CHECK(parse_stages("backbone") == StageFlags{true, false, false});
  CHECK(parse_stages("backbone,fill") == StageFlags{true, true, false});
  CHECK(parse_stages("backbone, fill, edge") == StageFlags{true, true, true});
  CHECK_THROWS_AS(parse_stages("backbone,wings"), InvalidParameter);
}
