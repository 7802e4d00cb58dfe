#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "weakseg/error.hpp"
#include "weakseg/eval.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/phantom.hpp"

using namespace weakseg;
namespace fs = std::filesystem;

namespace {

BinaryMask mask_from(int h, int w, std::initializer_list<PixelPoint> on) {
  BinaryMask m(h, w);
  for (const auto& p : on) m.set(p);
  return m;
}

fs::path scratch_dir(const char* name) {
  auto dir = fs::temp_directory_path() / ("weakseg_eval_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Writes phantoms as files plus a manifest; returns the manifest path.
fs::path write_suite(const fs::path& dir, const std::vector<Phantom>& suite) {
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const std::string stem = "p" + std::to_string(i);
    WeakLabelSet labels = suite[i].labels;
    labels.image = stem + ".png";
    write_image(dir / (stem + ".png"), suite[i].image);
    write_mask(dir / (stem + "_gt.png"), suite[i].truth);
    std::ofstream(dir / (stem + ".json")) << serialize_weak_labels(labels);
    entries.push_back({stem + ".png", stem + ".json", fs::path(stem + "_gt.png")});
  }
  write_manifest(dir / "manifest.json", entries);
  return dir / "manifest.json";
}

}  // namespace

TEST_CASE("dice") {
  const auto a = mask_from(4, 4, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const auto b = mask_from(4, 4, {{0, 0}, {0, 1}, {3, 2}, {3, 3}});
  const auto c = mask_from(4, 4, {{3, 0}, {3, 1}});
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, c) == 0.0);
  CHECK(dice(a, b) == 0.5);
  CHECK(dice(b, a) == dice(a, b));
  CHECK(dice(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
  CHECK(dice(a, BinaryMask(4, 4)) == 0.0);
  CHECK_THROWS_AS(dice(a, BinaryMask(4, 5)), ContractError);

  SUBCASE("literal union denominator") {
    // 2*2 / |{6 pixels}|
    CHECK(dice(a, b, DiceVariant::LiteralUnion) == doctest::Approx(4.0 / 6.0));
    CHECK(dice(a, a, DiceVariant::LiteralUnion) == 2.0);
  }
}

TEST_CASE("bce + dice loss") {
  SUBCASE("perfect prediction") {
    const auto t = mask_from(5, 5, {{1, 1}, {2, 2}, {3, 3}});
    CHECK(std::abs(bce_dice_loss(ProbabilityMap::from_mask(t), t)) <= 1e-9);
    CHECK(std::abs(bce_dice_loss(ProbabilityMap::from_mask(t), t, {.full_bce = true})) <= 1e-9);
  }
  SUBCASE("single pixel at one half") {
    const ProbabilityMap p(1, 1, {0.5});
    const auto t = mask_from(1, 1, {{0, 0}});
    const double expected = -0.5 * std::log(0.5) + (1.0 - 2.0 * 0.5 / 1.5);
    CHECK(expected == doctest::Approx(0.67990).epsilon(1e-4));
    CHECK(std::abs(bce_dice_loss(p, t) - 0.67990) <= 1e-4);
    CHECK(bce_dice_loss(p, t) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("all-background target") {
    const ProbabilityMap p(2, 2, {0.1, 0.9, 0.4, 0.0});
    CHECK(bce_dice_loss(p, BinaryMask(2, 2)) == doctest::Approx(1.0));
    CHECK(bce_dice_loss(ProbabilityMap(2, 2, {0, 0, 0, 0}), BinaryMask(2, 2)) == doctest::Approx(1.0));
  }
  SUBCASE("full bce adds the background half") {
    const ProbabilityMap p(1, 2, {1.0, 0.25});
    const auto t = mask_from(1, 2, {{0, 0}});
    const double dice_term = 1.0 - 2.0 * 1.0 / 2.25;
    CHECK(bce_dice_loss(p, t) == doctest::Approx(dice_term));
    CHECK(bce_dice_loss(p, t, {.full_bce = true}) == doctest::Approx(-0.5 * std::log(0.75) / 2.0 + dice_term));
  }
  SUBCASE("zero probability is clipped") {
    const ProbabilityMap p(1, 1, {0.0});
    const auto t = mask_from(1, 1, {{0, 0}});
    CHECK(bce_dice_loss(p, t) == doctest::Approx(-0.5 * std::log(1e-7) + 1.0));
  }
  SUBCASE("batch mean") {
    const auto t = mask_from(1, 1, {{0, 0}});
    std::vector<LossSample> batch{{ProbabilityMap(1, 1, {0.5}), t}, {ProbabilityMap(1, 1, {1.0}), t}};
    CHECK(bce_dice_loss(batch) == doctest::Approx((bce_dice_loss(batch[0].prediction, t) + 0.0) / 2.0));
    CHECK_THROWS_AS(bce_dice_loss(std::span<const LossSample>{}), InvalidParameter);
  }
  SUBCASE("falls as the prediction approaches the target") {
    const auto t = mask_from(3, 3, {{0, 0}, {1, 1}, {2, 2}, {0, 2}});
    double previous = 1e9;
    for (int step = 0; step <= 20; ++step) {
      const double s = step / 20.0;
      std::vector<double> v(9);
      for (std::size_t i = 0; i < 9; ++i) v[i] = t.bits()[i] ? 0.5 + 0.5 * s : 0.5 - 0.5 * s;
      const double loss = bce_dice_loss(ProbabilityMap(3, 3, v), t);
      CHECK(loss <= previous + 1e-12);
      previous = loss;
    }
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(ProbabilityMap(1, 2, {0.5, 1.5}), InvalidParameter);
    CHECK_THROWS_AS(ProbabilityMap(2, 2, {0.5}), InvalidParameter);
    CHECK_THROWS_AS(bce_dice_loss(ProbabilityMap(1, 1, {0.5}), BinaryMask(2, 1)), ContractError);
  }
}

TEST_CASE("phantoms") {
  SUBCASE("same seed, same phantom") {
    PhantomParams p;
    p.seed = 12;
    p.noise_sigma = 5.0;
    const auto a = make_phantom(p);
    const auto b = make_phantom(p);
    CHECK(a.image == b.image);
    CHECK(a.truth == b.truth);
    CHECK(a.labels == b.labels);
    p.seed = 13;
    CHECK_FALSE(make_phantom(p).image == a.image);
  }
  SUBCASE("plain construction without noise or blur") {
    for (auto kind : {RegionKind::AnteriorHorn, RegionKind::PosteriorHorn, RegionKind::Body}) {
      PhantomParams p;
      p.kind = kind;
      p.seed = 3;
      p.blur_radius = 0;
      p.rim_contrast = 0;
      p.tear_contrast = 0;
      p.distractor = false;
      const auto ph = make_phantom(p);
      REQUIRE(ph.truth.any());
      for (int r = 0; r < ph.image.height(); ++r)
        for (int c = 0; c < ph.image.width(); ++c)
          CHECK(ph.image.at(r, c) == (ph.truth.get(r, c) ? p.foreground : p.background));
    }
  }
  SUBCASE("labels sit on the shape") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      PhantomParams p;
      p.seed = seed;
      p.kind = seed % 2 ? RegionKind::Body : RegionKind::PosteriorHorn;
      const auto ph = make_phantom(p);
      REQUIRE_NOTHROW(validate(ph.labels));
      // Acute horn tips can be thinner than a pixel, so allow two pixels.
      const auto near_truth = dilate(ph.truth, 5);
      for (const auto& region : ph.labels.regions) {
        for (const auto& pt : region.points) CHECK(near_truth.get(pt));
        for (const auto& line : region.lines)
          for (const auto& v : line.points) CHECK(near_truth.get(v));
      }
    }
  }
  SUBCASE("bad parameters") {
    PhantomParams p;
    p.height = 50;
    CHECK_THROWS_AS(make_phantom(p), InvalidParameter);
    p = {};
    p.foreground = p.background;
    CHECK_THROWS_AS(make_phantom(p), InvalidParameter);
    p = {};
    p.noise_sigma = -1.0;
    CHECK_THROWS_AS(make_phantom(p), InvalidParameter);
    p = {};
    p.foreground = 300;
    CHECK_THROWS_AS(make_phantom(p), InvalidParameter);
  }
  SUBCASE("noise-free horn through the full pipeline") {
    PhantomParams p;
    p.seed = 21;
    const auto ph = make_phantom(p);
    const auto res = generate_pseudo_label(ph.image, ph.labels, GrowConfig{});
    CHECK(dice(res.mask, ph.truth) >= 0.90);
  }
}

TEST_CASE("dataset evaluation") {
  SUBCASE("empty manifest") {
    const auto report = evaluate_dataset({}, GrowConfig{});
    CHECK(report.slices.empty());
    CHECK_FALSE(report.mean_dice.has_value());
    CHECK(to_json(report)["mean_dice"].is_null());
  }
  SUBCASE("pseudo-labels used as their own truth") {
    const auto dir = scratch_dir("self");
    auto suite = make_phantom_suite(1, 1, 3);
    for (auto& ph : suite) ph.truth = generate_pseudo_label(ph.image, ph.labels, GrowConfig{}).mask;
    const auto manifest = load_manifest(write_suite(dir, suite));
    const auto report = evaluate_dataset(manifest, GrowConfig{});
    REQUIRE(report.mean_dice.has_value());
    CHECK(*report.mean_dice == 1.0);
    CHECK(report.evaluated == 2);
  }
  SUBCASE("mean over ten phantoms equals the hand-computed mean") {
    const auto dir = scratch_dir("ten");
    const auto suite = make_phantom_suite(5, 5, 9, 4.0);
    const auto manifest = load_manifest(write_suite(dir, suite));
    const auto report = evaluate_dataset(manifest, GrowConfig{}, 3);
    REQUIRE(report.slices.size() == 10);
    std::vector<double> per;
    for (const auto& ph : suite) per.push_back(dice(generate_pseudo_label(ph.image, ph.labels, GrowConfig{}).mask, ph.truth));
    for (std::size_t i = 0; i < per.size(); ++i) CHECK(report.slices[i].dice == per[i]);
    double sum = 0.0;
    for (double d : per) sum += d;
    CHECK(*report.mean_dice == doctest::Approx(sum / 10.0).epsilon(1e-12));
    CHECK(to_text(report).find("mean") != std::string::npos);
  }
  SUBCASE("missing files and missing truth") {
    const auto dir = scratch_dir("broken");
    const auto suite = make_phantom_suite(2, 0, 1);
    auto manifest = load_manifest(write_suite(dir, suite));
    manifest[0].image = dir / "gone.png";
    manifest[1].ground_truth.reset();
    manifest.push_back(manifest[1]);
    manifest.back().ground_truth = dir / "p1_gt.png";
    const auto report = evaluate_dataset(manifest, GrowConfig{});
    CHECK(report.failed == 1);
    CHECK(report.skipped == 1);
    CHECK(report.evaluated == 1);
    CHECK(report.slices[0].status == SliceStatus::Failed);
    CHECK_FALSE(report.slices[0].message.empty());
    CHECK(report.slices[1].status == SliceStatus::Skipped);
  }
  SUBCASE("manifest errors") {
    const auto dir = scratch_dir("manifest");
    CHECK_THROWS_AS(load_manifest(dir / "none.json"), IoError);
    std::ofstream(dir / "obj.json") << R"({"image": "a"})";
    CHECK_THROWS_AS(load_manifest(dir / "obj.json"), IoError);
    std::ofstream(dir / "rel.json") << R"([{"image": "a.png", "labels": "a.json"}])";
    const auto m = load_manifest(dir / "rel.json");
    CHECK(m[0].image == dir / "a.png");
    CHECK_FALSE(m[0].ground_truth.has_value());
  }
}

TEST_CASE("ablation") {
  SUBCASE("rows follow the stage order") {
    const auto& stages = ablation_stages();
    CHECK(std::string(stages[0].label) == "Center point growth");
    CHECK(std::string(stages[3].label) == "Backbone growth + Difficult area filling + Edge limiting");
    CHECK(stages[0].stages == StageFlags{false, false, false});
    CHECK(stages[1].stages == StageFlags{true, false, false});
    CHECK(stages[2].stages == StageFlags{true, true, false});
    CHECK(stages[3].stages == StageFlags{true, true, true});
  }
  SUBCASE("single slice") {
    std::vector<Slice> slices{to_slice(make_phantom(PhantomParams{}), "only")};
    const auto report = ablate_slices(slices, GrowConfig{});
    REQUIRE(report.rows.size() == 4);
    for (const auto& row : report.rows) {
      CHECK(row.per_slice.size() == 1);
      CHECK(row.slice_count == 1);
      CHECK(*row.mean_dice == row.per_slice[0]);
    }
  }
  SUBCASE("full row equals dataset evaluation and stages improve") {
    const auto suite = make_phantom_suite(6, 6, 17);
    std::vector<Slice> slices;
    for (std::size_t i = 0; i < suite.size(); ++i) slices.push_back(to_slice(suite[i], std::to_string(i)));
    GrowConfig cfg;
    cfg.stages = {false, true, false};  // ignored by ablation, kept elsewhere
    const auto report = ablate_slices(slices, cfg, 2);
    GrowConfig full;
    const auto eval = evaluate_slices(slices, full, 1);
    CHECK(*report.rows[3].mean_dice == *eval.mean_dice);
    for (std::size_t i = 0; i < 3; ++i) CHECK(*report.rows[i].mean_dice < *report.rows[i + 1].mean_dice);
    const double mean0 = std::accumulate(report.rows[0].per_slice.begin(), report.rows[0].per_slice.end(), 0.0) /
                         static_cast<double>(report.rows[0].per_slice.size());
    CHECK(*report.rows[0].mean_dice == doctest::Approx(mean0).epsilon(1e-12));
    const auto doc = to_json(report);
    CHECK(doc["rows"].size() == 4);
    CHECK(to_text(report).find("Backbone growth + Difficult area filling") != std::string::npos);
  }
}
