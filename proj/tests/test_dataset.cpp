#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "hgnas/dataset.hpp"

using namespace hgnas;

TEST_CASE("sphere surface points have unit norm before normalization") {
  Rng rng = make_rng(1);
  Tensor2 pts = sample_shape_surface(ShapeClass::Sphere, 64, /*noise=*/0.0, rng);
  for (int i = 0; i < pts.rows; ++i) {
    double n = std::sqrt(pts(i, 0) * pts(i, 0) + pts(i, 1) * pts(i, 1) +
                         pts(i, 2) * pts(i, 2));
    CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gen_synthetic determinism and split sizes") {
  auto a = gen_synthetic({kAllShapeClasses.begin(), kAllShapeClasses.end()}, 200, 16, 0.02, 9);
  auto b = gen_synthetic({kAllShapeClasses.begin(), kAllShapeClasses.end()}, 200, 16, 0.02, 9);
  CHECK(a.train.size() == 640);
  CHECK(a.val.size() == 160);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].label == b.train[i].label);
    CHECK(max_abs_diff(a.train[i].points, b.train[i].points) == 0.0);
  }
}

TEST_CASE("splits are stratified") {
  auto split = gen_synthetic({kAllShapeClasses.begin(), kAllShapeClasses.end()}, 10, 8, 0.0, 3);
  std::vector<int> train_counts(4, 0), val_counts(4, 0);
  for (const auto& c : split.train) train_counts[c.label]++;
  for (const auto& c : split.val) val_counts[c.label]++;
  for (int k = 0; k < 4; ++k) {
    CHECK(train_counts[k] == 8);
    CHECK(val_counts[k] == 2);
  }
}

TEST_CASE("normalization invariants") {
  Rng rng = make_rng(4);
  for (ShapeClass c : kAllShapeClasses) {
    Tensor2 pts = sample_shape_surface(c, 48, 0.05, rng);
    normalize_cloud(pts);
    double cx = 0, cy = 0, cz = 0, max_r = 0;
    for (int i = 0; i < pts.rows; ++i) {
      cx += pts(i, 0);
      cy += pts(i, 1);
      cz += pts(i, 2);
      max_r = std::max(max_r, std::sqrt(pts(i, 0) * pts(i, 0) + pts(i, 1) * pts(i, 1) +
                                        pts(i, 2) * pts(i, 2)));
    }
    CHECK(std::abs(cx / pts.rows) <= 1e-9);
    CHECK(std::abs(cy / pts.rows) <= 1e-9);
    CHECK(std::abs(cz / pts.rows) <= 1e-9);
    CHECK(max_r == doctest::Approx(1.0).epsilon(1e-12));
  }

  // degenerate cloud collapses to zeros
  Tensor2 same = Tensor2::full(5, 3, 2.5);
  normalize_cloud(same);
  for (double v : same.data) CHECK(v == 0.0);
}

TEST_CASE("parse_off fixture") {
  Tensor2 pts = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  REQUIRE(pts.rows == 3);
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 0) == 1.0);
  CHECK(pts(2, 1) == 1.0);
}

TEST_CASE("parse_off tolerates comments and rejects malformed input") {
  Tensor2 pts = parse_off("OFF\n# a comment\n2 0 0\n0 0 1\n# mid comment\n1 2 3\n");
  REQUIRE(pts.rows == 2);
  CHECK(pts(1, 2) == 3.0);

  CHECK_THROWS_AS(parse_off("PLY\n3 1 0\n"), std::invalid_argument);       // bad header
  CHECK_THROWS_AS(parse_off("OFF\n4 0 0\n0 0 0\n1 1 1\n2 2 2\n"),          // count short
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_off("OFF\n1 0 0\n0 zero 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_off(""), std::invalid_argument);
}

TEST_CASE("resample") {
  Rng rng = make_rng(8);
  Tensor2 pts = sample_shape_surface(ShapeClass::Cube, 10, 0.0, rng);

  SUBCASE("same size returns a normalized permutation") {
    Tensor2 out = resample(pts, 10, 5);
    Tensor2 reference = pts;
    normalize_cloud(reference);
    // every output row appears in the normalized input
    for (int i = 0; i < out.rows; ++i) {
      bool found = false;
      for (int j = 0; j < reference.rows && !found; ++j)
        found = std::abs(out(i, 0) - reference(j, 0)) < 1e-12 &&
                std::abs(out(i, 1) - reference(j, 1)) < 1e-12 &&
                std::abs(out(i, 2) - reference(j, 2)) < 1e-12;
      CHECK(found);
    }
  }
  SUBCASE("upsampling duplicates points") {
    Tensor2 two(2, 3, {0, 0, 0, 1, 0, 0});
    Tensor2 out = resample(two, 4, 1);
    CHECK(out.rows == 4);
  }
  SUBCASE("post-normalization max radius is 1") {
    Tensor2 out = resample(pts, 6, 2);
    double max_r = 0;
    for (int i = 0; i < out.rows; ++i)
      max_r = std::max(max_r, std::sqrt(out(i, 0) * out(i, 0) + out(i, 1) * out(i, 1) +
                                        out(i, 2) * out(i, 2)));
    CHECK(max_r == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dataset cache round trip") {
  auto split = gen_synthetic({ShapeClass::Sphere, ShapeClass::Plane}, 10, 8, 0.01, 13);
  std::string dir = (std::filesystem::temp_directory_path() / "hgnas_ds_test").string();
  save_dataset(dir, split);
  DatasetSplit loaded = load_dataset(dir);
  REQUIRE(loaded.train.size() == split.train.size());
  REQUIRE(loaded.val.size() == split.val.size());
  CHECK(loaded.num_classes == 2);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    CHECK(loaded.train[i].label == split.train[i].label);
    CHECK(max_abs_diff(loaded.train[i].points, split.train[i].points) == 0.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("nearest-centroid baseline clears the separability floor") {
  DatasetSplit split = default_synthetic_dataset(1);
  CHECK(nearest_centroid_accuracy(split) > 0.60);
}
