#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hgnas/tensor.hpp"

namespace hgnas {

// A normalized cloud: centroid at the origin, max radius 1 (all-identical
// degenerate inputs become all-zero).
struct PointCloud {
  Tensor2 points;  // M x 3
  int label = 0;
};

struct DatasetSplit {
  std::vector<PointCloud> train;
  std::vector<PointCloud> val;
  int num_classes = 0;
  int point_count = 0;
  std::uint64_t seed = 0;
};

enum class ShapeClass { Sphere, Cube, Cylinder, Plane };
inline constexpr std::array<ShapeClass, 4> kAllShapeClasses = {
    ShapeClass::Sphere, ShapeClass::Cube, ShapeClass::Cylinder, ShapeClass::Plane};
std::string to_string(ShapeClass c);

// Surface samples + isotropic Gaussian noise, normalized; per class the
// first 80% of clouds go to train, the rest to val (stratified, disjoint,
// deterministic per seed).
DatasetSplit gen_synthetic(const std::vector<ShapeClass>& classes, int per_class,
                           int points_per_cloud, double noise_sigma, std::uint64_t seed);
DatasetSplit default_synthetic_dataset(std::uint64_t seed = 1);

// Raw (pre-normalization) surface sampler, exposed for tests.
Tensor2 sample_shape_surface(ShapeClass c, int count, double noise_sigma, Rng& rng);

// Center on the centroid and scale the farthest point to radius 1.
void normalize_cloud(Tensor2& points);

// ASCII OFF: "OFF" header line, "<nv> <nf> <ne>" counts, nv vertex rows of
// at least 3 numeric fields. Faces are ignored; '#' comment lines are
// skipped. Throws std::invalid_argument on malformed input.
Tensor2 parse_off(const std::string& bytes);

// Exactly M points: uniform without replacement when enough points exist,
// with replacement otherwise; result normalized.
Tensor2 resample(const Tensor2& points, int m, std::uint64_t seed);

// Dataset cache: <dir>/manifest.json + <dir>/points.bin (little-endian
// 64-bit reals, row-major M x 3 per cloud, train clouds then val clouds).
void save_dataset(const std::string& dir, const DatasetSplit& split);
DatasetSplit load_dataset(const std::string& dir);

// Nearest-centroid classifier over handcrafted global shape features;
// sanity floor proving the synthetic task is learnable.
std::vector<double> baseline_shape_features(const Tensor2& points);
double nearest_centroid_accuracy(const DatasetSplit& split);

}  // namespace hgnas
