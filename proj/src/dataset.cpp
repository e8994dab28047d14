#include "hgnas/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hgnas/rng.hpp"
#include "json.hpp"

namespace hgnas {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::Sphere:
      return "sphere";
    case ShapeClass::Cube:
      return "cube";
    case ShapeClass::Cylinder:
      return "cylinder";
    case ShapeClass::Plane:
      return "plane";
  }
  throw std::logic_error("unreachable shape class");
}

Tensor2 sample_shape_surface(ShapeClass c, int count, double noise_sigma, Rng& rng) {
  Tensor2 pts(count, 3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> face(0, 5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    double x = 0, y = 0, z = 0;
    switch (c) {
      case ShapeClass::Sphere: {
        double gx = gauss(rng), gy = gauss(rng), gz = gauss(rng);
        double n = std::sqrt(gx * gx + gy * gy + gz * gz);
        if (n < 1e-12) n = 1.0;
        x = gx / n;
        y = gy / n;
        z = gz / n;
        break;
      }
      case ShapeClass::Cube: {
        int f = face(rng);
        double u = uni(rng), v = uni(rng);
        double fixed = (f % 2 == 0) ? 1.0 : -1.0;
        if (f / 2 == 0) {
          x = fixed;
          y = u;
          z = v;
        } else if (f / 2 == 1) {
          x = u;
          y = fixed;
          z = v;
        } else {
          x = u;
          y = v;
          z = fixed;
        }
        break;
      }
      case ShapeClass::Cylinder: {
        double t = angle(rng);
        x = std::cos(t);
        y = std::sin(t);
        z = uni(rng);
        break;
      }
      case ShapeClass::Plane:
        x = uni(rng);
        y = uni(rng);
        z = 0.0;
        break;
    }
    if (noise_sigma > 0.0) {
      x += noise_sigma * gauss(rng);
      y += noise_sigma * gauss(rng);
      z += noise_sigma * gauss(rng);
    }
    pts(i, 0) = x;
    pts(i, 1) = y;
    pts(i, 2) = z;
  }
  return pts;
}

void normalize_cloud(Tensor2& points) {
  if (points.rows == 0) return;
  double cx = 0, cy = 0, cz = 0;
  for (int i = 0; i < points.rows; ++i) {
    cx += points(i, 0);
    cy += points(i, 1);
    cz += points(i, 2);
  }
  cx /= points.rows;
  cy /= points.rows;
  cz /= points.rows;
  double max_r = 0.0;
  for (int i = 0; i < points.rows; ++i) {
    points(i, 0) -= cx;
    points(i, 1) -= cy;
    points(i, 2) -= cz;
    double r = std::sqrt(points(i, 0) * points(i, 0) + points(i, 1) * points(i, 1) +
                         points(i, 2) * points(i, 2));
    max_r = std::max(max_r, r);
  }
  if (max_r < 1e-12) {
    // all points coincide; emit the all-zero cloud rather than rejecting
    std::fill(points.data.begin(), points.data.end(), 0.0);
    return;
  }
  for (auto& v : points.data) v /= max_r;
}

DatasetSplit gen_synthetic(const std::vector<ShapeClass>& classes, int per_class,
                           int points_per_cloud, double noise_sigma, std::uint64_t seed) {
  if (points_per_cloud < 8)
    throw std::invalid_argument("gen_synthetic requires at least 8 points per cloud");
  if (classes.empty() || per_class < 1)
    throw std::invalid_argument("gen_synthetic requires classes and per_class >= 1");
  DatasetSplit split;
  split.num_classes = static_cast<int>(classes.size());
  split.point_count = points_per_cloud;
  split.seed = seed;
  const int train_per_class = (per_class * 8) / 10;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (int i = 0; i < per_class; ++i) {
      Rng rng = make_rng(derive_seed(seed, c, static_cast<std::uint64_t>(i)));
      PointCloud cloud;
      cloud.points = sample_shape_surface(classes[c], points_per_cloud, noise_sigma, rng);
      normalize_cloud(cloud.points);
      cloud.label = static_cast<int>(c);
      if (i < train_per_class)
        split.train.push_back(std::move(cloud));
      else
        split.val.push_back(std::move(cloud));
    }
  }
  return split;
}

DatasetSplit default_synthetic_dataset(std::uint64_t seed) {
  return gen_synthetic({kAllShapeClasses.begin(), kAllShapeClasses.end()},
                       /*per_class=*/100, /*points_per_cloud=*/32,
                       /*noise_sigma=*/0.02, seed);
}

// ---------------------------------------------------------------------------
// OFF ingestion
// ---------------------------------------------------------------------------

namespace {

bool next_content_line(std::istringstream& in, std::string& line) {
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    line = line.substr(start);
    return true;
  }
  return false;
}

}  // namespace

Tensor2 parse_off(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  if (!next_content_line(in, line))
    throw std::invalid_argument("OFF: empty input");
  {
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    std::string rest;
    if (tag != "OFF" || (hs >> rest))
      throw std::invalid_argument("OFF: malformed header line '" + line + "'");
  }
  if (!next_content_line(in, line))
    throw std::invalid_argument("OFF: missing counts line");
  long long nv = -1, nf = 0, ne = 0;
  {
    std::istringstream cs(line);
    if (!(cs >> nv) || nv < 0)
      throw std::invalid_argument("OFF: malformed counts line '" + line + "'");
    cs >> nf >> ne;  // faces/edges optional and ignored
  }
  Tensor2 pts(static_cast<int>(nv), 3);
  for (long long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line))
      throw std::invalid_argument("OFF: declared " + std::to_string(nv) +
                                  " vertices, got only " + std::to_string(i));
    std::istringstream vs(line);
    double x, y, z;
    if (!(vs >> x >> y >> z))
      throw std::invalid_argument("OFF: non-numeric coordinate on vertex line " +
                                  std::to_string(i) + ": '" + line + "'");
    pts(static_cast<int>(i), 0) = x;
    pts(static_cast<int>(i), 1) = y;
    pts(static_cast<int>(i), 2) = z;
  }
  return pts;
}

Tensor2 resample(const Tensor2& points, int m, std::uint64_t seed) {
  if (points.rows == 0) throw std::invalid_argument("resample requires a non-empty cloud");
  if (m < 1) throw std::invalid_argument("resample target must be >= 1");
  Rng rng = make_rng(seed);
  Tensor2 out(m, 3);
  if (points.rows >= m) {
    std::vector<int> idx(points.rows);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: first m entries are a uniform sample w/o replacement
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<int> pick(i, points.rows - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = points(idx[i], j);
  } else {
    std::uniform_int_distribution<int> pick(0, points.rows - 1);
    for (int i = 0; i < m; ++i) {
      int r = pick(rng);
      for (int j = 0; j < 3; ++j) out(i, j) = points(r, j);
    }
  }
  normalize_cloud(out);
  return out;
}

// ---------------------------------------------------------------------------
// Cache files
// ---------------------------------------------------------------------------

namespace {

void append_clouds(std::ofstream& blob, const std::vector<PointCloud>& clouds) {
  for (const auto& c : clouds)
    blob.write(reinterpret_cast<const char*>(c.points.data.data()),
               static_cast<std::streamsize>(c.points.data.size() * sizeof(double)));
}

std::vector<PointCloud> read_clouds(std::ifstream& blob, const std::vector<int>& labels,
                                    int m) {
  std::vector<PointCloud> out;
  out.reserve(labels.size());
  for (int label : labels) {
    PointCloud c;
    c.points = Tensor2(m, 3);
    blob.read(reinterpret_cast<char*>(c.points.data.data()),
              static_cast<std::streamsize>(c.points.data.size() * sizeof(double)));
    if (!blob) throw std::runtime_error("dataset blob truncated");
    c.label = label;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

void save_dataset(const std::string& dir, const DatasetSplit& split) {
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["point_count"] = split.point_count;
  manifest["num_classes"] = split.num_classes;
  manifest["seed"] = split.seed;
  manifest["blob"] = "points.bin";
  json train_labels = json::array(), val_labels = json::array();
  for (const auto& c : split.train) train_labels.push_back(c.label);
  for (const auto& c : split.val) val_labels.push_back(c.label);
  manifest["train_labels"] = train_labels;
  manifest["val_labels"] = val_labels;
  std::ofstream mf(fs::path(dir) / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  std::ofstream blob(fs::path(dir) / "points.bin", std::ios::binary);
  append_clouds(blob, split.train);
  append_clouds(blob, split.val);
}

DatasetSplit load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("cannot open dataset manifest in " + dir);
  json manifest = json::parse(mf);
  DatasetSplit split;
  split.point_count = manifest.at("point_count").get<int>();
  split.num_classes = manifest.at("num_classes").get<int>();
  split.seed = manifest.value("seed", 0ull);
  std::vector<int> train_labels = manifest.at("train_labels").get<std::vector<int>>();
  std::vector<int> val_labels = manifest.at("val_labels").get<std::vector<int>>();
  std::ifstream blob(fs::path(dir) / manifest.at("blob").get<std::string>(),
                     std::ios::binary);
  if (!blob) throw std::runtime_error("cannot open dataset blob in " + dir);
  split.train = read_clouds(blob, train_labels, split.point_count);
  split.val = read_clouds(blob, val_labels, split.point_count);
  return split;
}

// ---------------------------------------------------------------------------
// Nearest-centroid baseline
// ---------------------------------------------------------------------------

std::vector<double> baseline_shape_features(const Tensor2& points) {
  const int m = points.rows;
  double mean_r = 0.0, mean_r2 = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i = 0; i < m; ++i) {
    Eigen::Vector3d p(points(i, 0), points(i, 1), points(i, 2));
    double r = p.norm();
    mean_r += r;
    mean_r2 += r * r;
    cov += p * p.transpose();
  }
  mean_r /= m;
  mean_r2 /= m;
  cov /= m;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d ev = es.eigenvalues();  // ascending
  double std_r = std::sqrt(std::max(0.0, mean_r2 - mean_r * mean_r));
  return {mean_r, std_r, ev(2), ev(1), ev(0)};
}

double nearest_centroid_accuracy(const DatasetSplit& split) {
  const std::size_t dim = 5;
  std::vector<std::vector<double>> centroids(split.num_classes,
                                             std::vector<double>(dim, 0.0));
  std::vector<int> counts(split.num_classes, 0);
  for (const auto& c : split.train) {
    auto f = baseline_shape_features(c.points);
    for (std::size_t j = 0; j < dim; ++j) centroids[c.label][j] += f[j];
    counts[c.label]++;
  }
  for (int k = 0; k < split.num_classes; ++k)
    if (counts[k] > 0)
      for (std::size_t j = 0; j < dim; ++j) centroids[k][j] /= counts[k];
  int correct = 0;
  for (const auto& c : split.val) {
    auto f = baseline_shape_features(c.points);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < split.num_classes; ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        double diff = f[j] - centroids[k][j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == c.label) ++correct;
  }
  return split.val.empty() ? 0.0 : static_cast<double>(correct) / split.val.size();
}

}  // namespace hgnas
