#include "hgnas/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace hgnas {

namespace {
using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapT = Eigen::Map<EigenRowMajor>;
using ConstMapT = Eigen::Map<const EigenRowMajor>;
}  // namespace

Tensor2::Tensor2(int r, int c, std::initializer_list<double> values)
    : rows(r), cols(c), data(values) {
  if (data.size() != static_cast<std::size_t>(r) * c)
    throw std::invalid_argument("Tensor2 initializer size mismatch");
}

bool Tensor2::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor2 Tensor2::full(int r, int c, double v) {
  Tensor2 t(r, c);
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

Tensor2 Tensor2::identity(int n) {
  Tensor2 t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor2 Tensor2::randn(int r, int c, Rng& rng, double stddev) {
  Tensor2 t(r, c);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul shape mismatch");
  Tensor2 out(a.rows, b.cols);
  MapT(out.data.data(), out.rows, out.cols).noalias() =
      ConstMapT(a.data.data(), a.rows, a.cols) * ConstMapT(b.data.data(), b.rows, b.cols);
  return out;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

void add_in_place(Tensor2& dst, const Tensor2& src) {
  if (!dst.same_shape(src)) throw std::invalid_argument("add_in_place shape mismatch");
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

void axpy_in_place(Tensor2& dst, double alpha, const Tensor2& src) {
  if (!dst.same_shape(src)) throw std::invalid_argument("axpy shape mismatch");
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += alpha * src.data[i];
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace hgnas
