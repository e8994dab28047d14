#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "hgnas/rng.hpp"

namespace hgnas {

// Dense row-major matrix of doubles. The whole pipeline is 64-bit: sizes are
// desk scale, gradient-check tolerances are the priority.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Tensor2(int r, int c, std::initializer_list<double> values);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;

  static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }
  static Tensor2 full(int r, int c, double v);
  static Tensor2 identity(int n);
  // i.i.d. N(0, stddev^2)
  static Tensor2 randn(int r, int c, Rng& rng, double stddev = 1.0);
};

// Plain (untaped) helpers used outside training loops.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 transpose(const Tensor2& a);
void add_in_place(Tensor2& dst, const Tensor2& src);
void axpy_in_place(Tensor2& dst, double alpha, const Tensor2& src);
double max_abs_diff(const Tensor2& a, const Tensor2& b);

}  // namespace hgnas
