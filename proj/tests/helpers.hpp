#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hgnas/grad_tape.hpp"
#include "hgnas/tensor.hpp"

namespace hgnas::testing {

inline double relative_error(double analytic, double numeric) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

// Central finite differences against the tape gradient. `build` assembles a
// fresh scalar loss from the current parameter values; the helper perturbs
// every entry of every parameter.
struct FdCheck {
  std::vector<Tensor2> params;
  std::function<double(const std::vector<Tensor2>&, std::vector<Tensor2>* grads)> build;
  double epsilon = 1e-5;

  // returns the maximum relative error over all checked entries
  double run(int stride = 1) {
    std::vector<Tensor2> grads;
    build(params, &grads);
    double max_err = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      for (std::size_t e = 0; e < params[pi].data.size(); e += stride) {
        double saved = params[pi].data[e];
        params[pi].data[e] = saved + epsilon;
        double up = build(params, nullptr);
        params[pi].data[e] = saved - epsilon;
        double down = build(params, nullptr);
        params[pi].data[e] = saved;
        double numeric = (up - down) / (2.0 * epsilon);
        max_err = std::max(max_err, relative_error(grads[pi].data[e], numeric));
      }
    }
    return max_err;
  }
};

}  // namespace hgnas::testing
