#include "hgnas/grad_tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace hgnas {

namespace {
using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapT = Eigen::Map<EigenRowMajor>;
using ConstMapT = Eigen::Map<const EigenRowMajor>;

MapT map(Tensor2& t) { return MapT(t.data.data(), t.rows, t.cols); }
ConstMapT map(const Tensor2& t) { return ConstMapT(t.data.data(), t.rows, t.cols); }
}  // namespace

GradTape::NodeId GradTape::push(Tensor2 value) {
  Node n;
  n.grad = Tensor2(value.rows, value.cols);
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

GradTape::NodeId GradTape::leaf(Tensor2 value) { return push(std::move(value)); }

GradTape::NodeId GradTape::matmul(NodeId a, NodeId b) {
  const Tensor2& va = nodes_[a].value;
  const Tensor2& vb = nodes_[b].value;
  if (va.cols != vb.rows) throw std::invalid_argument("matmul shape mismatch");
  Tensor2 out(va.rows, vb.cols);
  map(out).noalias() = map(va) * map(vb);
  NodeId id = push(std::move(out));
  steps_.push_back([a, b, id](GradTape& t) {
    const Tensor2& dc = t.nodes_[id].grad;
    map(t.nodes_[a].grad).noalias() += map(dc) * map(t.nodes_[b].value).transpose();
    map(t.nodes_[b].grad).noalias() += map(t.nodes_[a].value).transpose() * map(dc);
  });
  return id;
}

GradTape::NodeId GradTape::add(NodeId a, NodeId b) {
  const Tensor2& va = nodes_[a].value;
  const Tensor2& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw std::invalid_argument("add shape mismatch");
  Tensor2 out = va;
  add_in_place(out, vb);
  NodeId id = push(std::move(out));
  steps_.push_back([a, b, id](GradTape& t) {
    add_in_place(t.nodes_[a].grad, t.nodes_[id].grad);
    add_in_place(t.nodes_[b].grad, t.nodes_[id].grad);
  });
  return id;
}

GradTape::NodeId GradTape::subtract(NodeId a, NodeId b) {
  const Tensor2& va = nodes_[a].value;
  const Tensor2& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw std::invalid_argument("subtract shape mismatch");
  Tensor2 out = va;
  axpy_in_place(out, -1.0, vb);
  NodeId id = push(std::move(out));
  steps_.push_back([a, b, id](GradTape& t) {
    add_in_place(t.nodes_[a].grad, t.nodes_[id].grad);
    axpy_in_place(t.nodes_[b].grad, -1.0, t.nodes_[id].grad);
  });
  return id;
}

GradTape::NodeId GradTape::scale(NodeId a, double s) {
  Tensor2 out = nodes_[a].value;
  for (auto& v : out.data) v *= s;
  NodeId id = push(std::move(out));
  steps_.push_back([a, id, s](GradTape& t) {
    axpy_in_place(t.nodes_[a].grad, s, t.nodes_[id].grad);
  });
  return id;
}

GradTape::NodeId GradTape::add_row_broadcast(NodeId x, NodeId row) {
  const Tensor2& vx = nodes_[x].value;
  const Tensor2& vr = nodes_[row].value;
  if (vr.rows != 1 || vr.cols != vx.cols)
    throw std::invalid_argument("add_row_broadcast shape mismatch");
  Tensor2 out = vx;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out(i, j) += vr(0, j);
  NodeId id = push(std::move(out));
  steps_.push_back([x, row, id](GradTape& t) {
    const Tensor2& d = t.nodes_[id].grad;
    add_in_place(t.nodes_[x].grad, d);
    Tensor2& dr = t.nodes_[row].grad;
    for (int i = 0; i < d.rows; ++i)
      for (int j = 0; j < d.cols; ++j) dr(0, j) += d(i, j);
  });
  return id;
}

GradTape::NodeId GradTape::leaky_relu(NodeId x, double slope) {
  const Tensor2& vx = nodes_[x].value;
  Tensor2 out = vx;
  for (auto& v : out.data) v = v > 0.0 ? v : slope * v;
  NodeId id = push(std::move(out));
  steps_.push_back([x, id, slope](GradTape& t) {
    const Tensor2& vx2 = t.nodes_[x].value;
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& dx = t.nodes_[x].grad;
    for (std::size_t i = 0; i < d.data.size(); ++i)
      dx.data[i] += d.data[i] * (vx2.data[i] > 0.0 ? 1.0 : slope);
  });
  return id;
}

GradTape::NodeId GradTape::mask_columns(NodeId x, int keep_cols) {
  const Tensor2& vx = nodes_[x].value;
  Tensor2 out = vx;
  for (int i = 0; i < out.rows; ++i)
    for (int j = keep_cols; j < out.cols; ++j) out(i, j) = 0.0;
  NodeId id = push(std::move(out));
  steps_.push_back([x, id, keep_cols](GradTape& t) {
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& dx = t.nodes_[x].grad;
    for (int i = 0; i < d.rows; ++i)
      for (int j = 0; j < keep_cols && j < d.cols; ++j) dx(i, j) += d(i, j);
  });
  return id;
}

GradTape::NodeId GradTape::concat_cols(NodeId a, NodeId b) {
  const Tensor2& va = nodes_[a].value;
  const Tensor2& vb = nodes_[b].value;
  if (va.rows != vb.rows) throw std::invalid_argument("concat_cols row mismatch");
  Tensor2 out(va.rows, va.cols + vb.cols);
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < va.cols; ++j) out(i, j) = va(i, j);
    for (int j = 0; j < vb.cols; ++j) out(i, va.cols + j) = vb(i, j);
  }
  const int ca = va.cols;
  NodeId id = push(std::move(out));  // may reallocate nodes_, va/vb die here
  steps_.push_back([a, b, id, ca](GradTape& t) {
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& da = t.nodes_[a].grad;
    Tensor2& db = t.nodes_[b].grad;
    for (int i = 0; i < d.rows; ++i) {
      for (int j = 0; j < ca; ++j) da(i, j) += d(i, j);
      for (int j = ca; j < d.cols; ++j) db(i, j - ca) += d(i, j);
    }
  });
  return id;
}

GradTape::NodeId GradTape::gather_rows(NodeId x, std::vector<int> row_ids) {
  const Tensor2& vx = nodes_[x].value;
  Tensor2 out(static_cast<int>(row_ids.size()), vx.cols);
  for (std::size_t e = 0; e < row_ids.size(); ++e) {
    int r = row_ids[e];
    if (r < 0 || r >= vx.rows) throw std::out_of_range("gather_rows index out of range");
    std::copy(vx.row_ptr(r), vx.row_ptr(r) + vx.cols, out.row_ptr(static_cast<int>(e)));
  }
  NodeId id = push(std::move(out));
  auto ids = std::make_shared<std::vector<int>>(std::move(row_ids));
  steps_.push_back([x, id, ids](GradTape& t) {
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& dx = t.nodes_[x].grad;
    for (std::size_t e = 0; e < ids->size(); ++e) {
      const double* src = d.row_ptr(static_cast<int>(e));
      double* dst = dx.row_ptr((*ids)[e]);
      for (int j = 0; j < d.cols; ++j) dst[j] += src[j];
    }
  });
  return id;
}

GradTape::NodeId GradTape::segment_reduce(NodeId messages, std::vector<int> targets,
                                          int num_segments, Reducer reducer) {
  const Tensor2& msg = nodes_[messages].value;
  if (static_cast<int>(targets.size()) != msg.rows)
    throw std::invalid_argument("segment_reduce targets length mismatch");
  for (int tgt : targets)
    if (tgt < 0 || tgt >= num_segments)
      throw std::out_of_range("segment_reduce target id out of range");

  Tensor2 out(num_segments, msg.cols);
  std::vector<int> counts(num_segments, 0);
  // arg row per (segment, col) for min/max gradient routing; -1 = empty
  auto argrows = std::make_shared<std::vector<int>>();
  if (reducer == Reducer::Min || reducer == Reducer::Max)
    argrows->assign(static_cast<std::size_t>(num_segments) * msg.cols, -1);

  for (int e = 0; e < msg.rows; ++e) {
    int s = targets[e];
    const double* m = msg.row_ptr(e);
    double* o = out.row_ptr(s);
    switch (reducer) {
      case Reducer::Sum:
      case Reducer::Mean:
        for (int j = 0; j < msg.cols; ++j) o[j] += m[j];
        break;
      case Reducer::Min:
      case Reducer::Max: {
        int* arg = argrows->data() + static_cast<std::size_t>(s) * msg.cols;
        for (int j = 0; j < msg.cols; ++j) {
          bool better = arg[j] < 0 || (reducer == Reducer::Max ? m[j] > o[j] : m[j] < o[j]);
          if (better) {
            o[j] = m[j];
            arg[j] = e;
          }
        }
        break;
      }
    }
    counts[s]++;
  }
  if (reducer == Reducer::Mean) {
    for (int s = 0; s < num_segments; ++s) {
      if (counts[s] == 0) continue;
      double inv = 1.0 / counts[s];
      double* o = out.row_ptr(s);
      for (int j = 0; j < out.cols; ++j) o[j] *= inv;
    }
  }

  const int cols = msg.cols;
  NodeId id = push(std::move(out));  // may reallocate nodes_, msg dies here
  auto tgts = std::make_shared<std::vector<int>>(std::move(targets));
  auto cnts = std::make_shared<std::vector<int>>(std::move(counts));
  steps_.push_back([messages, id, tgts, cnts, argrows, reducer, cols,
                    num_segments](GradTape& t) {
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& dm = t.nodes_[messages].grad;
    switch (reducer) {
      case Reducer::Sum:
        for (std::size_t e = 0; e < tgts->size(); ++e) {
          const double* dr = d.row_ptr((*tgts)[e]);
          double* dst = dm.row_ptr(static_cast<int>(e));
          for (int j = 0; j < cols; ++j) dst[j] += dr[j];
        }
        break;
      case Reducer::Mean:
        for (std::size_t e = 0; e < tgts->size(); ++e) {
          int s = (*tgts)[e];
          const double inv = 1.0 / (*cnts)[s];
          const double* dr = d.row_ptr(s);
          double* dst = dm.row_ptr(static_cast<int>(e));
          for (int j = 0; j < cols; ++j) dst[j] += dr[j] * inv;
        }
        break;
      case Reducer::Min:
      case Reducer::Max:
        for (int s = 0; s < num_segments; ++s) {
          const int* arg = argrows->data() + static_cast<std::size_t>(s) * cols;
          const double* dr = d.row_ptr(s);
          for (int j = 0; j < cols; ++j)
            if (arg[j] >= 0) dm(arg[j], j) += dr[j];
        }
        break;
    }
  });
  return id;
}

GradTape::NodeId GradTape::row_l2_norm(NodeId x) {
  const Tensor2& vx = nodes_[x].value;
  Tensor2 out(vx.rows, 1);
  for (int i = 0; i < vx.rows; ++i) {
    double s = 0.0;
    const double* r = vx.row_ptr(i);
    for (int j = 0; j < vx.cols; ++j) s += r[j] * r[j];
    out(i, 0) = std::sqrt(s);
  }
  NodeId id = push(std::move(out));
  steps_.push_back([x, id](GradTape& t) {
    const Tensor2& vx2 = t.nodes_[x].value;
    const Tensor2& vn = t.nodes_[id].value;
    const Tensor2& d = t.nodes_[id].grad;
    Tensor2& dx = t.nodes_[x].grad;
    for (int i = 0; i < vx2.rows; ++i) {
      double n = vn(i, 0);
      if (n <= 0.0) continue;  // subgradient 0 at the origin
      double g = d(i, 0) / n;
      const double* r = vx2.row_ptr(i);
      double* dr = dx.row_ptr(i);
      for (int j = 0; j < vx2.cols; ++j) dr[j] += g * r[j];
    }
  });
  return id;
}

GradTape::NodeId GradTape::softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
  const Tensor2& vl = nodes_[logits].value;
  if (static_cast<int>(labels.size()) != vl.rows)
    throw std::invalid_argument("softmax_cross_entropy labels length mismatch");
  const int c = vl.cols;
  auto softmax = std::make_shared<Tensor2>(vl.rows, c);
  double total = 0.0;
  for (int i = 0; i < vl.rows; ++i) {
    if (labels[i] < 0 || labels[i] >= c)
      throw std::out_of_range("softmax_cross_entropy label out of range");
    const double* r = vl.row_ptr(i);
    double mx = r[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, r[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(r[j] - mx);
    double lse = mx + std::log(sum);
    total += lse - r[labels[i]];
    double* sm = softmax->row_ptr(i);
    for (int j = 0; j < c; ++j) sm[j] = std::exp(r[j] - lse);
  }
  Tensor2 out(1, 1);
  out(0, 0) = total / vl.rows;
  NodeId id = push(std::move(out));
  auto lbl = std::make_shared<std::vector<int>>(std::move(labels));
  steps_.push_back([logits, id, softmax, lbl](GradTape& t) {
    const double d = t.nodes_[id].grad(0, 0);
    Tensor2& dl = t.nodes_[logits].grad;
    const double inv = 1.0 / softmax->rows;
    for (int i = 0; i < softmax->rows; ++i) {
      const double* sm = softmax->row_ptr(i);
      double* dr = dl.row_ptr(i);
      for (int j = 0; j < softmax->cols; ++j) {
        double g = sm[j] - (j == (*lbl)[i] ? 1.0 : 0.0);
        dr[j] += d * inv * g;
      }
    }
  });
  return id;
}

GradTape::NodeId GradTape::mape(NodeId pred, const Tensor2& truth) {
  const Tensor2& vp = nodes_[pred].value;
  if (!vp.same_shape(truth)) throw std::invalid_argument("mape shape mismatch");
  for (double v : truth.data)
    if (!(v > 0.0)) throw std::invalid_argument("mape requires strictly positive truth");
  double total = 0.0;
  for (std::size_t i = 0; i < vp.data.size(); ++i)
    total += std::abs(vp.data[i] - truth.data[i]) / truth.data[i];
  Tensor2 out(1, 1);
  const double inv = 1.0 / static_cast<double>(vp.data.size());
  out(0, 0) = total * inv;
  NodeId id = push(std::move(out));
  auto tr = std::make_shared<Tensor2>(truth);
  steps_.push_back([pred, id, tr, inv](GradTape& t) {
    const double d = t.nodes_[id].grad(0, 0);
    const Tensor2& vp2 = t.nodes_[pred].value;
    Tensor2& dp = t.nodes_[pred].grad;
    for (std::size_t i = 0; i < vp2.data.size(); ++i) {
      double diff = vp2.data[i] - tr->data[i];
      double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      dp.data[i] += d * inv * sign / tr->data[i];
    }
  });
  return id;
}

GradTape::NodeId GradTape::weighted_sum(NodeId x, const Tensor2& weights) {
  const Tensor2& vx = nodes_[x].value;
  if (!vx.same_shape(weights)) throw std::invalid_argument("weighted_sum shape mismatch");
  Tensor2 out(1, 1);
  for (std::size_t i = 0; i < vx.data.size(); ++i) out(0, 0) += vx.data[i] * weights.data[i];
  NodeId id = push(std::move(out));
  auto w = std::make_shared<Tensor2>(weights);
  steps_.push_back([x, id, w](GradTape& t) {
    const double d = t.nodes_[id].grad(0, 0);
    Tensor2& dx = t.nodes_[x].grad;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += d * w->data[i];
  });
  return id;
}

void GradTape::backward(NodeId loss_id) {
  const Tensor2& v = nodes_[loss_id].value;
  if (v.rows != 1 || v.cols != 1)
    throw std::invalid_argument("backward expects a scalar loss node");
  nodes_[loss_id].grad(0, 0) = 1.0;
  for (std::size_t i = steps_.size(); i-- > 0;) steps_[i](*this);
}

double softmax_cross_entropy_value(const Tensor2& logits, const std::vector<int>& labels) {
  double total = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    const double* r = logits.row_ptr(i);
    double mx = r[0];
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) sum += std::exp(r[j] - mx);
    total += mx + std::log(sum) - r[labels[i]];
  }
  return total / logits.rows;
}

double mape_value(const Tensor2& pred, const Tensor2& truth) {
  if (!pred.same_shape(truth)) throw std::invalid_argument("mape shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    if (!(truth.data[i] > 0.0))
      throw std::invalid_argument("mape requires strictly positive truth");
    total += std::abs(pred.data[i] - truth.data[i]) / truth.data[i];
  }
  return total / static_cast<double>(pred.data.size());
}

Tensor2& SgdOptimizer::velocity_for(const Tensor2* param) {
  for (auto& [p, v] : velocity_)
    if (p == param) return v;
  velocity_.emplace_back(param, Tensor2(param->rows, param->cols));
  return velocity_.back().second;
}

void SgdOptimizer::step(const std::vector<Tensor2*>& params,
                        const std::vector<const Tensor2*>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("SgdOptimizer params/grads length mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor2& p = *params[i];
    const Tensor2& g = *grads[i];
    if (momentum_ == 0.0) {
      axpy_in_place(p, -lr_, g);
    } else {
      Tensor2& v = velocity_for(params[i]);
      for (std::size_t k = 0; k < v.data.size(); ++k) {
        v.data[k] = momentum_ * v.data[k] + g.data[k];
        p.data[k] -= lr_ * v.data[k];
      }
    }
  }
}

}  // namespace hgnas
