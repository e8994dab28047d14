#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "hgnas/tensor.hpp"

namespace hgnas {

enum class Reducer { Sum, Min, Max, Mean };

// Reverse-mode tape over Tensor2 values. Each operation records its forward
// result and a backward step; backward() replays the steps once, in reverse,
// accumulating gradients additively. A tape belongs to a single training
// step on a single thread.
class GradTape {
 public:
  using NodeId = std::int32_t;

  GradTape() = default;
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  NodeId leaf(Tensor2 value);

  const Tensor2& value(NodeId id) const { return nodes_[id].value; }
  const Tensor2& grad(NodeId id) const { return nodes_[id].grad; }

  // c = a * b; da = dc * b^T, db = a^T * dc
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId subtract(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  // (m x d) + (1 x d) bias row added to every row
  NodeId add_row_broadcast(NodeId x, NodeId row);
  // y = x > 0 ? x : slope * x   (relu is slope = 0)
  NodeId leaky_relu(NodeId x, double slope);
  NodeId relu(NodeId x) { return leaky_relu(x, 0.0); }
  // zero every column with index >= keep_cols
  NodeId mask_columns(NodeId x, int keep_cols);
  NodeId concat_cols(NodeId a, NodeId b);
  // out row e = x row row_ids[e]; backward scatter-adds
  NodeId gather_rows(NodeId x, std::vector<int> row_ids);
  // out row s = reduction of message rows with targets[e] == s. Empty
  // segments produce zero rows. Min/max route gradient to the first
  // occurrence of the extremum; mean divides by segment size.
  NodeId segment_reduce(NodeId messages, std::vector<int> targets, int num_segments,
                        Reducer reducer);
  // (m x d) -> (m x 1) Euclidean norm per row; zero rows get zero gradient
  NodeId row_l2_norm(NodeId x);
  // mean over rows of log-sum-exp stabilized cross entropy; returns 1x1
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels);
  // mean(|pred - truth| / truth); truth must be strictly positive; 1x1
  NodeId mape(NodeId pred, const Tensor2& truth);
  // sum of x .* weights; 1x1 (reduction helper for losses and checks)
  NodeId weighted_sum(NodeId x, const Tensor2& weights);

  void backward(NodeId loss_id);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
  };
  // deque keeps value()/grad() references stable while further ops record
  std::deque<Node> nodes_;
  std::vector<std::function<void(GradTape&)>> steps_;

  NodeId push(Tensor2 value);
};

// Untaped evaluation twins of the loss kernels (used on the inference path).
double softmax_cross_entropy_value(const Tensor2& logits, const std::vector<int>& labels);
double mape_value(const Tensor2& pred, const Tensor2& truth);

// Plain SGD with optional momentum. Velocity slots are keyed by parameter
// identity and created lazily, so models that update a different subset of
// parameters each step (one-shot supernets) work unchanged.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(double lr, double momentum = 0.0)
      : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<Tensor2*>& params, const std::vector<const Tensor2*>& grads);
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  std::vector<std::pair<const Tensor2*, Tensor2>> velocity_;
  Tensor2& velocity_for(const Tensor2* param);
};

}  // namespace hgnas
