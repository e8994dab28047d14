#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hgnas/dataset.hpp"
#include "hgnas/design_space.hpp"
#include "hgnas/grad_tape.hpp"
#include "hgnas/tensor.hpp"

namespace hgnas {

struct SupernetConfig {
  DesignSpaceConfig space;
  int hidden_width = 32;  // common width H during supernet execution
  double combine_activation_slope = 0.2;
  int eval_sample_paths = 8;  // paths averaged when scoring a function set

  void validate() const;
};

struct EvalReport {
  double acc_val = 0.0;
  double acc_train = 0.0;
  std::vector<double> loss_curve;
};

struct TrainOptions {
  int epochs = 50;
  int batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  // learning rate is multiplied by this at 50% and 80% of the epochs
  double lr_step_factor = 1.0;
  std::uint64_t seed = 0;
  // functions fixed per half while operations are sampled (stage training)
  std::optional<FunctionSet> functions;
  // train this exact path every step instead of sampling (standalone mode)
  std::optional<ArchitectureGenotype> fixed_path;
};

struct LinearBank {
  Tensor2 weight;  // (in x out); forward is x * W + b
  Tensor2 bias;    // (1 x out)
};

// Standalone network description produced by finalize(): alignment
// transforms dropped, combine layers at their declared widths with weights
// inherited from the supernet banks (overlapping block copied, rest zero).
struct FinalizedNetwork {
  ArchitectureGenotype genotype;  // canonical form
  struct Layer {
    PositionAssignment assignment;
    int d_in = 0;
    int d_out = 0;
    std::optional<LinearBank> params;  // combine layers only
  };
  std::vector<Layer> layers;
  LinearBank head;
  int input_dim = 0;
  int num_classes = 0;

  std::int64_t param_count() const;
  void save(const std::string& dir) const;
  static FinalizedNetwork load(const std::string& dir);
};

// One-shot weight-sharing supernet over every candidate assignment at every
// position. All features have width H while the supernet executes; sample
// and aggregate candidates carry appended alignment linears, combine banks
// are H->H with the declared width realized by channel masking.
class Supernet {
 public:
  Supernet(SupernetConfig config, std::uint64_t init_seed);

  const SupernetConfig& config() const { return config_; }

  // Logits (one row per cloud) for the sub-network selected by `g`.
  // Deterministic given the seed (which drives random-mode sampling).
  Tensor2 forward_path(const ArchitectureGenotype& g,
                       const std::vector<const PointCloud*>& batch,
                       std::uint64_t seed) const;

  // Single-path one-shot training: every step samples a genotype and updates
  // only the weights along that path. Returns per-epoch mean losses. Throws
  // std::runtime_error with a diagnostic if the loss turns non-finite.
  std::vector<double> train(const DatasetSplit& data, const TrainOptions& opts);

  EvalReport eval_genotype(const ArchitectureGenotype& g, const DatasetSplit& data,
                           std::uint64_t seed) const;
  double eval_accuracy(const ArchitectureGenotype& g,
                       const std::vector<PointCloud>& clouds, std::uint64_t seed) const;

  // Mean acc_val over `eval_sample_paths` random operation paths with the
  // function set fixed per half.
  double average_path_accuracy(const FunctionSet& fs, const DatasetSplit& data,
                               std::uint64_t seed) const;

  FinalizedNetwork finalize(const ArchitectureGenotype& g) const;

  // Parameters touched when executing `g` in supernet mode (path banks,
  // alignments, head); finalize() drops the alignments.
  std::int64_t path_param_count(const ArchitectureGenotype& g) const;

  // Raw bank payload for the assignment at one position (weight-sharing
  // checks compare these across evaluations).
  std::vector<double> bank_payload(int position, const PositionAssignment& a) const;
  std::vector<double> all_weights_payload() const;

  void save(const std::string& dir) const;
  static Supernet load(const std::string& dir);

 private:
  struct PositionBanks {
    std::vector<LinearBank> combine;    // per config combine width
    std::vector<LinearBank> aggregate;  // per (aggregator, message) pair
    std::vector<LinearBank> sample;     // per sample mode
  };

  SupernetConfig config_;
  std::uint64_t init_seed_ = 0;
  std::vector<PositionBanks> positions_;
  LinearBank head_;

  struct PathResult {
    GradTape::NodeId logits;
    std::vector<std::pair<Tensor2*, GradTape::NodeId>> params;
  };
  PathResult build_path(GradTape& tape, const ArchitectureGenotype& g,
                        const std::vector<const PointCloud*>& batch, Rng& rng) const;

  const LinearBank& bank_for(int position, const PositionAssignment& a) const;
  void init_weights();

  friend struct SupernetTestAccess;
};

// KNN edge construction over a feature block; ties broken by (distance,
// index). Exposed for direct testing.
void knn_edges(const Tensor2& features, int row_begin, int row_end, int k,
               std::vector<int>& src, std::vector<int>& dst);

std::string supernet_config_to_json(const SupernetConfig& config);
SupernetConfig supernet_config_from_json(const std::string& text);

}  // namespace hgnas
