#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgnas/device_model.hpp"
#include "hgnas/grad_tape.hpp"
#include "hgnas/supernet.hpp"

namespace hgnas {

// Feature layout per node:
//   [ node-kind one-hot (7) | function one-hot (9) | extended descriptor (9)
//     | data properties (16) | device descriptor (5) ]
// Strict mode drops the extended descriptor (message one-hot, width, k),
// matching the bare 7+9 one-hot encoding.
enum class FeatureMode { Extended, Strict };

inline constexpr int kKindOneHot = 7;      // input/output/global/connect/agg/comb/sample
inline constexpr int kFunctionOneHot = 9;  // identity..random + mlp
inline constexpr int kExtendedDescriptor = 9;
inline constexpr int kDataProperties = 16;
inline constexpr int kDeviceDescriptor = 5;

int feature_width(FeatureMode mode);

// Directed-graph encoding of a (canonical) genotype: a dataflow chain
// input -> op1 .. opP -> output plus one global node linked to and from
// every other node, carrying the input-data and device descriptors.
struct ArchGraph {
  int num_nodes = 0;
  std::vector<int> edge_src;
  std::vector<int> edge_dst;
  Tensor2 features;  // num_nodes x feature_width(mode)
  FeatureMode mode = FeatureMode::Extended;

  int input_node() const { return 0; }
  int output_node() const { return num_nodes - 2; }
  int global_node() const { return num_nodes - 1; }
};

ArchGraph encode(const ArchitectureGenotype& g, const InputSpec& in,
                 const DeviceProfile& p, FeatureMode mode = FeatureMode::Extended);

// Reorders nodes by a permutation (tests use this to check readout
// invariance). perm[i] = new index of old node i.
ArchGraph permute_nodes(const ArchGraph& graph, const std::vector<int>& perm);

enum class ReadoutMode { MeanAllNodes, GlobalNodeOnly };

// Three sum-aggregation graph-convolution layers (with self loops, no degree
// normalization) at widths 256/512/512, then an MLP 256/128/1 with LeakyReLU
// after the hidden layers; the scalar output is clamped at zero. Latency is
// regressed as log1p(ms), so predictions are expm1(output) >= 0.
class PredictorModel {
 public:
  static constexpr int kGcnWidths[3] = {256, 512, 512};
  static constexpr int kMlpWidths[2] = {256, 128};

  PredictorModel(FeatureMode mode, std::uint64_t init_seed,
                 ReadoutMode readout = ReadoutMode::MeanAllNodes);

  FeatureMode feature_mode() const { return mode_; }
  ReadoutMode readout_mode() const { return readout_; }

  double predict(const ArchGraph& graph) const;
  std::vector<double> predict_batch(const std::vector<const ArchGraph*>& graphs) const;

  void save(const std::string& dir) const;
  static PredictorModel load(const std::string& dir);

  void zero_weights();  // tests

 private:
  FeatureMode mode_;
  ReadoutMode readout_;
  std::vector<LinearBank> gcn_;  // 3 layers
  std::vector<LinearBank> mlp_;  // 256 -> 128 -> 1

  struct BatchResult {
    GradTape::NodeId output;  // (B x 1) clamped log-space predictions
    std::vector<std::pair<Tensor2*, GradTape::NodeId>> params;
  };
  BatchResult build_batch(GradTape& tape,
                          const std::vector<const ArchGraph*>& graphs) const;

  friend struct PredictorTrainer;
};

struct PredictorTrainOptions {
  int epochs = 250;
  int batch_size = 32;
  double learning_rate = 0.02;
  double momentum = 0.9;
  // learning rate is multiplied by this factor at 50% and 80% of training
  double lr_step_factor = 0.3;
  std::uint64_t seed = 0;
};

struct PredictorReport {
  double mape = 0.0;
  double within_10pct = 0.0;
  double ranking_accuracy = 0.0;
};

// MAPE loss on log1p-scaled targets, SGD, best-validation snapshot (selected
// by latency-scale validation MAPE). Labels must be strictly positive.
PredictorModel train_predictor(const std::vector<ArchGraph>& train_graphs,
                               const std::vector<double>& train_labels_ms,
                               const std::vector<ArchGraph>& val_graphs,
                               const std::vector<double>& val_labels_ms, FeatureMode mode,
                               const PredictorTrainOptions& opts,
                               std::vector<double>* epoch_val_mape = nullptr);

PredictorReport evaluate_predictor(const PredictorModel& model,
                                   const std::vector<ArchGraph>& graphs,
                                   const std::vector<double>& labels_ms);

}  // namespace hgnas
