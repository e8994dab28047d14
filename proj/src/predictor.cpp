#include "hgnas/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace hgnas {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

int feature_width(FeatureMode mode) {
  int w = kKindOneHot + kFunctionOneHot + kDataProperties + kDeviceDescriptor;
  if (mode == FeatureMode::Extended) w += kExtendedDescriptor;
  return w;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

namespace {

// node-kind slots
enum KindSlot { kInput = 0, kOutput, kGlobal, kConnect, kAggregate, kCombine, kSample };

// function one-hot slots
enum FuncSlot {
  kIdentity = 0,
  kSkipConnect,
  kSum,
  kMin,
  kMax,
  kMean,
  kKnn,
  kRandom,
  kMlp
};

int function_slot(const PositionAssignment& a) {
  switch (a.kind()) {
    case OperationKind::Connect:
      return std::get<ConnectFunc>(a.func).mode == ConnectMode::Identity ? kIdentity
                                                                         : kSkipConnect;
    case OperationKind::Aggregate:
      switch (std::get<AggregateFunc>(a.func).aggregator) {
        case Aggregator::Sum:
          return kSum;
        case Aggregator::Min:
          return kMin;
        case Aggregator::Max:
          return kMax;
        case Aggregator::Mean:
          return kMean;
      }
      break;
    case OperationKind::Sample:
      return std::get<SampleFunc>(a.func).mode == SampleMode::Knn ? kKnn : kRandom;
    case OperationKind::Combine:
      return kMlp;
  }
  throw std::logic_error("unreachable assignment");
}

int kind_slot(OperationKind kind) {
  switch (kind) {
    case OperationKind::Connect:
      return kConnect;
    case OperationKind::Aggregate:
      return kAggregate;
    case OperationKind::Combine:
      return kCombine;
    case OperationKind::Sample:
      return kSample;
  }
  throw std::logic_error("unreachable kind");
}

}  // namespace

ArchGraph encode(const ArchitectureGenotype& g, const InputSpec& in,
                 const DeviceProfile& p, FeatureMode mode) {
  in.validate();
  p.validate();
  ArchitectureGenotype canon = canonical_form(g);
  const int ops = static_cast<int>(canon.positions.size());
  ArchGraph graph;
  graph.mode = mode;
  graph.num_nodes = ops + 3;  // input, ops, output, global
  graph.features = Tensor2(graph.num_nodes, feature_width(mode));

  const int fn_base = kKindOneHot;
  const int ext_base = fn_base + kFunctionOneHot;
  const int data_base = mode == FeatureMode::Extended ? ext_base + kExtendedDescriptor
                                                      : ext_base;
  const int dev_base = data_base + kDataProperties;

  graph.features(graph.input_node(), kInput) = 1.0;
  graph.features(graph.output_node(), kOutput) = 1.0;
  graph.features(graph.global_node(), kGlobal) = 1.0;

  double mean_k = 0.0;
  int samples = 0;
  for (const auto& pos : canon.positions) {
    if (pos.kind() == OperationKind::Sample) {
      mean_k += std::get<SampleFunc>(pos.func).k;
      ++samples;
    }
  }
  mean_k = samples > 0 ? mean_k / samples : 16.0;

  for (int i = 0; i < ops; ++i) {
    const PositionAssignment& pos = canon.positions[i];
    const int node = 1 + i;
    graph.features(node, kind_slot(pos.kind())) = 1.0;
    graph.features(node, fn_base + function_slot(pos)) = 1.0;
    if (mode == FeatureMode::Extended) {
      if (pos.kind() == OperationKind::Aggregate) {
        const auto& f = std::get<AggregateFunc>(pos.func);
        graph.features(node, ext_base + static_cast<int>(f.message)) = 1.0;
      }
      if (pos.kind() == OperationKind::Combine)
        graph.features(node, ext_base + 7) =
            std::get<CombineFunc>(pos.func).width / 256.0;
      if (pos.kind() == OperationKind::Sample)
        graph.features(node, ext_base + 8) = std::get<SampleFunc>(pos.func).k / 64.0;
    }
  }

  // input-data properties, normalized to roughly unit scale
  {
    const int gnode = graph.global_node();
    const double m = in.point_count;
    double* f = graph.features.row_ptr(gnode);
    f[data_base + 0] = m / 2048.0;
    f[data_base + 1] = std::log1p(m) / 8.0;
    f[data_base + 2] = in.feature_dim / 8.0;
    f[data_base + 3] = in.batch_size / 32.0;
    f[data_base + 4] = mean_k / m;  // graph density
    f[data_base + 5] = mean_k / 64.0;
    f[data_base + 6] = m * mean_k / 131072.0;
    f[data_base + 7] = std::log1p(m * mean_k) / 16.0;
    f[data_base + 8] = canon.input_dim / 8.0;
    f[data_base + 9] = 1.0;
    // remaining slots reserved (zero)
    f[dev_base + 0] = std::log10(p.compute_flops_per_ms) / 10.0;
    f[dev_base + 1] = std::log10(p.mem_bytes_per_ms) / 10.0;
    f[dev_base + 2] = p.irregular_penalty / 10.0;
    f[dev_base + 3] = p.op_overhead_ms;
    f[dev_base + 4] = std::log10(p.memory_capacity_mb) / 5.0;
  }

  // dataflow chain
  int prev = graph.input_node();
  for (int i = 0; i < ops; ++i) {
    graph.edge_src.push_back(prev);
    graph.edge_dst.push_back(1 + i);
    prev = 1 + i;
  }
  graph.edge_src.push_back(prev);
  graph.edge_dst.push_back(graph.output_node());
  // global node linked both ways with every other node
  for (int n = 0; n < graph.num_nodes - 1; ++n) {
    graph.edge_src.push_back(graph.global_node());
    graph.edge_dst.push_back(n);
    graph.edge_src.push_back(n);
    graph.edge_dst.push_back(graph.global_node());
  }
  return graph;
}

ArchGraph permute_nodes(const ArchGraph& graph, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != graph.num_nodes)
    throw std::invalid_argument("permutation size mismatch");
  ArchGraph out;
  out.mode = graph.mode;
  out.num_nodes = graph.num_nodes;
  out.features = Tensor2(graph.num_nodes, graph.features.cols);
  for (int i = 0; i < graph.num_nodes; ++i)
    std::copy(graph.features.row_ptr(i), graph.features.row_ptr(i) + graph.features.cols,
              out.features.row_ptr(perm[i]));
  out.edge_src.reserve(graph.edge_src.size());
  out.edge_dst.reserve(graph.edge_dst.size());
  for (std::size_t e = 0; e < graph.edge_src.size(); ++e) {
    out.edge_src.push_back(perm[graph.edge_src[e]]);
    out.edge_dst.push_back(perm[graph.edge_dst[e]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

PredictorModel::PredictorModel(FeatureMode mode, std::uint64_t init_seed,
                               ReadoutMode readout)
    : mode_(mode), readout_(readout) {
  Rng rng = make_rng(init_seed);
  auto make_bank = [&](int in, int out) {
    LinearBank bank;
    bank.weight = Tensor2::randn(in, out, rng, std::sqrt(2.0 / (in + out)));
    bank.bias = Tensor2(1, out);
    return bank;
  };
  int in_width = feature_width(mode);
  for (int layer = 0; layer < 3; ++layer) {
    gcn_.push_back(make_bank(in_width, kGcnWidths[layer]));
    in_width = kGcnWidths[layer];
  }
  mlp_.push_back(make_bank(in_width, kMlpWidths[0]));
  mlp_.push_back(make_bank(kMlpWidths[0], kMlpWidths[1]));
  mlp_.push_back(make_bank(kMlpWidths[1], 1));
}

void PredictorModel::zero_weights() {
  for (auto* banks : {&gcn_, &mlp_})
    for (auto& bank : *banks) {
      std::fill(bank.weight.data.begin(), bank.weight.data.end(), 0.0);
      std::fill(bank.bias.data.begin(), bank.bias.data.end(), 0.0);
    }
}

PredictorModel::BatchResult PredictorModel::build_batch(
    GradTape& tape, const std::vector<const ArchGraph*>& graphs) const {
  if (graphs.empty()) throw std::invalid_argument("predictor batch is empty");
  const int fw = feature_width(mode_);
  int total = 0;
  std::size_t total_edges = 0;
  for (const ArchGraph* g : graphs) {
    if (g->features.cols != fw)
      throw std::invalid_argument("arch graph feature width does not match the model");
    total += g->num_nodes;
    total_edges += g->edge_src.size();
  }
  Tensor2 stacked(total, fw);
  std::vector<int> src_all, dst_all, graph_ids(total), readout_rows;
  src_all.reserve(total_edges);
  dst_all.reserve(total_edges);
  {
    int offset = 0;
    for (std::size_t b = 0; b < graphs.size(); ++b) {
      const ArchGraph& g = *graphs[b];
      for (int i = 0; i < g.num_nodes; ++i) {
        std::copy(g.features.row_ptr(i), g.features.row_ptr(i) + fw,
                  stacked.row_ptr(offset + i));
        graph_ids[offset + i] = static_cast<int>(b);
      }
      for (std::size_t e = 0; e < g.edge_src.size(); ++e) {
        src_all.push_back(offset + g.edge_src[e]);
        dst_all.push_back(offset + g.edge_dst[e]);
      }
      readout_rows.push_back(offset + g.global_node());
      offset += g.num_nodes;
    }
  }

  BatchResult result{-1, {}};
  auto use_bank = [&](const LinearBank& bank) {
    auto* mutable_bank = const_cast<LinearBank*>(&bank);
    GradTape::NodeId w = tape.leaf(bank.weight);
    GradTape::NodeId b = tape.leaf(bank.bias);
    result.params.emplace_back(&mutable_bank->weight, w);
    result.params.emplace_back(&mutable_bank->bias, b);
    return std::pair<GradTape::NodeId, GradTape::NodeId>{w, b};
  };

  GradTape::NodeId h = tape.leaf(std::move(stacked));
  for (const auto& layer : gcn_) {
    // sum over in-neighbors plus self loop, then linear + activation
    GradTape::NodeId gathered = tape.gather_rows(h, src_all);
    GradTape::NodeId agg = tape.segment_reduce(gathered, dst_all, total, Reducer::Sum);
    GradTape::NodeId with_self = tape.add(agg, h);
    auto [w, b] = use_bank(layer);
    h = tape.leaky_relu(tape.add_row_broadcast(tape.matmul(with_self, w), b), 0.2);
  }
  GradTape::NodeId pooled =
      readout_ == ReadoutMode::MeanAllNodes
          ? tape.segment_reduce(h, graph_ids, static_cast<int>(graphs.size()),
                                Reducer::Mean)
          : tape.gather_rows(h, readout_rows);
  auto [w0, b0] = use_bank(mlp_[0]);
  GradTape::NodeId z = tape.leaky_relu(
      tape.add_row_broadcast(tape.matmul(pooled, w0), b0), 0.2);
  auto [w1, b1] = use_bank(mlp_[1]);
  z = tape.leaky_relu(tape.add_row_broadcast(tape.matmul(z, w1), b1), 0.2);
  auto [w2, b2] = use_bank(mlp_[2]);
  z = tape.add_row_broadcast(tape.matmul(z, w2), b2);
  result.output = tape.relu(z);  // clamp the scalar at zero
  return result;
}

double PredictorModel::predict(const ArchGraph& graph) const {
  std::vector<const ArchGraph*> one{&graph};
  return predict_batch(one)[0];
}

std::vector<double> PredictorModel::predict_batch(
    const std::vector<const ArchGraph*>& graphs) const {
  GradTape tape;
  BatchResult res = build_batch(tape, graphs);
  const Tensor2& z = tape.value(res.output);
  std::vector<double> out(z.rows);
  for (int i = 0; i < z.rows; ++i) out[i] = std::expm1(z(i, 0));
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct PredictorTrainer {
  static double val_mape(const PredictorModel& model, const std::vector<ArchGraph>& graphs,
                         const std::vector<double>& labels) {
    std::vector<const ArchGraph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const auto& g : graphs) ptrs.push_back(&g);
    std::vector<double> pred = model.predict_batch(ptrs);
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      total += std::abs(pred[i] - labels[i]) / labels[i];
    return total / static_cast<double>(pred.size());
  }

  static PredictorModel run(const std::vector<ArchGraph>& train_graphs,
                            const std::vector<double>& train_labels,
                            const std::vector<ArchGraph>& val_graphs,
                            const std::vector<double>& val_labels, FeatureMode mode,
                            const PredictorTrainOptions& opts,
                            std::vector<double>* epoch_val_mape) {
    if (train_graphs.empty() || train_graphs.size() != train_labels.size())
      throw std::invalid_argument("predictor training set malformed");
    for (double l : train_labels)
      if (!(l > 0.0)) throw std::invalid_argument("latency labels must be positive");
    for (double l : val_labels)
      if (!(l > 0.0)) throw std::invalid_argument("latency labels must be positive");

    PredictorModel model(mode, derive_seed(opts.seed, 0xC0DE));
    SgdOptimizer optimizer(opts.learning_rate, opts.momentum);
    Rng rng = make_rng(derive_seed(opts.seed, 0x5EED));

    std::vector<double> ztrain(train_labels.size());
    for (std::size_t i = 0; i < train_labels.size(); ++i)
      ztrain[i] = std::log1p(train_labels[i]);

    std::vector<int> order(train_graphs.size());
    std::iota(order.begin(), order.end(), 0);

    PredictorModel best = model;
    double best_mape = val_graphs.empty()
                           ? 0.0
                           : val_mape(model, val_graphs, val_labels);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      if (epoch == opts.epochs / 2 || epoch == opts.epochs * 4 / 5)
        optimizer.set_learning_rate(optimizer.learning_rate() * opts.lr_step_factor);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
        std::vector<const ArchGraph*> batch;
        std::size_t count = std::min<std::size_t>(opts.batch_size, order.size() - start);
        Tensor2 target(static_cast<int>(count), 1);
        for (std::size_t i = 0; i < count; ++i) {
          batch.push_back(&train_graphs[order[start + i]]);
          target(static_cast<int>(i), 0) = ztrain[order[start + i]];
        }
        GradTape tape;
        PredictorModel::BatchResult res = model.build_batch(tape, batch);
        GradTape::NodeId loss = tape.mape(res.output, target);
        double loss_value = tape.value(loss)(0, 0);
        if (!std::isfinite(loss_value))
          throw std::runtime_error("predictor training diverged at epoch " +
                                   std::to_string(epoch));
        tape.backward(loss);
        std::vector<Tensor2*> params;
        std::vector<const Tensor2*> grads;
        for (auto& [param, node] : res.params) {
          params.push_back(param);
          grads.push_back(&tape.grad(node));
        }
        optimizer.step(params, grads);
      }
      if (!val_graphs.empty()) {
        double m = val_mape(model, val_graphs, val_labels);
        if (epoch_val_mape) epoch_val_mape->push_back(m);
        if (m < best_mape) {
          best_mape = m;
          best = model;
        }
      }
    }
    return val_graphs.empty() ? model : best;
  }
};

PredictorModel train_predictor(const std::vector<ArchGraph>& train_graphs,
                               const std::vector<double>& train_labels_ms,
                               const std::vector<ArchGraph>& val_graphs,
                               const std::vector<double>& val_labels_ms, FeatureMode mode,
                               const PredictorTrainOptions& opts,
                               std::vector<double>* epoch_val_mape) {
  return PredictorTrainer::run(train_graphs, train_labels_ms, val_graphs, val_labels_ms,
                               mode, opts, epoch_val_mape);
}

PredictorReport evaluate_predictor(const PredictorModel& model,
                                   const std::vector<ArchGraph>& graphs,
                                   const std::vector<double>& labels_ms) {
  if (graphs.empty() || graphs.size() != labels_ms.size())
    throw std::invalid_argument("evaluation set malformed");
  std::vector<const ArchGraph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  std::vector<double> pred = model.predict_batch(ptrs);
  PredictorReport report;
  int within = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double rel = std::abs(pred[i] - labels_ms[i]) / labels_ms[i];
    report.mape += rel;
    if (rel <= 0.10) ++within;
  }
  report.mape /= static_cast<double>(pred.size());
  report.within_10pct = static_cast<double>(within) / pred.size();
  std::size_t pairs = 0, correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      if (labels_ms[i] == labels_ms[j]) continue;
      ++pairs;
      if ((pred[i] < pred[j]) == (labels_ms[i] < labels_ms[j])) ++correct;
    }
  report.ranking_accuracy = pairs == 0 ? 1.0 : static_cast<double>(correct) / pairs;
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void PredictorModel::save(const std::string& dir) const {
  fs::create_directories(dir);
  ordered_json header;
  header["feature_mode"] = mode_ == FeatureMode::Extended ? "extended" : "strict";
  header["readout"] = readout_ == ReadoutMode::MeanAllNodes ? "mean" : "global";
  header["feature_width"] = feature_width(mode_);
  header["gcn_widths"] = {kGcnWidths[0], kGcnWidths[1], kGcnWidths[2]};
  header["mlp_widths"] = {kMlpWidths[0], kMlpWidths[1], 1};
  header["blob"] = "weights.bin";
  std::vector<double> payload;
  for (const auto* banks : {&gcn_, &mlp_})
    for (const auto& bank : *banks) {
      payload.insert(payload.end(), bank.weight.data.begin(), bank.weight.data.end());
      payload.insert(payload.end(), bank.bias.data.begin(), bank.bias.data.end());
    }
  header["blob_doubles"] = payload.size();
  std::ofstream hf(fs::path(dir) / "predictor.json", std::ios::binary);
  hf << header.dump(2) << "\n";
  std::ofstream blob(fs::path(dir) / "weights.bin", std::ios::binary);
  blob.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size() * sizeof(double)));
}

PredictorModel PredictorModel::load(const std::string& dir) {
  std::ifstream hf(fs::path(dir) / "predictor.json");
  if (!hf) throw std::runtime_error("cannot open predictor header in " + dir);
  json header = json::parse(hf);
  FeatureMode mode = header.at("feature_mode").get<std::string>() == "extended"
                         ? FeatureMode::Extended
                         : FeatureMode::Strict;
  ReadoutMode readout = header.value("readout", "mean") == "mean"
                            ? ReadoutMode::MeanAllNodes
                            : ReadoutMode::GlobalNodeOnly;
  PredictorModel model(mode, 0, readout);
  std::ifstream blob(fs::path(dir) / header.at("blob").get<std::string>(),
                     std::ios::binary);
  if (!blob) throw std::runtime_error("cannot open predictor blob in " + dir);
  std::size_t expected = header.at("blob_doubles").get<std::size_t>();
  std::vector<double> payload(expected);
  blob.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
  if (!blob) throw std::runtime_error("predictor blob truncated");
  std::size_t cursor = 0;
  for (auto* banks : {&model.gcn_, &model.mlp_})
    for (auto& bank : *banks) {
      std::copy_n(payload.begin() + cursor, bank.weight.size(), bank.weight.data.begin());
      cursor += bank.weight.size();
      std::copy_n(payload.begin() + cursor, bank.bias.size(), bank.bias.data.begin());
      cursor += bank.bias.size();
    }
  if (cursor != payload.size()) throw std::runtime_error("predictor blob size mismatch");
  return model;
}

}  // namespace hgnas
