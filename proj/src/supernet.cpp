#include "hgnas/supernet.hpp"

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

void SupernetConfig::validate() const {
  space.validate();
  if (hidden_width < space.input_dim)
    throw std::invalid_argument("hidden_width must be >= input_dim");
  if (eval_sample_paths < 1)
    throw std::invalid_argument("eval_sample_paths must be >= 1");
}

std::string supernet_config_to_json(const SupernetConfig& config) {
  ordered_json j;
  j["space"] = json::parse(space_config_to_json(config.space));
  j["hidden_width"] = config.hidden_width;
  j["combine_activation_slope"] = config.combine_activation_slope;
  j["eval_sample_paths"] = config.eval_sample_paths;
  return j.dump();
}

SupernetConfig supernet_config_from_json(const std::string& text) {
  json j = json::parse(text);
  SupernetConfig config;
  if (j.contains("space")) config.space = space_config_from_json(j.at("space").dump());
  config.hidden_width = j.value("hidden_width", config.hidden_width);
  config.combine_activation_slope =
      j.value("combine_activation_slope", config.combine_activation_slope);
  config.eval_sample_paths = j.value("eval_sample_paths", config.eval_sample_paths);
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// Edge construction
// ---------------------------------------------------------------------------

void knn_edges(const Tensor2& features, int row_begin, int row_end, int k,
               std::vector<int>& src, std::vector<int>& dst) {
  const int m = row_end - row_begin;
  const int k_eff = std::min(k, m - 1);
  if (k_eff <= 0) return;
  std::vector<std::pair<double, int>> dists(m - 1);
  for (int i = row_begin; i < row_end; ++i) {
    int n = 0;
    const double* ri = features.row_ptr(i);
    for (int j = row_begin; j < row_end; ++j) {
      if (j == i) continue;
      const double* rj = features.row_ptr(j);
      double d2 = 0.0;
      for (int c = 0; c < features.cols; ++c) {
        double diff = ri[c] - rj[c];
        d2 += diff * diff;
      }
      dists[n++] = {d2, j};
    }
    std::partial_sort(dists.begin(), dists.begin() + k_eff, dists.begin() + n);
    for (int t = 0; t < k_eff; ++t) {
      src.push_back(dists[t].second);
      dst.push_back(i);
    }
  }
}

namespace {

void random_edges(int row_begin, int row_end, int k, Rng& rng, std::vector<int>& src,
                  std::vector<int>& dst) {
  const int m = row_end - row_begin;
  const int k_eff = std::min(k, m - 1);
  if (k_eff <= 0) return;
  std::vector<int> others(m - 1);
  for (int i = row_begin; i < row_end; ++i) {
    int n = 0;
    for (int j = row_begin; j < row_end; ++j)
      if (j != i) others[n++] = j;
    for (int t = 0; t < k_eff; ++t) {
      std::uniform_int_distribution<int> pick(t, n - 1);
      std::swap(others[t], others[pick(rng)]);
      src.push_back(others[t]);
      dst.push_back(i);
    }
  }
}

double xavier_stddev(int fan_in, int fan_out) {
  return std::sqrt(2.0 / (fan_in + fan_out));
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Supernet::Supernet(SupernetConfig config, std::uint64_t init_seed)
    : config_(std::move(config)), init_seed_(init_seed) {
  config_.validate();
  init_weights();
}

void Supernet::init_weights() {
  const auto& space = config_.space;
  const int h = config_.hidden_width;
  Rng rng = make_rng(init_seed_);
  auto make_bank = [&](int in, int out) {
    LinearBank bank;
    bank.weight = Tensor2::randn(in, out, rng, xavier_stddev(in, out));
    bank.bias = Tensor2(1, out);
    return bank;
  };
  positions_.clear();
  positions_.reserve(space.num_positions);
  for (int p = 0; p < space.num_positions; ++p) {
    PositionBanks banks;
    for (std::size_t w = 0; w < space.combine_widths.size(); ++w)
      banks.combine.push_back(make_bank(h, h));
    for (std::size_t a = 0; a < space.aggregators.size(); ++a)
      for (std::size_t msg = 0; msg < space.messages.size(); ++msg)
        banks.aggregate.push_back(make_bank(message_dim(space.messages[msg], h), h));
    for (std::size_t s = 0; s < space.sample_modes.size(); ++s)
      banks.sample.push_back(make_bank(h, h));
    positions_.push_back(std::move(banks));
  }
  head_ = make_bank(h, space.num_classes);
}

const LinearBank& Supernet::bank_for(int position, const PositionAssignment& a) const {
  if (position < 0 || position >= static_cast<int>(positions_.size()))
    throw std::invalid_argument("genotype has more positions than the supernet");
  const auto& space = config_.space;
  const PositionBanks& banks = positions_[position];
  switch (a.kind()) {
    case OperationKind::Combine: {
      int w = std::get<CombineFunc>(a.func).width;
      auto it = std::find(space.combine_widths.begin(), space.combine_widths.end(), w);
      if (it == space.combine_widths.end())
        throw std::invalid_argument("combine width not in supernet space: " +
                                    std::to_string(w));
      return banks.combine[it - space.combine_widths.begin()];
    }
    case OperationKind::Aggregate: {
      const auto& f = std::get<AggregateFunc>(a.func);
      auto ia = std::find(space.aggregators.begin(), space.aggregators.end(), f.aggregator);
      auto im = std::find(space.messages.begin(), space.messages.end(), f.message);
      if (ia == space.aggregators.end() || im == space.messages.end())
        throw std::invalid_argument("aggregate function not in supernet space");
      return banks.aggregate[(ia - space.aggregators.begin()) * space.messages.size() +
                             (im - space.messages.begin())];
    }
    case OperationKind::Sample: {
      auto mode = std::get<SampleFunc>(a.func).mode;
      auto is = std::find(space.sample_modes.begin(), space.sample_modes.end(), mode);
      if (is == space.sample_modes.end())
        throw std::invalid_argument("sample mode not in supernet space");
      return banks.sample[is - space.sample_modes.begin()];
    }
    case OperationKind::Connect:
      throw std::logic_error("connect operations carry no bank");
  }
  throw std::logic_error("unreachable operation kind");
}

// ---------------------------------------------------------------------------
// Forward path
// ---------------------------------------------------------------------------

Supernet::PathResult Supernet::build_path(GradTape& tape, const ArchitectureGenotype& g,
                                          const std::vector<const PointCloud*>& batch,
                                          Rng& rng) const {
  if (batch.empty()) throw std::invalid_argument("forward_path needs at least one cloud");
  if (g.input_dim != config_.space.input_dim || g.num_classes != config_.space.num_classes)
    throw std::invalid_argument("genotype dims do not match the supernet config");
  const int h = config_.hidden_width;

  int total = 0;
  for (const PointCloud* c : batch) total += c->points.rows;
  Tensor2 x0(total, h);
  std::vector<int> cloud_ids(total);
  std::vector<int> offsets(batch.size() + 1, 0);
  {
    int row = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Tensor2& pts = batch[b]->points;
      for (int i = 0; i < pts.rows; ++i, ++row) {
        for (int j = 0; j < pts.cols && j < h; ++j) x0(row, j) = pts(i, j);
        cloud_ids[row] = static_cast<int>(b);
      }
      offsets[b + 1] = row;
    }
  }

  PathResult result{-1, {}};
  auto use_bank = [&](const LinearBank& bank) {
    auto* mutable_bank = const_cast<LinearBank*>(&bank);
    GradTape::NodeId w = tape.leaf(bank.weight);
    GradTape::NodeId b = tape.leaf(bank.bias);
    result.params.emplace_back(&mutable_bank->weight, w);
    result.params.emplace_back(&mutable_bank->bias, b);
    return std::pair<GradTape::NodeId, GradTape::NodeId>{w, b};
  };
  auto apply_linear = [&](GradTape::NodeId x, const LinearBank& bank) {
    auto [w, b] = use_bank(bank);
    return tape.add_row_broadcast(tape.matmul(x, w), b);
  };

  GradTape::NodeId x = tape.leaf(std::move(x0));
  const GradTape::NodeId block_input = x;
  std::vector<GradTape::NodeId> outputs;
  std::vector<int> edge_src, edge_dst;
  bool have_edges = false;

  auto rebuild_default_edges = [&]() {
    edge_src.clear();
    edge_dst.clear();
    const Tensor2& feats = tape.value(block_input);
    for (std::size_t b = 0; b < batch.size(); ++b)
      knn_edges(feats, offsets[b], offsets[b + 1], config_.space.default_k, edge_src,
                edge_dst);
    have_edges = true;
  };

  for (std::size_t p = 0; p < g.positions.size(); ++p) {
    const PositionAssignment& pos = g.positions[p];
    GradTape::NodeId out = x;
    switch (pos.kind()) {
      case OperationKind::Connect: {
        if (std::get<ConnectFunc>(pos.func).mode == ConnectMode::SkipConnect) {
          GradTape::NodeId source = p >= 2 ? outputs[p - 2] : block_input;
          out = tape.add(x, source);
        }
        break;
      }
      case OperationKind::Sample: {
        const auto& f = std::get<SampleFunc>(pos.func);
        edge_src.clear();
        edge_dst.clear();
        if (f.mode == SampleMode::Knn) {
          const Tensor2& feats = tape.value(x);
          for (std::size_t b = 0; b < batch.size(); ++b)
            knn_edges(feats, offsets[b], offsets[b + 1], f.k, edge_src, edge_dst);
        } else {
          for (std::size_t b = 0; b < batch.size(); ++b)
            random_edges(offsets[b], offsets[b + 1], f.k, rng, edge_src, edge_dst);
        }
        have_edges = true;
        out = apply_linear(x, bank_for(static_cast<int>(p), pos));
        break;
      }
      case OperationKind::Aggregate: {
        if (!have_edges) rebuild_default_edges();
        const auto& f = std::get<AggregateFunc>(pos.func);
        GradTape::NodeId src_feats = tape.gather_rows(x, edge_src);
        GradTape::NodeId dst_feats = tape.gather_rows(x, edge_dst);
        GradTape::NodeId rel = tape.subtract(src_feats, dst_feats);
        GradTape::NodeId message;
        switch (f.message) {
          case MessageType::SourcePos:
            message = src_feats;
            break;
          case MessageType::TargetPos:
            message = dst_feats;
            break;
          case MessageType::RelPos:
            message = rel;
            break;
          case MessageType::Distance:
            message = tape.row_l2_norm(rel);
            break;
          case MessageType::SourceCatRel:
            message = tape.concat_cols(src_feats, rel);
            break;
          case MessageType::TargetCatRel:
            message = tape.concat_cols(dst_feats, rel);
            break;
          case MessageType::Full:
            message = tape.concat_cols(src_feats, tape.concat_cols(dst_feats, rel));
            break;
        }
        Reducer reducer = Reducer::Sum;
        switch (f.aggregator) {
          case Aggregator::Sum:
            reducer = Reducer::Sum;
            break;
          case Aggregator::Min:
            reducer = Reducer::Min;
            break;
          case Aggregator::Max:
            reducer = Reducer::Max;
            break;
          case Aggregator::Mean:
            reducer = Reducer::Mean;
            break;
        }
        GradTape::NodeId reduced = tape.segment_reduce(message, edge_dst, total, reducer);
        out = apply_linear(reduced, bank_for(static_cast<int>(p), pos));
        break;
      }
      case OperationKind::Combine: {
        const auto& f = std::get<CombineFunc>(pos.func);
        GradTape::NodeId y = apply_linear(x, bank_for(static_cast<int>(p), pos));
        y = tape.leaky_relu(y, config_.combine_activation_slope);
        out = tape.mask_columns(y, std::min(f.width, h));
        break;
      }
    }
    outputs.push_back(out);
    x = out;
  }

  GradTape::NodeId pooled =
      tape.segment_reduce(x, cloud_ids, static_cast<int>(batch.size()), Reducer::Max);
  auto [hw, hb] = use_bank(head_);
  result.logits = tape.add_row_broadcast(tape.matmul(pooled, hw), hb);
  return result;
}

Tensor2 Supernet::forward_path(const ArchitectureGenotype& g,
                               const std::vector<const PointCloud*>& batch,
                               std::uint64_t seed) const {
  GradTape tape;
  Rng rng = make_rng(seed);
  PathResult res = build_path(tape, g, batch, rng);
  return tape.value(res.logits);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<double> Supernet::train(const DatasetSplit& data, const TrainOptions& opts) {
  if (data.train.empty()) throw std::invalid_argument("training set is empty");
  if (opts.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  SgdOptimizer optimizer(opts.learning_rate, opts.momentum);
  Rng rng = make_rng(opts.seed);
  std::vector<double> epoch_losses;
  std::vector<int> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    if (opts.lr_step_factor != 1.0 &&
        (epoch == opts.epochs / 2 || epoch == opts.epochs * 4 / 5))
      optimizer.set_learning_rate(optimizer.learning_rate() * opts.lr_step_factor);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      ArchitectureGenotype g =
          opts.fixed_path.has_value()
              ? *opts.fixed_path
              : (opts.functions.has_value()
                     ? random_genotype_with_functions(config_.space, *opts.functions, rng)
                     : random_genotype(config_.space, rng));
      std::vector<const PointCloud*> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < order.size() && i < start + opts.batch_size; ++i) {
        batch.push_back(&data.train[order[i]]);
        labels.push_back(data.train[order[i]].label);
      }
      GradTape tape;
      Rng forward_rng = make_rng(rng());
      PathResult res = build_path(tape, g, batch, forward_rng);
      GradTape::NodeId loss = tape.softmax_cross_entropy(res.logits, labels);
      double loss_value = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_value))
        throw std::runtime_error("supernet training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
      tape.backward(loss);
      std::vector<Tensor2*> params;
      std::vector<const Tensor2*> grads;
      params.reserve(res.params.size());
      grads.reserve(res.params.size());
      for (auto& [param, node] : res.params) {
        params.push_back(param);
        grads.push_back(&tape.grad(node));
      }
      optimizer.step(params, grads);
      loss_sum += loss_value;
      ++batches;
    }
    epoch_losses.push_back(loss_sum / std::max(1, batches));
  }
  return epoch_losses;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double Supernet::eval_accuracy(const ArchitectureGenotype& g,
                               const std::vector<PointCloud>& clouds,
                               std::uint64_t seed) const {
  if (clouds.empty()) return 0.0;
  std::vector<const PointCloud*> batch;
  batch.reserve(clouds.size());
  for (const auto& c : clouds) batch.push_back(&c);
  Tensor2 logits = forward_path(g, batch, seed);
  int correct = 0;
  for (int i = 0; i < logits.rows; ++i) {
    int best = 0;
    for (int j = 1; j < logits.cols; ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    if (best == clouds[i].label) ++correct;
  }
  return static_cast<double>(correct) / logits.rows;
}

EvalReport Supernet::eval_genotype(const ArchitectureGenotype& g, const DatasetSplit& data,
                                   std::uint64_t seed) const {
  EvalReport report;
  report.acc_val = eval_accuracy(g, data.val, derive_seed(seed, 1));
  report.acc_train = eval_accuracy(g, data.train, derive_seed(seed, 2));
  return report;
}

double Supernet::average_path_accuracy(const FunctionSet& fs, const DatasetSplit& data,
                                       std::uint64_t seed) const {
  double total = 0.0;
  for (int r = 0; r < config_.eval_sample_paths; ++r) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    ArchitectureGenotype g = random_genotype_with_functions(config_.space, fs, rng);
    total += eval_accuracy(g, data.val, derive_seed(seed, r, 7));
  }
  return total / config_.eval_sample_paths;
}

// ---------------------------------------------------------------------------
// Finalize
// ---------------------------------------------------------------------------

namespace {

LinearBank slice_bank(const LinearBank& bank, int in, int out) {
  LinearBank sliced;
  sliced.weight = Tensor2(in, out);
  sliced.bias = Tensor2(1, out);
  for (int i = 0; i < in && i < bank.weight.rows; ++i)
    for (int j = 0; j < out && j < bank.weight.cols; ++j)
      sliced.weight(i, j) = bank.weight(i, j);
  for (int j = 0; j < out && j < bank.bias.cols; ++j) sliced.bias(0, j) = bank.bias(0, j);
  return sliced;
}

}  // namespace

FinalizedNetwork Supernet::finalize(const ArchitectureGenotype& g) const {
  FinalizedNetwork net;
  net.genotype = canonical_form(g);
  net.input_dim = g.input_dim;
  net.num_classes = g.num_classes;
  int d = g.input_dim;
  // canonical form may have dropped positions; banks still come from the
  // original position indices
  std::size_t canon_idx = 0;
  for (std::size_t p = 0; p < g.positions.size() && canon_idx < net.genotype.positions.size();
       ++p) {
    if (!(g.positions[p] == net.genotype.positions[canon_idx])) continue;
    const PositionAssignment& pos = g.positions[p];
    FinalizedNetwork::Layer layer;
    layer.assignment = pos;
    layer.d_in = d;
    switch (pos.kind()) {
      case OperationKind::Connect:
        layer.d_out = d;
        break;
      case OperationKind::Sample:
        layer.d_out = d;
        break;
      case OperationKind::Aggregate:
        layer.d_out = message_dim(std::get<AggregateFunc>(pos.func).message, d);
        break;
      case OperationKind::Combine: {
        int w = std::get<CombineFunc>(pos.func).width;
        layer.d_out = w;
        layer.params = slice_bank(bank_for(static_cast<int>(p), pos), d, w);
        break;
      }
    }
    d = layer.d_out;
    net.layers.push_back(std::move(layer));
    ++canon_idx;
  }
  net.head = slice_bank(head_, d, g.num_classes);
  return net;
}

std::int64_t Supernet::path_param_count(const ArchitectureGenotype& g) const {
  const int h = config_.hidden_width;
  std::int64_t count = 0;
  for (const auto& pos : g.positions) {
    switch (pos.kind()) {
      case OperationKind::Connect:
        break;
      case OperationKind::Sample:
      case OperationKind::Combine:
        count += static_cast<std::int64_t>(h) * h + h;
        break;
      case OperationKind::Aggregate:
        count += static_cast<std::int64_t>(
                     message_dim(std::get<AggregateFunc>(pos.func).message, h)) *
                     h +
                 h;
        break;
    }
  }
  count += static_cast<std::int64_t>(h) * config_.space.num_classes +
           config_.space.num_classes;
  return count;
}

std::int64_t FinalizedNetwork::param_count() const {
  std::int64_t count = 0;
  for (const auto& layer : layers)
    if (layer.params)
      count += layer.params->weight.size() + layer.params->bias.size();
  count += static_cast<std::int64_t>(head.weight.size() + head.bias.size());
  return count;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::vector<double> Supernet::bank_payload(int position, const PositionAssignment& a) const {
  if (a.kind() == OperationKind::Connect) return {};
  const LinearBank& bank = bank_for(position, a);
  std::vector<double> out = bank.weight.data;
  out.insert(out.end(), bank.bias.data.begin(), bank.bias.data.end());
  return out;
}

std::vector<double> Supernet::all_weights_payload() const {
  std::vector<double> out;
  auto append = [&out](const LinearBank& bank) {
    out.insert(out.end(), bank.weight.data.begin(), bank.weight.data.end());
    out.insert(out.end(), bank.bias.data.begin(), bank.bias.data.end());
  };
  for (const auto& banks : positions_) {
    for (const auto& b : banks.combine) append(b);
    for (const auto& b : banks.aggregate) append(b);
    for (const auto& b : banks.sample) append(b);
  }
  append(head_);
  return out;
}

namespace {

void write_blob(const fs::path& path, const std::vector<double>& payload) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
}

std::vector<double> read_blob(const fs::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weight blob " + path.string());
  std::vector<double> payload(expected);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!in) throw std::runtime_error("weight blob truncated: " + path.string());
  return payload;
}

}  // namespace

void Supernet::save(const std::string& dir) const {
  fs::create_directories(dir);
  ordered_json header;
  header["config"] = json::parse(supernet_config_to_json(config_));
  header["init_seed"] = init_seed_;
  header["blob"] = "weights.bin";
  std::vector<double> payload = all_weights_payload();
  header["blob_doubles"] = payload.size();
  std::ofstream hf(fs::path(dir) / "supernet.json", std::ios::binary);
  hf << header.dump(2) << "\n";
  write_blob(fs::path(dir) / "weights.bin", payload);
}

Supernet Supernet::load(const std::string& dir) {
  std::ifstream hf(fs::path(dir) / "supernet.json");
  if (!hf) throw std::runtime_error("cannot open supernet header in " + dir);
  json header = json::parse(hf);
  SupernetConfig config = supernet_config_from_json(header.at("config").dump());
  Supernet net(config, header.value("init_seed", 0ull));
  std::size_t expected = net.all_weights_payload().size();
  std::vector<double> payload =
      read_blob(fs::path(dir) / header.at("blob").get<std::string>(), expected);
  std::size_t cursor = 0;
  auto take = [&](LinearBank& bank) {
    std::copy_n(payload.begin() + cursor, bank.weight.size(), bank.weight.data.begin());
    cursor += bank.weight.size();
    std::copy_n(payload.begin() + cursor, bank.bias.size(), bank.bias.data.begin());
    cursor += bank.bias.size();
  };
  for (auto& banks : net.positions_) {
    for (auto& b : banks.combine) take(b);
    for (auto& b : banks.aggregate) take(b);
    for (auto& b : banks.sample) take(b);
  }
  take(net.head_);
  return net;
}

void FinalizedNetwork::save(const std::string& dir) const {
  fs::create_directories(dir);
  ordered_json header;
  header["genotype"] = json::parse(genotype_to_json(genotype));
  header["input_dim"] = input_dim;
  header["num_classes"] = num_classes;
  header["blob"] = "weights.bin";
  std::vector<double> payload;
  ordered_json layers_json = ordered_json::array();
  auto record = [&payload](const LinearBank& bank, ordered_json& j) {
    j["weight_offset"] = payload.size();
    j["weight_shape"] = {bank.weight.rows, bank.weight.cols};
    payload.insert(payload.end(), bank.weight.data.begin(), bank.weight.data.end());
    j["bias_offset"] = payload.size();
    j["bias_shape"] = {bank.bias.rows, bank.bias.cols};
    payload.insert(payload.end(), bank.bias.data.begin(), bank.bias.data.end());
  };
  for (const auto& layer : layers) {
    ordered_json lj;
    lj["op"] = to_string(layer.assignment.kind());
    lj["function"] = function_label(layer.assignment);
    lj["d_in"] = layer.d_in;
    lj["d_out"] = layer.d_out;
    if (layer.params) record(*layer.params, lj);
    layers_json.push_back(lj);
  }
  header["layers"] = layers_json;
  ordered_json hj;
  record(head, hj);
  header["head"] = hj;
  header["blob_doubles"] = payload.size();
  std::ofstream hf(fs::path(dir) / "finalized.json", std::ios::binary);
  hf << header.dump(2) << "\n";
  write_blob(fs::path(dir) / "weights.bin", payload);
}

FinalizedNetwork FinalizedNetwork::load(const std::string& dir) {
  std::ifstream hf(fs::path(dir) / "finalized.json");
  if (!hf) throw std::runtime_error("cannot open finalized header in " + dir);
  json header = json::parse(hf);
  FinalizedNetwork net;
  net.genotype = genotype_from_json(header.at("genotype").dump());
  net.input_dim = header.at("input_dim").get<int>();
  net.num_classes = header.at("num_classes").get<int>();
  std::vector<double> payload =
      read_blob(fs::path(dir) / header.at("blob").get<std::string>(),
                header.at("blob_doubles").get<std::size_t>());
  auto fetch = [&payload](const json& j) {
    LinearBank bank;
    auto ws = j.at("weight_shape");
    bank.weight = Tensor2(ws[0].get<int>(), ws[1].get<int>());
    std::size_t off = j.at("weight_offset").get<std::size_t>();
    std::copy_n(payload.begin() + off, bank.weight.size(), bank.weight.data.begin());
    auto bs = j.at("bias_shape");
    bank.bias = Tensor2(bs[0].get<int>(), bs[1].get<int>());
    off = j.at("bias_offset").get<std::size_t>();
    std::copy_n(payload.begin() + off, bank.bias.size(), bank.bias.data.begin());
    return bank;
  };
  std::size_t li = 0;
  for (const auto& lj : header.at("layers")) {
    FinalizedNetwork::Layer layer;
    layer.assignment = net.genotype.positions.at(li);
    layer.d_in = lj.at("d_in").get<int>();
    layer.d_out = lj.at("d_out").get<int>();
    if (lj.contains("weight_offset")) layer.params = fetch(lj);
    net.layers.push_back(std::move(layer));
    ++li;
  }
  net.head = fetch(header.at("head"));
  return net;
}

}  // namespace hgnas
