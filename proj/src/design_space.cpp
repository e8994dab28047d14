#include "hgnas/design_space.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hgnas {

using nlohmann::json;
using nlohmann::ordered_json;

int message_dim(MessageType m, int d) {
  switch (m) {
    case MessageType::SourcePos:
    case MessageType::TargetPos:
    case MessageType::RelPos:
      return d;
    case MessageType::Distance:
      return 1;
    case MessageType::SourceCatRel:
    case MessageType::TargetCatRel:
      return 2 * d;
    case MessageType::Full:
      return 3 * d;
  }
  throw std::logic_error("unreachable message type");
}

FunctionSpec HalfFunctions::spec_for(OperationKind kind) const {
  switch (kind) {
    case OperationKind::Connect:
      return connect;
    case OperationKind::Aggregate:
      return aggregate;
    case OperationKind::Combine:
      return combine;
    case OperationKind::Sample:
      return sample;
  }
  throw std::logic_error("unreachable operation kind");
}

// ---------------------------------------------------------------------------
// DesignSpaceConfig
// ---------------------------------------------------------------------------

void DesignSpaceConfig::validate() const {
  if (num_positions < 1) throw std::invalid_argument("num_positions must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (default_k < 1) throw std::invalid_argument("default_k must be >= 1");
  if (allowed_ops.empty()) throw std::invalid_argument("allowed_ops must be non-empty");
  for (OperationKind kind : allowed_ops) {
    if (function_count(kind) == 0)
      throw std::invalid_argument("allowed operation '" + to_string(kind) +
                                  "' has an empty function set");
  }
}

bool DesignSpaceConfig::allows(OperationKind kind) const {
  return std::find(allowed_ops.begin(), allowed_ops.end(), kind) != allowed_ops.end();
}

int DesignSpaceConfig::function_count(OperationKind kind) const {
  switch (kind) {
    case OperationKind::Connect:
      return static_cast<int>(connect_modes.size());
    case OperationKind::Aggregate:
      return static_cast<int>(aggregators.size() * messages.size());
    case OperationKind::Combine:
      return static_cast<int>(combine_widths.size());
    case OperationKind::Sample:
      return static_cast<int>(sample_modes.size());
  }
  throw std::logic_error("unreachable operation kind");
}

int DesignSpaceConfig::assignments_per_position() const {
  int total = 0;
  for (OperationKind kind : allowed_ops) total += function_count(kind);
  return total;
}

BigUint DesignSpaceConfig::function_set_count() const {
  BigUint total(1);
  for (OperationKind kind : allowed_ops)
    total *= BigUint(static_cast<std::uint64_t>(function_count(kind)));
  return total;
}

PositionAssignment DesignSpaceConfig::assignment_at(int index) const {
  for (OperationKind kind : allowed_ops) {
    int count = function_count(kind);
    if (index >= count) {
      index -= count;
      continue;
    }
    switch (kind) {
      case OperationKind::Connect:
        return {ConnectFunc{connect_modes[index]}};
      case OperationKind::Aggregate: {
        int a = index / static_cast<int>(messages.size());
        int m = index % static_cast<int>(messages.size());
        return {AggregateFunc{aggregators[a], messages[m]}};
      }
      case OperationKind::Combine:
        return {CombineFunc{combine_widths[index]}};
      case OperationKind::Sample:
        return {SampleFunc{sample_modes[index], default_k}};
    }
  }
  throw std::out_of_range("assignment index out of range");
}

int DesignSpaceConfig::assignment_index(const PositionAssignment& a) const {
  int base = 0;
  for (OperationKind kind : allowed_ops) {
    int count = function_count(kind);
    if (kind != a.kind()) {
      base += count;
      continue;
    }
    switch (kind) {
      case OperationKind::Connect: {
        auto mode = std::get<ConnectFunc>(a.func).mode;
        auto it = std::find(connect_modes.begin(), connect_modes.end(), mode);
        if (it == connect_modes.end()) return -1;
        return base + static_cast<int>(it - connect_modes.begin());
      }
      case OperationKind::Aggregate: {
        const auto& f = std::get<AggregateFunc>(a.func);
        auto ia = std::find(aggregators.begin(), aggregators.end(), f.aggregator);
        auto im = std::find(messages.begin(), messages.end(), f.message);
        if (ia == aggregators.end() || im == messages.end()) return -1;
        return base + static_cast<int>(ia - aggregators.begin()) *
                          static_cast<int>(messages.size()) +
               static_cast<int>(im - messages.begin());
      }
      case OperationKind::Combine: {
        int w = std::get<CombineFunc>(a.func).width;
        auto it = std::find(combine_widths.begin(), combine_widths.end(), w);
        if (it == combine_widths.end()) return -1;
        return base + static_cast<int>(it - combine_widths.begin());
      }
      case OperationKind::Sample: {
        const auto& f = std::get<SampleFunc>(a.func);
        if (f.k != default_k) return -1;
        auto it = std::find(sample_modes.begin(), sample_modes.end(), f.mode);
        if (it == sample_modes.end()) return -1;
        return base + static_cast<int>(it - sample_modes.begin());
      }
    }
  }
  return -1;
}

bool DesignSpaceConfig::contains(const PositionAssignment& a) const {
  return assignment_index(a) >= 0;
}

bool DesignSpaceConfig::contains(const ArchitectureGenotype& g) const {
  if (static_cast<int>(g.positions.size()) != num_positions) return false;
  for (const auto& p : g.positions)
    if (!contains(p)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

namespace {

// Number of length-n sequences over `kinds` symbols that use every symbol at
// least once (surjections), by inclusion-exclusion.
BigUint surjection_count(int n, int kinds) {
  BigUint pos(0), neg(0);
  for (int t = 0; t <= kinds; ++t) {
    // C(kinds, t)
    std::uint64_t binom = 1;
    for (int i = 0; i < t; ++i) binom = binom * (kinds - i) / (i + 1);
    BigUint term = BigUint(binom) * BigUint::pow(BigUint(static_cast<std::uint64_t>(t)),
                                                 static_cast<unsigned>(n));
    if ((kinds - t) % 2 == 0)
      pos += term;
    else
      neg += term;
  }
  return pos - neg;
}

// Distinct architectures over one shared half of n positions: group operation
// sequences by the exact set of kinds used; each used kind contributes its
// function choices once.
BigUint shared_half_count(const DesignSpaceConfig& config, int n) {
  if (n == 0) return BigUint(1);
  const int num_kinds = static_cast<int>(config.allowed_ops.size());
  BigUint total(0);
  for (unsigned mask = 1; mask < (1u << num_kinds); ++mask) {
    int used = 0;
    BigUint funcs(1);
    for (int i = 0; i < num_kinds; ++i) {
      if (mask & (1u << i)) {
        ++used;
        funcs *= BigUint(
            static_cast<std::uint64_t>(config.function_count(config.allowed_ops[i])));
      }
    }
    total += surjection_count(n, used) * funcs;
  }
  return total;
}

}  // namespace

BigUint space_size(const DesignSpaceConfig& config, bool shared_halves) {
  config.validate();
  if (!shared_halves) {
    return BigUint::pow(BigUint(static_cast<std::uint64_t>(config.assignments_per_position())),
                        static_cast<unsigned>(config.num_positions));
  }
  const int upper_n = upper_half_size(config.num_positions);
  const int lower_n = config.num_positions - upper_n;
  return shared_half_count(config, upper_n) * shared_half_count(config, lower_n);
}

// ---------------------------------------------------------------------------
// Sampling and variation
// ---------------------------------------------------------------------------

ArchitectureGenotype random_genotype(const DesignSpaceConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_genotype(config, rng);
}

ArchitectureGenotype random_genotype(const DesignSpaceConfig& config, Rng& rng) {
  config.validate();
  ArchitectureGenotype g;
  g.input_dim = config.input_dim;
  g.num_classes = config.num_classes;
  g.positions.reserve(config.num_positions);
  std::uniform_int_distribution<int> dist(0, config.assignments_per_position() - 1);
  for (int p = 0; p < config.num_positions; ++p)
    g.positions.push_back(config.assignment_at(dist(rng)));
  return g;
}

ArchitectureGenotype random_genotype_with_functions(const DesignSpaceConfig& config,
                                                    const FunctionSet& fs, Rng& rng) {
  config.validate();
  ArchitectureGenotype g;
  g.input_dim = config.input_dim;
  g.num_classes = config.num_classes;
  g.positions.reserve(config.num_positions);
  const int upper_n = upper_half_size(config.num_positions);
  std::uniform_int_distribution<int> dist(0,
                                          static_cast<int>(config.allowed_ops.size()) - 1);
  for (int p = 0; p < config.num_positions; ++p) {
    OperationKind kind = config.allowed_ops[dist(rng)];
    const HalfFunctions& half = p < upper_n ? fs.upper : fs.lower;
    g.positions.push_back({half.spec_for(kind)});
  }
  return g;
}

ArchitectureGenotype mutate(const ArchitectureGenotype& g, const DesignSpaceConfig& config,
                            double rate, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("mutation rate not in [0,1]");
  ArchitectureGenotype out = g;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> dist(0, config.assignments_per_position() - 1);
  for (auto& pos : out.positions) {
    if (coin(rng) < rate) pos = config.assignment_at(dist(rng));
  }
  return out;
}

ArchitectureGenotype crossover_at(const ArchitectureGenotype& a,
                                  const ArchitectureGenotype& b, int cut) {
  if (a.positions.size() != b.positions.size() || a.input_dim != b.input_dim ||
      a.num_classes != b.num_classes)
    throw std::invalid_argument("crossover requires genotypes from the same config");
  ArchitectureGenotype out = a;
  for (std::size_t p = static_cast<std::size_t>(cut); p < b.positions.size(); ++p)
    out.positions[p] = b.positions[p];
  return out;
}

ArchitectureGenotype crossover(const ArchitectureGenotype& a, const ArchitectureGenotype& b,
                               Rng& rng) {
  std::uniform_int_distribution<int> dist(0, static_cast<int>(a.positions.size()));
  return crossover_at(a, b, dist(rng));
}

// ---------------------------------------------------------------------------
// Canonical form and preset
// ---------------------------------------------------------------------------

ArchitectureGenotype canonical_form(const ArchitectureGenotype& g) {
  ArchitectureGenotype out;
  out.input_dim = g.input_dim;
  out.num_classes = g.num_classes;
  for (const auto& pos : g.positions) {
    if (pos.kind() == OperationKind::Connect &&
        std::get<ConnectFunc>(pos.func).mode == ConnectMode::Identity)
      continue;
    if (pos.kind() == OperationKind::Sample && !out.positions.empty() &&
        out.positions.back() == pos)
      continue;  // duplicate graph construction
    out.positions.push_back(pos);
  }
  return out;
}

ArchitectureGenotype dgcnn_like_preset(const DesignSpaceConfig& config) {
  if (config.num_positions < 12)
    throw std::invalid_argument("dgcnn_like_preset requires at least 12 positions");
  static constexpr std::array<int, 4> kBlockWidths = {64, 64, 128, 256};
  ArchitectureGenotype g;
  g.input_dim = config.input_dim;
  g.num_classes = config.num_classes;
  for (int block = 0; block < 4; ++block) {
    g.positions.push_back({SampleFunc{SampleMode::Knn, config.default_k}});
    g.positions.push_back({AggregateFunc{Aggregator::Max, MessageType::Full}});
    g.positions.push_back({CombineFunc{kBlockWidths[block]}});
  }
  while (static_cast<int>(g.positions.size()) < config.num_positions)
    g.positions.push_back({ConnectFunc{ConnectMode::Identity}});
  return g;
}

void enumerate_space(const DesignSpaceConfig& config, std::uint64_t limit,
                     const std::function<bool(const ArchitectureGenotype&)>& visit) {
  config.validate();
  BigUint size = space_size(config, false);
  if (BigUint(limit) < size)
    throw std::invalid_argument("space too large to enumerate: " + size.to_string());
  const int per = config.assignments_per_position();
  std::vector<int> odo(config.num_positions, 0);
  ArchitectureGenotype g;
  g.input_dim = config.input_dim;
  g.num_classes = config.num_classes;
  g.positions.assign(config.num_positions, config.assignment_at(0));
  while (true) {
    for (int p = 0; p < config.num_positions; ++p)
      g.positions[p] = config.assignment_at(odo[p]);
    if (!visit(g)) return;
    int p = config.num_positions - 1;
    while (p >= 0) {
      if (++odo[p] < per) break;
      odo[p] = 0;
      --p;
    }
    if (p < 0) return;
  }
}

// ---------------------------------------------------------------------------
// Names and JSON
// ---------------------------------------------------------------------------

std::string to_string(OperationKind kind) {
  switch (kind) {
    case OperationKind::Connect:
      return "connect";
    case OperationKind::Aggregate:
      return "aggregate";
    case OperationKind::Combine:
      return "combine";
    case OperationKind::Sample:
      return "sample";
  }
  throw std::logic_error("unreachable operation kind");
}

std::string to_string(ConnectMode mode) {
  return mode == ConnectMode::SkipConnect ? "skip_connect" : "identity";
}

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Sum:
      return "sum";
    case Aggregator::Min:
      return "min";
    case Aggregator::Max:
      return "max";
    case Aggregator::Mean:
      return "mean";
  }
  throw std::logic_error("unreachable aggregator");
}

std::string to_string(MessageType m) {
  switch (m) {
    case MessageType::SourcePos:
      return "source_pos";
    case MessageType::TargetPos:
      return "target_pos";
    case MessageType::RelPos:
      return "rel_pos";
    case MessageType::Distance:
      return "distance";
    case MessageType::SourceCatRel:
      return "source_cat_rel";
    case MessageType::TargetCatRel:
      return "target_cat_rel";
    case MessageType::Full:
      return "full";
  }
  throw std::logic_error("unreachable message type");
}

std::string to_string(SampleMode m) { return m == SampleMode::Knn ? "knn" : "random"; }

std::string function_label(const PositionAssignment& a) {
  switch (a.kind()) {
    case OperationKind::Connect:
      return to_string(std::get<ConnectFunc>(a.func).mode);
    case OperationKind::Aggregate: {
      const auto& f = std::get<AggregateFunc>(a.func);
      return to_string(f.aggregator) + "/" + to_string(f.message);
    }
    case OperationKind::Combine:
      return "w" + std::to_string(std::get<CombineFunc>(a.func).width);
    case OperationKind::Sample: {
      const auto& f = std::get<SampleFunc>(a.func);
      return to_string(f.mode) + "/k" + std::to_string(f.k);
    }
  }
  throw std::logic_error("unreachable operation kind");
}

namespace {

template <typename EnumT, std::size_t N>
EnumT parse_enum(const std::string& text, const std::array<EnumT, N>& values,
                 const std::string& what) {
  for (EnumT v : values)
    if (to_string(v) == text) return v;
  throw std::invalid_argument("unknown " + what + ": '" + text + "'");
}

ordered_json func_to_json(const PositionAssignment& a) {
  ordered_json f;
  switch (a.kind()) {
    case OperationKind::Connect:
      f["mode"] = to_string(std::get<ConnectFunc>(a.func).mode);
      break;
    case OperationKind::Aggregate: {
      const auto& agg = std::get<AggregateFunc>(a.func);
      f["aggregator"] = to_string(agg.aggregator);
      f["message"] = to_string(agg.message);
      break;
    }
    case OperationKind::Combine:
      f["width"] = std::get<CombineFunc>(a.func).width;
      break;
    case OperationKind::Sample: {
      const auto& s = std::get<SampleFunc>(a.func);
      f["mode"] = to_string(s.mode);
      f["k"] = s.k;
      break;
    }
  }
  return f;
}

PositionAssignment assignment_from_json(const json& j, const std::string& path) {
  if (!j.contains("op")) throw std::invalid_argument(path + ": missing 'op'");
  const std::string op = j.at("op").get<std::string>();
  const json& f = j.contains("func") ? j.at("func") : json::object();
  if (op == "connect") {
    return {ConnectFunc{parse_enum(f.at("mode").get<std::string>(), kAllConnectModes,
                                   path + ".func.mode")}};
  }
  if (op == "aggregate") {
    return {AggregateFunc{parse_enum(f.at("aggregator").get<std::string>(), kAllAggregators,
                                     path + ".func.aggregator"),
                          parse_enum(f.at("message").get<std::string>(), kAllMessageTypes,
                                     path + ".func.message")}};
  }
  if (op == "combine") {
    int w = f.at("width").get<int>();
    if (w < 1) throw std::invalid_argument(path + ".func.width: must be positive");
    return {CombineFunc{w}};
  }
  if (op == "sample") {
    int k = f.at("k").get<int>();
    if (k < 1) throw std::invalid_argument(path + ".func.k: must be >= 1");
    return {SampleFunc{
        parse_enum(f.at("mode").get<std::string>(), kAllSampleModes, path + ".func.mode"),
        k}};
  }
  throw std::invalid_argument(path + ".op: unknown operation '" + op + "'");
}

ordered_json genotype_to_ordered_json(const ArchitectureGenotype& g) {
  ordered_json j;
  j["positions"] = ordered_json::array();
  for (const auto& pos : g.positions) {
    ordered_json p;
    p["op"] = to_string(pos.kind());
    p["func"] = func_to_json(pos);
    j["positions"].push_back(p);
  }
  j["input_dim"] = g.input_dim;
  j["num_classes"] = g.num_classes;
  return j;
}

}  // namespace

std::string genotype_to_json(const ArchitectureGenotype& g, int indent) {
  return genotype_to_ordered_json(g).dump(indent);
}

ArchitectureGenotype genotype_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("genotype JSON parse error: ") + e.what());
  }
  ArchitectureGenotype g;
  if (!j.contains("positions") || !j.at("positions").is_array())
    throw std::invalid_argument("genotype: missing 'positions' array");
  int idx = 0;
  for (const auto& p : j.at("positions")) {
    g.positions.push_back(
        assignment_from_json(p, "positions[" + std::to_string(idx) + "]"));
    ++idx;
  }
  g.input_dim = j.value("input_dim", 3);
  g.num_classes = j.value("num_classes", 4);
  if (g.input_dim < 1) throw std::invalid_argument("input_dim: must be positive");
  if (g.num_classes < 2) throw std::invalid_argument("num_classes: must be >= 2");
  return g;
}

std::string genotype_key(const ArchitectureGenotype& g) {
  std::ostringstream os;
  os << g.input_dim << ":" << g.num_classes;
  for (const auto& pos : g.positions)
    os << "|" << to_string(pos.kind()) << "/" << function_label(pos);
  return os.str();
}

namespace {

ordered_json half_to_json(const HalfFunctions& h) {
  ordered_json j;
  j["connect"] = ordered_json{{"mode", to_string(h.connect.mode)}};
  j["aggregate"] = ordered_json{{"aggregator", to_string(h.aggregate.aggregator)},
                                {"message", to_string(h.aggregate.message)}};
  j["combine"] = ordered_json{{"width", h.combine.width}};
  j["sample"] =
      ordered_json{{"mode", to_string(h.sample.mode)}, {"k", h.sample.k}};
  return j;
}

HalfFunctions half_from_json(const json& j, const std::string& path) {
  HalfFunctions h;
  h.connect.mode = parse_enum(j.at("connect").at("mode").get<std::string>(),
                              kAllConnectModes, path + ".connect.mode");
  h.aggregate.aggregator = parse_enum(j.at("aggregate").at("aggregator").get<std::string>(),
                                      kAllAggregators, path + ".aggregate.aggregator");
  h.aggregate.message = parse_enum(j.at("aggregate").at("message").get<std::string>(),
                                   kAllMessageTypes, path + ".aggregate.message");
  h.combine.width = j.at("combine").at("width").get<int>();
  h.sample.mode = parse_enum(j.at("sample").at("mode").get<std::string>(), kAllSampleModes,
                             path + ".sample.mode");
  h.sample.k = j.at("sample").at("k").get<int>();
  return h;
}

}  // namespace

std::string function_set_to_json(const FunctionSet& fs) {
  ordered_json j;
  j["upper"] = half_to_json(fs.upper);
  j["lower"] = half_to_json(fs.lower);
  return j.dump();
}

FunctionSet function_set_from_json(const std::string& text) {
  json j = json::parse(text);
  FunctionSet fs;
  fs.upper = half_from_json(j.at("upper"), "upper");
  fs.lower = half_from_json(j.at("lower"), "lower");
  return fs;
}

std::string space_config_to_json(const DesignSpaceConfig& config, int indent) {
  ordered_json j;
  j["num_positions"] = config.num_positions;
  j["input_dim"] = config.input_dim;
  j["num_classes"] = config.num_classes;
  j["default_k"] = config.default_k;
  json ops = json::array();
  for (auto kind : config.allowed_ops) ops.push_back(to_string(kind));
  j["allowed_ops"] = ops;
  json modes = json::array();
  for (auto m : config.connect_modes) modes.push_back(to_string(m));
  j["connect_modes"] = modes;
  json aggs = json::array();
  for (auto a : config.aggregators) aggs.push_back(to_string(a));
  j["aggregators"] = aggs;
  json msgs = json::array();
  for (auto m : config.messages) msgs.push_back(to_string(m));
  j["messages"] = msgs;
  j["combine_widths"] = config.combine_widths;
  json smodes = json::array();
  for (auto m : config.sample_modes) smodes.push_back(to_string(m));
  j["sample_modes"] = smodes;
  return j.dump(indent);
}

DesignSpaceConfig space_config_from_json(const std::string& text) {
  json j = json::parse(text);
  DesignSpaceConfig config;
  config.num_positions = j.value("num_positions", config.num_positions);
  config.input_dim = j.value("input_dim", config.input_dim);
  config.num_classes = j.value("num_classes", config.num_classes);
  config.default_k = j.value("default_k", config.default_k);
  if (j.contains("allowed_ops")) {
    config.allowed_ops.clear();
    for (const auto& s : j.at("allowed_ops"))
      config.allowed_ops.push_back(
          parse_enum(s.get<std::string>(), kAllOperationKinds, "allowed_ops"));
  }
  if (j.contains("connect_modes")) {
    config.connect_modes.clear();
    for (const auto& s : j.at("connect_modes"))
      config.connect_modes.push_back(
          parse_enum(s.get<std::string>(), kAllConnectModes, "connect_modes"));
  }
  if (j.contains("aggregators")) {
    config.aggregators.clear();
    for (const auto& s : j.at("aggregators"))
      config.aggregators.push_back(
          parse_enum(s.get<std::string>(), kAllAggregators, "aggregators"));
  }
  if (j.contains("messages")) {
    config.messages.clear();
    for (const auto& s : j.at("messages"))
      config.messages.push_back(
          parse_enum(s.get<std::string>(), kAllMessageTypes, "messages"));
  }
  if (j.contains("combine_widths"))
    config.combine_widths = j.at("combine_widths").get<std::vector<int>>();
  if (j.contains("sample_modes")) {
    config.sample_modes.clear();
    for (const auto& s : j.at("sample_modes"))
      config.sample_modes.push_back(
          parse_enum(s.get<std::string>(), kAllSampleModes, "sample_modes"));
  }
  config.validate();
  return config;
}

}  // namespace hgnas
