#include "hgnas/device_model.hpp"

#include <algorithm>
#include <cmath>

#include "hgnas/rng.hpp"
#include "json.hpp"

namespace hgnas {

using nlohmann::json;
using nlohmann::ordered_json;

void DeviceProfile::validate() const {
  if (name.empty()) throw std::invalid_argument("device profile needs a name");
  if (compute_flops_per_ms <= 0 || mem_bytes_per_ms <= 0 || memory_capacity_mb <= 0)
    throw std::invalid_argument("device profile throughputs must be positive");
  if (irregular_penalty < 1.0)
    throw std::invalid_argument("irregular_penalty must be >= 1");
  if (op_overhead_ms < 0.0) throw std::invalid_argument("op_overhead_ms must be >= 0");
}

void InputSpec::validate() const {
  if (point_count < 1 || feature_dim < 1 || batch_size < 1)
    throw std::invalid_argument("input spec fields must be positive");
}

double LatencyEstimate::breakdown_share(OperationKind kind) const {
  auto it = breakdown_ms.find(kind);
  if (it == breakdown_ms.end() || total_ms <= 0.0) return 0.0;
  return it->second / total_ms;
}

namespace {

// per-edge message construction flops on top of the gathers
int message_build_flops(MessageType m, int d) {
  switch (m) {
    case MessageType::SourcePos:
    case MessageType::TargetPos:
      return 0;
    case MessageType::RelPos:
    case MessageType::SourceCatRel:
    case MessageType::TargetCatRel:
    case MessageType::Full:
      return d;
    case MessageType::Distance:
      return 3 * d;
  }
  throw std::logic_error("unreachable message type");
}

constexpr double kBytesPerReal = 8.0;
constexpr double kBytesPerEdge = 16.0;  // two 64-bit endpoint ids
constexpr int kImplicitEdgeK = 16;      // default edge list if no Sample precedes

}  // namespace

LatencyEstimate oracle_latency(const ArchitectureGenotype& g, const InputSpec& in,
                               const DeviceProfile& p) {
  in.validate();
  p.validate();
  const double m = static_cast<double>(in.point_count) * in.batch_size;

  LatencyEstimate est;
  for (OperationKind kind : kAllOperationKinds) est.breakdown_ms[kind] = 0.0;

  double d = static_cast<double>(g.input_dim);
  double edge_bytes = 0.0;
  int current_k = 0;  // 0 = no edge list yet
  double peak_bytes = kBytesPerReal * m * d;

  auto charge = [&](OperationKind kind, double flops, double bytes) {
    est.breakdown_ms[kind] += flops / p.compute_flops_per_ms + bytes / p.mem_bytes_per_ms;
  };
  auto charge_knn = [&](double dim, int k) {
    charge(OperationKind::Sample, m * m * dim, m * m * kBytesPerReal * p.irregular_penalty);
    current_k = k;
    edge_bytes = m * k * kBytesPerEdge;
  };

  for (const auto& pos : g.positions) {
    est.overhead_ms += p.op_overhead_ms;
    double d_out = d;
    double live_extra = 0.0;
    switch (pos.kind()) {
      case OperationKind::Connect: {
        if (std::get<ConnectFunc>(pos.func).mode == ConnectMode::SkipConnect)
          charge(OperationKind::Connect, 0.0, m * d * kBytesPerReal);
        break;
      }
      case OperationKind::Sample: {
        const auto& f = std::get<SampleFunc>(pos.func);
        if (f.mode == SampleMode::Knn) {
          charge_knn(d, f.k);
        } else {
          charge(OperationKind::Sample, 0.0, m * f.k * kBytesPerReal);
          current_k = f.k;
          edge_bytes = m * f.k * kBytesPerEdge;
        }
        break;
      }
      case OperationKind::Aggregate: {
        if (current_k == 0) charge_knn(d, kImplicitEdgeK);  // reuse rule fallback
        const auto& f = std::get<AggregateFunc>(pos.func);
        const int dm = message_dim(f.message, static_cast<int>(d));
        const double edges = m * current_k;
        charge(OperationKind::Aggregate,
               edges * (message_build_flops(f.message, static_cast<int>(d)) + dm),
               edges * dm * kBytesPerReal * p.irregular_penalty);
        live_extra = edges * dm * kBytesPerReal;  // message matrix
        d_out = dm;
        break;
      }
      case OperationKind::Combine: {
        const auto& f = std::get<CombineFunc>(pos.func);
        charge(OperationKind::Combine, m * d * f.width, 0.0);
        d_out = f.width;
        break;
      }
    }
    peak_bytes = std::max(peak_bytes,
                          kBytesPerReal * m * (d + d_out) + live_extra + edge_bytes);
    d = d_out;
  }

  est.peak_memory_mb = peak_bytes / 1e6;
  for (const auto& [kind, ms] : est.breakdown_ms) est.total_ms += ms;
  est.total_ms += est.overhead_ms;
  if (est.peak_memory_mb > p.memory_capacity_mb)
    throw OutOfMemoryError(est.peak_memory_mb, p.memory_capacity_mb, p.name);
  return est;
}

const std::vector<DeviceProfile>& builtin_profiles() {
  // Coefficients pinned so the DGCNN-like breakdown at 1024 points matches
  // each device class: sample-dominated on the GPU-like pair, aggregate+
  // sample heavy on the CPU-like profile, all three phases substantial on
  // the constrained profile (which OOMs between 1024 and 1536 points).
  static const std::vector<DeviceProfile> kProfiles = {
      {"gpu_like", 8.0e6, 2.0e8, 2.0, 0.10, 10000.0},
      {"cpu_like", 2.0e8, 5.0e6, 8.0, 0.05, 16000.0},
      {"embedded_gpu_like", 1.6e6, 4.0e7, 4.0, 0.20, 8000.0},
      {"constrained_like", 1.69e5, 5.07e5, 6.0, 1.00, 64.0},
  };
  return kProfiles;
}

const DeviceProfile& builtin_profile(const std::string& name) {
  for (const auto& p : builtin_profiles())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown builtin device profile: '" + name + "'");
}

std::vector<LatencySample> label_batch(const std::vector<ArchitectureGenotype>& genotypes,
                                       const InputSpec& in, const DeviceProfile& p,
                                       double noise_sigma, std::uint64_t seed) {
  if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  std::vector<LatencySample> out;
  out.reserve(genotypes.size());
  for (std::size_t i = 0; i < genotypes.size(); ++i) {
    LatencySample s;
    s.genotype = genotypes[i];
    s.profile_name = p.name;
    double base = oracle_latency(canonical_form(genotypes[i]), in, p).total_ms;
    if (noise_sigma > 0.0) {
      Rng rng = make_rng(derive_seed(seed, i));
      std::normal_distribution<double> gauss(0.0, 1.0);
      base *= std::exp(noise_sigma * gauss(rng));
    }
    s.latency_ms = base;
    out.push_back(std::move(s));
  }
  return out;
}

std::string profile_to_json(const DeviceProfile& p) {
  ordered_json j;
  j["name"] = p.name;
  j["compute_flops_per_ms"] = p.compute_flops_per_ms;
  j["mem_bytes_per_ms"] = p.mem_bytes_per_ms;
  j["irregular_penalty"] = p.irregular_penalty;
  j["op_overhead_ms"] = p.op_overhead_ms;
  j["memory_capacity_mb"] = p.memory_capacity_mb;
  return j.dump();
}

DeviceProfile profile_from_json(const std::string& text) {
  json j = json::parse(text);
  DeviceProfile p;
  p.name = j.at("name").get<std::string>();
  p.compute_flops_per_ms = j.at("compute_flops_per_ms").get<double>();
  p.mem_bytes_per_ms = j.at("mem_bytes_per_ms").get<double>();
  p.irregular_penalty = j.at("irregular_penalty").get<double>();
  p.op_overhead_ms = j.at("op_overhead_ms").get<double>();
  p.memory_capacity_mb = j.at("memory_capacity_mb").get<double>();
  p.validate();
  return p;
}

}  // namespace hgnas
