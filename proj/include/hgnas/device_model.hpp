#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgnas/design_space.hpp"

namespace hgnas {

// Coefficients of the analytical latency/memory oracle for one emulated
// device. Throughputs are raw (flops per millisecond, bytes per millisecond)
// so cost terms read directly as count / throughput.
struct DeviceProfile {
  std::string name;
  double compute_flops_per_ms = 1.0;
  double mem_bytes_per_ms = 1.0;
  double irregular_penalty = 1.0;  // multiplier on gather/scatter traffic, >= 1
  double op_overhead_ms = 0.0;     // fixed dispatch cost charged per position
  double memory_capacity_mb = 1e9;

  void validate() const;
};

struct InputSpec {
  int point_count = 1024;
  int feature_dim = 3;
  int batch_size = 1;

  void validate() const;
};

struct LatencyEstimate {
  double total_ms = 0.0;
  // data-movement/compute cost per operation kind, excluding overheads
  std::map<OperationKind, double> breakdown_ms;
  double overhead_ms = 0.0;
  double peak_memory_mb = 0.0;

  double breakdown_share(OperationKind kind) const;
};

class OutOfMemoryError : public std::runtime_error {
 public:
  OutOfMemoryError(double peak_mb, double capacity_mb, const std::string& profile)
      : std::runtime_error("out of memory on '" + profile + "': peak " +
                           std::to_string(peak_mb) + " MB exceeds capacity " +
                           std::to_string(capacity_mb) + " MB"),
        peak_mb(peak_mb),
        capacity_mb(capacity_mb) {}
  double peak_mb;
  double capacity_mb;
};

// Deterministic per-position cost walk. Callers canonicalize first so
// duplicate adjacent graph constructions are merged; Identity positions cost
// only the per-op overhead. Throws OutOfMemoryError when the peak live
// footprint exceeds the profile capacity.
LatencyEstimate oracle_latency(const ArchitectureGenotype& g, const InputSpec& in,
                               const DeviceProfile& p);

// The four shipped profiles: gpu_like / cpu_like / embedded_gpu_like /
// constrained_like, calibrated so the DGCNN-like breakdown matches the
// qualitative execution-time story of each device class.
const std::vector<DeviceProfile>& builtin_profiles();
const DeviceProfile& builtin_profile(const std::string& name);

struct LatencySample {
  ArchitectureGenotype genotype;
  std::string profile_name;
  double latency_ms = 0.0;
};

// Oracle labels with multiplicative log-normal jitter exp(sigma * z),
// emulating measurement noise; seed-deterministic per index.
std::vector<LatencySample> label_batch(const std::vector<ArchitectureGenotype>& genotypes,
                                       const InputSpec& in, const DeviceProfile& p,
                                       double noise_sigma, std::uint64_t seed);

std::string profile_to_json(const DeviceProfile& p);
DeviceProfile profile_from_json(const std::string& text);

}  // namespace hgnas
