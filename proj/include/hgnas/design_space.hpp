#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hgnas/bigint.hpp"
#include "hgnas/rng.hpp"

namespace hgnas {

// ---------------------------------------------------------------------------
// Operation/function vocabulary (the supernet's available choices)
// ---------------------------------------------------------------------------

enum class OperationKind { Connect, Aggregate, Combine, Sample };
inline constexpr std::array<OperationKind, 4> kAllOperationKinds = {
    OperationKind::Connect, OperationKind::Aggregate, OperationKind::Combine,
    OperationKind::Sample};

enum class ConnectMode { SkipConnect, Identity };
enum class Aggregator { Sum, Min, Max, Mean };
enum class MessageType {
  SourcePos,
  TargetPos,
  RelPos,
  Distance,
  SourceCatRel,
  TargetCatRel,
  Full
};
enum class SampleMode { Knn, Random };

inline constexpr std::array<ConnectMode, 2> kAllConnectModes = {ConnectMode::SkipConnect,
                                                                ConnectMode::Identity};
inline constexpr std::array<Aggregator, 4> kAllAggregators = {
    Aggregator::Sum, Aggregator::Min, Aggregator::Max, Aggregator::Mean};
inline constexpr std::array<MessageType, 7> kAllMessageTypes = {
    MessageType::SourcePos,    MessageType::TargetPos,    MessageType::RelPos,
    MessageType::Distance,     MessageType::SourceCatRel, MessageType::TargetCatRel,
    MessageType::Full};
inline constexpr std::array<int, 6> kAllCombineWidths = {8, 16, 32, 64, 128, 256};
inline constexpr std::array<SampleMode, 2> kAllSampleModes = {SampleMode::Knn,
                                                              SampleMode::Random};

struct ConnectFunc {
  ConnectMode mode = ConnectMode::Identity;
  bool operator==(const ConnectFunc&) const = default;
};
struct AggregateFunc {
  Aggregator aggregator = Aggregator::Max;
  MessageType message = MessageType::Full;
  bool operator==(const AggregateFunc&) const = default;
};
struct CombineFunc {
  int width = 64;
  bool operator==(const CombineFunc&) const = default;
};
struct SampleFunc {
  SampleMode mode = SampleMode::Knn;
  int k = 16;
  bool operator==(const SampleFunc&) const = default;
};

// The variant index is the OperationKind, so an assignment cannot carry a
// function of the wrong operation by construction.
using FunctionSpec = std::variant<ConnectFunc, AggregateFunc, CombineFunc, SampleFunc>;

struct PositionAssignment {
  FunctionSpec func;

  OperationKind kind() const { return static_cast<OperationKind>(func.index()); }
  bool operator==(const PositionAssignment&) const = default;
};

// Message width given the incoming feature width d.
int message_dim(MessageType m, int d);

// ---------------------------------------------------------------------------
// Genotype and function sets
// ---------------------------------------------------------------------------

struct ArchitectureGenotype {
  std::vector<PositionAssignment> positions;
  int input_dim = 3;
  int num_classes = 4;

  bool operator==(const ArchitectureGenotype&) const = default;
};

// One function choice per operation kind; total over all four kinds by
// construction.
struct HalfFunctions {
  ConnectFunc connect;
  AggregateFunc aggregate;
  CombineFunc combine;
  SampleFunc sample;

  FunctionSpec spec_for(OperationKind kind) const;
  bool operator==(const HalfFunctions&) const = default;
};

struct FunctionSet {
  HalfFunctions upper;
  HalfFunctions lower;
  bool operator==(const FunctionSet&) const = default;
};

// Positions [0, upper_half_size(N)) take the upper set, the rest the lower.
inline int upper_half_size(int num_positions) { return (num_positions + 1) / 2; }

// ---------------------------------------------------------------------------
// Design-space configuration
// ---------------------------------------------------------------------------

struct DesignSpaceConfig {
  int num_positions = 12;
  int input_dim = 3;
  int num_classes = 4;
  int default_k = 16;

  std::vector<OperationKind> allowed_ops{kAllOperationKinds.begin(),
                                         kAllOperationKinds.end()};
  std::vector<ConnectMode> connect_modes{kAllConnectModes.begin(), kAllConnectModes.end()};
  std::vector<Aggregator> aggregators{kAllAggregators.begin(), kAllAggregators.end()};
  std::vector<MessageType> messages{kAllMessageTypes.begin(), kAllMessageTypes.end()};
  std::vector<int> combine_widths{kAllCombineWidths.begin(), kAllCombineWidths.end()};
  std::vector<SampleMode> sample_modes{kAllSampleModes.begin(), kAllSampleModes.end()};

  // throws std::invalid_argument on an empty allowed set or non-positive sizes
  void validate() const;

  bool allows(OperationKind kind) const;
  // number of distinct (op, func) assignments available at one position
  int assignments_per_position() const;
  // number of distinct per-kind function choices for one allowed kind
  int function_count(OperationKind kind) const;
  // product of function_count over allowed kinds = candidate half-sets
  BigUint function_set_count() const;

  // assignment <-> dense index bijection in a fixed enumeration order
  PositionAssignment assignment_at(int index) const;
  int assignment_index(const PositionAssignment& a) const;

  bool contains(const PositionAssignment& a) const;
  bool contains(const ArchitectureGenotype& g) const;
};

// ---------------------------------------------------------------------------
// Space operations
// ---------------------------------------------------------------------------

// Exact cardinality. Unshared: assignments^N. Shared halves: the number of
// distinct architectures expressible as (operation sequence, upper set,
// lower set); collapsing repeated kinds within a half makes this strictly
// smaller than the unshared count unless each half has at most one position
// or every kind has a single function choice.
BigUint space_size(const DesignSpaceConfig& config, bool shared_halves);

ArchitectureGenotype random_genotype(const DesignSpaceConfig& config, std::uint64_t seed);
ArchitectureGenotype random_genotype(const DesignSpaceConfig& config, Rng& rng);

// Uniform operation kinds with functions fixed per half by the set.
ArchitectureGenotype random_genotype_with_functions(const DesignSpaceConfig& config,
                                                    const FunctionSet& fs, Rng& rng);

ArchitectureGenotype mutate(const ArchitectureGenotype& g, const DesignSpaceConfig& config,
                            double rate, Rng& rng);

ArchitectureGenotype crossover(const ArchitectureGenotype& a, const ArchitectureGenotype& b,
                               Rng& rng);
// deterministic variant used by tests; cut in [0, N]
ArchitectureGenotype crossover_at(const ArchitectureGenotype& a,
                                  const ArchitectureGenotype& b, int cut);

// Execution-equivalent reduced form: collapses runs of identical Sample
// assignments (duplicate graph construction) and drops Identity connects.
ArchitectureGenotype canonical_form(const ArchitectureGenotype& g);

// Four [Sample KNN, Aggregate(max, Full), Combine] blocks with the DGCNN
// backbone widths 64/64/128/256; positions beyond 12 pad with Identity.
ArchitectureGenotype dgcnn_like_preset(const DesignSpaceConfig& config);

// Visits every genotype of the unshared space in enumeration order; stops
// early if the visitor returns false. Throws if the space exceeds `limit`.
void enumerate_space(const DesignSpaceConfig& config, std::uint64_t limit,
                     const std::function<bool(const ArchitectureGenotype&)>& visit);

// ---------------------------------------------------------------------------
// Names and JSON (schema used by the CLI and all on-disk artifacts)
// ---------------------------------------------------------------------------

std::string to_string(OperationKind kind);
std::string to_string(ConnectMode mode);
std::string to_string(Aggregator a);
std::string to_string(MessageType m);
std::string to_string(SampleMode m);
std::string function_label(const PositionAssignment& a);

std::string genotype_to_json(const ArchitectureGenotype& g, int indent = -1);
ArchitectureGenotype genotype_from_json(const std::string& text);

// Compact stable key, used for dedup caches and tie-breaking.
std::string genotype_key(const ArchitectureGenotype& g);

std::string function_set_to_json(const FunctionSet& fs);
FunctionSet function_set_from_json(const std::string& text);

std::string space_config_to_json(const DesignSpaceConfig& config, int indent = -1);
DesignSpaceConfig space_config_from_json(const std::string& text);

}  // namespace hgnas
