#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hgnas/design_space.hpp"

namespace hgnas {

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

enum class LatencySource { Oracle, Predictor };

struct SearchObjective {
  double alpha = 1.0;          // accuracy weight
  double beta = 0.5;           // latency weight
  double constraint_ms = 1.0;  // hard latency constraint C
  double ref_ms = 1.0;         // latency normalizer (latency enters as lat/ref)
  LatencySource source = LatencySource::Oracle;

  void validate() const;
};

// Constraint-gated objective: 0 when lat >= C, otherwise
// alpha * acc - beta * (lat / ref).
double f_obj(double acc_val, double lat_ms, const SearchObjective& o);

// ---------------------------------------------------------------------------
// Evolutionary engine
// ---------------------------------------------------------------------------

struct EAConfig {
  int population = 20;
  int max_generations = 50;  // T
  double parent_fraction = 0.25;
  double mutation_rate = 0.10;
  double crossover_prob = 0.50;
  // unique candidate evaluations allowed; 0 means population * generations
  std::size_t eval_budget = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ParetoRecord {
  ArchitectureGenotype genotype;
  double acc_val = 0.0;
  double latency_ms = 0.0;
  double objective = 0.0;
  int generation = 0;
};

// accuracy(genotype, eval_seed) -> acc_val in [0,1]
using AccuracyFn = std::function<double(const ArchitectureGenotype&, std::uint64_t)>;
// latency(genotype) -> ms; +infinity marks an unrunnable candidate (OOM)
using LatencyFn = std::function<double(const ArchitectureGenotype&)>;
// fitness(function set, eval_seed) -> score to maximize
using FunctionFitness = std::function<double(const FunctionSet&, std::uint64_t)>;

struct OperationSearchResult {
  ArchitectureGenotype best_genotype;
  ParetoRecord best;
  std::vector<ParetoRecord> history;  // one record per unique evaluation
  bool feasible = false;              // any candidate satisfied the constraint
  std::size_t unique_evaluations = 0;
  std::size_t latency_evaluations = 0;
  std::size_t accuracy_evaluations = 0;
};

// Stage 2: EA over per-position operations with the function set fixed per
// half. Latency is evaluated first; only candidates inside the constraint
// get an accuracy evaluation. Results are cached by canonical genotype.
OperationSearchResult operation_search(const DesignSpaceConfig& space,
                                       const FunctionSet& functions,
                                       const SearchObjective& objective,
                                       const EAConfig& ea, const LatencyFn& latency,
                                       const AccuracyFn& accuracy, int jobs = 1);

// Ablation comparator: the same EA directly over joint (operation, function)
// assignments with one budget.
OperationSearchResult one_stage_search(const DesignSpaceConfig& space,
                                       const SearchObjective& objective,
                                       const EAConfig& ea, const LatencyFn& latency,
                                       const AccuracyFn& accuracy, int jobs = 1);

struct FunctionSearchResult {
  FunctionSet best;
  double best_fitness = 0.0;
  std::size_t unique_evaluations = 0;
};

// Stage 1: EA over (upper, lower) function-set pairs, maximizing fitness
// (supernet acc_val in the real pipeline).
FunctionSearchResult function_search(const DesignSpaceConfig& space,
                                     const FunctionFitness& fitness, const EAConfig& ea);

// ---------------------------------------------------------------------------
// Multi-stage strategy
// ---------------------------------------------------------------------------

struct MultiStageResult {
  FunctionSet functions;
  OperationSearchResult operations;
  std::size_t stage1_evaluations = 0;
  std::size_t total_evaluations = 0;
};

// Stage 1 fixes the function set, then stage 2 searches operations under it.
// `stage2_accuracy_factory` receives the chosen set (the real pipeline
// re-initializes and pre-trains the supernet there).
MultiStageResult run_multistage(
    const DesignSpaceConfig& space, const SearchObjective& objective,
    const EAConfig& stage1_ea, const EAConfig& stage2_ea, const FunctionFitness& fitness,
    const std::function<AccuracyFn(const FunctionSet&)>& stage2_accuracy_factory,
    const LatencyFn& latency, int jobs = 1);

// ---------------------------------------------------------------------------
// Pareto front
// ---------------------------------------------------------------------------

// Records not dominated in (acc_val up, latency down), ordered by ascending
// latency (ties by descending accuracy, then input order).
std::vector<ParetoRecord> pareto_front(const std::vector<ParetoRecord>& history);

// ---------------------------------------------------------------------------
// Deterministic surrogate accuracy
// ---------------------------------------------------------------------------

// Stand-in accuracy model for search experiments that would otherwise need a
// trained supernet: position-weighted operation/function quality scores with
// an edge-reuse context term. Deterministic, in [0, 1].
double surrogate_accuracy(const ArchitectureGenotype& g);

// Mean fitness of a function set under the surrogate, averaged over
// `paths` random operation assignments (mirrors the supernet path averaging).
double surrogate_function_fitness(const DesignSpaceConfig& space, const FunctionSet& fs,
                                  int paths, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string pareto_record_to_json(const ParetoRecord& r);
ParetoRecord pareto_record_from_json(const std::string& text);

std::string objective_to_json(const SearchObjective& o);
SearchObjective objective_from_json(const std::string& text);

std::string ea_config_to_json(const EAConfig& ea);
EAConfig ea_config_from_json(const std::string& text);

// Count of canonical KNN sample positions (merged duplicates count once).
int knn_sample_count(const ArchitectureGenotype& g);

}  // namespace hgnas
