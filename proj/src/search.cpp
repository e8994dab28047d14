#include "hgnas/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace hgnas {

using nlohmann::json;
using nlohmann::ordered_json;

void SearchObjective::validate() const {
  if (alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0)
    throw std::invalid_argument("objective needs alpha, beta >= 0 with alpha + beta > 0");
  if (constraint_ms <= 0.0) throw std::invalid_argument("constraint must be positive");
  if (ref_ms <= 0.0) throw std::invalid_argument("ref_ms must be positive");
}

double f_obj(double acc_val, double lat_ms, const SearchObjective& o) {
  if (lat_ms >= o.constraint_ms) return 0.0;
  return o.alpha * acc_val - o.beta * (lat_ms / o.ref_ms);
}

void EAConfig::validate() const {
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (max_generations < 1) throw std::invalid_argument("max_generations must be >= 1");
  if (parent_fraction <= 0.0 || parent_fraction > 1.0)
    throw std::invalid_argument("parent_fraction must be in (0,1]");
  if (mutation_rate < 0.0 || mutation_rate > 1.0)
    throw std::invalid_argument("mutation_rate must be in [0,1]");
  if (crossover_prob < 0.0 || crossover_prob > 1.0)
    throw std::invalid_argument("crossover_prob must be in [0,1]");
}

// ---------------------------------------------------------------------------
// Generic gated EA over genotype candidates
// ---------------------------------------------------------------------------

namespace {

struct Proposer {
  std::function<ArchitectureGenotype(Rng&)> random;
  std::function<ArchitectureGenotype(const ArchitectureGenotype&,
                                     const ArchitectureGenotype&, Rng&)>
      vary;
};

struct Evaluated {
  ArchitectureGenotype genotype;
  double acc = 0.0;
  double lat = std::numeric_limits<double>::infinity();
  double obj = 0.0;
};

bool better_record(const Evaluated& a, const Evaluated& b) {
  if (a.obj != b.obj) return a.obj > b.obj;
  if (a.lat != b.lat) return a.lat < b.lat;
  return genotype_key(a.genotype) < genotype_key(b.genotype);
}

OperationSearchResult gated_ea(const SearchObjective& objective, const EAConfig& ea,
                               const Proposer& proposer, const LatencyFn& latency,
                               const AccuracyFn& accuracy, int jobs) {
  objective.validate();
  ea.validate();
  if (jobs < 1) jobs = 1;
  const std::size_t budget =
      ea.eval_budget > 0 ? ea.eval_budget
                         : static_cast<std::size_t>(ea.population) * ea.max_generations;

  OperationSearchResult result;
  std::map<std::string, Evaluated> cache;

  auto candidate_rng = [&](int generation, int index) {
    return make_rng(derive_seed(ea.seed, static_cast<std::uint64_t>(generation),
                                static_cast<std::uint64_t>(index)));
  };

  // Evaluate a generation: unique cache misses burn budget; latency first,
  // accuracy only inside the constraint.
  auto evaluate_generation = [&](std::vector<ArchitectureGenotype>& population,
                                 int generation) {
    std::vector<std::string> keys(population.size());
    std::vector<const ArchitectureGenotype*> missing;
    std::vector<std::string> missing_keys;
    for (std::size_t i = 0; i < population.size(); ++i) {
      keys[i] = genotype_key(canonical_form(population[i]));
      if (cache.find(keys[i]) == cache.end() &&
          std::find(missing_keys.begin(), missing_keys.end(), keys[i]) ==
              missing_keys.end()) {
        if (result.unique_evaluations + missing.size() >= budget) continue;
        missing.push_back(&population[i]);
        missing_keys.push_back(keys[i]);
      }
    }

    std::vector<Evaluated> fresh(missing.size());
    auto eval_one = [&](std::size_t mi) {
      Evaluated ev;
      ev.genotype = *missing[mi];
      ev.lat = latency(ev.genotype);
      if (ev.lat < objective.constraint_ms) {
        ev.acc = accuracy(ev.genotype,
                          derive_seed(ea.seed, 0xACC, std::hash<std::string>{}(
                                                          missing_keys[mi])));
      }
      ev.obj = f_obj(ev.acc, ev.lat, objective);
      fresh[mi] = std::move(ev);
    };
    if (jobs == 1 || missing.size() <= 1) {
      for (std::size_t mi = 0; mi < missing.size(); ++mi) eval_one(mi);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> workers;
      int n = std::min<int>(jobs, static_cast<int>(missing.size()));
      for (int w = 0; w < n; ++w)
        workers.emplace_back([&]() {
          for (std::size_t mi = next.fetch_add(1); mi < missing.size();
               mi = next.fetch_add(1))
            eval_one(mi);
        });
      for (auto& t : workers) t.join();
    }

    for (std::size_t mi = 0; mi < missing.size(); ++mi) {
      const Evaluated& ev = fresh[mi];
      cache.emplace(missing_keys[mi], ev);
      ++result.unique_evaluations;
      ++result.latency_evaluations;
      if (ev.lat < objective.constraint_ms) ++result.accuracy_evaluations;
      if (ev.lat < objective.constraint_ms) result.feasible = true;
      ParetoRecord rec;
      rec.genotype = ev.genotype;
      rec.acc_val = ev.acc;
      rec.latency_ms = ev.lat;
      rec.objective = ev.obj;
      rec.generation = generation;
      result.history.push_back(std::move(rec));
    }
  };

  auto fitness_of = [&](const ArchitectureGenotype& g) -> const Evaluated* {
    auto it = cache.find(genotype_key(canonical_form(g)));
    return it == cache.end() ? nullptr : &it->second;
  };

  std::vector<ArchitectureGenotype> population;
  population.reserve(ea.population);
  for (int i = 0; i < ea.population; ++i) {
    Rng rng = candidate_rng(0, i);
    population.push_back(proposer.random(rng));
  }

  Evaluated best;
  best.obj = -std::numeric_limits<double>::infinity();
  const int parent_count = std::max(
      1, static_cast<int>(std::ceil(ea.parent_fraction * ea.population)));

  for (int gen = 0; gen < ea.max_generations; ++gen) {
    evaluate_generation(population, gen);
    // rank current population by cached fitness
    std::vector<const Evaluated*> ranked;
    for (const auto& g : population) {
      const Evaluated* ev = fitness_of(g);
      if (ev) ranked.push_back(ev);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const Evaluated* a, const Evaluated* b) { return better_record(*a, *b); });
    ranked.erase(std::unique(ranked.begin(), ranked.end()), ranked.end());
    if (!ranked.empty() && better_record(*ranked.front(), best)) best = *ranked.front();
    if (result.unique_evaluations >= budget) break;
    if (gen + 1 == ea.max_generations) break;

    std::vector<ArchitectureGenotype> next;
    next.reserve(ea.population);
    next.push_back(best.genotype);  // elitism
    const int pool = std::min<int>(parent_count, static_cast<int>(ranked.size()));
    for (int i = static_cast<int>(next.size()); i < ea.population; ++i) {
      Rng rng = candidate_rng(gen + 1, i);
      if (pool == 0) {
        next.push_back(proposer.random(rng));
        continue;
      }
      std::uniform_int_distribution<int> pick(0, pool - 1);
      const ArchitectureGenotype& a = ranked[pick(rng)]->genotype;
      const ArchitectureGenotype& b = ranked[pick(rng)]->genotype;
      next.push_back(proposer.vary(a, b, rng));
    }
    population = std::move(next);
  }

  if (best.obj == -std::numeric_limits<double>::infinity() && !result.history.empty()) {
    // every candidate was gated; surface the first by tie-break order
    best.genotype = result.history.front().genotype;
    best.acc = result.history.front().acc_val;
    best.lat = result.history.front().latency_ms;
    best.obj = result.history.front().objective;
  }
  result.best_genotype = best.genotype;
  result.best.genotype = best.genotype;
  result.best.acc_val = best.acc;
  result.best.latency_ms = best.lat;
  result.best.objective = best.obj;
  return result;
}

}  // namespace

OperationSearchResult operation_search(const DesignSpaceConfig& space,
                                       const FunctionSet& functions,
                                       const SearchObjective& objective,
                                       const EAConfig& ea, const LatencyFn& latency,
                                       const AccuracyFn& accuracy, int jobs) {
  space.validate();
  const int upper_n = upper_half_size(space.num_positions);
  auto ops_of = [](const ArchitectureGenotype& g) {
    std::vector<OperationKind> ops;
    ops.reserve(g.positions.size());
    for (const auto& p : g.positions) ops.push_back(p.kind());
    return ops;
  };
  auto build = [&space, &functions, upper_n](const std::vector<OperationKind>& ops) {
    ArchitectureGenotype g;
    g.input_dim = space.input_dim;
    g.num_classes = space.num_classes;
    g.positions.reserve(ops.size());
    for (std::size_t p = 0; p < ops.size(); ++p) {
      const HalfFunctions& half =
          static_cast<int>(p) < upper_n ? functions.upper : functions.lower;
      g.positions.push_back({half.spec_for(ops[p])});
    }
    return g;
  };

  Proposer proposer;
  proposer.random = [&space, &functions](Rng& rng) {
    return random_genotype_with_functions(space, functions, rng);
  };
  const double crossover_prob = ea.crossover_prob;
  const double mutation_rate = ea.mutation_rate;
  proposer.vary = [&space, build, ops_of, crossover_prob,
                   mutation_rate](const ArchitectureGenotype& a,
                                  const ArchitectureGenotype& b, Rng& rng) {
    std::vector<OperationKind> ops = ops_of(a);
    std::vector<OperationKind> ops_b = ops_of(b);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    // single-point crossover over the operation sequence
    std::uniform_int_distribution<int> cut_dist(0, static_cast<int>(ops.size()));
    if (coin(rng) < crossover_prob) {
      int cut = cut_dist(rng);
      for (std::size_t p = static_cast<std::size_t>(cut); p < ops.size(); ++p)
        ops[p] = ops_b[p];
    }
    std::uniform_int_distribution<int> op_pick(
        0, static_cast<int>(space.allowed_ops.size()) - 1);
    for (auto& op : ops)
      if (coin(rng) < mutation_rate) op = space.allowed_ops[op_pick(rng)];
    return build(ops);
  };
  return gated_ea(objective, ea, proposer, latency, accuracy, jobs);
}

OperationSearchResult one_stage_search(const DesignSpaceConfig& space,
                                       const SearchObjective& objective,
                                       const EAConfig& ea, const LatencyFn& latency,
                                       const AccuracyFn& accuracy, int jobs) {
  space.validate();
  Proposer proposer;
  proposer.random = [&space](Rng& rng) { return random_genotype(space, rng); };
  proposer.vary = [&space, &ea](const ArchitectureGenotype& a,
                                const ArchitectureGenotype& b, Rng& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    ArchitectureGenotype child = coin(rng) < ea.crossover_prob ? crossover(a, b, rng) : a;
    return mutate(child, space, ea.mutation_rate, rng);
  };
  return gated_ea(objective, ea, proposer, latency, accuracy, jobs);
}

// ---------------------------------------------------------------------------
// Function search (stage 1)
// ---------------------------------------------------------------------------

namespace {

HalfFunctions random_half(const DesignSpaceConfig& space, Rng& rng) {
  auto pick = [&rng](auto& list) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(list.size()) - 1);
    return list[d(rng)];
  };
  HalfFunctions h;
  h.connect.mode = pick(space.connect_modes);
  h.aggregate.aggregator = pick(space.aggregators);
  h.aggregate.message = pick(space.messages);
  h.combine.width = pick(space.combine_widths);
  h.sample.mode = pick(space.sample_modes);
  h.sample.k = space.default_k;
  return h;
}

// slot layout per half: connect mode, aggregator, message, width, sample mode
constexpr int kSlotsPerHalf = 5;

void mutate_slot(HalfFunctions& h, int slot, const DesignSpaceConfig& space, Rng& rng) {
  auto pick = [&rng](auto& list) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(list.size()) - 1);
    return list[d(rng)];
  };
  switch (slot) {
    case 0:
      h.connect.mode = pick(space.connect_modes);
      break;
    case 1:
      h.aggregate.aggregator = pick(space.aggregators);
      break;
    case 2:
      h.aggregate.message = pick(space.messages);
      break;
    case 3:
      h.combine.width = pick(space.combine_widths);
      break;
    case 4:
      h.sample.mode = pick(space.sample_modes);
      break;
    default:
      break;
  }
}

std::string function_set_key(const FunctionSet& fs) { return function_set_to_json(fs); }

}  // namespace

FunctionSearchResult function_search(const DesignSpaceConfig& space,
                                     const FunctionFitness& fitness, const EAConfig& ea) {
  space.validate();
  ea.validate();
  FunctionSearchResult result;

  // Degenerate space: a single candidate pair needs one evaluation only.
  if (space.function_set_count() == BigUint(1)) {
    Rng rng = make_rng(ea.seed);
    result.best = FunctionSet{random_half(space, rng), random_half(space, rng)};
    result.best_fitness = fitness(result.best, derive_seed(ea.seed, 0xF17));
    result.unique_evaluations = 1;
    return result;
  }

  const std::size_t budget =
      ea.eval_budget > 0 ? ea.eval_budget
                         : static_cast<std::size_t>(ea.population) * ea.max_generations;
  std::map<std::string, double> cache;

  struct Scored {
    FunctionSet fs;
    double fitness;
  };
  auto evaluate = [&](const FunctionSet& fs) -> double {
    std::string key = function_set_key(fs);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (result.unique_evaluations >= budget)
      return -std::numeric_limits<double>::infinity();
    double f = fitness(fs, derive_seed(ea.seed, 0xF17, std::hash<std::string>{}(key)));
    cache.emplace(std::move(key), f);
    ++result.unique_evaluations;
    return f;
  };

  std::vector<FunctionSet> population;
  for (int i = 0; i < ea.population; ++i) {
    Rng rng = make_rng(derive_seed(ea.seed, 0, static_cast<std::uint64_t>(i)));
    population.push_back(FunctionSet{random_half(space, rng), random_half(space, rng)});
  }

  Scored best{population.front(), -std::numeric_limits<double>::infinity()};
  const int parent_count =
      std::max(1, static_cast<int>(std::ceil(ea.parent_fraction * ea.population)));

  for (int gen = 0; gen < ea.max_generations; ++gen) {
    std::vector<Scored> scored;
    scored.reserve(population.size());
    for (const auto& fs : population) {
      double f = evaluate(fs);
      if (f > -std::numeric_limits<double>::infinity()) scored.push_back({fs, f});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.fitness != b.fitness) return a.fitness > b.fitness;
      return function_set_key(a.fs) < function_set_key(b.fs);
    });
    if (!scored.empty() && scored.front().fitness > best.fitness) best = scored.front();
    if (result.unique_evaluations >= budget || gen + 1 == ea.max_generations) break;

    std::vector<FunctionSet> next;
    next.push_back(best.fs);  // elitism
    const int pool = std::min<int>(parent_count, static_cast<int>(scored.size()));
    for (int i = 1; i < ea.population; ++i) {
      Rng rng = make_rng(derive_seed(ea.seed, static_cast<std::uint64_t>(gen + 1),
                                     static_cast<std::uint64_t>(i)));
      if (pool == 0) {
        next.push_back(FunctionSet{random_half(space, rng), random_half(space, rng)});
        continue;
      }
      std::uniform_int_distribution<int> pick(0, pool - 1);
      FunctionSet child = scored[pick(rng)].fs;
      const FunctionSet& other = scored[pick(rng)].fs;
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(rng) < ea.crossover_prob) {
        // single cut over the 10 (half, slot) positions
        std::uniform_int_distribution<int> cut_dist(0, 2 * kSlotsPerHalf);
        int cut = cut_dist(rng);
        auto splice = [&](HalfFunctions& dst, const HalfFunctions& src, int base) {
          HalfFunctions merged = dst;
          for (int s = 0; s < kSlotsPerHalf; ++s)
            if (base + s >= cut) {
              switch (s) {
                case 0:
                  merged.connect = src.connect;
                  break;
                case 1:
                  merged.aggregate.aggregator = src.aggregate.aggregator;
                  break;
                case 2:
                  merged.aggregate.message = src.aggregate.message;
                  break;
                case 3:
                  merged.combine = src.combine;
                  break;
                case 4:
                  merged.sample = src.sample;
                  break;
              }
            }
          dst = merged;
        };
        splice(child.upper, other.upper, 0);
        splice(child.lower, other.lower, kSlotsPerHalf);
      }
      for (int half = 0; half < 2; ++half)
        for (int s = 0; s < kSlotsPerHalf; ++s)
          if (coin(rng) < ea.mutation_rate)
            mutate_slot(half == 0 ? child.upper : child.lower, s, space, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
  }

  result.best = best.fs;
  result.best_fitness = best.fitness;
  return result;
}

MultiStageResult run_multistage(
    const DesignSpaceConfig& space, const SearchObjective& objective,
    const EAConfig& stage1_ea, const EAConfig& stage2_ea, const FunctionFitness& fitness,
    const std::function<AccuracyFn(const FunctionSet&)>& stage2_accuracy_factory,
    const LatencyFn& latency, int jobs) {
  MultiStageResult result;
  FunctionSearchResult stage1 = function_search(space, fitness, stage1_ea);
  result.functions = stage1.best;
  result.stage1_evaluations = stage1.unique_evaluations;
  AccuracyFn accuracy = stage2_accuracy_factory(stage1.best);
  result.operations = operation_search(space, stage1.best, objective, stage2_ea, latency,
                                       accuracy, jobs);
  result.total_evaluations = result.stage1_evaluations + result.operations.unique_evaluations;
  return result;
}

// ---------------------------------------------------------------------------
// Pareto front
// ---------------------------------------------------------------------------

std::vector<ParetoRecord> pareto_front(const std::vector<ParetoRecord>& history) {
  std::vector<ParetoRecord> front;
  for (std::size_t i = 0; i < history.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < history.size() && !dominated; ++j) {
      if (i == j) continue;
      const ParetoRecord& a = history[i];
      const ParetoRecord& b = history[j];
      if (b.acc_val >= a.acc_val && b.latency_ms <= a.latency_ms &&
          (b.acc_val > a.acc_val || b.latency_ms < a.latency_ms))
        dominated = true;
    }
    if (!dominated) front.push_back(history[i]);
  }
  std::stable_sort(front.begin(), front.end(),
                   [](const ParetoRecord& a, const ParetoRecord& b) {
                     if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
                     return a.acc_val > b.acc_val;
                   });
  return front;
}

// ---------------------------------------------------------------------------
// Surrogate accuracy
// ---------------------------------------------------------------------------

double surrogate_accuracy(const ArchitectureGenotype& g) {
  if (g.positions.empty()) return 0.25;
  const int n = static_cast<int>(g.positions.size());
  // edge context: aggregates score higher after a KNN construction
  double edge_quality = 0.6;  // no sampler yet
  double weighted = 0.0, weight_sum = 0.0;
  for (int p = 0; p < n; ++p) {
    const PositionAssignment& pos = g.positions[p];
    // front positions carry more representational weight
    double w = 1.5 - static_cast<double>(p) / n;
    double s = 0.0;
    switch (pos.kind()) {
      case OperationKind::Sample: {
        const auto& f = std::get<SampleFunc>(pos.func);
        edge_quality = f.mode == SampleMode::Knn ? 1.0 : 0.75;
        s = f.mode == SampleMode::Knn ? 0.9 : 0.55;
        break;
      }
      case OperationKind::Aggregate: {
        const auto& f = std::get<AggregateFunc>(pos.func);
        double aggr = 0.0;
        switch (f.aggregator) {
          case Aggregator::Max:
            aggr = 1.0;
            break;
          case Aggregator::Mean:
            aggr = 0.8;
            break;
          case Aggregator::Sum:
            aggr = 0.6;
            break;
          case Aggregator::Min:
            aggr = 0.3;
            break;
        }
        double msg = 0.0;
        switch (f.message) {
          case MessageType::Full:
            msg = 1.0;
            break;
          case MessageType::TargetCatRel:
            msg = 0.9;
            break;
          case MessageType::SourceCatRel:
            msg = 0.8;
            break;
          case MessageType::RelPos:
            msg = 0.7;
            break;
          case MessageType::SourcePos:
            msg = 0.5;
            break;
          case MessageType::TargetPos:
            msg = 0.45;
            break;
          case MessageType::Distance:
            msg = 0.35;
            break;
        }
        s = (0.5 * aggr + 0.5 * msg) * edge_quality;
        break;
      }
      case OperationKind::Combine:
        s = std::log2(static_cast<double>(std::get<CombineFunc>(pos.func).width)) / 8.0;
        break;
      case OperationKind::Connect:
        s = std::get<ConnectFunc>(pos.func).mode == ConnectMode::SkipConnect ? 0.6 : 0.45;
        break;
    }
    weighted += w * s;
    weight_sum += w;
  }
  double score = weighted / weight_sum;
  return std::clamp(0.25 + 0.7 * score, 0.0, 1.0);
}

double surrogate_function_fitness(const DesignSpaceConfig& space, const FunctionSet& fs,
                                  int paths, std::uint64_t seed) {
  double total = 0.0;
  for (int r = 0; r < paths; ++r) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    total += surrogate_accuracy(random_genotype_with_functions(space, fs, rng));
  }
  return total / paths;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string pareto_record_to_json(const ParetoRecord& r) {
  ordered_json j;
  j["generation"] = r.generation;
  j["acc_val"] = r.acc_val;
  j["latency_ms"] = r.latency_ms;
  j["objective"] = r.objective;
  j["genotype"] = json::parse(genotype_to_json(r.genotype));
  return j.dump();
}

ParetoRecord pareto_record_from_json(const std::string& text) {
  json j = json::parse(text);
  ParetoRecord r;
  r.generation = j.at("generation").get<int>();
  r.acc_val = j.at("acc_val").get<double>();
  r.latency_ms = j.at("latency_ms").get<double>();
  r.objective = j.at("objective").get<double>();
  r.genotype = genotype_from_json(j.at("genotype").dump());
  return r;
}

std::string objective_to_json(const SearchObjective& o) {
  ordered_json j;
  j["alpha"] = o.alpha;
  j["beta"] = o.beta;
  j["constraint_ms"] = o.constraint_ms;
  j["ref_ms"] = o.ref_ms;
  j["latency_source"] = o.source == LatencySource::Oracle ? "oracle" : "predictor";
  return j.dump();
}

SearchObjective objective_from_json(const std::string& text) {
  json j = json::parse(text);
  SearchObjective o;
  o.alpha = j.value("alpha", o.alpha);
  o.beta = j.value("beta", o.beta);
  o.constraint_ms = j.value("constraint_ms", o.constraint_ms);
  o.ref_ms = j.value("ref_ms", o.ref_ms);
  std::string src = j.value("latency_source", "oracle");
  if (src == "oracle")
    o.source = LatencySource::Oracle;
  else if (src == "predictor")
    o.source = LatencySource::Predictor;
  else
    throw std::invalid_argument("latency_source: unknown value '" + src + "'");
  o.validate();
  return o;
}

std::string ea_config_to_json(const EAConfig& ea) {
  ordered_json j;
  j["population"] = ea.population;
  j["max_generations"] = ea.max_generations;
  j["parent_fraction"] = ea.parent_fraction;
  j["mutation_rate"] = ea.mutation_rate;
  j["crossover_prob"] = ea.crossover_prob;
  j["eval_budget"] = ea.eval_budget;
  j["seed"] = ea.seed;
  return j.dump();
}

EAConfig ea_config_from_json(const std::string& text) {
  json j = json::parse(text);
  EAConfig ea;
  ea.population = j.value("population", ea.population);
  ea.max_generations = j.value("max_generations", ea.max_generations);
  ea.parent_fraction = j.value("parent_fraction", ea.parent_fraction);
  ea.mutation_rate = j.value("mutation_rate", ea.mutation_rate);
  ea.crossover_prob = j.value("crossover_prob", ea.crossover_prob);
  ea.eval_budget = j.value("eval_budget", ea.eval_budget);
  ea.seed = j.value("seed", ea.seed);
  ea.validate();
  return ea;
}

int knn_sample_count(const ArchitectureGenotype& g) {
  ArchitectureGenotype canon = canonical_form(g);
  int count = 0;
  for (const auto& pos : canon.positions)
    if (pos.kind() == OperationKind::Sample &&
        std::get<SampleFunc>(pos.func).mode == SampleMode::Knn)
      ++count;
  return count;
}

}  // namespace hgnas
