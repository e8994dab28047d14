#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "hgnas/design_space.hpp"

using namespace hgnas;

namespace {

DesignSpaceConfig full_config(int n) {
  DesignSpaceConfig config;
  config.num_positions = n;
  return config;
}

DesignSpaceConfig small_config() {
  // 2 connect + 2*2 aggregate + 2 combine + 1 sample = 9 assignments/position
  DesignSpaceConfig config;
  config.num_positions = 2;
  config.aggregators = {Aggregator::Max, Aggregator::Mean};
  config.messages = {MessageType::RelPos, MessageType::Full};
  config.combine_widths = {16, 64};
  config.sample_modes = {SampleMode::Knn};
  return config;
}

}  // namespace

TEST_CASE("per-position assignment count for the full table") {
  // 2 connect + 4*7 aggregate + 6 combine + 2 sample
  CHECK(full_config(1).assignments_per_position() == 38);
}

TEST_CASE("space_size examples") {
  DesignSpaceConfig connect_only;
  connect_only.num_positions = 1;
  connect_only.allowed_ops = {OperationKind::Connect};
  CHECK(space_size(connect_only, false).to_u64() == 2);

  CHECK(space_size(full_config(3), false).to_u64() == 54872);  // 38^3

  // N=12 counts are reported, not asserted against the paper's figures
  BigUint unshared = space_size(full_config(12), false);
  BigUint shared = space_size(full_config(12), true);
  CHECK(shared < unshared);
  CHECK(unshared.to_string() == BigUint::pow(BigUint(38), 12).to_string());
}

TEST_CASE("space_size equals exhaustive enumeration") {
  Rng rng = make_rng(1234);
  for (int trial = 0; trial < 8; ++trial) {
    DesignSpaceConfig config;
    config.num_positions = 1 + static_cast<int>(rng() % 3);
    config.aggregators = {Aggregator::Sum, Aggregator::Max};
    config.messages = {MessageType::RelPos, MessageType::Distance,
                       MessageType::TargetCatRel};
    config.combine_widths = {8, 32, 128};
    std::uint64_t count = 0;
    enumerate_space(config, 200000, [&](const ArchitectureGenotype&) {
      ++count;
      return true;
    });
    CHECK(count == space_size(config, false).to_u64());
  }
}

TEST_CASE("shared-halves count equals distinct enumerated architectures") {
  DesignSpaceConfig config = small_config();
  // enumerate (op sequence, upper set, lower set) tuples and count distinct
  // genotypes by key
  const int upper_n = upper_half_size(config.num_positions);
  std::vector<HalfFunctions> sets;
  for (auto cm : config.connect_modes)
    for (auto ag : config.aggregators)
      for (auto msg : config.messages)
        for (int w : config.combine_widths)
          for (auto sm : config.sample_modes) {
            HalfFunctions h;
            h.connect = {cm};
            h.aggregate = {ag, msg};
            h.combine = {w};
            h.sample = {sm, config.default_k};
            sets.push_back(h);
          }
  REQUIRE(sets.size() == 16);

  std::set<std::string> distinct;
  const int kinds = static_cast<int>(config.allowed_ops.size());
  std::vector<int> ops(config.num_positions, 0);
  while (true) {
    for (const auto& upper : sets)
      for (const auto& lower : sets) {
        ArchitectureGenotype g;
        g.input_dim = config.input_dim;
        g.num_classes = config.num_classes;
        for (int p = 0; p < config.num_positions; ++p) {
          const HalfFunctions& half = p < upper_n ? upper : lower;
          g.positions.push_back({half.spec_for(config.allowed_ops[ops[p]])});
        }
        distinct.insert(genotype_key(g));
      }
    int p = config.num_positions - 1;
    while (p >= 0 && ++ops[p] == kinds) ops[p--] = 0;
    if (p < 0) break;
  }
  CHECK(space_size(config, true).to_u64() == distinct.size());
}

TEST_CASE("shared-halves counting properties") {
  // equality when each half has at most one position
  DesignSpaceConfig two = small_config();
  CHECK(space_size(two, true).to_u64() == space_size(two, false).to_u64());

  // equality when every kind has a single function choice
  DesignSpaceConfig singleton = full_config(6);
  singleton.connect_modes = {ConnectMode::Identity};
  singleton.aggregators = {Aggregator::Max};
  singleton.messages = {MessageType::Full};
  singleton.combine_widths = {64};
  singleton.sample_modes = {SampleMode::Knn};
  CHECK(space_size(singleton, true).to_u64() == space_size(singleton, false).to_u64());

  // strictly smaller once a half repeats a kind with several functions
  DesignSpaceConfig four = small_config();
  four.num_positions = 4;
  CHECK(space_size(four, true) < space_size(four, false));
}

TEST_CASE("random_genotype determinism and closure") {
  DesignSpaceConfig config = full_config(2);
  CHECK(random_genotype(config, 7) == random_genotype(config, 7));
  for (int i = 0; i < 100; ++i) {
    ArchitectureGenotype g = random_genotype(config, 1000 + i);
    CHECK(config.contains(g));
  }
}

TEST_CASE("random_genotype per-kind frequencies match assignment shares") {
  DesignSpaceConfig config = full_config(1);
  const int trials = 10000;
  std::map<OperationKind, int> counts;
  Rng rng = make_rng(42);
  for (int i = 0; i < trials; ++i) counts[random_genotype(config, rng).positions[0].kind()]++;
  auto check_share = [&](OperationKind kind, double expected) {
    double p = expected;
    double sigma = std::sqrt(p * (1 - p) / trials);
    double observed = counts[kind] / static_cast<double>(trials);
    CHECK(std::abs(observed - p) <= 3 * sigma);
  };
  check_share(OperationKind::Connect, 2.0 / 38.0);
  check_share(OperationKind::Aggregate, 28.0 / 38.0);
  check_share(OperationKind::Combine, 6.0 / 38.0);
  check_share(OperationKind::Sample, 2.0 / 38.0);
}

TEST_CASE("restricted config samples only that operation") {
  DesignSpaceConfig config = full_config(4);
  config.allowed_ops = {OperationKind::Combine};
  for (int i = 0; i < 20; ++i)
    for (const auto& p : random_genotype(config, i).positions)
      CHECK(p.kind() == OperationKind::Combine);
}

TEST_CASE("mutate") {
  DesignSpaceConfig config = full_config(12);
  Rng rng = make_rng(5);
  ArchitectureGenotype g = random_genotype(config, 3);

  SUBCASE("rate zero is the identity") {
    CHECK(mutate(g, config, 0.0, rng) == g);
  }
  SUBCASE("rate one in a single-assignment space is the identity") {
    DesignSpaceConfig solo;
    solo.num_positions = 3;
    solo.allowed_ops = {OperationKind::Sample};
    solo.sample_modes = {SampleMode::Knn};
    ArchitectureGenotype h = random_genotype(solo, 1);
    CHECK(mutate(h, solo, 1.0, rng) == h);
  }
  SUBCASE("rate 0.5 changes ~ N/2 * (1 - 1/38) positions") {
    // binomial expectation with the self-resample correction:
    // 12 * 0.5 * (37/38) = 5.8421...; 3-sigma band for the mean of 1000
    // trials is +-0.1643 (per-position variance 0.24983)
    const int trials = 1000;
    double changed_total = 0.0;
    for (int t = 0; t < trials; ++t) {
      ArchitectureGenotype m = mutate(g, config, 0.5, rng);
      for (std::size_t p = 0; p < g.positions.size(); ++p)
        if (!(m.positions[p] == g.positions[p])) changed_total += 1.0;
    }
    double mean = changed_total / trials;
    CHECK(std::abs(mean - 5.8421052631578947) <= 0.1643);
  }
  SUBCASE("outputs stay inside the space") {
    for (int t = 0; t < 200; ++t) CHECK(config.contains(mutate(g, config, 0.3, rng)));
  }
}

TEST_CASE("crossover") {
  DesignSpaceConfig config = full_config(4);
  ArchitectureGenotype a = random_genotype(config, 1);
  ArchitectureGenotype b = random_genotype(config, 2);
  Rng rng = make_rng(9);

  CHECK(crossover(a, a, rng) == a);
  CHECK(crossover_at(a, b, 0) == b);
  CHECK(crossover_at(a, b, 4) == a);

  ArchitectureGenotype all_combine = a, all_sample = a;
  for (auto& p : all_combine.positions) p = {CombineFunc{64}};
  for (auto& p : all_sample.positions) p = {SampleFunc{SampleMode::Knn, 16}};
  ArchitectureGenotype mixed = crossover_at(all_combine, all_sample, 2);
  CHECK(mixed.positions[0].kind() == OperationKind::Combine);
  CHECK(mixed.positions[1].kind() == OperationKind::Combine);
  CHECK(mixed.positions[2].kind() == OperationKind::Sample);
  CHECK(mixed.positions[3].kind() == OperationKind::Sample);

  DesignSpaceConfig other = full_config(5);
  CHECK_THROWS_AS(crossover_at(a, random_genotype(other, 3), 1), std::invalid_argument);

  for (int t = 0; t < 200; ++t) CHECK(config.contains(crossover(a, b, rng)));
}

TEST_CASE("canonical_form") {
  auto knn8 = PositionAssignment{SampleFunc{SampleMode::Knn, 8}};
  auto knn16 = PositionAssignment{SampleFunc{SampleMode::Knn, 16}};
  auto comb = PositionAssignment{CombineFunc{64}};
  auto identity = PositionAssignment{ConnectFunc{ConnectMode::Identity}};

  ArchitectureGenotype g;
  g.positions = {knn8, knn8, comb};
  ArchitectureGenotype canon = canonical_form(g);
  REQUIRE(canon.positions.size() == 2);
  CHECK(canon.positions[0] == knn8);
  CHECK(canon.positions[1] == comb);

  ArchitectureGenotype no_adjacent;
  no_adjacent.positions = {knn8, comb, knn8};
  CHECK(canonical_form(no_adjacent) == no_adjacent);

  // different k keeps both constructions
  ArchitectureGenotype different_k;
  different_k.positions = {knn8, knn16};
  CHECK(canonical_form(different_k) == different_k);

  // identity connects merge neighbors into adjacency
  ArchitectureGenotype with_identity;
  with_identity.positions = {knn8, identity, knn8, comb};
  ArchitectureGenotype canon2 = canonical_form(with_identity);
  REQUIRE(canon2.positions.size() == 2);
  CHECK(canon2.positions[0] == knn8);
  CHECK(canon2.positions[1] == comb);

  // idempotence over random genotypes
  DesignSpaceConfig config = full_config(8);
  for (int i = 0; i < 300; ++i) {
    ArchitectureGenotype r = random_genotype(config, 5000 + i);
    CHECK(canonical_form(canonical_form(r)) == canonical_form(r));
  }
}

TEST_CASE("dgcnn_like_preset") {
  DesignSpaceConfig config = full_config(12);
  ArchitectureGenotype g = dgcnn_like_preset(config);
  REQUIRE(g.positions.size() == 12);
  for (int block = 0; block < 4; ++block) {
    CHECK(g.positions[3 * block].kind() == OperationKind::Sample);
    CHECK(g.positions[3 * block + 1].kind() == OperationKind::Aggregate);
    CHECK(g.positions[3 * block + 2].kind() == OperationKind::Combine);
  }
  const auto& agg = std::get<AggregateFunc>(g.positions[1].func);
  CHECK(agg.aggregator == Aggregator::Max);
  CHECK(agg.message == MessageType::Full);

  CHECK(canonical_form(g) == g);  // no adjacent duplicate samples

  DesignSpaceConfig thirteen = full_config(13);
  ArchitectureGenotype padded = dgcnn_like_preset(thirteen);
  REQUIRE(padded.positions.size() == 13);
  CHECK(padded.positions[12] ==
        PositionAssignment{ConnectFunc{ConnectMode::Identity}});

  DesignSpaceConfig small = full_config(11);
  CHECK_THROWS_AS(dgcnn_like_preset(small), std::invalid_argument);
}

TEST_CASE("genotype JSON schema") {
  const std::string fixture =
      R"({"positions":[{"op":"sample","func":{"mode":"knn","k":16}}],"input_dim":3,"num_classes":4})";
  ArchitectureGenotype g = genotype_from_json(fixture);
  REQUIRE(g.positions.size() == 1);
  CHECK(g.positions[0] == PositionAssignment{SampleFunc{SampleMode::Knn, 16}});
  CHECK(g.input_dim == 3);
  CHECK(g.num_classes == 4);
  CHECK(genotype_to_json(g) == fixture);

  CHECK_THROWS_AS(genotype_from_json(R"({"positions":[{"op":"warp"}]})"),
                  std::invalid_argument);

  // emit-parse identity over random genotypes
  DesignSpaceConfig config = full_config(6);
  for (int i = 0; i < 100; ++i) {
    ArchitectureGenotype r = random_genotype(config, 900 + i);
    CHECK(genotype_from_json(genotype_to_json(r)) == r);
  }
}

TEST_CASE("function set JSON round trip") {
  DesignSpaceConfig config = full_config(4);
  Rng rng = make_rng(77);
  FunctionSet fs;
  fs.upper.aggregate = {Aggregator::Min, MessageType::Distance};
  fs.lower.combine = {128};
  FunctionSet parsed = function_set_from_json(function_set_to_json(fs));
  CHECK(parsed == fs);
  (void)config;
  (void)rng;
}

TEST_CASE("space config JSON round trip") {
  DesignSpaceConfig config = small_config();
  DesignSpaceConfig parsed = space_config_from_json(space_config_to_json(config));
  CHECK(parsed.num_positions == config.num_positions);
  CHECK(parsed.aggregators == config.aggregators);
  CHECK(parsed.messages == config.messages);
  CHECK(parsed.combine_widths == config.combine_widths);
  CHECK(parsed.sample_modes == config.sample_modes);
}

TEST_CASE("config validation rejects empty allowed sets") {
  DesignSpaceConfig config = full_config(2);
  config.allowed_ops = {};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  DesignSpaceConfig config2 = full_config(2);
  config2.combine_widths = {};
  CHECK_THROWS_AS(config2.validate(), std::invalid_argument);
}
