#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "hgnas/device_model.hpp"
#include "hgnas/search.hpp"

using namespace hgnas;

namespace {

DeviceProfile unit_profile() {
  DeviceProfile p;
  p.name = "unit";
  p.compute_flops_per_ms = 1.0;
  p.mem_bytes_per_ms = 1.0;
  p.irregular_penalty = 1.0;
  p.op_overhead_ms = 1.0;
  p.memory_capacity_mb = 1e12;
  return p;
}

ArchitectureGenotype dgcnn(int positions = 12) {
  DesignSpaceConfig config;
  config.num_positions = positions;
  return dgcnn_like_preset(config);
}

}  // namespace

TEST_CASE("all-identity genotype costs only the per-op overheads") {
  ArchitectureGenotype g;
  g.positions.assign(5, PositionAssignment{ConnectFunc{ConnectMode::Identity}});
  DeviceProfile p = unit_profile();
  p.op_overhead_ms = 0.25;
  LatencyEstimate est = oracle_latency(g, InputSpec{64, 3, 1}, p);
  CHECK(est.total_ms == doctest::Approx(5 * 0.25));
  for (const auto& [kind, ms] : est.breakdown_ms) CHECK(ms == 0.0);
}

TEST_CASE("single combine on the unit profile is M*d_in*d_out") {
  ArchitectureGenotype g;
  g.input_dim = 2;
  g.positions = {PositionAssignment{CombineFunc{4}}};
  LatencyEstimate est = oracle_latency(g, InputSpec{8, 2, 1}, unit_profile());
  CHECK(est.breakdown_ms.at(OperationKind::Combine) == doctest::Approx(8.0 * 2 * 4));
  CHECK(est.total_ms == doctest::Approx(64.0 + 1.0));  // + one op overhead
}

TEST_CASE("total equals breakdown plus overheads exactly") {
  DesignSpaceConfig config;
  config.num_positions = 10;
  Rng rng = make_rng(2);
  for (int i = 0; i < 50; ++i) {
    ArchitectureGenotype g = canonical_form(random_genotype(config, rng));
    for (const auto& p : builtin_profiles()) {
      try {
        LatencyEstimate est = oracle_latency(g, InputSpec{256, 3, 1}, p);
        double sum = est.overhead_ms;
        for (const auto& [kind, ms] : est.breakdown_ms) sum += ms;
        CHECK(est.total_ms == doctest::Approx(sum).epsilon(1e-12));
      } catch (const OutOfMemoryError&) {
        // constrained profile may reject big random genotypes; fine here
      }
    }
  }
}

TEST_CASE("builtin profiles exist with the documented names") {
  std::vector<std::string> names;
  for (const auto& p : builtin_profiles()) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"gpu_like", "cpu_like", "embedded_gpu_like",
                                          "constrained_like"});
  CHECK_THROWS_AS(builtin_profile("tpu_like"), std::invalid_argument);
}

TEST_CASE("profile breakdown shares match the device narratives") {
  ArchitectureGenotype g = dgcnn();
  InputSpec in{1024, 3, 1};

  auto est = [&](const std::string& name) {
    return oracle_latency(g, in, builtin_profile(name));
  };

  // sample-dominated GPU-class devices
  for (const std::string& name : {"gpu_like", "embedded_gpu_like"}) {
    LatencyEstimate e = est(name);
    CHECK(e.breakdown_share(OperationKind::Sample) > 0.5);
  }

  // aggregate and sample take up most of the CPU execution
  {
    LatencyEstimate e = est("cpu_like");
    double agg = e.breakdown_share(OperationKind::Aggregate);
    double sam = e.breakdown_share(OperationKind::Sample);
    double comb = e.breakdown_share(OperationKind::Combine);
    CHECK(agg + sam > 0.6);
    CHECK(agg > comb);
    CHECK(sam > comb);
  }

  // all three phases substantial on the constrained profile
  {
    LatencyEstimate e = est("constrained_like");
    CHECK(e.breakdown_share(OperationKind::Sample) >= 0.15);
    CHECK(e.breakdown_share(OperationKind::Aggregate) >= 0.15);
    CHECK(e.breakdown_share(OperationKind::Combine) >= 0.15);
  }

  // slower devices are slower end to end
  CHECK(est("gpu_like").total_ms < est("cpu_like").total_ms);
  CHECK(est("cpu_like").total_ms < est("embedded_gpu_like").total_ms);
  CHECK(est("embedded_gpu_like").total_ms < est("constrained_like").total_ms);
}

TEST_CASE("constrained profile OOMs between 1024 and 1536 points") {
  ArchitectureGenotype g = dgcnn();
  const DeviceProfile& p = builtin_profile("constrained_like");
  CHECK_NOTHROW(oracle_latency(g, InputSpec{1024, 3, 1}, p));
  CHECK_THROWS_AS(oracle_latency(g, InputSpec{1536, 3, 1}, p), OutOfMemoryError);
}

TEST_CASE("latency is monotone in points, k, and width") {
  DesignSpaceConfig config;
  config.num_positions = 6;
  Rng rng = make_rng(77);
  const DeviceProfile& p = builtin_profile("cpu_like");
  for (int trial = 0; trial < 40; ++trial) {
    ArchitectureGenotype g = canonical_form(random_genotype(config, rng));

    double base = oracle_latency(g, InputSpec{128, 3, 1}, p).total_ms;
    CHECK(oracle_latency(g, InputSpec{256, 3, 1}, p).total_ms >= base);

    ArchitectureGenotype wider = g;
    bool bumped = false;
    for (auto& pos : wider.positions) {
      if (pos.kind() == OperationKind::Combine) {
        std::get<CombineFunc>(pos.func).width *= 2;
        bumped = true;
        break;
      }
      if (pos.kind() == OperationKind::Sample) {
        std::get<SampleFunc>(pos.func).k *= 2;
        bumped = true;
        break;
      }
    }
    if (bumped)
      CHECK(oracle_latency(wider, InputSpec{128, 3, 1}, p).total_ms >= base);
  }
}

TEST_CASE("label_batch") {
  DesignSpaceConfig config;
  config.num_positions = 4;
  std::vector<ArchitectureGenotype> genotypes;
  for (int i = 0; i < 1000; ++i) genotypes.push_back(random_genotype(config, 100 + i));
  InputSpec in{128, 3, 1};
  const DeviceProfile& p = builtin_profile("gpu_like");

  SUBCASE("zero sigma reproduces the oracle exactly") {
    auto labels = label_batch(genotypes, in, p, 0.0, 5);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      double oracle = oracle_latency(canonical_form(genotypes[i]), in, p).total_ms;
      CHECK(labels[i].latency_ms == oracle);
    }
  }
  SUBCASE("sigma 0.05 gives roughly 4-6% deviation from the oracle") {
    auto labels = label_batch(genotypes, in, p, 0.05, 5);
    double total_rel = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      double oracle = oracle_latency(canonical_form(genotypes[i]), in, p).total_ms;
      total_rel += std::abs(labels[i].latency_ms - oracle) / oracle;
    }
    double mape = total_rel / labels.size();
    CHECK(mape > 0.03);
    CHECK(mape < 0.06);
  }
  SUBCASE("seed-deterministic") {
    auto a = label_batch(genotypes, in, p, 0.05, 5);
    auto b = label_batch(genotypes, in, p, 0.05, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].latency_ms == b[i].latency_ms);
  }
}

TEST_CASE("profile JSON round trip and validation") {
  const DeviceProfile& p = builtin_profile("constrained_like");
  DeviceProfile parsed = profile_from_json(profile_to_json(p));
  CHECK(parsed.name == p.name);
  CHECK(parsed.compute_flops_per_ms == p.compute_flops_per_ms);
  CHECK(parsed.memory_capacity_mb == p.memory_capacity_mb);

  DeviceProfile bad = p;
  bad.irregular_penalty = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
