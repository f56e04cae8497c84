#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include "fheio/experiments.hpp"

using namespace fheio;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::size_t rows_of_kind(const Experiment& e, const std::string& kind) {
  return std::size_t(std::count_if(
      e.table.rows.begin(), e.table.rows.end(),
      [&](const std::vector<std::string>& r) { return r[1] == kind; }));
}

template <typename Pred>
const TargetCheck& find_check(const Experiment& e, Pred pred) {
  auto it = std::find_if(e.checks.begin(), e.checks.end(), pred);
  REQUIRE(it != e.checks.end());
  return *it;
}

}  // namespace

TEST_CASE("the experiment catalogue is fixed and rejects strangers") {
  CHECK(experiment_ids() == std::vector<std::string>{"E1", "E2", "E3", "E4"});
  const Registry reg = Registry::embedded();
  try {
    run_experiment(reg, "E9");
    FAIL("expected a param error");
  } catch (const param_error& e) {
    CHECK(std::string(e.what()) ==
          "unknown experiment 'E9' (known: E1, E2, E3, E4)");
  }
}

TEST_CASE("storage slowdown study hits every published factor") {
  const Registry reg = Registry::embedded();
  const Experiment e = run_experiment(reg, "E1");

  CHECK(e.file_name == "E1_storage_slowdown.csv");
  CHECK(e.table.columns.size() == 26);
  CHECK(rows_of_kind(e, "run") == 20);
  CHECK(rows_of_kind(e, "target") == 12);
  CHECK(e.checks.size() == 12);
  CHECK(e.gated_pass);
  for (const auto& c : e.checks) {
    CHECK(c.gating);
    CHECK(c.passed);
  }

  const TargetCheck& worst = find_check(e, [](const TargetCheck& c) {
    return c.app == "resnet20" && c.storage == "rdma" && c.accel == "sharp";
  });
  CHECK_THAT(worst.value, WithinRel(134.589, 1e-4));
  CHECK(worst.target == 131.7);
  CHECK(worst.tolerance == 15.0);

  const TargetCheck& gpu = find_check(e, [](const TargetCheck& c) {
    return c.accel == "tensorfhe" && c.storage == "rdma";
  });
  CHECK_THAT(gpu.value, WithinAbs(14.5512, 1e-3));
  CHECK(gpu.target == 15.2);
  CHECK(gpu.tolerance == 20.0);
}

TEST_CASE("cache sensitivity study sweeps and solves the thresholds") {
  const Registry reg = Registry::embedded();
  const Experiment e = run_experiment(reg, "E2");

  CHECK(e.file_name == "E2_cache_sensitivity.csv");
  CHECK(rows_of_kind(e, "run") == 808);
  CHECK(rows_of_kind(e, "metric") == 8);
  CHECK(rows_of_kind(e, "target") == 4);
  CHECK(e.gated_pass);

  const std::vector<std::pair<std::string, double>> expected = {
      {"hbm", 89.656}, {"ddr5", 96.379}, {"pcie5", 99.353}, {"rdma", 99.874}};
  for (const auto& [tier, value] : expected) {
    const TargetCheck& c = find_check(
        e, [&](const TargetCheck& t) { return t.storage == tier; });
    CHECK_THAT(c.value, WithinAbs(value, 0.005));
    CHECK(c.kind == TargetCheck::Kind::abs_pts);
    CHECK(c.tolerance == 2.0);
    CHECK(c.passed);
  }
}

TEST_CASE("grid refinement agrees with the closed-form hit ratio") {
  const Registry reg = Registry::embedded();
  for (const std::string tier : {"pcie5", "rdma"}) {
    const Trace trace = detail::experiment_trace(reg, "sharp/resnet20");
    const Platform p = reg.make_platform("sharp/resnet20", tier, "ethernet", 1,
                                         0.0, ExecMode::cold);
    const double refined = detail::threshold_by_refinement(trace, p, 0.8);
    const double closed = required_hit_ratio(trace, p, 0.8);
    CHECK_THAT(refined, WithinAbs(closed, 1e-4));
  }
}

TEST_CASE("distributed scaling study covers the grid and the aggregates") {
  const Registry reg = Registry::embedded();
  const Experiment e = run_experiment(reg, "E3");

  CHECK(e.file_name == "E3_distributed_scaling.csv");
  CHECK(rows_of_kind(e, "run") == 192);
  CHECK(rows_of_kind(e, "target") == 12);
  CHECK(e.checks.size() == 12);
  CHECK(e.gated_pass);

  std::size_t informational = 0;
  for (const auto& c : e.checks) {
    if (!c.gating) {
      informational++;
      CHECK(c.metric == "slowdown_vs_1host_app_avg");
    } else {
      CHECK(c.passed);
    }
  }
  CHECK(informational == 2);

  const TargetCheck& ff_rdma = find_check(e, [](const TargetCheck& c) {
    return c.link == "fastfabric" && c.storage == "rdma" &&
           c.accel == "sharp" && c.gating;
  });
  CHECK_THAT(ff_rdma.value, WithinAbs(13.723, 0.005));
  CHECK(ff_rdma.target == 11.96);

  const TargetCheck& eth_hbm = find_check(e, [](const TargetCheck& c) {
    return c.link == "ethernet" && c.storage == "hbm" &&
           c.metric == "speedup_app_avg";
  });
  CHECK(eth_hbm.kind == TargetCheck::Kind::below);
  CHECK(eth_hbm.value < 1.0);

  const TargetCheck& eth_rdma = find_check(e, [](const TargetCheck& c) {
    return c.link == "ethernet" && c.storage == "rdma" &&
           c.metric == "speedup_app_avg";
  });
  CHECK(eth_rdma.kind == TargetCheck::Kind::above);
  CHECK(eth_rdma.value > 1.0);

  const TargetCheck& gpu_eth = find_check(e, [](const TargetCheck& c) {
    return c.accel == "tensorfhe" && c.link == "ethernet";
  });
  CHECK_THAT(gpu_eth.value, WithinAbs(5.8596, 0.001));
  CHECK(gpu_eth.target == 6.6);
  const TargetCheck& gpu_ff = find_check(e, [](const TargetCheck& c) {
    return c.accel == "tensorfhe" && c.link == "fastfabric";
  });
  CHECK_THAT(gpu_ff.value, WithinAbs(10.6301, 0.001));
  CHECK(gpu_ff.target == 9.7);
}

TEST_CASE("time breakdown study matches the published splits") {
  const Registry reg = Registry::embedded();
  const Experiment e = run_experiment(reg, "E4");

  CHECK(e.file_name == "E4_time_breakdown.csv");
  CHECK(rows_of_kind(e, "run") == 12);
  CHECK(rows_of_kind(e, "target") == 10);
  CHECK(e.gated_pass);
  for (const auto& c : e.checks) CHECK(c.passed);

  auto frac = [&](const std::string& app, std::uint32_t hosts,
                  const std::string& metric) {
    return find_check(e, [&](const TargetCheck& c) {
             return c.app == app && c.hosts == hosts && c.metric == metric;
           }).value;
  };
  CHECK_THAT(frac("resnet20", 1, "compute_frac_pct"), WithinAbs(3.69, 0.01));
  CHECK_THAT(frac("resnet20", 1, "io_frac_pct"), WithinAbs(96.31, 0.01));
  CHECK_THAT(frac("resnet20", 32, "comm_frac_pct"), WithinAbs(91.92, 0.01));

  // the calibration anchor reproduces itself exactly
  const Experiment& ref = e;
  const auto tf = [&](const std::string& metric) {
    return find_check(ref, [&](const TargetCheck& c) {
             return c.accel == "tensorfhe" && c.hosts == 32 &&
                    c.metric == metric;
           });
  };
  CHECK_THAT(tf("compute_frac_pct").value, WithinAbs(40.1, 1e-9));
  CHECK_THAT(tf("io_frac_pct").value, WithinAbs(18.1, 1e-9));
  CHECK_THAT(tf("comm_frac_pct").value, WithinAbs(41.8, 1e-9));

  const TargetCheck& alpha_low = find_check(e, [](const TargetCheck& c) {
    return c.metric == "serial_fraction" && c.kind == TargetCheck::Kind::above;
  });
  CHECK(alpha_low.target == 0.0);
  CHECK(alpha_low.passed);
}

TEST_CASE("experiment output is byte-stable across runs") {
  const Registry reg = Registry::embedded();
  for (const std::string id : {"E1", "E4"}) {
    const Experiment a = run_experiment(reg, id);
    const Experiment b = run_experiment(reg, id);
    CHECK(a.table.to_string() == b.table.to_string());
    CHECK_FALSE(a.table.to_string().empty());
  }
}
