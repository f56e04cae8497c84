#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fheio/platform.hpp"

using namespace fheio;

namespace {

NetworkLink ethernet() { return {"ethernet", 50'000'000'000}; }
StorageTier pcie5() { return {"pcie5", 68'719'476'736}; }

}  // namespace

TEST_CASE("compute scale follows the Amdahl form") {
  Accelerator asic{"a", AccelKind::asic, 1e9, 0.0};
  CHECK(compute_scale(asic, 1) == 1.0);
  CHECK(compute_scale(asic, 32) == 1.0 / 32.0);

  Accelerator gpu{"g", AccelKind::gpu, 1e9, 0.25};
  CHECK(compute_scale(gpu, 1) == 1.0);
  CHECK(compute_scale(gpu, 4) == 0.25 + 0.75 / 4.0);

  Accelerator serial{"s", AccelKind::gpu, 1e9, 1.0};
  CHECK(compute_scale(serial, 32) == 1.0);
}

TEST_CASE("per-host link traffic carries the (n-1)/n factor") {
  CHECK(comm_seconds(1e12, 1, ethernet()) == 0.0);
  CHECK(comm_seconds(32e9, 32, ethernet()) == 0.62);
  CHECK(comm_seconds(50e9, 2, ethernet()) == 0.5);

  // more hosts never shrink the asymptote but grow the per-host share
  double prev = 0.0;
  for (std::uint32_t n : {2u, 4u, 8u, 16u, 32u}) {
    const double t = comm_seconds(1e11, n, ethernet());
    CHECK(t > prev);
    prev = t;
  }
  CHECK(prev < 1e11 / 50e9);  // strictly below the full-volume time
}

TEST_CASE("io volume is rate times cycles") {
  CHECK(calibrate_io_volume(1633.0, 0.099, 1e9) == 161'667'000'000.0);
  CHECK(calibrate_io_volume(1793.0, 0.099, 1e9) == 177'507'000'000.0);
  CHECK(calibrate_io_volume(0.0, 1.0, 1e9) == 0.0);
  CHECK_THROWS_AS(calibrate_io_volume(-1.0, 1.0, 1e9), calibration_error);
  CHECK_THROWS_AS(calibrate_io_volume(1.0, 0.0, 1e9), calibration_error);
  CHECK_THROWS_AS(calibrate_io_volume(1.0, 1.0, 0.0), calibration_error);
}

TEST_CASE("breakdown fractions must be a distribution") {
  CHECK_NOTHROW(BreakdownFractions{0.003, 0.072, 0.925}.validate());
  CHECK_NOTHROW(BreakdownFractions{1.0, 0.0, 0.0}.validate());
  CHECK_THROWS_AS((BreakdownFractions{0.5, 0.5, 0.5}.validate()),
                  calibration_error);
  CHECK_THROWS_AS((BreakdownFractions{-0.1, 0.6, 0.5}.validate()),
                  calibration_error);
}

TEST_CASE("comm-volume calibration inverts the published 32-host breakdown") {
  const BreakdownFractions observed{0.003, 0.072, 0.925};
  const double volume =
      calibrate_comm_volume(observed, 0.099, 0.0, 32, ethernet());

  // compute anchors the total: 0.099/32 / 0.003 = 1.03125 s of which 92.5%
  // is communication
  const double comm_s = comm_seconds(volume, 32, ethernet());
  CHECK_THAT(comm_s, Catch::Matchers::WithinRel(0.95390625, 1e-12));
  CHECK_THAT(volume, Catch::Matchers::WithinRel(49'233'870'967.742, 1e-9));

  // feeding the volume forward reproduces the observed comm share
  const double total_s = (0.099 / 32.0) / observed.compute;
  CHECK_THAT(comm_s / total_s, Catch::Matchers::WithinRel(0.925, 1e-12));
}

TEST_CASE("comm-volume calibration round-trips on model-consistent input") {
  // pick a volume, derive the exact breakdown it produces, calibrate back
  const double volume = 3.21e10;
  const std::uint32_t hosts = 8;
  const double t_c1 = 0.42;
  const double alpha = 0.1;
  const double compute_s = t_c1 * (alpha + (1.0 - alpha) / hosts);
  const double io_s = 0.2;
  const double comm_s = comm_seconds(volume, hosts, ethernet());
  const double total = compute_s + io_s + comm_s;
  const BreakdownFractions f{compute_s / total, io_s / total, comm_s / total};
  const double back = calibrate_comm_volume(f, t_c1, alpha, hosts, ethernet());
  CHECK_THAT(back, Catch::Matchers::WithinRel(volume, 1e-6));
}

TEST_CASE("comm-volume calibration rejects unusable inputs") {
  const BreakdownFractions ok{0.003, 0.072, 0.925};
  CHECK_THROWS_AS(calibrate_comm_volume(ok, 0.099, 0.0, 1, ethernet()),
                  calibration_error);
  CHECK_THROWS_AS(
      calibrate_comm_volume({0.0, 0.075, 0.925}, 0.099, 0.0, 32, ethernet()),
      calibration_error);
  CHECK_THROWS_AS(calibrate_comm_volume(ok, 0.0, 0.0, 32, ethernet()),
                  calibration_error);
  CHECK_THROWS_AS(calibrate_comm_volume(ok, 0.099, 1.5, 32, ethernet()),
                  calibration_error);
  CHECK_THROWS_AS(calibrate_comm_volume(ok, 0.099, 0.0, 32, {"x", 0}),
                  config_error);
}

TEST_CASE("serial-fraction calibration recovers alpha from a breakdown") {
  // evaluation-key-only volume: 2.8x the reference ASIC rate over its run
  const double v_evk = 2.8 * 1633.0 * 0.099 * 1e9;
  const double alpha = calibrate_gpu_alpha({0.401, 0.181, 0.418}, 4.9, v_evk,
                                           pcie5(), 32);
  CHECK_THAT(alpha, Catch::Matchers::WithinAbs(0.0638, 5e-4));
  CHECK(alpha > 0.0);
  CHECK(alpha < 0.15);
}

TEST_CASE("serial-fraction calibration is exact on synthetic breakdowns") {
  const double alpha_in = 0.21;
  const double t_c1 = 2.0;
  const std::uint32_t hosts = 16;
  const double v = 5e11;
  const double compute_s = t_c1 * (alpha_in + (1.0 - alpha_in) / hosts);
  const double io_s = v / 68'719'476'736.0 / hosts;
  const double comm_s = 0.3;
  const double total = compute_s + io_s + comm_s;
  const BreakdownFractions f{compute_s / total, io_s / total, comm_s / total};
  const double alpha = calibrate_gpu_alpha(f, t_c1, v, pcie5(), hosts);
  CHECK_THAT(alpha, Catch::Matchers::WithinRel(alpha_in, 1e-9));
}

TEST_CASE("serial-fraction calibration detects no-solution breakdowns") {
  // observed compute too small: implies alpha below 0
  CHECK_THROWS_AS(
      calibrate_gpu_alpha({0.9, 0.05, 0.05}, 1.0, 1e9, pcie5(), 32),
      calibration_error);
  // observed compute too large: implies alpha above 1
  CHECK_THROWS_AS(
      calibrate_gpu_alpha({0.5, 0.25, 0.25}, 0.001, 68'719'476'736.0, pcie5(),
                          32),
      calibration_error);
  CHECK_THROWS_AS(
      calibrate_gpu_alpha({0.5, 0.0, 0.5}, 1.0, 1e9, pcie5(), 32),
      calibration_error);
  CHECK_THROWS_AS(
      calibrate_gpu_alpha({0.401, 0.181, 0.418}, 4.9, 1e12, pcie5(), 1),
      calibration_error);
}

TEST_CASE("serial-fraction calibration clamps the exact-zero boundary") {
  // compute share tuned so the implied multi-host compute is exactly t_c1/n
  const double t_c1 = 3.2;
  const double v = 68'719'476'736.0 * 32.0;
  const BreakdownFractions f{0.05, 0.5, 0.45};
  const double alpha = calibrate_gpu_alpha(f, t_c1, v, pcie5(), 32);
  CHECK(alpha == 0.0);
}

TEST_CASE("component validation catches configuration mistakes") {
  Accelerator bad_asic{"a", AccelKind::asic, 1e9, 0.1};
  CHECK_THROWS_AS(bad_asic.validate(), config_error);
  Accelerator no_clock{"a", AccelKind::asic, 0.0, 0.0};
  CHECK_THROWS_AS(no_clock.validate(), config_error);
  Accelerator bad_alpha{"g", AccelKind::gpu, 1e9, 1.5};
  CHECK_THROWS_AS(bad_alpha.validate(), config_error);

  CHECK_THROWS_AS((StorageTier{"s", 0}.validate()), config_error);
  CHECK_THROWS_AS((StorageTier{"", 1}.validate()), config_error);

  CHECK_THROWS_AS(CacheModel{-0.1}.validate(), config_error);
  CHECK_THROWS_AS(CacheModel{1.1}.validate(), config_error);
  CHECK_THROWS_AS(CacheModel{std::nan("")}.validate(), config_error);

  Cluster c;
  CHECK_NOTHROW(c.validate());  // single host never touches the link
  c.hosts = 0;
  CHECK_THROWS_AS(c.validate(), config_error);
  c.hosts = 2;
  CHECK_THROWS_AS(c.validate(), config_error);  // link still unset
  c.link = ethernet();
  CHECK_NOTHROW(c.validate());
  c.switch_nonblocking = false;
  CHECK_THROWS_AS(c.validate(), config_error);
  c.switch_nonblocking = true;
  c.comm_volume_base_bytes = -1.0;
  CHECK_THROWS_AS(c.validate(), config_error);
}
