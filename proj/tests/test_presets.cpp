#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fheio/presets.hpp"

using namespace fheio;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double io_volume_of(const Registry& reg, const std::string& name) {
  const AppProfile& p = reg.profile(name);
  const Accelerator& a = reg.accelerator(p.accel_name);
  return (p.evk_bytes_per_cycle + p.ct_bytes_per_cycle) *
         double(baseline_cycles(p, a));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

}  // namespace

TEST_CASE("embedded parameter presets carry the published key sizes") {
  const Registry reg = Registry::embedded();

  const CkksParams& sharp = reg.params("sharp");
  CHECK(sharp.ring_degree_N == 65536);
  CHECK(sharp.log_q_bits == 1555);
  CHECK(limb_count(sharp) == 26);
  CHECK(evk_bytes(sharp) == 88'080'384);

  const CkksParams& tr = reg.params("tensorfhe-resnet");
  const CkksParams& th = reg.params("tensorfhe-helr");
  CHECK(tr.dnum == 28);
  CHECK(limb_count(tr) == 14);
  CHECK(limb_count(th) == 19);
  CHECK(evk_bytes(tr) == 411'041'792);
  CHECK(evk_bytes(th) == 557'842'432);

  // gpu keys average 5.5x the asic key size
  const double mean =
      (double(evk_bytes(tr)) + double(evk_bytes(th))) / 2.0;
  CHECK(mean == 5.5 * double(evk_bytes(sharp)));
}

TEST_CASE("embedded platform presets resolve to the published machines") {
  const Registry reg = Registry::embedded();

  const Accelerator& sharp = reg.accelerator("sharp");
  CHECK(sharp.kind == AccelKind::asic);
  CHECK(sharp.clock_hz == 1e9);
  CHECK(sharp.serial_fraction == 0.0);

  // resolved from the breakdown calibration block at load time
  const Accelerator& tf = reg.accelerator("tensorfhe");
  CHECK(tf.kind == AccelKind::gpu);
  CHECK(tf.clock_hz == 1.41e9);
  CHECK_THAT(tf.serial_fraction, WithinAbs(0.0732296044, 1e-9));
  CHECK(tf.serial_fraction > 0.0);
  CHECK(tf.serial_fraction < 0.15);

  CHECK(reg.storage("hbm").bandwidth_bytes_per_s == 1'099'511'627'776);
  CHECK(reg.storage("ddr5").bandwidth_bytes_per_s == 384'829'746'381);
  CHECK(reg.storage("pcie5").bandwidth_bytes_per_s == 68'719'476'736);
  CHECK(reg.storage("rdma").bandwidth_bytes_per_s == 13'421'772'800);
  CHECK(reg.link("ethernet").bandwidth_bytes_per_s == 50'000'000'000);
  CHECK(reg.link("fastfabric").bandwidth_bytes_per_s == 322'122'547'200);
}

TEST_CASE("profile rates, footprints and exchange volumes") {
  const Registry reg = Registry::embedded();

  const AppProfile& rn = reg.profile("sharp/resnet20");
  CHECK(rn.evk_bytes_per_cycle == 1633.0);
  CHECK(rn.ct_bytes_per_cycle == 160.0);
  CHECK(rn.distinct_evk_count == 112);
  CHECK(rn.iterations == 1);
  CHECK(rn.evk_set_bytes == 112ull * 88'080'384ull);

  const AppProfile& hr = reg.profile("sharp/helr");
  CHECK(hr.baseline_time_s == 0.0025);
  CHECK(hr.iterations == 32);
  CHECK(hr.distinct_evk_count == 25);

  CHECK(io_volume_of(reg, "sharp/resnet20") == 177'507'000'000.0);
  CHECK(io_volume_of(reg, "sharp/helr") == 12'825'000'000.0);

  // gpu volumes are scaled from the asic footprints
  CHECK_THAT(io_volume_of(reg, "tensorfhe/resnet20"),
             WithinRel(2.8 * 177'507'000'000.0, 1e-12));
  CHECK_THAT(io_volume_of(reg, "tensorfhe/helr"),
             WithinRel(4.5 * 12'825'000'000.0, 1e-12));
  CHECK(reg.profile("tensorfhe/resnet20").distinct_evk_count == 120);

  CHECK_THAT(reg.comm_volume("sharp/resnet20"),
             WithinRel(49'233'870'967.741936, 1e-12));
  CHECK(reg.comm_volume("sharp/helr") == 73e9);
  CHECK_THAT(reg.comm_volume("tensorfhe/resnet20"),
             WithinRel(26'940'130'119.08201, 1e-10));
  CHECK(reg.comm_volume("tensorfhe/helr") == 40e9);
}

TEST_CASE("unknown names report what is known") {
  const Registry reg = Registry::embedded();
  try {
    reg.profile("sharp/alexnet");
    FAIL("expected a config error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unknown profile 'sharp/alexnet'") != std::string::npos);
    CHECK(msg.find("sharp/resnet20") != std::string::npos);
    CHECK(msg.find("tensorfhe/helr") != std::string::npos);
  }
  try {
    reg.storage("floppy");
    FAIL("expected a config error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unknown storage tier 'floppy'") != std::string::npos);
    CHECK(msg.find("hbm") != std::string::npos);
  }
  CHECK_THROWS_AS(reg.accelerator("tpu"), config_error);
  CHECK_THROWS_AS(reg.link("carrier-pigeon"), config_error);
  CHECK_THROWS_AS(reg.params("toy"), config_error);
  CHECK(reg.has_profile("sharp/helr"));
  CHECK_FALSE(reg.has_profile("sharp/alexnet"));
}

TEST_CASE("make_platform wires the cluster exchange volume") {
  const Registry reg = Registry::embedded();
  const Platform p = reg.make_platform("sharp/helr", "pcie5", "ethernet", 4,
                                       0.25, ExecMode::cold);
  CHECK(p.storage.bandwidth_bytes_per_s == 68'719'476'736);
  CHECK(p.cache.hit_ratio == 0.25);
  CHECK(p.cluster.hosts == 4);
  CHECK(p.cluster.comm_volume_base_bytes == 73e9);

  const Platform solo = reg.make_platform("sharp/helr", "hbm", "ethernet", 1,
                                          0.0, ExecMode::cold);
  CHECK(solo.cluster.comm_volume_base_bytes == 0.0);

  CHECK_THROWS_AS(
      reg.make_platform("sharp/helr", "tape", "ethernet", 1, 0.0,
                        ExecMode::cold),
      config_error);
}

TEST_CASE("a config directory overrides the embedded presets") {
  const auto dir = std::filesystem::temp_directory_path() / "fheio_cfg_test";
  std::filesystem::create_directories(dir);
  write_file(dir / "params.json", R"({
    "tiny": {"ring_degree_N": 4096, "log_q_bits": 120, "prime_bits": 60,
             "word_bytes": 8, "dnum": 1, "aux_limbs_K": 0}
  })");
  write_file(dir / "platform.json", R"({
    "accelerators": {
      "toy": {"kind": "asic", "clock_hz": 1000000, "serial_fraction": 0.0}
    },
    "storage": {"disk": 1000000000},
    "links": {"wire": 2000000000}
  })");
  write_file(dir / "profiles.json", R"({
    "toy/app": {
      "app": "app", "accel": "toy", "params": "tiny",
      "baseline_time_s": 1.0,
      "evk_bytes_per_cycle": 10, "ct_bytes_per_cycle": 1,
      "op_mix": {"PAdd": 0.5, "HMult": 0.5},
      "distinct_evk_count": 1, "iterations": 1
    }
  })");

  const Registry reg = Registry::from_dir(dir);
  CHECK(reg.params("tiny").ring_degree_N == 4096);
  CHECK(reg.profile_names() == std::vector<std::string>{"toy/app"});
  CHECK(reg.storage("disk").bandwidth_bytes_per_s == 1'000'000'000);
  CHECK_THROWS_AS(reg.params("sharp"), config_error);

  // no volume and no calibration block: multi-host setups must fail loudly
  try {
    reg.comm_volume("toy/app");
    FAIL("expected a config error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("calibrate_comm_volume") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(
      reg.make_platform("toy/app", "disk", "wire", 2, 0.0, ExecMode::cold),
      config_error);
  CHECK_NOTHROW(
      reg.make_platform("toy/app", "disk", "wire", 1, 0.0, ExecMode::cold));

  CHECK_THROWS_AS(Registry::from_dir(dir / "missing"), config_error);

  // the environment variable routes load() to the same directory
  REQUIRE(std::string(config_dir_env) == "FHEIO_CONFIG_DIR");
  ::setenv(config_dir_env, dir.string().c_str(), 1);
  CHECK(Registry::load().has_profile("toy/app"));
  ::unsetenv(config_dir_env);
  CHECK(Registry::load().has_profile("sharp/resnet20"));

  std::filesystem::remove_all(dir);
}

TEST_CASE("the shipped preset files mirror the embedded registry") {
  // keep presets/ in sync with the built-in defaults
#ifdef FHEIO_SOURCE_DIR
  const auto dir = std::filesystem::path(FHEIO_SOURCE_DIR) / "presets";
#else
  const auto dir = std::filesystem::path("presets");
#endif
  if (!std::filesystem::exists(dir / "params.json"))
    SKIP("preset files not visible from this working directory");
  const Registry disk = Registry::from_dir(dir);
  const Registry mem = Registry::embedded();
  CHECK(disk.profile_names() == mem.profile_names());
  CHECK(disk.storage_names() == mem.storage_names());
  CHECK(disk.accelerator("tensorfhe").serial_fraction ==
        mem.accelerator("tensorfhe").serial_fraction);
  CHECK(disk.comm_volume("sharp/resnet20") ==
        mem.comm_volume("sharp/resnet20"));
}
