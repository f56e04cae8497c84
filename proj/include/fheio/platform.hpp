#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "fheio/errors.hpp"
#include "fheio/units.hpp"

namespace fheio {

enum class AccelKind : std::uint8_t { asic, gpu };

inline const char* to_string(AccelKind k) {
  return k == AccelKind::asic ? "asic" : "gpu";
}

// Compute device. `serial_fraction` is the share of compute that does not
// parallelize across hosts: ASICs pipeline fully (always 0), GPUs keep a
// small serial residue. Multi-host compute time follows the Amdahl form
//   single_host * (serial_fraction + (1 - serial_fraction) / hosts).
struct Accelerator {
  std::string name;
  AccelKind kind = AccelKind::asic;
  double clock_hz = 0.0;
  double serial_fraction = 0.0;

  void validate() const {
    if (name.empty()) throw config_error("accelerator needs a name");
    if (clock_hz <= 0.0) throw config_error("accelerator clock must be positive");
    if (serial_fraction < 0.0 || serial_fraction > 1.0)
      throw config_error("serial_fraction must lie in [0,1]");
    if (kind == AccelKind::asic && serial_fraction != 0.0)
      throw config_error("ASIC accelerators have no serial compute fraction");
  }
};

// Bandwidth-only storage model: moving V bytes costs V / bandwidth seconds,
// regardless of access pattern.
struct StorageTier {
  std::string name;
  std::uint64_t bandwidth_bytes_per_s = 0;

  void validate() const {
    if (name.empty()) throw config_error("storage tier needs a name");
    if (bandwidth_bytes_per_s == 0)
      throw config_error("storage bandwidth must be positive");
  }
};

// Byte-level hit ratio applied uniformly to all off-chip demand.
struct CacheModel {
  double hit_ratio = 0.0;

  void validate() const {
    if (!(hit_ratio >= 0.0 && hit_ratio <= 1.0))
      throw config_error("hit_ratio must lie in [0,1]");
  }
};

struct NetworkLink {
  std::string name;
  std::uint64_t bandwidth_bytes_per_s = 0;

  void validate() const {
    if (name.empty()) throw config_error("network link needs a name");
    if (bandwidth_bytes_per_s == 0)
      throw config_error("link bandwidth must be positive");
  }
};

// Hosts in a star topology around one non-blocking switch, so each host's
// access link is the communication bottleneck. `comm_volume_base_bytes` is
// the calibrated per-host receive volume of the key-switching exchange at
// full replication; the effective per-host traffic at n hosts carries the
// factor (n-1)/n.
struct Cluster {
  std::uint32_t hosts = 1;
  NetworkLink link;
  bool switch_nonblocking = true;
  double comm_volume_base_bytes = 0.0;

  void validate() const {
    if (hosts == 0) throw config_error("host count must be positive");
    if (!switch_nonblocking)
      throw config_error("only the non-blocking switch model is implemented");
    if (comm_volume_base_bytes < 0.0)
      throw config_error("comm volume must be non-negative");
    if (hosts > 1) link.validate();
  }
};

// baseline: everything on-chip, storage and network never touched.
// cold: caches start empty; all off-chip traffic is charged to storage.
enum class ExecMode : std::uint8_t { baseline, cold };

inline const char* to_string(ExecMode m) {
  return m == ExecMode::baseline ? "baseline" : "cold";
}

struct Platform {
  Accelerator accel;
  StorageTier storage;
  CacheModel cache;
  Cluster cluster;
  ExecMode mode = ExecMode::cold;

  void validate() const {
    accel.validate();
    storage.validate();
    cache.validate();
    cluster.validate();
  }
};

// Fraction of compute that remains after distributing over n hosts.
inline double compute_scale(const Accelerator& accel, std::uint32_t hosts) {
  const double n = double(hosts);
  return accel.serial_fraction + (1.0 - accel.serial_fraction) / n;
}

// Per-host communication time for exchanging `volume_bytes` through the
// non-blocking switch: (n-1)/n of the volume crosses each access link.
inline double comm_seconds(double volume_bytes, std::uint32_t hosts,
                           const NetworkLink& link) {
  if (hosts <= 1) return 0.0;
  link.validate();
  return volume_bytes * (double(hosts) - 1.0) / double(hosts) /
         double(link.bandwidth_bytes_per_s);
}

// Total off-chip demand implied by a per-cycle byte rate over a run.
inline double calibrate_io_volume(double bytes_per_cycle, double baseline_time_s,
                                  double clock_hz) {
  if (bytes_per_cycle < 0.0)
    throw calibration_error("bytes_per_cycle must be non-negative");
  if (baseline_time_s <= 0.0 || clock_hz <= 0.0)
    throw calibration_error("baseline time and clock must be positive");
  return bytes_per_cycle * baseline_time_s * clock_hz;
}

// Published time breakdowns used as calibration inputs.
struct BreakdownFractions {
  double compute = 0.0;
  double io = 0.0;
  double comm = 0.0;

  void validate() const {
    if (compute < 0.0 || io < 0.0 || comm < 0.0)
      throw calibration_error("breakdown fractions must be non-negative");
    const double sum = compute + io + comm;
    if (std::abs(sum - 1.0) > 1e-6)
      throw calibration_error("breakdown fractions must sum to 1");
  }
};

// Infers the key-switching exchange volume from an observed breakdown at a
// known host count. The compute term is fully determined (baseline time,
// serial fraction, hosts), which anchors the total in seconds; the comm
// share then pins the volume the links must have carried. Exact algebraic
// inversion: feeding the result forward reproduces a model-consistent
// breakdown identically.
inline double calibrate_comm_volume(const BreakdownFractions& observed,
                                    double single_host_compute_s,
                                    double serial_fraction, std::uint32_t hosts,
                                    const NetworkLink& link) {
  observed.validate();
  link.validate();
  if (hosts < 2)
    throw calibration_error("comm-volume calibration needs at least 2 hosts");
  if (observed.compute <= 0.0)
    throw calibration_error(
        "comm-volume calibration needs a nonzero compute share");
  if (single_host_compute_s <= 0.0)
    throw calibration_error("single-host compute time must be positive");
  if (serial_fraction < 0.0 || serial_fraction > 1.0)
    throw calibration_error("serial_fraction must lie in [0,1]");

  const double n = double(hosts);
  const double compute_s =
      single_host_compute_s * (serial_fraction + (1.0 - serial_fraction) / n);
  const double total_s = compute_s / observed.compute;
  const double comm_s = observed.comm * total_s;
  const double volume =
      comm_s * double(link.bandwidth_bytes_per_s) * n / (n - 1.0);
  if (!(volume >= 0.0) || !std::isfinite(volume))
    throw calibration_error("observed breakdown implies an invalid volume");
  return volume;
}

// Recovers a GPU's serial compute fraction from an observed breakdown. The
// io term is known analytically (volume, bandwidth, hosts), anchoring the
// total; the compute share gives the multi-host compute time, and inverting
// the Amdahl form against the single-host time yields the fraction.
inline double calibrate_gpu_alpha(const BreakdownFractions& observed,
                                  double single_host_compute_s,
                                  double io_volume_bytes,
                                  const StorageTier& storage,
                                  std::uint32_t hosts) {
  observed.validate();
  storage.validate();
  if (hosts < 2)
    throw calibration_error("serial-fraction calibration needs at least 2 hosts");
  if (observed.io <= 0.0)
    throw calibration_error("serial-fraction calibration needs a nonzero io share");
  if (single_host_compute_s <= 0.0)
    throw calibration_error("single-host compute time must be positive");
  if (io_volume_bytes <= 0.0)
    throw calibration_error("serial-fraction calibration needs nonzero io volume");

  const double n = double(hosts);
  const double io_s = io_volume_bytes / double(storage.bandwidth_bytes_per_s) / n;
  const double total_s = io_s / observed.io;
  const double compute_s = observed.compute * total_s;
  const double ratio = compute_s / single_host_compute_s;
  double alpha = (ratio - 1.0 / n) / (1.0 - 1.0 / n);
  if (alpha < -1e-9 || alpha > 1.0 + 1e-9)
    throw calibration_error(
        "observed breakdown has no serial fraction in [0,1]");
  return std::clamp(alpha, 0.0, 1.0);
}

}  // namespace fheio
