#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fheio/csv.hpp"
#include "fheio/errors.hpp"
#include "fheio/platform.hpp"
#include "fheio/workload.hpp"

namespace fheio {

struct SimOptions {
  // Overlap storage I/O with compute instead of serializing them.
  bool overlap_io_compute = false;
  // Accept a platform clock that differs from the one the trace was
  // generated at (per-cycle byte rates were calibrated at that clock).
  bool allow_clock_rescale = false;
};

struct SimResult {
  double total_time_s = 0.0;
  double compute_time_s = 0.0;
  double io_time_s = 0.0;
  double comm_time_s = 0.0;
  std::array<double, op_kind_count> per_kind_time_s{};
  double bytes_from_storage = 0.0;  // after cache filtering, all hosts
  std::uint32_t host_count = 1;
  double baseline_s = 0.0;  // ideal all-on-chip single-host time
  double slowdown = 1.0;    // total / baseline
  double speedup = 1.0;     // single-host total (same config) / total
};

namespace detail {

struct TraceTotals {
  std::uint64_t cycles = 0;
  std::uint64_t bytes = 0;  // evk + ct reads + ct writes
  bool has_key_ops = false;
  std::array<std::uint64_t, op_kind_count> per_kind_cycles{};
};

inline TraceTotals accumulate(const Trace& trace) {
  TraceTotals t;
  for (const OpRecord& r : trace.records) {
    t.cycles += r.compute_cycles;
    t.per_kind_cycles[static_cast<std::size_t>(r.kind)] += r.compute_cycles;
    t.bytes += r.evk_bytes + r.ct_read_bytes + r.ct_write_bytes;
    t.has_key_ops = t.has_key_ops || consumes_key(r.kind);
  }
  return t;
}

// Serial composition by default; overlap mode hides the shorter of compute
// and I/O behind the longer. Communication never overlaps (key-switching
// exchanges synchronize the hosts).
inline double compose(double compute_s, double io_s, double comm_s,
                      bool overlap) {
  return (overlap ? std::max(compute_s, io_s) : compute_s + io_s) + comm_s;
}

}  // namespace detail

// Replays the trace on the platform and reports where the time goes.
//
// Model: compute scales across hosts by the accelerator's Amdahl form;
// off-chip demand is filtered by the cache hit ratio and split evenly over
// per-host private storage; the key-switching exchange volume crosses each
// host's access link once with the star-topology factor (n-1)/n. In
// baseline mode all data is on-chip: io and comm are identically zero.
inline SimResult simulate(const Trace& trace, const Platform& platform,
                          const SimOptions& options = {}) {
  platform.validate();
  if (trace.header.clock_hz <= 0.0)
    throw consistency_error("trace header has no positive clock");
  const double clock = platform.accel.clock_hz;
  if (!options.allow_clock_rescale) {
    const double rel =
        std::abs(trace.header.clock_hz - clock) / trace.header.clock_hz;
    if (rel > 1e-9)
      throw consistency_error(
          "trace was generated at a different accelerator clock; regenerate "
          "it or opt into rescaling");
  }

  const detail::TraceTotals totals = detail::accumulate(trace);
  const std::uint32_t hosts = platform.cluster.hosts;
  const double scale = compute_scale(platform.accel, hosts);
  const bool on_chip = platform.mode == ExecMode::baseline;

  SimResult res;
  res.host_count = hosts;
  res.baseline_s = double(totals.cycles) / clock;
  res.compute_time_s = res.baseline_s * scale;
  for (std::size_t k = 0; k < op_kind_count; ++k)
    res.per_kind_time_s[k] = double(totals.per_kind_cycles[k]) / clock * scale;

  res.bytes_from_storage =
      on_chip ? 0.0 : (1.0 - platform.cache.hit_ratio) * double(totals.bytes);
  const double io_1 =
      res.bytes_from_storage / double(platform.storage.bandwidth_bytes_per_s);
  res.io_time_s = io_1 / double(hosts);

  const bool communicates = !on_chip && hosts > 1 && totals.has_key_ops;
  res.comm_time_s =
      communicates ? comm_seconds(platform.cluster.comm_volume_base_bytes,
                                  hosts, platform.cluster.link)
                   : 0.0;

  res.total_time_s = detail::compose(res.compute_time_s, res.io_time_s,
                                     res.comm_time_s,
                                     options.overlap_io_compute);
  res.slowdown =
      res.baseline_s > 0.0 ? res.total_time_s / res.baseline_s : 1.0;
  const double single_host_total =
      detail::compose(res.baseline_s, io_1, 0.0, options.overlap_io_compute);
  res.speedup =
      res.total_time_s > 0.0 ? single_host_total / res.total_time_s : 1.0;
  return res;
}

// Smallest cache hit ratio that keeps total time within baseline_s /
// performance_fraction. Closed form from the engine's linearity in (1-h):
// compute and communication do not depend on the cache, so the whole
// remaining budget belongs to storage.
inline double required_hit_ratio(const Trace& trace, const Platform& platform,
                                 double performance_fraction,
                                 const SimOptions& options = {}) {
  if (!(performance_fraction > 0.0 && performance_fraction <= 1.0))
    throw param_error("performance_fraction must lie in (0,1]");
  platform.validate();
  if (platform.mode != ExecMode::cold)
    throw param_error("required_hit_ratio applies to cold-storage mode");

  Platform cold = platform;
  cold.cache.hit_ratio = 0.0;
  const SimResult at_zero = simulate(trace, cold, options);

  const double budget_s = at_zero.baseline_s / performance_fraction;
  const double floor_s = at_zero.compute_time_s + at_zero.comm_time_s;
  if (budget_s < floor_s)
    throw infeasible_error("performance target below the compute+comm floor");
  if (at_zero.total_time_s <= budget_s) return 0.0;

  // Serial: io may use budget - compute - comm. Overlap: io hides under
  // compute, so it may grow to budget - comm before it costs anything.
  const double io_budget_s = options.overlap_io_compute
                                 ? budget_s - at_zero.comm_time_s
                                 : budget_s - floor_s;
  return std::clamp(1.0 - io_budget_s / at_zero.io_time_s, 0.0, 1.0);
}

// One axis of a parameter sweep. Values carry their own type; each value is
// applied to a copy of the base platform and simulated independently.
enum class SweepAxis : std::uint8_t { storage_tier, hit_ratio, host_count, link };

using SweepValue = std::variant<double, std::uint32_t, StorageTier, NetworkLink>;

struct SweepPoint {
  std::string label;               // value rendered as text
  std::optional<SimResult> result; // empty when this point failed
  std::string error;               // failure reason, empty on success
};

inline std::vector<SweepPoint> sweep(const Trace& trace, const Platform& base,
                                     SweepAxis axis,
                                     const std::vector<SweepValue>& values,
                                     const SimOptions& options = {}) {
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (const SweepValue& v : values) {
    SweepPoint pt;
    try {
      Platform p = base;
      switch (axis) {
        case SweepAxis::storage_tier: {
          const auto* tier = std::get_if<StorageTier>(&v);
          if (!tier) throw param_error("storage sweep needs storage-tier values");
          p.storage = *tier;
          pt.label = tier->name;
          break;
        }
        case SweepAxis::hit_ratio: {
          const auto* h = std::get_if<double>(&v);
          if (!h) throw param_error("hit-ratio sweep needs fractional values");
          p.cache.hit_ratio = *h;
          pt.label = format_number(*h);
          break;
        }
        case SweepAxis::host_count: {
          const auto* n = std::get_if<std::uint32_t>(&v);
          if (!n) throw param_error("host-count sweep needs integer values");
          p.cluster.hosts = *n;
          pt.label = std::to_string(*n);
          break;
        }
        case SweepAxis::link: {
          const auto* l = std::get_if<NetworkLink>(&v);
          if (!l) throw param_error("link sweep needs link values");
          p.cluster.link = *l;
          pt.label = l->name;
          break;
        }
      }
      pt.result = simulate(trace, p, options);
    } catch (const std::exception& e) {
      pt.result.reset();
      pt.error = e.what();
    }
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace fheio
