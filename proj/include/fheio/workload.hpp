#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fheio/errors.hpp"
#include "fheio/sizing.hpp"

namespace fheio {

// The five CKKS primitive operations. HMult and HRot are the only
// key-consuming kinds.
enum class OpKind : std::uint8_t { PAdd = 0, HAdd, PMult, HMult, HRot };

inline constexpr std::size_t op_kind_count = 5;

inline constexpr std::array<const char*, op_kind_count> op_kind_names = {
    "PAdd", "HAdd", "PMult", "HMult", "HRot"};

inline const char* to_string(OpKind k) {
  return op_kind_names[static_cast<std::size_t>(k)];
}

inline std::optional<OpKind> op_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < op_kind_count; ++i)
    if (s == op_kind_names[i]) return static_cast<OpKind>(i);
  return std::nullopt;
}

inline bool consumes_key(OpKind k) {
  return k == OpKind::HMult || k == OpKind::HRot;
}

// One primitive operation with its compute cost and off-chip byte footprint.
struct OpRecord {
  std::uint64_t op_id = 0;
  OpKind kind = OpKind::PAdd;
  std::uint64_t compute_cycles = 0;
  std::uint64_t ct_read_bytes = 0;
  std::uint64_t ct_write_bytes = 0;
  std::optional<std::uint64_t> evk_id;  // present iff kind is key-consuming
  std::uint64_t evk_bytes = 0;          // 0 unless evk_id present
  std::optional<std::int64_t> rot_amount;  // present iff kind == HRot

  bool operator==(const OpRecord&) const = default;
};

struct TraceHeader {
  std::string app;
  std::string accel;
  std::uint64_t seed = 0;
  double clock_hz = 0.0;  // accelerator clock at generation time
  std::uint64_t op_count = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t total_evk_bytes = 0;
  std::uint64_t total_ct_bytes = 0;  // reads + writes

  bool operator==(const TraceHeader&) const = default;
};

// Ordered operation sequence; header totals always equal the record sums.
struct Trace {
  TraceHeader header;
  std::vector<OpRecord> records;

  bool operator==(const Trace&) const = default;

  bool has_key_consuming_ops() const {
    return std::any_of(records.begin(), records.end(),
                       [](const OpRecord& r) { return consumes_key(r.kind); });
  }
};

// Calibrated aggregate description of one application on one accelerator.
struct AppProfile {
  std::string app_name;
  std::string accel_name;
  CkksParams params;
  double baseline_time_s = 0.0;  // ideal all-on-chip time (per iteration)
  double evk_bytes_per_cycle = 0.0;
  double ct_bytes_per_cycle = 0.0;
  std::array<double, op_kind_count> op_mix{};  // fractions, sum to 1
  std::uint64_t distinct_evk_count = 1;
  std::uint64_t evk_set_bytes = 0;
  std::uint32_t iterations = 1;

  double mix(OpKind k) const { return op_mix[static_cast<std::size_t>(k)]; }

  void validate() const {
    params.validate();
    if (app_name.empty() || accel_name.empty())
      throw profile_error("profile needs app and accelerator names");
    if (baseline_time_s <= 0.0)
      throw profile_error("baseline_time_s must be positive");
    if (evk_bytes_per_cycle < 0.0 || ct_bytes_per_cycle < 0.0)
      throw profile_error("byte rates must be non-negative");
    double sum = 0.0;
    for (double f : op_mix) {
      if (f < 0.0 || f > 1.0) throw profile_error("op_mix fraction outside [0,1]");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw profile_error("op_mix must sum to 1");
    if (distinct_evk_count == 0)
      throw profile_error("distinct_evk_count must be positive");
    if (evk_set_bytes < distinct_evk_count)
      throw profile_error("evk_set_bytes smaller than one byte per key");
    if (iterations == 0) throw profile_error("iterations must be positive");
  }
};

namespace detail {

// Unbiased uniform draw in [0, n). Hand-rolled so traces are bit-identical
// across standard libraries (std::uniform_int_distribution is not portable).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

template <typename T>
void shuffle_portable(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

// Split `total` into integer shares proportional to `weights`; shares sum to
// `total` exactly (largest-remainder rounding, ties to the lower index).
inline std::vector<std::uint64_t> apportion(std::uint64_t total,
                                            std::span<const std::uint64_t> weights) {
  const std::size_t n = weights.size();
  std::vector<std::uint64_t> out(n, 0);
  unsigned __int128 wsum = 0;
  for (auto w : weights) wsum += w;
  if (wsum == 0 || total == 0) return out;

  std::uint64_t assigned = 0;
  std::vector<std::pair<unsigned __int128, std::size_t>> rema(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned __int128 prod = (unsigned __int128)total * weights[i];
    out[i] = static_cast<std::uint64_t>(prod / wsum);
    rema[i] = {prod % wsum, i};
    assigned += out[i];
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) out[rema[k].second]++;
  return out;
}

// Same, with real-valued weights (used for op-count apportionment by mix).
inline std::vector<std::uint64_t> apportion_real(std::uint64_t total,
                                                 std::span<const double> weights) {
  const std::size_t n = weights.size();
  std::vector<std::uint64_t> out(n, 0);
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (wsum <= 0.0 || total == 0) return out;

  std::uint64_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> rema(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double share = double(total) * weights[i] / wsum;
    out[i] = static_cast<std::uint64_t>(share);
    rema[i] = {share - double(out[i]), i};
    assigned += out[i];
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned)
    out[rema[k % n].second]++;
  return out;
}

// Equal split with the remainder spread over the first records.
inline void spread_evenly(std::uint64_t total, std::span<std::uint64_t> out) {
  if (out.empty()) return;
  const std::uint64_t base = total / out.size();
  const std::uint64_t extra = total % out.size();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = base + (i < extra ? 1 : 0);
}

}  // namespace detail

// Relative per-op compute weights: additions and plaintext multiplication are
// linear in the residue data (N*L); key-switching ops pay the NTT factor and
// the decomposition count (dnum * N * L * log2 N).
inline std::array<std::uint64_t, op_kind_count> per_op_cycle_weights(
    const CkksParams& p) {
  p.validate();
  const std::uint64_t limbs = limb_count(p);
  const std::uint64_t log2n = std::countr_zero(p.ring_degree_N);
  const std::uint64_t linear =
      detail::mul_checked(p.ring_degree_N, limbs);
  const std::uint64_t keyswitch = detail::mul_checked(
      detail::mul_checked(std::uint64_t(p.dnum), linear), log2n);
  return {linear, linear, linear, keyswitch, keyswitch};
}

// Generates a synthetic trace matching the profile's aggregate rates.
//
// The trace is `profile.iterations` repetitions of one iteration's op
// schedule (the schedule template); totals are apportioned exactly so the
// header sums hit round(baseline * clock), round(evk_rate * cycles) and
// round(ct_rate * cycles). Identical inputs give bit-identical traces on any
// host.
inline Trace generate_trace(const AppProfile& profile,
                            std::uint64_t target_op_count, std::uint64_t seed,
                            double clock_hz) {
  profile.validate();
  if (target_op_count < 10)
    throw param_error("target_op_count must be at least 10");
  if (clock_hz <= 0.0) throw param_error("clock_hz must be positive");

  const double key_mix =
      profile.mix(OpKind::HMult) + profile.mix(OpKind::HRot);
  if (key_mix == 0.0 && profile.evk_bytes_per_cycle > 0.0)
    throw profile_error(
        "profile demands evaluation-key traffic but its op mix has no "
        "key-consuming operations");
  if (key_mix > 0.0 && profile.evk_bytes_per_cycle == 0.0)
    throw profile_error(
        "op mix contains key-consuming operations but the evaluation-key "
        "rate is zero");

  const std::uint64_t total_cycles =
      static_cast<std::uint64_t>(std::llround(profile.baseline_time_s * clock_hz));
  if (total_cycles == 0)
    throw profile_error("baseline time rounds to zero cycles at this clock");

  std::mt19937_64 rng(seed);

  // Segment sizes: one segment per iteration, sizes differing by at most 1.
  const std::uint64_t segments = profile.iterations;
  std::vector<std::uint64_t> seg_sizes(segments);
  detail::spread_evenly(target_op_count, seg_sizes);
  const std::uint64_t template_len =
      *std::max_element(seg_sizes.begin(), seg_sizes.end());

  // Op-kind counts for the schedule template, then a seeded shuffle. Kinds
  // with nonzero mix keep at least one slot.
  std::vector<std::uint64_t> kind_counts = detail::apportion_real(
      template_len, std::span<const double>(profile.op_mix));
  for (std::size_t k = 0; k < op_kind_count; ++k) {
    if (profile.op_mix[k] > 0.0 && kind_counts[k] == 0) {
      const std::size_t donor = static_cast<std::size_t>(
          std::max_element(kind_counts.begin(), kind_counts.end()) -
          kind_counts.begin());
      if (kind_counts[donor] <= 1)
        throw profile_error("target_op_count too small for this op mix");
      kind_counts[donor]--;
      kind_counts[k]++;
    }
  }
  std::vector<OpKind> schedule;
  schedule.reserve(template_len);
  for (std::size_t k = 0; k < op_kind_count; ++k)
    schedule.insert(schedule.end(), kind_counts[k], static_cast<OpKind>(k));
  detail::shuffle_portable(schedule, rng);

  // Rotation-amount plan. The HMult key (when present) takes evk_id 0; each
  // distinct rotation amount maps to its own id. Every amount must appear in
  // the template, so the first rot slots take the unique amounts; truncated
  // segments only ever drop the template's final op.
  const bool has_hmult = kind_counts[static_cast<std::size_t>(OpKind::HMult)] > 0;
  const bool has_hrot = kind_counts[static_cast<std::size_t>(OpKind::HRot)] > 0;
  std::uint64_t rot_key_count = 0;
  if (key_mix > 0.0) {
    const std::uint64_t reserved = has_hmult ? 1 : 0;
    if (profile.distinct_evk_count < reserved + (has_hrot ? 1 : 0))
      throw profile_error("distinct_evk_count too small for the op mix");
    rot_key_count = profile.distinct_evk_count - reserved;
    if (!has_hrot && rot_key_count > 0)
      throw profile_error(
          "distinct_evk_count requires rotation keys but the op mix has no "
          "HRot operations");
    if (has_hrot &&
        kind_counts[static_cast<std::size_t>(OpKind::HRot)] < rot_key_count)
      throw profile_error(
          "target_op_count too small to realize distinct_evk_count "
          "rotation amounts in one iteration");
  }
  std::vector<std::int64_t> rot_plan(template_len, 0);
  {
    std::uint64_t rot_seen = 0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (schedule[i] != OpKind::HRot) continue;
      const std::uint64_t amount =
          rot_seen < rot_key_count
              ? rot_seen + 1
              : detail::uniform_below(rng, rot_key_count) + 1;
      rot_plan[i] = static_cast<std::int64_t>(amount);
      rot_seen++;
    }
  }

  // Materialize records segment by segment.
  Trace trace;
  trace.records.reserve(target_op_count);
  for (std::uint64_t s = 0; s < segments; ++s) {
    for (std::uint64_t i = 0; i < seg_sizes[s]; ++i) {
      OpRecord rec;
      rec.op_id = trace.records.size();
      rec.kind = schedule[i];
      if (rec.kind == OpKind::HMult) {
        rec.evk_id = 0;
      } else if (rec.kind == OpKind::HRot) {
        rec.rot_amount = rot_plan[i];
        // amounts are 1-based; ids shift down when no HMult key holds id 0
        rec.evk_id =
            static_cast<std::uint64_t>(rot_plan[i]) - (has_hmult ? 0 : 1);
      }
      trace.records.push_back(rec);
    }
  }

  // Compute cycles: exact apportionment by per-kind weight.
  const auto kind_weights = per_op_cycle_weights(profile.params);
  {
    std::vector<std::uint64_t> weights(trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      weights[i] =
          kind_weights[static_cast<std::size_t>(trace.records[i].kind)];
    const auto cycles = detail::apportion(total_cycles, weights);
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      trace.records[i].compute_cycles = cycles[i];
  }

  // Evaluation-key bytes: exact total, split evenly over key-consuming ops.
  const std::uint64_t evk_total = static_cast<std::uint64_t>(
      std::llround(profile.evk_bytes_per_cycle * double(total_cycles)));
  {
    std::vector<std::size_t> key_idx;
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      if (consumes_key(trace.records[i].kind)) key_idx.push_back(i);
    if (!key_idx.empty()) {
      if (evk_total < key_idx.size())
        throw profile_error(
            "evaluation-key rate too small: rounds below one byte per "
            "key-consuming operation");
      std::vector<std::uint64_t> shares(key_idx.size());
      detail::spread_evenly(evk_total, shares);
      for (std::size_t j = 0; j < key_idx.size(); ++j)
        trace.records[key_idx[j]].evk_bytes = shares[j];
    }
  }

  // Ciphertext/plaintext bytes: exact total over all ops, reads ~2x writes.
  const std::uint64_t ct_total = static_cast<std::uint64_t>(
      std::llround(profile.ct_bytes_per_cycle * double(total_cycles)));
  {
    std::vector<std::uint64_t> shares(trace.records.size());
    detail::spread_evenly(ct_total, shares);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const std::uint64_t rd = shares[i] * 2 / 3;
      trace.records[i].ct_read_bytes = rd;
      trace.records[i].ct_write_bytes = shares[i] - rd;
    }
  }

  trace.header.app = profile.app_name;
  trace.header.accel = profile.accel_name;
  trace.header.seed = seed;
  trace.header.clock_hz = clock_hz;
  trace.header.op_count = trace.records.size();
  trace.header.total_cycles = total_cycles;
  trace.header.total_evk_bytes = evk_total;
  trace.header.total_ct_bytes = ct_total;
  return trace;
}

// Aggregate report recomputed from the records (never from the header).
struct TraceSummary {
  std::string app;
  std::string accel;
  std::uint64_t op_count = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t total_evk_bytes = 0;
  std::uint64_t total_ct_read_bytes = 0;
  std::uint64_t total_ct_write_bytes = 0;
  std::uint64_t total_io_bytes = 0;  // evk + ct reads + ct writes
  double evk_bytes_per_cycle = 0.0;
  double ct_bytes_per_cycle = 0.0;
  std::array<double, op_kind_count> op_mix{};
  std::uint64_t distinct_evk_count = 0;
};

inline TraceSummary trace_summary(const Trace& trace) {
  TraceSummary s;
  s.app = trace.header.app;
  s.accel = trace.header.accel;
  s.op_count = trace.records.size();
  std::array<std::uint64_t, op_kind_count> counts{};
  std::vector<std::uint64_t> key_ids;
  for (const OpRecord& r : trace.records) {
    counts[static_cast<std::size_t>(r.kind)]++;
    s.total_cycles += r.compute_cycles;
    s.total_evk_bytes += r.evk_bytes;
    s.total_ct_read_bytes += r.ct_read_bytes;
    s.total_ct_write_bytes += r.ct_write_bytes;
    if (r.evk_id) key_ids.push_back(*r.evk_id);
  }
  s.total_io_bytes =
      s.total_evk_bytes + s.total_ct_read_bytes + s.total_ct_write_bytes;
  if (s.total_cycles > 0) {
    s.evk_bytes_per_cycle = double(s.total_evk_bytes) / double(s.total_cycles);
    s.ct_bytes_per_cycle =
        double(s.total_ct_read_bytes + s.total_ct_write_bytes) /
        double(s.total_cycles);
  }
  if (s.op_count > 0)
    for (std::size_t k = 0; k < op_kind_count; ++k)
      s.op_mix[k] = double(counts[k]) / double(s.op_count);
  std::sort(key_ids.begin(), key_ids.end());
  s.distinct_evk_count =
      std::unique(key_ids.begin(), key_ids.end()) - key_ids.begin();
  return s;
}

}  // namespace fheio
