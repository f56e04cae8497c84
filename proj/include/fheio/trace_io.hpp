#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "fheio/errors.hpp"
#include "fheio/workload.hpp"

namespace fheio {

// Traces are stored as JSON Lines: a header object on the first line, then
// one object per operation. Integers are written exactly; optional record
// fields are omitted when absent.

inline void write_trace(const Trace& trace, std::ostream& os) {
  nlohmann::ordered_json h;
  h["app"] = trace.header.app;
  h["accel"] = trace.header.accel;
  h["seed"] = trace.header.seed;
  h["clock_hz"] = trace.header.clock_hz;
  h["op_count"] = trace.header.op_count;
  h["total_cycles"] = trace.header.total_cycles;
  h["total_evk_bytes"] = trace.header.total_evk_bytes;
  h["total_ct_bytes"] = trace.header.total_ct_bytes;
  os << h.dump() << '\n';
  for (const OpRecord& r : trace.records) {
    nlohmann::ordered_json j;
    j["op_id"] = r.op_id;
    j["kind"] = to_string(r.kind);
    j["compute_cycles"] = r.compute_cycles;
    j["ct_read_bytes"] = r.ct_read_bytes;
    j["ct_write_bytes"] = r.ct_write_bytes;
    if (r.evk_id) {
      j["evk_id"] = *r.evk_id;
      j["evk_bytes"] = r.evk_bytes;
    }
    if (r.rot_amount) j["rot_amount"] = *r.rot_amount;
    os << j.dump() << '\n';
  }
}

inline void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open " + path.string() + " for writing");
  write_trace(trace, os);
  os.flush();
  if (!os) throw parse_error("write failed for " + path.string());
}

namespace detail {

inline nlohmann::json parse_line(const std::string& line, std::uint64_t lineno) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw parse_error(lineno, "invalid JSON");
  if (!j.is_object()) throw parse_error(lineno, "expected a JSON object");
  return j;
}

template <typename T>
T require_field(const nlohmann::json& j, const char* key, std::uint64_t lineno) {
  auto it = j.find(key);
  if (it == j.end())
    throw parse_error(lineno, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw parse_error(lineno, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// Parses and fully validates a trace: per-record field rules, strictly
// increasing op_ids, and header totals that match the record sums. Errors
// carry the 1-based line number. Blank lines are ignored.
inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::uint64_t lineno = 0;
  bool have_header = false;
  bool have_prev_id = false;
  std::uint64_t prev_id = 0;
  std::uint64_t sum_cycles = 0, sum_evk = 0, sum_ct = 0;

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = detail::parse_line(line, lineno);

    if (!have_header) {
      trace.header.app = detail::require_field<std::string>(j, "app", lineno);
      trace.header.accel = detail::require_field<std::string>(j, "accel", lineno);
      trace.header.seed = detail::require_field<std::uint64_t>(j, "seed", lineno);
      trace.header.clock_hz = detail::require_field<double>(j, "clock_hz", lineno);
      trace.header.op_count =
          detail::require_field<std::uint64_t>(j, "op_count", lineno);
      trace.header.total_cycles =
          detail::require_field<std::uint64_t>(j, "total_cycles", lineno);
      trace.header.total_evk_bytes =
          detail::require_field<std::uint64_t>(j, "total_evk_bytes", lineno);
      trace.header.total_ct_bytes =
          detail::require_field<std::uint64_t>(j, "total_ct_bytes", lineno);
      if (trace.header.clock_hz <= 0.0)
        throw parse_error(lineno, "clock_hz must be positive");
      have_header = true;
      trace.records.reserve(trace.header.op_count);
      continue;
    }

    OpRecord r;
    r.op_id = detail::require_field<std::uint64_t>(j, "op_id", lineno);
    const auto kind_s = detail::require_field<std::string>(j, "kind", lineno);
    const auto kind = op_kind_from_string(kind_s);
    if (!kind) throw parse_error(lineno, "unknown op kind '" + kind_s + "'");
    r.kind = *kind;
    r.compute_cycles =
        detail::require_field<std::uint64_t>(j, "compute_cycles", lineno);
    r.ct_read_bytes =
        detail::require_field<std::uint64_t>(j, "ct_read_bytes", lineno);
    r.ct_write_bytes =
        detail::require_field<std::uint64_t>(j, "ct_write_bytes", lineno);
    if (j.contains("evk_id")) {
      r.evk_id = detail::require_field<std::uint64_t>(j, "evk_id", lineno);
      r.evk_bytes = detail::require_field<std::uint64_t>(j, "evk_bytes", lineno);
    }
    if (j.contains("rot_amount"))
      r.rot_amount = detail::require_field<std::int64_t>(j, "rot_amount", lineno);

    if (consumes_key(r.kind) != r.evk_id.has_value())
      throw parse_error(lineno,
                        "evk_id must be present exactly on HMult/HRot records");
    if (r.evk_id && r.evk_bytes == 0)
      throw parse_error(lineno, "key-consuming record has zero evk_bytes");
    if ((r.kind == OpKind::HRot) != r.rot_amount.has_value())
      throw parse_error(lineno, "rot_amount must be present exactly on HRot records");
    if (have_prev_id && r.op_id <= prev_id)
      throw parse_error(lineno, "op_id must be strictly increasing");
    prev_id = r.op_id;
    have_prev_id = true;

    sum_cycles += r.compute_cycles;
    sum_evk += r.evk_bytes;
    sum_ct += r.ct_read_bytes + r.ct_write_bytes;
    trace.records.push_back(std::move(r));
  }

  if (!have_header) throw parse_error(lineno, "empty trace: missing header line");
  if (trace.records.size() != trace.header.op_count)
    throw integrity_error("header op_count " +
                          std::to_string(trace.header.op_count) +
                          " does not match record count " +
                          std::to_string(trace.records.size()));
  if (sum_cycles != trace.header.total_cycles)
    throw integrity_error("header total_cycles does not match the record sum");
  if (sum_evk != trace.header.total_evk_bytes)
    throw integrity_error("header total_evk_bytes does not match the record sum");
  if (sum_ct != trace.header.total_ct_bytes)
    throw integrity_error("header total_ct_bytes does not match the record sum");
  return trace;
}

inline Trace read_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw parse_error("cannot open " + path.string());
  return read_trace(is);
}

}  // namespace fheio
