#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fheio/engine.hpp"
#include "fheio/experiments.hpp"
#include "fheio/presets.hpp"
#include "fheio/trace_io.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string profile;
  std::string accel;
  std::string storage = "hbm";
  std::string link = "ethernet";
  std::uint32_t hosts = 1;
  double hit_ratio = 0.0;
  std::string mode = "cold";
  bool overlap = false;
  std::uint64_t seed = 1;
  std::uint64_t ops = fheio::default_trace_ops;
  std::string out;
  bool json_rows = false;
  bool dry_run = false;
  std::string trace_path;

  std::string axis = "hit-ratio";
  double from = 0.0;
  double to = 1.0;
  double step = 0.01;
  bool range_given = false;

  std::string experiment_id = "all";
};

void add_platform_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--accel", o.accel, "Accelerator preset override");
  cmd->add_option("--storage", o.storage, "Storage tier preset");
  cmd->add_option("--link", o.link, "Network link preset");
  cmd->add_option("--hosts", o.hosts, "Host count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--hit-ratio", o.hit_ratio, "Cache hit ratio in [0,1]");
  cmd->add_option("--mode", o.mode, "Execution mode")
      ->check(CLI::IsMember({"baseline", "cold"}));
  cmd->add_flag("--overlap", o.overlap, "Overlap storage reads with compute");
}

void add_common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "Trace generation seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--json", o.json_rows, "Emit JSON instead of CSV");
  cmd->add_flag("--dry-run", o.dry_run,
                "Validate and print the resolved configuration, then exit");
}

fheio::ExecMode parse_mode(const std::string& mode) {
  return mode == "baseline" ? fheio::ExecMode::baseline : fheio::ExecMode::cold;
}

std::string sanitize_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

std::string trace_file_name(const std::string& profile_name) {
  std::string base = profile_name;
  for (char& c : base)
    if (c == '/') c = '_';
  return base + ".trace.jsonl";
}

// run/sweep accept a pre-generated trace file or generate one in memory.
std::pair<fheio::Trace, std::string> resolve_trace(const fheio::Registry& reg,
                                                   const Options& o) {
  if (!o.trace_path.empty() && !o.profile.empty())
    throw fheio::param_error("pass either --trace or --profile, not both");
  if (!o.trace_path.empty()) {
    fheio::Trace trace = fheio::read_trace(o.trace_path);
    const std::string name = trace.header.accel + "/" + trace.header.app;
    reg.profile(name);  // must be known so platform assembly can proceed
    return {std::move(trace), name};
  }
  if (o.profile.empty())
    throw fheio::param_error("--profile or --trace is required");
  const fheio::AppProfile& prof = reg.profile(o.profile);
  const fheio::Accelerator& accel = reg.accelerator(prof.accel_name);
  return {fheio::generate_trace(prof, o.ops, o.seed, accel.clock_hz),
          o.profile};
}

fheio::Platform resolve_platform(const fheio::Registry& reg, const Options& o,
                                 const std::string& profile_name) {
  fheio::Platform p = reg.make_platform(profile_name, o.storage, o.link,
                                        o.hosts, o.hit_ratio,
                                        parse_mode(o.mode));
  if (!o.accel.empty()) {
    p.accel = reg.accelerator(o.accel);
    p.validate();
  }
  return p;
}

json platform_json(const fheio::Platform& p) {
  json j;
  j["accel"] = {{"name", p.accel.name},
                {"kind", fheio::to_string(p.accel.kind)},
                {"clock_hz", p.accel.clock_hz},
                {"serial_fraction", p.accel.serial_fraction}};
  j["storage"] = {{"name", p.storage.name},
                  {"bandwidth_bytes_per_s", p.storage.bandwidth_bytes_per_s}};
  j["link"] = {{"name", p.cluster.link.name},
               {"bandwidth_bytes_per_s", p.cluster.link.bandwidth_bytes_per_s}};
  j["hosts"] = p.cluster.hosts;
  j["comm_volume_bytes"] = p.cluster.comm_volume_base_bytes;
  j["hit_ratio"] = p.cache.hit_ratio;
  j["mode"] = fheio::to_string(p.mode);
  return j;
}

int print_dry_run(const json& j) {
  std::cout << j.dump(2) << '\n';
  return 0;
}

const std::vector<std::string> run_columns = {
    "app",     "accel",   "storage", "link",
    "hosts",   "hit_ratio", "mode",  "compute_s",
    "io_s",    "comm_s",  "total_s", "bytes_from_storage",
    "slowdown", "speedup"};

std::vector<std::string> run_row(const fheio::Trace& trace,
                                 const fheio::Platform& p,
                                 const fheio::SimResult& r) {
  using fheio::format_number;
  return {trace.header.app,
          p.accel.name,
          p.storage.name,
          p.cluster.link.name,
          format_number(std::uint64_t(p.cluster.hosts)),
          format_number(p.cache.hit_ratio),
          fheio::to_string(p.mode),
          format_number(r.compute_time_s),
          format_number(r.io_time_s),
          format_number(r.comm_time_s),
          format_number(r.total_time_s),
          format_number(r.bytes_from_storage),
          format_number(r.slowdown),
          format_number(r.speedup)};
}

json run_json(const fheio::Trace& trace, const fheio::Platform& p,
              const fheio::SimResult& r) {
  json j;
  j["app"] = trace.header.app;
  j["accel"] = p.accel.name;
  j["storage"] = p.storage.name;
  j["link"] = p.cluster.link.name;
  j["hosts"] = p.cluster.hosts;
  j["hit_ratio"] = p.cache.hit_ratio;
  j["mode"] = fheio::to_string(p.mode);
  j["compute_s"] = r.compute_time_s;
  j["io_s"] = r.io_time_s;
  j["comm_s"] = r.comm_time_s;
  j["total_s"] = r.total_time_s;
  j["bytes_from_storage"] = r.bytes_from_storage;
  j["slowdown"] = r.slowdown;
  j["speedup"] = r.speedup;
  return j;
}

void write_table(const fheio::CsvTable& t, const Options& o,
                 const std::string& file_name) {
  if (o.out.empty()) {
    t.write(std::cout);
    return;
  }
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / file_name;
  t.write(path);
  std::cerr << "wrote " << path.string() << '\n';
}

int cmd_generate(const fheio::Registry& reg, const Options& o) {
  const fheio::AppProfile& prof = reg.profile(o.profile);
  const fheio::Accelerator& accel = reg.accelerator(prof.accel_name);
  const std::string file_name = trace_file_name(o.profile);
  const auto out_dir = std::filesystem::path(o.out.empty() ? "." : o.out);
  const auto path = out_dir / file_name;

  if (o.dry_run) {
    json j;
    j["subcommand"] = "generate";
    j["profile"] = o.profile;
    j["accel"] = prof.accel_name;
    j["clock_hz"] = accel.clock_hz;
    j["baseline_time_s"] = prof.baseline_time_s;
    j["evk_bytes_per_cycle"] = prof.evk_bytes_per_cycle;
    j["ct_bytes_per_cycle"] = prof.ct_bytes_per_cycle;
    j["ops"] = o.ops;
    j["seed"] = o.seed;
    j["out_file"] = path.string();
    return print_dry_run(j);
  }

  const fheio::Trace trace =
      fheio::generate_trace(prof, o.ops, o.seed, accel.clock_hz);
  std::filesystem::create_directories(out_dir);
  fheio::write_trace(trace, path);

  const fheio::TraceSummary s = fheio::trace_summary(trace);
  if (o.json_rows) {
    json j;
    j["file"] = path.string();
    j["op_count"] = s.op_count;
    j["total_cycles"] = s.total_cycles;
    j["total_evk_bytes"] = s.total_evk_bytes;
    j["total_ct_read_bytes"] = s.total_ct_read_bytes;
    j["total_ct_write_bytes"] = s.total_ct_write_bytes;
    j["evk_bytes_per_cycle"] = s.evk_bytes_per_cycle;
    j["ct_bytes_per_cycle"] = s.ct_bytes_per_cycle;
    j["distinct_evk_count"] = s.distinct_evk_count;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "wrote " << path.string() << " (" << s.op_count << " ops, "
              << s.total_cycles << " cycles)\n";
  }
  return 0;
}

int cmd_run(const fheio::Registry& reg, const Options& o) {
  auto [trace, profile_name] = o.dry_run && !o.profile.empty() && o.trace_path.empty()
          ? std::pair<fheio::Trace, std::string>{{}, o.profile}
          : resolve_trace(reg, o);
  const fheio::Platform p = resolve_platform(reg, o, profile_name);
  fheio::SimOptions so;
  so.overlap_io_compute = o.overlap;

  if (o.dry_run) {
    json j;
    j["subcommand"] = "run";
    j["profile"] = profile_name;
    if (!o.trace_path.empty()) j["trace"] = o.trace_path;
    j["platform"] = platform_json(p);
    j["overlap"] = o.overlap;
    j["seed"] = o.seed;
    return print_dry_run(j);
  }

  const fheio::SimResult r = fheio::simulate(trace, p, so);
  if (o.json_rows) {
    std::cout << run_json(trace, p, r).dump(2) << '\n';
    return 0;
  }
  fheio::CsvTable t;
  t.columns = run_columns;
  t.add_row(run_row(trace, p, r));
  write_table(t, o, "run.csv");
  return 0;
}

int cmd_sweep(const fheio::Registry& reg, const Options& o) {
  auto [trace, profile_name] = resolve_trace(reg, o);
  const fheio::Platform base = resolve_platform(reg, o, profile_name);
  fheio::SimOptions so;
  so.overlap_io_compute = o.overlap;

  fheio::SweepAxis axis;
  std::vector<fheio::SweepValue> values;
  if (o.axis == "hit-ratio") {
    axis = fheio::SweepAxis::hit_ratio;
    const double from = o.from, to = o.to, step = o.step;
    if (step <= 0.0 || to < from)
      throw fheio::param_error("sweep range must satisfy from <= to, step > 0");
    const auto count = std::size_t((to - from) / step + 1e-9) + 1;
    for (std::size_t i = 0; i < count; ++i)
      values.emplace_back(from + double(i) * step);
  } else if (o.axis == "hosts") {
    axis = fheio::SweepAxis::host_count;
    const double from = o.range_given ? o.from : 1.0;
    const double to = o.range_given ? o.to : 32.0;
    const double step = o.range_given ? o.step : 1.0;
    if (step <= 0.0 || to < from || from < 1.0)
      throw fheio::param_error("sweep range must satisfy 1 <= from <= to, step > 0");
    for (double v = from; v <= to + 1e-9; v += step)
      values.emplace_back(std::uint32_t(v + 0.5));
  } else if (o.axis == "storage") {
    axis = fheio::SweepAxis::storage_tier;
    for (const auto& name : reg.storage_names())
      values.emplace_back(reg.storage(name));
  } else if (o.axis == "link") {
    axis = fheio::SweepAxis::link;
    for (const auto& name : reg.link_names())
      values.emplace_back(reg.link(name));
  } else {
    throw fheio::param_error(
        "unknown sweep axis '" + o.axis +
        "' (known: hit-ratio, hosts, storage, link)");
  }

  if (o.dry_run) {
    json j;
    j["subcommand"] = "sweep";
    j["profile"] = profile_name;
    j["axis"] = o.axis;
    j["points"] = values.size();
    j["platform"] = platform_json(base);
    j["overlap"] = o.overlap;
    j["seed"] = o.seed;
    return print_dry_run(j);
  }

  const std::vector<fheio::SweepPoint> points =
      fheio::sweep(trace, base, axis, values, so);

  if (o.json_rows) {
    json rows = json::array();
    for (const auto& pt : points) {
      json j;
      j["axis"] = o.axis;
      j["value"] = pt.label;
      if (pt.result) {
        const fheio::SimResult& r = *pt.result;
        j["compute_s"] = r.compute_time_s;
        j["io_s"] = r.io_time_s;
        j["comm_s"] = r.comm_time_s;
        j["total_s"] = r.total_time_s;
        j["bytes_from_storage"] = r.bytes_from_storage;
        j["slowdown"] = r.slowdown;
        j["speedup"] = r.speedup;
      } else {
        j["error"] = pt.error;
      }
      rows.push_back(std::move(j));
    }
    std::cout << rows.dump(2) << '\n';
    return 0;
  }

  fheio::CsvTable t;
  t.columns = {"axis",    "value",   "app",      "accel",
               "compute_s", "io_s",  "comm_s",   "total_s",
               "bytes_from_storage", "slowdown", "speedup", "error"};
  using fheio::format_number;
  for (const auto& pt : points) {
    if (pt.result) {
      const fheio::SimResult& r = *pt.result;
      t.add_row({o.axis, pt.label, trace.header.app, trace.header.accel,
                 format_number(r.compute_time_s), format_number(r.io_time_s),
                 format_number(r.comm_time_s), format_number(r.total_time_s),
                 format_number(r.bytes_from_storage), format_number(r.slowdown),
                 format_number(r.speedup), ""});
    } else {
      t.add_row({o.axis, pt.label, trace.header.app, trace.header.accel, "",
                 "", "", "", "", "", "", sanitize_cell(pt.error)});
    }
  }
  write_table(t, o, "sweep.csv");
  return 0;
}

int cmd_calibrate(const fheio::Registry& reg, const Options& o) {
  if (o.dry_run) {
    json j;
    j["subcommand"] = "calibrate";
    j["profile_filter"] = o.profile;
    j["accel_filter"] = o.accel;
    return print_dry_run(j);
  }

  fheio::CsvTable t;
  t.columns = {"kind", "name", "value"};
  json jout;

  for (const auto& name : reg.profile_names()) {
    if (!o.profile.empty() && name != o.profile) continue;
    const fheio::AppProfile& prof = reg.profile(name);
    const fheio::Accelerator& accel = reg.accelerator(prof.accel_name);
    const double cycles =
        double(fheio::baseline_cycles(prof, accel));
    const double io_volume =
        (prof.evk_bytes_per_cycle + prof.ct_bytes_per_cycle) * cycles;
    t.add_row({"io_volume_bytes", name, fheio::format_number(io_volume)});
    jout["io_volume_bytes"][name] = io_volume;
    try {
      const double comm = reg.comm_volume(name);
      t.add_row({"comm_volume_bytes", name, fheio::format_number(comm)});
      jout["comm_volume_bytes"][name] = comm;
    } catch (const fheio::config_error&) {
      // profile ships without an exchange volume; nothing to report
    }
  }
  for (const auto& name : reg.accelerator_names()) {
    if (!o.accel.empty() && name != o.accel) continue;
    const fheio::Accelerator& accel = reg.accelerator(name);
    t.add_row({"serial_fraction", name,
               fheio::format_number(accel.serial_fraction)});
    jout["serial_fraction"][name] = accel.serial_fraction;
  }

  if (o.json_rows) {
    std::cout << jout.dump(2) << '\n';
    return 0;
  }
  write_table(t, o, "calibrate.csv");
  return 0;
}

int cmd_experiment(const fheio::Registry& reg, const Options& o) {
  std::vector<std::string> ids;
  if (o.experiment_id == "all") {
    ids = fheio::experiment_ids();
  } else {
    ids.push_back(o.experiment_id);
  }

  if (o.dry_run) {
    json j;
    j["subcommand"] = "experiment";
    j["experiments"] = ids;
    j["out"] = o.out.empty() ? std::string("(stdout)") : o.out;
    return print_dry_run(j);
  }

  bool all_pass = true;
  json summaries = json::array();
  for (const auto& id : ids) {
    const fheio::Experiment ex = fheio::run_experiment(reg, id);
    all_pass = all_pass && ex.gated_pass;
    if (o.json_rows) {
      json j;
      j["id"] = ex.id;
      j["file"] = ex.file_name;
      j["rows"] = ex.table.rows.size();
      j["gated_pass"] = ex.gated_pass;
      json checks = json::array();
      for (const auto& c : ex.checks) {
        checks.push_back({{"study", c.study},
                          {"metric", c.metric},
                          {"app", c.app},
                          {"accel", c.accel},
                          {"storage", c.storage},
                          {"link", c.link},
                          {"hosts", c.hosts},
                          {"value", c.value},
                          {"target", c.target},
                          {"error", c.error},
                          {"error_kind", fheio::to_string(c.kind)},
                          {"tolerance", c.tolerance},
                          {"gating", c.gating},
                          {"pass", c.passed}});
      }
      j["checks"] = std::move(checks);
      summaries.push_back(std::move(j));
    }
    if (!o.out.empty()) {
      std::filesystem::create_directories(o.out);
      const auto path = std::filesystem::path(o.out) / ex.file_name;
      ex.table.write(path);
      std::size_t gated = 0, passed = 0;
      for (const auto& c : ex.checks)
        if (c.gating) {
          gated++;
          if (c.passed) passed++;
        }
      std::cerr << ex.id << ": " << passed << "/" << gated
                << " gated targets passed, wrote " << path.string() << '\n';
    } else if (!o.json_rows) {
      ex.table.write(std::cout);
    }
  }
  if (o.json_rows) std::cout << summaries.dump(2) << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage, cache and network cost model for FHE accelerators"};
  app.require_subcommand(1);
  Options o;

  CLI::App* gen = app.add_subcommand(
      "generate", "Generate a synthetic operation trace for a profile");
  gen->add_option("--profile", o.profile, "Workload profile, e.g. sharp/resnet20")
      ->required();
  gen->add_option("--ops", o.ops, "Number of operation records");
  add_common_flags(gen, o);

  CLI::App* run = app.add_subcommand("run", "Simulate one configuration");
  run->add_option("--profile", o.profile, "Workload profile");
  run->add_option("--trace", o.trace_path, "Trace file (JSONL)");
  run->add_option("--ops", o.ops, "Number of operation records");
  add_platform_flags(run, o);
  add_common_flags(run, o);

  CLI::App* swp = app.add_subcommand("sweep", "Sweep one axis");
  swp->add_option("--profile", o.profile, "Workload profile");
  swp->add_option("--trace", o.trace_path, "Trace file (JSONL)");
  swp->add_option("--ops", o.ops, "Number of operation records");
  CLI::Option* from_opt = swp->add_option("--from", o.from, "Axis start");
  swp->add_option("--to", o.to, "Axis end");
  swp->add_option("--step", o.step, "Axis step");
  swp->add_option("--axis", o.axis,
                  "Sweep axis: hit-ratio, hosts, storage, link");
  add_platform_flags(swp, o);
  add_common_flags(swp, o);

  CLI::App* cal = app.add_subcommand(
      "calibrate", "Report calibrated volumes and serial fractions");
  cal->add_option("--profile", o.profile, "Restrict to one profile");
  cal->add_option("--accel", o.accel, "Restrict to one accelerator");
  cal->add_option("--out", o.out, "Output directory");
  cal->add_flag("--json", o.json_rows, "Emit JSON instead of CSV");
  cal->add_flag("--dry-run", o.dry_run,
                "Validate and print the resolved configuration, then exit");

  CLI::App* exp = app.add_subcommand(
      "experiment", "Run a canned experiment (E1..E4 or all)");
  exp->add_option("id", o.experiment_id, "Experiment id")->required();
  add_common_flags(exp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }
  o.range_given = from_opt->count() > 0;

  try {
    const fheio::Registry reg = fheio::Registry::load();
    if (gen->parsed()) return cmd_generate(reg, o);
    if (run->parsed()) return cmd_run(reg, o);
    if (swp->parsed()) return cmd_sweep(reg, o);
    if (cal->parsed()) return cmd_calibrate(reg, o);
    if (exp->parsed()) return cmd_experiment(reg, o);
    return 2;
  } catch (const fheio::param_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fheio::profile_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fheio::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
