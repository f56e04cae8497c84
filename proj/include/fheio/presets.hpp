#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fheio/errors.hpp"
#include "fheio/platform.hpp"
#include "fheio/sizing.hpp"
#include "fheio/workload.hpp"

namespace fheio {

// Default record count for generated traces: small enough to simulate in
// well under a second, large enough for stable mix statistics.
inline constexpr std::uint64_t default_trace_ops = 10000;

// Environment variable naming a directory with params.json, platform.json
// and profiles.json that replaces the embedded presets.
inline constexpr const char* config_dir_env = "FHEIO_CONFIG_DIR";

inline std::uint64_t baseline_cycles(const AppProfile& profile,
                                     const Accelerator& accel) {
  return static_cast<std::uint64_t>(
      std::llround(profile.baseline_time_s * accel.clock_hz));
}

namespace presets_detail {

inline constexpr std::string_view params_json = R"json({
  "sharp": {
    "ring_degree_N": 65536, "log_q_bits": 1555, "prime_bits": 60,
    "word_bytes": 8, "dnum": 3, "aux_limbs_K": 2
  },
  "tensorfhe-resnet": {
    "ring_degree_N": 65536, "log_q_bits": 840, "prime_bits": 60,
    "word_bytes": 8, "dnum": 28, "aux_limbs_K": 0
  },
  "tensorfhe-helr": {
    "ring_degree_N": 65536, "log_q_bits": 1092, "prime_bits": 60,
    "word_bytes": 8, "dnum": 28, "aux_limbs_K": 0
  }
})json";

inline constexpr std::string_view platform_json = R"json({
  "accelerators": {
    "sharp": {"kind": "asic", "clock_hz": 1000000000, "serial_fraction": 0.0},
    "tensorfhe": {
      "kind": "gpu", "clock_hz": 1410000000,
      "serial_fraction_calibration": {
        "profile": "tensorfhe/resnet20",
        "fractions": {"compute": 0.401, "io": 0.181, "comm": 0.418},
        "hosts": 32, "storage": "pcie5"
      }
    }
  },
  "storage": {
    "hbm": 1099511627776,
    "ddr5": 384829746381,
    "pcie5": 68719476736,
    "rdma": 13421772800
  },
  "links": {
    "ethernet": 50000000000,
    "fastfabric": 322122547200
  }
})json";

inline constexpr std::string_view profiles_json = R"json({
  "sharp/resnet20": {
    "app": "resnet20", "accel": "sharp", "params": "sharp",
    "baseline_time_s": 0.099,
    "evk_bytes_per_cycle": 1633, "ct_bytes_per_cycle": 160,
    "op_mix": {"PAdd": 0.28, "HAdd": 0.22, "PMult": 0.30, "HMult": 0.08, "HRot": 0.12},
    "distinct_evk_count": 112, "iterations": 1,
    "comm_volume_calibration": {
      "fractions": {"compute": 0.003, "io": 0.072, "comm": 0.925},
      "hosts": 32, "link": "ethernet"
    }
  },
  "sharp/helr": {
    "app": "helr", "accel": "sharp", "params": "sharp",
    "baseline_time_s": 0.0025,
    "evk_bytes_per_cycle": 5130, "ct_bytes_per_cycle": 0,
    "op_mix": {"PAdd": 0.10, "HAdd": 0.15, "PMult": 0.15, "HMult": 0.15, "HRot": 0.45},
    "distinct_evk_count": 25, "iterations": 32,
    "comm_volume_bytes": 73000000000
  },
  "tensorfhe/resnet20": {
    "app": "resnet20", "accel": "tensorfhe", "params": "tensorfhe-resnet",
    "baseline_time_s": 4.9,
    "volume_scale": {"of": "sharp/resnet20", "factor": 2.8},
    "op_mix": {"PAdd": 0.28, "HAdd": 0.22, "PMult": 0.30, "HMult": 0.08, "HRot": 0.12},
    "distinct_evk_count": 120, "iterations": 1,
    "comm_volume_calibration": {
      "fractions": {"compute": 0.401, "io": 0.181, "comm": 0.418},
      "hosts": 32, "link": "ethernet"
    }
  },
  "tensorfhe/helr": {
    "app": "helr", "accel": "tensorfhe", "params": "tensorfhe-helr",
    "baseline_time_s": 0.22,
    "volume_scale": {"of": "sharp/helr", "factor": 4.5},
    "op_mix": {"PAdd": 0.10, "HAdd": 0.15, "PMult": 0.15, "HMult": 0.15, "HRot": 0.45},
    "distinct_evk_count": 25, "iterations": 32,
    "comm_volume_bytes": 40000000000
  }
})json";

inline nlohmann::json parse_doc(std::string_view text, const std::string& what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw config_error(what + ": not a valid JSON object");
  return j;
}

template <typename T>
T require(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw config_error(ctx + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(ctx + ": field '" + key + "' has the wrong type");
  }
}

inline BreakdownFractions parse_fractions(const nlohmann::json& obj,
                                          const std::string& ctx) {
  BreakdownFractions f;
  f.compute = require<double>(obj, "compute", ctx);
  f.io = require<double>(obj, "io", ctx);
  f.comm = require<double>(obj, "comm", ctx);
  return f;
}

template <typename Map>
std::string known_names(const Map& m) {
  std::string out;
  for (const auto& [name, _] : m) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace presets_detail

// Preset registry: CKKS parameter sets, accelerators, storage tiers,
// network links, and application profiles. Calibrated constants (GPU serial
// fraction, per-app exchange volumes) are resolved once at load time from
// the calibration blocks in the config.
class Registry {
 public:
  static Registry embedded() {
    Registry r;
    r.parse_all(
        presets_detail::parse_doc(presets_detail::params_json, "params"),
        presets_detail::parse_doc(presets_detail::platform_json, "platform"),
        presets_detail::parse_doc(presets_detail::profiles_json, "profiles"));
    return r;
  }

  static Registry from_dir(const std::filesystem::path& dir) {
    auto read = [&](const char* name) {
      const auto path = dir / name;
      std::ifstream is(path);
      if (!is)
        throw config_error("cannot open config file " + path.string());
      std::ostringstream ss;
      ss << is.rdbuf();
      return ss.str();
    };
    Registry r;
    const std::string params = read("params.json");
    const std::string platform = read("platform.json");
    const std::string profiles = read("profiles.json");
    r.parse_all(presets_detail::parse_doc(params, "params.json"),
                presets_detail::parse_doc(platform, "platform.json"),
                presets_detail::parse_doc(profiles, "profiles.json"));
    return r;
  }

  // Embedded presets, unless the config-dir environment variable points at
  // an external directory.
  static Registry load() {
    if (const char* dir = std::getenv(config_dir_env); dir && *dir)
      return from_dir(dir);
    return embedded();
  }

  const CkksParams& params(const std::string& name) const {
    return find(params_, name, "parameter preset");
  }
  const Accelerator& accelerator(const std::string& name) const {
    return find(accels_, name, "accelerator").accel;
  }
  const StorageTier& storage(const std::string& name) const {
    return find(storage_, name, "storage tier");
  }
  const NetworkLink& link(const std::string& name) const {
    return find(links_, name, "network link");
  }
  const AppProfile& profile(const std::string& name) const {
    return find(profiles_, name, "profile").profile;
  }

  bool has_profile(const std::string& name) const {
    return profiles_.count(name) != 0;
  }

  // Calibrated key-switching exchange volume for one profile. Profiles
  // without a volume or a calibration block cannot run multi-host.
  double comm_volume(const std::string& profile_name) const {
    const ProfileEntry& e = find(profiles_, profile_name, "profile");
    if (!e.comm_volume)
      throw config_error("profile " + profile_name +
                         " has no communication volume: add comm_volume_bytes "
                         "or a comm_volume_calibration block (see "
                         "calibrate_comm_volume)");
    return *e.comm_volume;
  }

  std::vector<std::string> profile_names() const { return keys(profiles_); }
  std::vector<std::string> accelerator_names() const { return keys(accels_); }
  std::vector<std::string> storage_names() const { return keys(storage_); }
  std::vector<std::string> link_names() const { return keys(links_); }
  std::vector<std::string> params_names() const { return keys(params_); }

  // Full platform for running `profile_name`; fills the cluster's exchange
  // volume from the profile's calibrated constant when hosts > 1.
  Platform make_platform(const std::string& profile_name,
                         const std::string& storage_name,
                         const std::string& link_name, std::uint32_t hosts,
                         double hit_ratio, ExecMode mode) const {
    const AppProfile& prof = profile(profile_name);
    Platform p;
    p.accel = accelerator(prof.accel_name);
    p.storage = storage(storage_name);
    p.cache.hit_ratio = hit_ratio;
    p.cluster.hosts = hosts;
    p.cluster.link = link(link_name);
    if (hosts > 1) p.cluster.comm_volume_base_bytes = comm_volume(profile_name);
    p.mode = mode;
    p.validate();
    return p;
  }

 private:
  struct AccelEntry {
    Accelerator accel;
    struct AlphaCal {
      std::string profile;
      BreakdownFractions fractions;
      std::uint32_t hosts = 0;
      std::string storage;
    };
    std::optional<AlphaCal> alpha_cal;
  };

  struct ProfileEntry {
    AppProfile profile;
    std::optional<double> comm_volume;
    struct CommCal {
      BreakdownFractions fractions;
      std::uint32_t hosts = 0;
      std::string link;
    };
    std::optional<CommCal> comm_cal;
    struct VolumeScale {
      std::string of;
      double factor = 0.0;
    };
    std::optional<VolumeScale> scale;
  };

  template <typename Map>
  static const typename Map::mapped_type& find(const Map& m,
                                               const std::string& name,
                                               const char* what) {
    auto it = m.find(name);
    if (it == m.end())
      throw config_error(std::string("unknown ") + what + " '" + name +
                         "' (known: " + presets_detail::known_names(m) + ")");
    return it->second;
  }

  template <typename Map>
  static std::vector<std::string> keys(const Map& m) {
    std::vector<std::string> out;
    out.reserve(m.size());
    for (const auto& [name, _] : m) out.push_back(name);
    return out;
  }

  void parse_all(const nlohmann::json& params_doc,
                 const nlohmann::json& platform_doc,
                 const nlohmann::json& profiles_doc) {
    using presets_detail::parse_fractions;
    using presets_detail::require;

    for (const auto& [name, obj] : params_doc.items()) {
      const std::string ctx = "params: " + name;
      CkksParams p;
      p.ring_degree_N = require<std::uint64_t>(obj, "ring_degree_N", ctx);
      p.log_q_bits = require<std::uint32_t>(obj, "log_q_bits", ctx);
      p.prime_bits = require<std::uint32_t>(obj, "prime_bits", ctx);
      p.word_bytes = require<std::uint32_t>(obj, "word_bytes", ctx);
      p.dnum = require<std::uint32_t>(obj, "dnum", ctx);
      p.aux_limbs_K = require<std::uint32_t>(obj, "aux_limbs_K", ctx);
      try {
        p.validate();
      } catch (const param_error& e) {
        throw config_error(ctx + ": " + e.what());
      }
      params_.emplace(name, p);
    }

    const auto accels_doc =
        require<nlohmann::json>(platform_doc, "accelerators", "platform");
    for (const auto& [name, obj] : accels_doc.items()) {
      const std::string ctx = "accelerators: " + name;
      AccelEntry e;
      e.accel.name = name;
      const std::string kind = require<std::string>(obj, "kind", ctx);
      if (kind == "asic")
        e.accel.kind = AccelKind::asic;
      else if (kind == "gpu")
        e.accel.kind = AccelKind::gpu;
      else
        throw config_error(ctx + ": kind must be 'asic' or 'gpu'");
      e.accel.clock_hz = require<double>(obj, "clock_hz", ctx);
      if (obj.contains("serial_fraction"))
        e.accel.serial_fraction =
            require<double>(obj, "serial_fraction", ctx);
      if (obj.contains("serial_fraction_calibration")) {
        const auto cal = obj["serial_fraction_calibration"];
        AccelEntry::AlphaCal c;
        c.profile = require<std::string>(cal, "profile", ctx);
        c.fractions = parse_fractions(
            require<nlohmann::json>(cal, "fractions", ctx), ctx);
        c.hosts = require<std::uint32_t>(cal, "hosts", ctx);
        c.storage = require<std::string>(cal, "storage", ctx);
        e.alpha_cal = std::move(c);
      }
      accels_.emplace(name, std::move(e));
    }

    const auto storage_doc =
        require<nlohmann::json>(platform_doc, "storage", "platform");
    for (const auto& [name, bw] : storage_doc.items()) {
      StorageTier t;
      t.name = name;
      if (!bw.is_number_unsigned())
        throw config_error("storage: " + name +
                           ": bandwidth must be an exact integer");
      t.bandwidth_bytes_per_s = bw.get<std::uint64_t>();
      t.validate();
      storage_.emplace(name, std::move(t));
    }

    const auto links_doc =
        require<nlohmann::json>(platform_doc, "links", "platform");
    for (const auto& [name, bw] : links_doc.items()) {
      NetworkLink l;
      l.name = name;
      if (!bw.is_number_unsigned())
        throw config_error("links: " + name +
                           ": bandwidth must be an exact integer");
      l.bandwidth_bytes_per_s = bw.get<std::uint64_t>();
      l.validate();
      links_.emplace(name, std::move(l));
    }

    for (const auto& [name, obj] : profiles_doc.items()) {
      const std::string ctx = "profiles: " + name;
      ProfileEntry e;
      AppProfile& p = e.profile;
      p.app_name = require<std::string>(obj, "app", ctx);
      p.accel_name = require<std::string>(obj, "accel", ctx);
      p.params = params(require<std::string>(obj, "params", ctx));
      p.baseline_time_s = require<double>(obj, "baseline_time_s", ctx);
      p.distinct_evk_count =
          require<std::uint64_t>(obj, "distinct_evk_count", ctx);
      p.iterations = require<std::uint32_t>(obj, "iterations", ctx);
      p.evk_set_bytes =
          detail::mul_checked(p.distinct_evk_count, evk_bytes(p.params));

      const auto mix = require<nlohmann::json>(obj, "op_mix", ctx);
      for (const auto& [kind_name, frac] : mix.items()) {
        const auto kind = op_kind_from_string(kind_name);
        if (!kind)
          throw config_error(ctx + ": unknown op kind '" + kind_name + "'");
        p.op_mix[static_cast<std::size_t>(*kind)] = frac.get<double>();
      }

      const bool has_rates = obj.contains("evk_bytes_per_cycle") ||
                             obj.contains("ct_bytes_per_cycle");
      const bool has_scale = obj.contains("volume_scale");
      if (has_rates == has_scale)
        throw config_error(ctx +
                           ": give either byte rates or a volume_scale block");
      if (has_rates) {
        p.evk_bytes_per_cycle =
            require<double>(obj, "evk_bytes_per_cycle", ctx);
        p.ct_bytes_per_cycle = require<double>(obj, "ct_bytes_per_cycle", ctx);
      } else {
        const auto sc = obj["volume_scale"];
        ProfileEntry::VolumeScale s;
        s.of = require<std::string>(sc, "of", ctx);
        s.factor = require<double>(sc, "factor", ctx);
        if (s.factor <= 0.0)
          throw config_error(ctx + ": volume_scale factor must be positive");
        e.scale = std::move(s);
      }

      if (obj.contains("comm_volume_bytes"))
        e.comm_volume = require<double>(obj, "comm_volume_bytes", ctx);
      if (obj.contains("comm_volume_calibration")) {
        if (e.comm_volume)
          throw config_error(
              ctx + ": comm_volume_bytes and comm_volume_calibration clash");
        const auto cal = obj["comm_volume_calibration"];
        ProfileEntry::CommCal c;
        c.fractions = parse_fractions(
            require<nlohmann::json>(cal, "fractions", ctx), ctx);
        c.hosts = require<std::uint32_t>(cal, "hosts", ctx);
        c.link = require<std::string>(cal, "link", ctx);
        e.comm_cal = std::move(c);
      }
      profiles_.emplace(name, std::move(e));
    }

    resolve();
  }

  // Order matters: ratio-scaled byte rates need the base profile's rates,
  // the GPU serial fraction needs a resolved profile's io volume, and the
  // exchange volumes need the serial fraction.
  void resolve() {
    for (auto& [name, e] : profiles_) {
      if (!e.scale) continue;
      const ProfileEntry& base = find(profiles_, e.scale->of, "profile");
      if (base.scale)
        throw config_error("profiles: " + name +
                           ": volume_scale must reference a profile with "
                           "direct byte rates");
      const Accelerator& base_accel =
          find(accels_, base.profile.accel_name, "accelerator").accel;
      const Accelerator& self_accel =
          find(accels_, e.profile.accel_name, "accelerator").accel;
      const double base_cycles =
          double(baseline_cycles(base.profile, base_accel));
      const double self_cycles =
          double(baseline_cycles(e.profile, self_accel));
      if (self_cycles <= 0.0)
        throw config_error("profiles: " + name +
                           ": baseline rounds to zero cycles");
      e.profile.evk_bytes_per_cycle = e.scale->factor *
                                      base.profile.evk_bytes_per_cycle *
                                      base_cycles / self_cycles;
      e.profile.ct_bytes_per_cycle = e.scale->factor *
                                     base.profile.ct_bytes_per_cycle *
                                     base_cycles / self_cycles;
    }
    for (auto& [name, e] : profiles_) e.profile.validate();

    for (auto& [name, e] : accels_) {
      if (!e.alpha_cal) continue;
      if (e.accel.kind != AccelKind::gpu)
        throw config_error("accelerators: " + name +
                           ": only GPUs take a serial-fraction calibration");
      const ProfileEntry& prof =
          find(profiles_, e.alpha_cal->profile, "profile");
      const double cycles = double(baseline_cycles(prof.profile, e.accel));
      const double io_volume = (prof.profile.evk_bytes_per_cycle +
                                prof.profile.ct_bytes_per_cycle) *
                               cycles;
      e.accel.serial_fraction = calibrate_gpu_alpha(
          e.alpha_cal->fractions, prof.profile.baseline_time_s, io_volume,
          find(storage_, e.alpha_cal->storage, "storage tier"),
          e.alpha_cal->hosts);
    }
    for (auto& [name, e] : accels_) e.accel.validate();

    for (auto& [name, e] : profiles_) {
      if (!e.comm_cal) continue;
      const Accelerator& accel =
          find(accels_, e.profile.accel_name, "accelerator").accel;
      e.comm_volume = calibrate_comm_volume(
          e.comm_cal->fractions, e.profile.baseline_time_s,
          accel.serial_fraction, e.comm_cal->hosts,
          find(links_, e.comm_cal->link, "network link"));
    }
  }

  std::map<std::string, CkksParams> params_;
  std::map<std::string, AccelEntry> accels_;
  std::map<std::string, StorageTier> storage_;
  std::map<std::string, NetworkLink> links_;
  std::map<std::string, ProfileEntry> profiles_;
};

}  // namespace fheio
