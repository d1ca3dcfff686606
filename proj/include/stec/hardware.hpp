#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stec/error.hpp"

namespace stec {

/// embodied(ci) = slope * ci + intercept. Every hardware model has this shape:
/// slope is electricity per unit (kWh/cm2 or kWh/GB), intercept the
/// electricity-independent carbon.
struct AffineModel {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double ci) const { return slope * ci + intercept; }
};

/// Annual grid CI assumed by a published embodied-carbon figure.
struct CalibrationContext {
  double reference_ci = 0.0;  // g/kWh
  std::string provenance;

  void validate() const {
    if (!(reference_ci > 0.0)) throw DataError("calibration reference_ci must be > 0");
  }
};

/// Per-node fabrication parameters for logic dies.
struct CpuProcessSpec {
  std::string node;
  double eps = 0.0;     // kWh/cm2
  double gps = 0.0;     // g/cm2
  double mps = 0.0;     // g/cm2
  double yield_ = 1.0;  // (0, 1]

  void validate() const {
    if (!(eps >= 0.0 && gps >= 0.0 && mps >= 0.0)) throw DataError("cpu " + node + ": eps/gps/mps must be >= 0");
    if (!(yield_ > 0.0 && yield_ <= 1.0)) throw DataError("cpu " + node + ": yield must be in (0, 1]");
  }

  AffineModel affine() const { return {eps / yield_, (gps + mps) / yield_}; }
};

/// g/cm2 of die: (GPS + MPS + CI * EPS) / Y.
inline double cpu_embodied(const CpuProcessSpec& spec, double ci) {
  return (spec.gps + spec.mps + ci * spec.eps) / spec.yield_;
}

struct CpuShares {
  double gas = 0.0;
  double material = 0.0;
  double electricity = 0.0;
};

/// Fraction of the CPU total contributed by each term; yield cancels.
inline CpuShares cpu_breakdown(const CpuProcessSpec& spec, double ci) {
  const double electricity = ci * spec.eps;
  const double total = spec.gps + spec.mps + electricity;
  if (!(total > 0.0)) throw DataError("cpu " + spec.node + ": zero embodied carbon, shares undefined");
  CpuShares s{spec.gps / total, spec.mps / total, 0.0};
  if (electricity > 0.0) s.electricity = std::max(0.0, 1.0 - s.gas - s.material);
  return s;
}

struct MemoryTechSpec {
  std::string tech;
  double yearly_ec = 0.0;    // g/GB, as published
  double elec_per_gb = 0.0;  // kWh/GB, EPS / BD
  double alpha_m = 0.0;      // g/GB
  CalibrationContext context;

  AffineModel affine() const { return {elec_per_gb, alpha_m}; }
};

/// Splits a published memory figure into electricity and the rest:
/// alpha_M = EC_M - CI * EPS / BD, where `elec_carbon` = CI * EPS / BD.
inline MemoryTechSpec calibrate_memory(const std::string& tech, double yearly_ec, double elec_carbon,
                                       const CalibrationContext& ctx) {
  ctx.validate();
  if (!(elec_carbon >= 0.0)) throw CalibrationError("memory " + tech + ": electricity carbon must be >= 0");
  if (elec_carbon > yearly_ec) {
    throw CalibrationError("memory " + tech + ": electricity carbon exceeds embodied carbon (alpha_M < 0)");
  }
  return {tech, yearly_ec, elec_carbon / ctx.reference_ci, yearly_ec - elec_carbon, ctx};
}

/// g/GB: CI * EPS / BD + alpha_M.
inline double memory_embodied(const MemoryTechSpec& spec, double ci) { return ci * spec.elec_per_gb + spec.alpha_m; }

enum class StorageKind { ssd, hdd };

inline std::string_view to_string(StorageKind k) { return k == StorageKind::ssd ? "SSD" : "HDD"; }

inline std::optional<StorageKind> parse_storage_kind(std::string_view s) {
  if (s == "SSD" || s == "ssd") return StorageKind::ssd;
  if (s == "HDD" || s == "hdd") return StorageKind::hdd;
  return std::nullopt;
}

struct StorageProductSpec {
  std::string product;
  StorageKind kind = StorageKind::ssd;
  double yearly_ec = 0.0;  // g/GB
  double alpha_s = 0.0;    // g/GB
  double epg = 0.0;        // kWh/GB
  CalibrationContext context;

  AffineModel affine() const { return {epg, alpha_s}; }
};

/// EPG = (EC_S - alpha_S) / CI.
inline StorageProductSpec calibrate_storage(const std::string& product, StorageKind kind, double yearly_ec,
                                            double alpha_s, const CalibrationContext& ctx) {
  ctx.validate();
  if (!(alpha_s >= 0.0)) throw CalibrationError("storage " + product + ": other carbon must be >= 0");
  if (alpha_s > yearly_ec) throw CalibrationError("storage " + product + ": other carbon exceeds embodied carbon");
  return {product, kind, yearly_ec, alpha_s, (yearly_ec - alpha_s) / ctx.reference_ci, ctx};
}

/// g/GB: CI * EPG + alpha_S.
inline double storage_embodied(const StorageProductSpec& spec, double ci) { return ci * spec.epg + spec.alpha_s; }

// ---------------------------------------------------------------------------
// Published parameter tables

struct MemoryRow {
  const char* tech;
  double yearly_ec;       // g/GB
  double bit_density;     // G/mm2, informational
  double elec_carbon;     // g/GB
};

struct StorageRow {
  const char* category;
  const char* product;
  StorageKind kind;
  double yearly_ec;            // g/GB
  double manufacturing_carbon; // g/GB, informational
  double other_carbon;         // g/GB
};

inline const std::vector<CpuProcessSpec>& builtin_cpu_nodes() {
  static const std::vector<CpuProcessSpec> nodes = {
      {"28nm", 0.9, 100, 500, 1.0},      {"20nm", 1.2, 110, 500, 1.0},  {"14nm", 1.2, 125, 500, 1.0},
      {"10nm", 1.475, 150, 500, 1.0},    {"7nm", 1.52, 200, 500, 1.0},  {"7nm-EUV", 2.15, 200, 500, 1.0},
      {"7nm-EUV-DP", 2.15, 200, 500, 1.0}, {"5nm", 2.75, 225, 500, 1.0}, {"3nm", 2.75, 275, 500, 1.0},
  };
  return nodes;
}

inline const std::vector<MemoryRow>& builtin_memory_rows() {
  static const std::vector<MemoryRow> rows = {
      {"30nm LPDDR3", 230, 0.06, 67.50},
      {"20nm LPDDR3", 184, 0.11, 51.43},
      {"10nm DDR4", 65, 0.19, 35.74},
      {"LPDDR4", 48, 0.17, 39.04},
  };
  return rows;
}

inline const std::vector<StorageRow>& builtin_storage_rows() {
  using K = StorageKind;
  static const std::vector<StorageRow> rows = {
      {"Enterprise SSD", "Nytro 3530", K::ssd, 6.27, 4.25, 2.02},
      {"Enterprise SSD", "Nytro 1551", K::ssd, 3.91, 1.53, 2.38},
      {"Enterprise SSD", "Nytro 3331", K::ssd, 5.48, 0.92, 4.56},
      {"Enterprise SSD", "Nytro 3332", K::ssd, 2.42, 0.78, 1.64},
      {"Consumer SSD", "BarraCuda 120 SSD", K::ssd, 26.28, 23.85, 2.43},
      {"Enterprise HDD", "EXOS X20", K::hdd, 0.88, 0.36, 0.52},
      {"Enterprise HDD", "EXOS X18", K::hdd, 0.88, 0.39, 0.49},
      {"Enterprise HDD", "Exos 2X14", K::hdd, 1.28, 0.51, 0.78},
      {"Enterprise HDD", "Exos 7E8", K::hdd, 5.28, 2.34, 2.94},
      {"Enterprise HDD", "Exos 5E8", K::hdd, 2.54, 1.14, 1.40},
      {"Enterprise HDD", "Exos 10E2400", K::hdd, 10.75, 6.94, 3.81},
      {"Enterprise HDD", "EXOS 15E900", K::hdd, 21.62, 10.65, 10.97},
      {"Enterprise HDD", "Exos X16", K::hdd, 1.46, 0.77, 0.69},
      {"Enterprise HDD", "Exos X12", K::hdd, 1.32, 0.53, 0.79},
      {"Consumer HDD", "BarraCuda 3.5", K::hdd, 9.40, 4.84, 4.56},
      {"Consumer HDD", "BarraCuda", K::hdd, 4.25, 2.08, 2.17},
      {"Consumer HDD", "BarraCuda Pro", K::hdd, 2.62, 1.22, 1.40},
      {"Consumer HDD", "FireCuda", K::hdd, 5.16, 3.81, 1.35},
      {"Consumer HDD", "IronWolf", K::hdd, 5.28, 2.22, 3.06},
      {"Consumer HDD", "IronWolf Pro", K::hdd, 3.80, 1.33, 2.47},
      {"Consumer HDD", "Skyhawk 3 TB", K::hdd, 9.85, 2.17, 7.68},
      {"Consumer HDD", "Skyhawk Surveillance HDD", K::hdd, 4.37, 1.54, 2.83},
      {"Consumer HDD", "Skyhawk 6 TB", K::hdd, 4.18, 1.09, 3.09},
      {"Consumer HDD", "Video 3.5 HDD", K::hdd, 8.20, 3.22, 4.98},
      {"Consumer HDD", "Video 3.5 HDD (Pipeline HDD)", K::hdd, 9.54, 3.23, 6.31},
      {"External HDD", "ULTRA TOUCH", K::hdd, 5.54, 3.40, 2.13},
      {"External HDD", "Rugged Mini", K::hdd, 4.22, 2.98, 1.25},
  };
  return rows;
}

// ---------------------------------------------------------------------------
// Catalog

using HardwareSpec = std::variant<CpuProcessSpec, MemoryTechSpec, StorageProductSpec>;

/// Embodied carbon of any hardware spec at grid CI `ci`.
inline double embodied(const HardwareSpec& spec, double ci) {
  return std::visit(
      [ci](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CpuProcessSpec>) return cpu_embodied(s, ci);
        else if constexpr (std::is_same_v<T, MemoryTechSpec>) return memory_embodied(s, ci);
        else return storage_embodied(s, ci);
      },
      spec);
}

inline AffineModel affine_of(const HardwareSpec& spec) {
  return std::visit([](const auto& s) { return s.affine(); }, spec);
}

/// Table label: CPU, Memory, SSD or HDD.
inline std::string hardware_class(const HardwareSpec& spec) {
  if (std::holds_alternative<CpuProcessSpec>(spec)) return "CPU";
  if (std::holds_alternative<MemoryTechSpec>(spec)) return "Memory";
  return std::string(to_string(std::get<StorageProductSpec>(spec).kind));
}

/// `cpu:7nm`, `memory:10nm DDR4`, `ssd:Nytro 1551`, `hdd:Exos 7E8`.
inline std::string hardware_label(const HardwareSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CpuProcessSpec>) return "cpu:" + s.node;
        else if constexpr (std::is_same_v<T, MemoryTechSpec>) return "memory:" + s.tech;
        else return (s.kind == StorageKind::ssd ? "ssd:" : "hdd:") + s.product;
      },
      spec);
}

inline std::string unit_of_measure(const HardwareSpec& spec) {
  return std::holds_alternative<CpuProcessSpec>(spec) ? "g/cm2" : "g/GB";
}

struct HardwareCatalog {
  std::vector<CpuProcessSpec> cpus;
  std::vector<MemoryTechSpec> memories;
  std::vector<StorageProductSpec> storages;
  CalibrationContext context;

  /// Looks up `class:name`; class is cpu, memory, ssd, hdd or storage.
  HardwareSpec find(const std::string& label) const {
    auto colon = label.find(':');
    if (colon == std::string::npos) throw DataError("hardware label must look like class:name, got " + label);
    const std::string cls = label.substr(0, colon);
    const std::string name = label.substr(colon + 1);
    if (cls == "cpu") {
      for (const auto& c : cpus) {
        if (c.node == name) return c;
      }
    } else if (cls == "memory") {
      for (const auto& m : memories) {
        if (m.tech == name) return m;
      }
    } else if (cls == "ssd" || cls == "hdd" || cls == "storage") {
      for (const auto& s : storages) {
        if (s.product == name && (cls == "storage" || cls == (s.kind == StorageKind::ssd ? "ssd" : "hdd"))) return s;
      }
    } else {
      throw DataError("unknown hardware class: " + cls);
    }
    throw DataError("unknown hardware: " + label);
  }
};

/// Built-in parameter tables calibrated under `ctx`.
inline HardwareCatalog builtin_catalog(const CalibrationContext& ctx) {
  HardwareCatalog cat;
  cat.context = ctx;
  cat.cpus = builtin_cpu_nodes();
  for (const auto& r : builtin_memory_rows()) cat.memories.push_back(calibrate_memory(r.tech, r.yearly_ec, r.elec_carbon, ctx));
  for (const auto& r : builtin_storage_rows()) {
    cat.storages.push_back(calibrate_storage(r.product, r.kind, r.yearly_ec, r.other_carbon, ctx));
  }
  return cat;
}

/// Hardware spec document:
///
///     {"calibration": {"reference_ci": 500, "provenance": "..."},
///      "cpu": [{"node": "7nm", "eps": 1.52, "gps": 200, "mps": 500, "yield": 1.0}],
///      "memory": [{"tech": "10nm DDR4", "yearly_ec": 65, "elec_carbon_g_per_gb": 35.74}],
///      "storage": [{"product": "Nytro 1551", "kind": "SSD", "yearly_ec_g_per_gb": 3.91,
///                   "other_carbon_g_per_gb": 2.38}]}
inline HardwareCatalog load_hardware(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hardware file: " + path);
  HardwareCatalog cat;
  try {
    auto doc = nlohmann::json::parse(in);
    const auto& cal = doc.at("calibration");
    cat.context = {cal.at("reference_ci").get<double>(), cal.value("provenance", std::string{})};
    cat.context.validate();
    for (const auto& c : doc.value("cpu", nlohmann::json::array())) {
      CpuProcessSpec s{c.at("node").get<std::string>(), c.at("eps").get<double>(), c.at("gps").get<double>(),
                       c.at("mps").get<double>(), c.value("yield", 1.0)};
      s.validate();
      cat.cpus.push_back(s);
    }
    for (const auto& m : doc.value("memory", nlohmann::json::array())) {
      cat.memories.push_back(calibrate_memory(m.at("tech").get<std::string>(), m.at("yearly_ec").get<double>(),
                                              m.at("elec_carbon_g_per_gb").get<double>(), cat.context));
    }
    for (const auto& s : doc.value("storage", nlohmann::json::array())) {
      auto kind = parse_storage_kind(s.at("kind").get<std::string>());
      if (!kind) throw DataError("storage kind must be SSD or HDD");
      cat.storages.push_back(calibrate_storage(s.at("product").get<std::string>(), *kind,
                                               s.at("yearly_ec_g_per_gb").get<double>(),
                                               s.at("other_carbon_g_per_gb").get<double>(), cat.context));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("hardware file " + path + ": " + e.what());
  }
  return cat;
}

}  // namespace stec
