#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stec/dataset.hpp"
#include "stec/energy.hpp"
#include "stec/error.hpp"
#include "stec/hardware.hpp"
#include "stec/ingest.hpp"
#include "stec/intensity.hpp"

namespace stec {

/// One `[dataset.<name>]` section.
struct DataFileConfig {
  std::string name;
  std::filesystem::path path;
  CsvSchema schema = CsvSchema::canonical;
  std::optional<std::string> region;
  std::optional<EnergyUnit> unit;
};

/// Project configuration, an INI document:
///
///     [general]
///     emission_factors = builtin        ; or a path
///     registry = registry.json
///     hardware = builtin                ; or a path to a hardware JSON
///     reference_ci = 500                ; required with hardware = builtin
///     reference_provenance = ...
///     season_convention = northern      ; northern | southern
///     baseline_mode = unweighted        ; unweighted | weighted
///     output_dir = out
///
///     [aliases]
///     Other renewable = biomass
///
///     [dataset.ie]
///     path = ie_hourly.csv
///     schema = entsoe_like
///     region = IE
///     unit = MWh
///
/// Relative paths resolve against the config file's directory.
struct ProjectConfig {
  std::filesystem::path base_dir;
  std::vector<DataFileConfig> data_files;
  std::string emission_factors = "builtin";
  std::filesystem::path registry;
  std::string hardware = "builtin";
  std::optional<double> reference_ci;
  std::string reference_provenance;
  SeasonConvention season_convention = SeasonConvention::northern_meteorological;
  ZoneMode baseline_mode = ZoneMode::unweighted;
  std::filesystem::path output_dir = "out";
  std::map<std::string, EnergySource> aliases;
};

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "STEC_OUTPUT_DIR";

namespace detail {

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline void require_exists(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::exists(p)) throw DataError(what + " not found: " + p.string());
}

}  // namespace detail

inline ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }

  ProjectConfig cfg;
  cfg.base_dir = std::filesystem::absolute(path).parent_path();
  const auto resolve = [&](const std::string& p) { return detail::resolve_path(cfg.base_dir, p); };

  for (const auto& [section, body] : tree) {
    if (body.empty()) throw DataError("config: key outside a section: " + section);
    if (section == "general") {
      for (const auto& [key, node] : body) {
        const std::string v = detail::trim(node.data());
        if (key == "emission_factors") {
          cfg.emission_factors = v == "builtin" ? v : resolve(v).string();
        } else if (key == "registry") {
          cfg.registry = resolve(v);
        } else if (key == "hardware") {
          cfg.hardware = v == "builtin" ? v : resolve(v).string();
        } else if (key == "reference_ci") {
          cfg.reference_ci = detail::parse_double(v, "config reference_ci");
        } else if (key == "reference_provenance") {
          cfg.reference_provenance = v;
        } else if (key == "season_convention") {
          auto c = parse_season_convention(v);
          if (!c) throw DataError("config: season_convention must be northern or southern");
          cfg.season_convention = *c;
        } else if (key == "baseline_mode") {
          auto m = parse_zone_mode(v);
          if (!m) throw DataError("config: baseline_mode must be weighted or unweighted");
          cfg.baseline_mode = *m;
        } else if (key == "output_dir") {
          cfg.output_dir = resolve(v);
        } else {
          throw DataError("config: unknown key [general] " + key);
        }
      }
    } else if (section == "aliases") {
      for (const auto& [label, node] : body) {
        auto s = parse_source(detail::trim(node.data()));
        if (!s) throw DataError("config: alias " + label + " targets unknown source " + node.data());
        cfg.aliases[label] = *s;
      }
    } else if (section.starts_with("dataset.")) {
      DataFileConfig df;
      df.name = section.substr(8);
      bool has_path = false, has_schema = false;
      for (const auto& [key, node] : body) {
        const std::string v = detail::trim(node.data());
        if (key == "path") {
          df.path = resolve(v);
          has_path = true;
        } else if (key == "schema") {
          auto s = parse_schema(v);
          if (!s) throw DataError("config: [" + section + "] unknown schema " + v);
          df.schema = *s;
          has_schema = true;
        } else if (key == "region") {
          df.region = v;
        } else if (key == "unit") {
          df.unit = parse_unit(v);
          if (!df.unit) throw DataError("config: [" + section + "] unknown unit " + v);
        } else {
          throw DataError("config: unknown key [" + section + "] " + key);
        }
      }
      if (!has_path || !has_schema) throw DataError("config: [" + section + "] needs path and schema");
      cfg.data_files.push_back(std::move(df));
    } else {
      throw DataError("config: unknown section [" + section + "]");
    }
  }

  if (cfg.registry.empty()) throw DataError("config: [general] registry is required");
  detail::require_exists(cfg.registry, "registry file");
  if (cfg.emission_factors != "builtin") detail::require_exists(cfg.emission_factors, "emission factor file");
  if (cfg.hardware != "builtin") {
    detail::require_exists(cfg.hardware, "hardware file");
  } else if (!cfg.reference_ci) {
    throw DataError("config: hardware = builtin needs [general] reference_ci");
  }
  for (const auto& df : cfg.data_files) detail::require_exists(df.path, "data file");

  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  return cfg;
}

struct IngestedFile {
  DataFileConfig source;
  ParseResult result;
};

/// Everything a command needs, loaded once from a config.
struct Project {
  ProjectConfig config;
  EmissionFactorTable factors;
  RegionRegistry registry;
  HardwareCatalog hardware;
  std::vector<IngestedFile> files;
  GenerationDataset dataset;

  std::filesystem::path output_path(const std::string& out) const {
    std::filesystem::path p(out);
    return p.is_absolute() ? p : config.output_dir / p;
  }
};

/// Loads tables and ingests every data file (one task per file), then
/// merges the datasets on the calling thread.
inline Project load_project(ProjectConfig cfg, bool lenient) {
  Project project;
  project.factors = load_emission_factors(cfg.emission_factors);
  project.registry = load_registry(cfg.registry.string());
  project.hardware = cfg.hardware == "builtin"
                         ? builtin_catalog({*cfg.reference_ci, cfg.reference_provenance})
                         : load_hardware(cfg.hardware);

  AliasTable aliases = AliasTable::builtin();
  for (const auto& [label, source] : cfg.aliases) aliases.add(label, source);

  std::vector<std::future<ParseResult>> jobs;
  for (const auto& df : cfg.data_files) {
    ParseOptions opts;
    opts.region_hint = df.region;
    opts.lenient = lenient;
    opts.unit = df.unit;
    opts.aliases = aliases;
    opts.registry = &project.registry;
    jobs.push_back(std::async(std::launch::async, [path = df.path.string(), schema = df.schema, opts] {
      return parse_generation_csv(path, schema, opts);
    }));
  }
  std::vector<GenerationDataset> parts;
  std::optional<DataError> first_error;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      auto result = jobs[i].get();
      parts.push_back(result.dataset);
      project.files.push_back({cfg.data_files[i], std::move(result)});
    } catch (const DataError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;
  project.dataset = GenerationDataset::merge(parts);
  project.config = std::move(cfg);
  return project;
}

}  // namespace stec
