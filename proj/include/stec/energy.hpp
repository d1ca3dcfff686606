#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "stec/error.hpp"

namespace stec {

/// The ten generation classes of the direct-emission factor table.
enum class EnergySource {
  oil = 0,
  coal,
  natural_gas,
  nuclear,
  wind,
  solar,
  hydro,
  geothermal,
  biomass,
  other,
};

inline constexpr std::size_t kSourceCount = 10;

inline constexpr std::array<EnergySource, kSourceCount> kAllSources = {
    EnergySource::oil,   EnergySource::coal,  EnergySource::natural_gas, EnergySource::nuclear,
    EnergySource::wind,  EnergySource::solar, EnergySource::hydro,       EnergySource::geothermal,
    EnergySource::biomass, EnergySource::other,
};

inline constexpr std::size_t index_of(EnergySource s) { return static_cast<std::size_t>(s); }

inline std::string_view to_string(EnergySource s) {
  static constexpr std::array<std::string_view, kSourceCount> names = {
      "oil", "coal", "natural_gas", "nuclear", "wind", "solar", "hydro", "geothermal", "biomass", "other"};
  return names[index_of(s)];
}

/// Exact match against the canonical labels only.
inline std::optional<EnergySource> parse_source(std::string_view label) {
  for (auto s : kAllSources) {
    if (to_string(s) == label) return s;
  }
  return std::nullopt;
}

/// Energy per source, kWh.
struct EnergyMix {
  std::array<double, kSourceCount> kwh{};

  double& operator[](EnergySource s) { return kwh[index_of(s)]; }
  double operator[](EnergySource s) const { return kwh[index_of(s)]; }

  double total() const {
    double sum = 0.0;
    for (double e : kwh) sum += e;
    return sum;
  }

  EnergyMix& operator+=(const EnergyMix& other) {
    for (std::size_t i = 0; i < kSourceCount; ++i) kwh[i] += other.kwh[i];
    return *this;
  }

  bool operator==(const EnergyMix&) const = default;
};

/// Direct emission factor per source, g CO2 per kWh. Always total over
/// EnergySource and non-negative.
class EmissionFactorTable {
public:
  /// Direct emission factors: oil 406, coal 760, natural gas 370, other 575,
  /// zero for nuclear and renewables.
  static EmissionFactorTable builtin() {
    EmissionFactorTable t;
    t.factors_[index_of(EnergySource::oil)] = 406.0;
    t.factors_[index_of(EnergySource::coal)] = 760.0;
    t.factors_[index_of(EnergySource::natural_gas)] = 370.0;
    t.factors_[index_of(EnergySource::other)] = 575.0;
    return t;
  }

  double at(EnergySource s) const { return factors_[index_of(s)]; }

  void set(EnergySource s, double g_per_kwh) {
    if (!(g_per_kwh >= 0.0) || !std::isfinite(g_per_kwh)) {
      throw DataError("negative factor: " + std::string(to_string(s)));
    }
    factors_[index_of(s)] = g_per_kwh;
  }

  double max_factor() const { return *std::max_element(factors_.begin(), factors_.end()); }

  bool operator==(const EmissionFactorTable&) const = default;

private:
  std::array<double, kSourceCount> factors_{};
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline double parse_double(std::string_view text, const std::string& what) {
  std::string t = trim(text);
  if (t.empty()) throw DataError(what + ": empty number");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw DataError(what + ": not a number '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw DataError(what + ": not a number '" + t + "'");
  return v;
}

}  // namespace detail

/// Loads a flat key-value document mapping source names to g/kWh.
///
/// `"builtin"` returns the default table. Files ending in `.json` are read
/// as a JSON object; anything else as `source = value` lines. Sources not
/// mentioned keep their builtin factor, so the result is always total.
inline EmissionFactorTable load_emission_factors(const std::string& path) {
  EmissionFactorTable table = EmissionFactorTable::builtin();
  if (path == "builtin") return table;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open emission factor file: " + path);

  std::map<std::string, double> entries;
  if (std::filesystem::path(path).extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("emission factor file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw DataError("emission factor file must be a JSON object: " + path);
    for (auto& [key, value] : doc.items()) {
      if (!value.is_number()) throw DataError("emission factor for " + key + " is not a number");
      entries[key] = value.get<double>();
    }
  } else {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw DataError("emission factor file " + path + ": " + e.what());
    }
    for (auto& [key, node] : tree) {
      if (!node.empty()) throw DataError("emission factor file must be flat, found section: " + key);
      entries[key] = detail::parse_double(node.data(), "emission factor for " + key);
    }
  }

  for (auto& [key, value] : entries) {
    auto source = parse_source(detail::trim(key));
    if (!source) throw DataError("unknown energy source: " + key);
    table.set(*source, value);
  }
  return table;
}

/// Maps provider-specific production labels onto EnergySource.
///
/// Lookups are case-insensitive and ignore a trailing unit suffix such as
/// `[MWh]` or `(TWh)`, and OWID-style `_electricity`/`_generation` suffixes.
/// Labels with no entry resolve to `other`; callers count those.
class AliasTable {
public:
  static AliasTable builtin() {
    AliasTable t;
    for (auto s : kAllSources) t.add(to_string(s), s);
    const std::pair<const char*, EnergySource> entries[] = {
        // ENTSO-E production types
        {"biomass", EnergySource::biomass},
        {"fossil brown coal/lignite", EnergySource::coal},
        {"fossil coal-derived gas", EnergySource::coal},
        {"fossil gas", EnergySource::natural_gas},
        {"fossil hard coal", EnergySource::coal},
        {"fossil oil", EnergySource::oil},
        {"fossil oil shale", EnergySource::oil},
        {"fossil peat", EnergySource::other},
        {"geothermal", EnergySource::geothermal},
        {"hydro pumped storage", EnergySource::hydro},
        {"hydro run-of-river and poundage", EnergySource::hydro},
        {"hydro water reservoir", EnergySource::hydro},
        {"marine", EnergySource::hydro},
        {"nuclear", EnergySource::nuclear},
        {"other renewable", EnergySource::other},
        {"waste", EnergySource::other},
        {"wind offshore", EnergySource::wind},
        {"wind onshore", EnergySource::wind},
        // OWID / EMBER columns
        {"gas", EnergySource::natural_gas},
        {"natural gas", EnergySource::natural_gas},
        {"bioenergy", EnergySource::biomass},
        {"biofuel", EnergySource::biomass},
        {"hard coal", EnergySource::coal},
        {"lignite", EnergySource::coal},
        {"other_renewable", EnergySource::other},
        {"other renewables", EnergySource::other},
        {"other_renewable_exc_biofuel", EnergySource::other},
        {"other fossil", EnergySource::other},
    };
    for (auto& [label, source] : entries) t.add(label, source);
    return t;
  }

  void add(std::string_view label, EnergySource source) { map_[normalize(label)] = source; }

  /// nullopt when the label is not in the table.
  std::optional<EnergySource> find(std::string_view label) const {
    auto it = map_.find(normalize(label));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  static std::string normalize(std::string_view label) {
    std::string s = detail::lower(detail::trim(label));
    for (char open : {'[', '('}) {
      auto p = s.rfind(open);
      if (p != std::string::npos && p > 0 && (s.back() == ']' || s.back() == ')')) {
        s = detail::trim(s.substr(0, p));
      }
    }
    for (std::string_view suffix : {"_electricity", "_generation", "_share_elec"}) {
      if (s.size() > suffix.size() && s.ends_with(suffix)) s.resize(s.size() - suffix.size());
    }
    return s;
  }

private:
  std::map<std::string, EnergySource> map_;
};

}  // namespace stec
