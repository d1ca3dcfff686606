#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stec/energy.hpp"
#include "stec/error.hpp"
#include "stec/time.hpp"

namespace stec {

/// One observation: energy generated by one source in one region over one interval.
struct EnergyGenerationRecord {
  std::string region;
  Timestamp interval_start;
  Resolution interval_length = Resolution::hour;
  EnergySource source = EnergySource::other;
  double energy_kwh = 0.0;

  Timestamp interval_end() const { return stec::interval_end(interval_start, interval_length); }

  bool operator==(const EnergyGenerationRecord&) const = default;
};

/// Immutable, validated collection of generation records.
///
/// Guarantees: energies are finite and non-negative, the key
/// (region, start, length, source) is unique, and for every
/// (region, resolution) the distinct intervals do not overlap.
class GenerationDataset {
public:
  GenerationDataset() = default;

  GenerationDataset(std::vector<EnergyGenerationRecord> records, std::vector<std::string> provenance)
      : records_(std::move(records)), provenance_(std::move(provenance)) {
    std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
      return std::tie(a.region, a.interval_length, a.interval_start, a.source) <
             std::tie(b.region, b.interval_length, b.interval_start, b.source);
    });
    validate();
  }

  /// Concatenates datasets; keys must stay unique across inputs.
  static GenerationDataset merge(const std::vector<GenerationDataset>& parts) {
    std::vector<EnergyGenerationRecord> all;
    std::vector<std::string> provenance;
    for (const auto& p : parts) {
      all.insert(all.end(), p.records_.begin(), p.records_.end());
      provenance.insert(provenance.end(), p.provenance_.begin(), p.provenance_.end());
    }
    return GenerationDataset(std::move(all), std::move(provenance));
  }

  const std::vector<EnergyGenerationRecord>& records() const { return records_; }
  const std::vector<std::string>& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<std::string> regions() const {
    std::vector<std::string> out;
    for (const auto& r : records_) {
      if (out.empty() || out.back() != r.region) out.push_back(r.region);
    }
    return out;
  }

  /// Resolutions present for a region, finest first.
  std::vector<Resolution> resolutions(const std::string& region) const {
    std::set<Resolution> found;
    for (const auto& r : slice(region)) found.insert(r.interval_length);
    return {found.begin(), found.end()};
  }

  /// Finest interval length present for a region.
  std::optional<Resolution> resolution(const std::string& region) const {
    auto all = resolutions(region);
    if (all.empty()) return std::nullopt;
    return all.front();
  }

  /// [earliest start, latest end) over all of the region's records.
  std::optional<TimeSpan> coverage(const std::string& region) const {
    std::optional<TimeSpan> span;
    for (const auto& r : slice(region)) {
      auto end = r.interval_end();
      if (!span) {
        span = TimeSpan{r.interval_start, end};
      } else {
        span->from = std::min(span->from, r.interval_start);
        span->to = std::max(span->to, end);
      }
    }
    return span;
  }

  /// E(s,t): sum over sources for one interval.
  double total_energy(const std::string& region, Timestamp start, Resolution length) const {
    double sum = 0.0;
    for (const auto& r : slice(region)) {
      if (r.interval_start == start && r.interval_length == length) sum += r.energy_kwh;
    }
    return sum;
  }

  /// Records of one region, sorted by (resolution, start, source).
  std::pair<std::vector<EnergyGenerationRecord>::const_iterator,
            std::vector<EnergyGenerationRecord>::const_iterator>
  region_range(const std::string& region) const {
    auto lo = std::lower_bound(records_.begin(), records_.end(), region,
                               [](const auto& r, const std::string& key) { return r.region < key; });
    auto hi = std::upper_bound(lo, records_.end(), region,
                               [](const std::string& key, const auto& r) { return key < r.region; });
    return {lo, hi};
  }

private:
  std::span<const EnergyGenerationRecord> slice(const std::string& region) const {
    auto [lo, hi] = region_range(region);
    return {lo, hi};
  }

  void validate() const {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.region.empty()) throw DataError("record with empty region");
      if (!(r.energy_kwh >= 0.0) || !std::isfinite(r.energy_kwh)) {
        throw DataError("negative energy for " + r.region + " at " + format_timestamp(r.interval_start));
      }
      if (i == 0) continue;
      const auto& p = records_[i - 1];
      if (p.region != r.region || p.interval_length != r.interval_length) continue;
      if (p.interval_start == r.interval_start) {
        if (p.source == r.source) {
          throw DataError("duplicate record: " + r.region + " " + format_timestamp(r.interval_start) +
                          " " + std::string(to_string(r.interval_length)) + " " +
                          std::string(to_string(r.source)));
        }
      } else if (p.interval_end() > r.interval_start) {
        throw DataError("overlapping intervals for " + r.region + " at " +
                        std::string(to_string(r.interval_length)) + " resolution: " +
                        format_timestamp(p.interval_start) + " and " + format_timestamp(r.interval_start));
      }
    }
  }

  std::vector<EnergyGenerationRecord> records_;
  std::vector<std::string> provenance_;
};

/// Registered spatial units and the treaty zones grouping them.
class RegionRegistry {
public:
  struct Region {
    std::string id;
    std::string name;
    std::string country_code;
    bool operator==(const Region&) const = default;
  };

  void add_region(Region region) {
    if (region.id.empty()) throw DataError("region id must not be empty");
    auto it = regions_.find(region.id);
    if (it != regions_.end()) {
      if (it->second == region) return;
      throw DataError("region registered twice with different attributes: " + region.id);
    }
    regions_.emplace(region.id, std::move(region));
  }

  bool has_region(const std::string& id) const { return regions_.count(id) != 0; }
  bool has_zone(const std::string& id) const { return zones_.count(id) != 0; }

  const Region& region(const std::string& id) const {
    auto it = regions_.find(id);
    if (it == regions_.end()) throw DataError("unknown region: " + id);
    return it->second;
  }

  const std::set<std::string>& zone_members(const std::string& zone) const {
    auto it = zones_.find(zone);
    if (it == zones_.end()) throw DataError("unknown zone: " + zone);
    return it->second;
  }

  /// Region id by id or by display name.
  std::optional<std::string> resolve(const std::string& id_or_name) const {
    if (has_region(id_or_name)) return id_or_name;
    for (const auto& [id, r] : regions_) {
      if (r.name == id_or_name) return id;
    }
    return std::nullopt;
  }

  const std::map<std::string, Region>& regions() const { return regions_; }
  const std::map<std::string, std::set<std::string>>& zones() const { return zones_; }

  bool operator==(const RegionRegistry&) const = default;

private:
  friend RegionRegistry register_zone(RegionRegistry, const std::string&, const std::vector<std::string>&);

  std::map<std::string, Region> regions_;
  std::map<std::string, std::set<std::string>> zones_;
};

/// Returns `registry` with `zone` bound to `members`. Re-registering a zone
/// with the same member set is a no-op; a different set is an error.
inline RegionRegistry register_zone(RegionRegistry registry, const std::string& zone,
                                    const std::vector<std::string>& members) {
  if (zone.empty()) throw DataError("zone id must not be empty");
  if (members.empty()) throw DataError("zone " + zone + " has no members");
  std::set<std::string> set;
  for (const auto& m : members) {
    if (!registry.has_region(m)) throw DataError("zone " + zone + ": unknown member region " + m);
    set.insert(m);
  }
  auto it = registry.zones_.find(zone);
  if (it != registry.zones_.end()) {
    if (it->second == set) return registry;
    throw DataError("zone " + zone + " already registered with different members");
  }
  registry.zones_.emplace(zone, std::move(set));
  return registry;
}

/// Registry document:
///
///     {"regions": [{"id": "IE", "name": "Ireland", "country_code": "IE"}, ...],
///      "zones": {"EU": ["IE", "IT"], ...}}
inline RegionRegistry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open registry file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("registry file " + path + ": " + e.what());
  }
  RegionRegistry registry;
  try {
    for (const auto& r : doc.at("regions")) {
      registry.add_region({r.at("id").get<std::string>(), r.value("name", r.at("id").get<std::string>()),
                           r.value("country_code", std::string{})});
    }
    if (doc.contains("zones")) {
      for (auto& [zone, members] : doc.at("zones").items()) {
        registry = register_zone(std::move(registry), zone, members.get<std::vector<std::string>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("registry file " + path + ": " + e.what());
  }
  return registry;
}

}  // namespace stec
