#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stec/dataset.hpp"
#include "stec/energy.hpp"
#include "stec/error.hpp"
#include "stec/time.hpp"

namespace stec {

enum class BucketKind { hour = 0, day = 1, season = 2, year = 3 };

inline std::string_view to_string(BucketKind k) {
  switch (k) {
    case BucketKind::hour: return "hour";
    case BucketKind::day: return "day";
    case BucketKind::season: return "season";
    case BucketKind::year: return "year";
  }
  return "?";
}

inline std::optional<BucketKind> parse_bucket_kind(std::string_view s) {
  if (s == "hour") return BucketKind::hour;
  if (s == "day") return BucketKind::day;
  if (s == "season") return BucketKind::season;
  if (s == "year") return BucketKind::year;
  return std::nullopt;
}

/// Meteorological quarters. December always belongs to the following
/// year's Dec-Feb season label.
enum class SeasonConvention { northern_meteorological, southern_meteorological };

inline std::optional<SeasonConvention> parse_season_convention(std::string_view s) {
  if (s == "northern" || s == "northern_meteorological") return SeasonConvention::northern_meteorological;
  if (s == "southern" || s == "southern_meteorological") return SeasonConvention::southern_meteorological;
  return std::nullopt;
}

/// Coarsest record resolution that can still be assigned to `kind` buckets.
inline Resolution required_resolution(BucketKind kind) {
  switch (kind) {
    case BucketKind::hour: return Resolution::hour;
    case BucketKind::day: return Resolution::day;
    case BucketKind::season: return Resolution::month;
    case BucketKind::year: return Resolution::year;
  }
  return Resolution::hour;
}

struct TimeBucket {
  BucketKind kind = BucketKind::day;
  std::string key;
  Timestamp start;
  Timestamp end;

  bool operator==(const TimeBucket&) const = default;
};

/// The bucket of `kind` containing `t`.
inline TimeBucket bucket_of(Timestamp t, BucketKind kind,
                            SeasonConvention convention = SeasonConvention::northern_meteorological) {
  using namespace std::chrono;
  auto ymd = detail::ymd_of(t);
  const int y = static_cast<int>(ymd.year());
  const unsigned m = static_cast<unsigned>(ymd.month());
  const unsigned d = static_cast<unsigned>(ymd.day());
  char buf[32];
  TimeBucket b;
  b.kind = kind;
  switch (kind) {
    case BucketKind::hour: {
      b.start = floor<hours>(t);
      b.end = b.start + hours{1};
      hh_mm_ss<seconds> tod{b.start - floor<days>(b.start)};
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d", y, m, d, static_cast<int>(tod.hours().count()));
      break;
    }
    case BucketKind::day: {
      b.start = detail::at_midnight(ymd);
      b.end = b.start + days{1};
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
      break;
    }
    case BucketKind::season: {
      // quarter 0 = Dec-Feb, 1 = Mar-May, 2 = Jun-Aug, 3 = Sep-Nov
      const unsigned quarter = (m % 12) / 3;
      const int label_year = m == 12 ? y + 1 : y;
      static constexpr const char* north[] = {"winter", "spring", "summer", "fall"};
      static constexpr const char* south[] = {"summer", "fall", "winter", "spring"};
      const char* name = convention == SeasonConvention::northern_meteorological ? north[quarter] : south[quarter];
      const year_month_day first = quarter == 0 ? year{label_year - 1} / December / 1
                                                : year{label_year} / month{quarter * 3} / 1;
      b.start = detail::at_midnight(first);
      b.end = detail::at_midnight(year_month_day{first} + months{3});
      std::snprintf(buf, sizeof buf, "%04d-%s", label_year, name);
      break;
    }
    case BucketKind::year: {
      b.start = detail::at_midnight(year{y} / January / 1);
      b.end = detail::at_midnight(year{y + 1} / January / 1);
      std::snprintf(buf, sizeof buf, "%04d", y);
      break;
    }
  }
  b.key = buf;
  return b;
}

/// Calendar year a bucket is labelled with (a Dec-Feb season counts for the
/// year of its January).
inline int bucket_year(const TimeBucket& b) { return std::stoi(b.key.substr(0, 4)); }

/// CI = sum_k ef_k * E_k / sum_k E_k, in g/kWh.
inline double carbon_intensity(const EnergyMix& mix, const EmissionFactorTable& factors) {
  double emissions = 0.0;
  double total = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (auto s : kAllSources) {
    const double e = mix[s];
    if (!(e >= 0.0)) throw DataError("negative energy for " + std::string(to_string(s)));
    if (e == 0.0) continue;
    emissions += factors.at(s) * e;
    total += e;
    lo = std::min(lo, factors.at(s));
    hi = std::max(hi, factors.at(s));
  }
  if (!(total > 0.0)) throw DataError("no generation");
  // Rounding can push the ratio an ulp outside the convex hull of factors.
  return std::clamp(emissions / total, lo, hi);
}

struct BucketOptions {
  SeasonConvention convention = SeasonConvention::northern_meteorological;
  /// Records starting outside the span are ignored.
  std::optional<TimeSpan> period;
};

struct BucketMix {
  TimeBucket bucket;
  EnergyMix mix;
};

/// Resolution bucketize() will read for a region, or nullopt if the region
/// has no data. Picks the coarsest resolution still fine enough for `kind`
/// so one source resolution is never double counted with another.
inline std::optional<Resolution> select_resolution(const GenerationDataset& dataset, const std::string& region,
                                                   BucketKind kind) {
  auto available = dataset.resolutions(region);
  if (available.empty()) return std::nullopt;
  const Resolution need = required_resolution(kind);
  std::optional<Resolution> pick;
  for (auto r : available) {
    if (r <= need) pick = r;
  }
  if (!pick) {
    throw DataError("resolution: have " + std::string(to_string(available.front())) + ", need ≤ " +
                    std::string(to_string(need)) + " for " + region);
  }
  return pick;
}

/// Sums each source's energy into the bucket containing the record start.
/// Buckets come out in chronological order; an absent region yields none.
inline std::vector<BucketMix> bucketize(const GenerationDataset& dataset, const std::string& region,
                                        BucketKind kind, const BucketOptions& opts = {}) {
  auto resolution = select_resolution(dataset, region, kind);
  if (!resolution) return {};
  std::map<Timestamp, BucketMix> buckets;
  auto [lo, hi] = dataset.region_range(region);
  for (auto it = lo; it != hi; ++it) {
    if (it->interval_length != *resolution) continue;
    if (opts.period && !opts.period->contains(it->interval_start)) continue;
    TimeBucket b = bucket_of(it->interval_start, kind, opts.convention);
    auto [slot, inserted] = buckets.try_emplace(b.start);
    if (inserted) slot->second.bucket = std::move(b);
    slot->second.mix[it->source] += it->energy_kwh;
  }
  std::vector<BucketMix> out;
  out.reserve(buckets.size());
  for (auto& [start, bm] : buckets) out.push_back(std::move(bm));
  return out;
}

struct IntensityPoint {
  TimeBucket bucket;
  double ci = 0.0;            // g/kWh
  double total_energy = 0.0;  // kWh
};

struct IntensitySeries {
  std::string spatial_unit;
  BucketKind kind = BucketKind::day;
  std::vector<IntensityPoint> points;

  const IntensityPoint* find(const std::string& key) const {
    for (const auto& p : points) {
      if (p.bucket.key == key) return &p;
    }
    return nullptr;
  }
};

/// CI per non-empty bucket. Zero-generation buckets are omitted.
inline IntensitySeries intensity_series(const GenerationDataset& dataset, const std::string& region, BucketKind kind,
                                        const EmissionFactorTable& factors, const BucketOptions& opts = {}) {
  IntensitySeries series{region, kind, {}};
  for (auto& bm : bucketize(dataset, region, kind, opts)) {
    const double total = bm.mix.total();
    if (!(total > 0.0)) continue;
    series.points.push_back({std::move(bm.bucket), carbon_intensity(bm.mix, factors), total});
  }
  return series;
}

/// Energy-weighted re-bucketing into a strictly coarser kind.
inline IntensitySeries aggregate_intensity(const IntensitySeries& series, BucketKind to_kind,
                                           SeasonConvention convention = SeasonConvention::northern_meteorological) {
  if (to_kind <= series.kind) {
    throw DataError("cannot aggregate " + std::string(to_string(series.kind)) + " into " +
                    std::string(to_string(to_kind)) + ": target must be coarser");
  }
  // December sits in the following year's winter.
  if (series.kind == BucketKind::season && to_kind == BucketKind::year) {
    throw DataError("cannot aggregate season into year: seasons do not nest in calendar years");
  }
  struct Acc {
    TimeBucket bucket;
    double emissions = 0.0;
    double energy = 0.0;
  };
  std::map<Timestamp, Acc> acc;
  for (const auto& p : series.points) {
    TimeBucket b = bucket_of(p.bucket.start, to_kind, convention);
    auto [slot, inserted] = acc.try_emplace(b.start);
    if (inserted) slot->second.bucket = std::move(b);
    slot->second.emissions += p.ci * p.total_energy;
    slot->second.energy += p.total_energy;
  }
  IntensitySeries out{series.spatial_unit, to_kind, {}};
  for (auto& [start, a] : acc) {
    if (!(a.energy > 0.0)) continue;
    out.points.push_back({std::move(a.bucket), a.emissions / a.energy, a.energy});
  }
  return out;
}

enum class ZoneMode { weighted, unweighted };

inline std::optional<ZoneMode> parse_zone_mode(std::string_view s) {
  if (s == "weighted") return ZoneMode::weighted;
  if (s == "unweighted") return ZoneMode::unweighted;
  return std::nullopt;
}

/// CI of a treaty zone. Weighted mode pools member generation (the CI of the
/// union mix); unweighted mode takes the arithmetic mean of member CIs over
/// the members that cover each bucket.
inline IntensitySeries zone_intensity(const GenerationDataset& dataset, const RegionRegistry& registry,
                                      const std::string& zone, BucketKind kind, const EmissionFactorTable& factors,
                                      ZoneMode mode, const BucketOptions& opts = {}) {
  const auto& members = registry.zone_members(zone);
  std::string missing;
  for (const auto& m : members) {
    if (dataset.resolutions(m).empty()) missing += (missing.empty() ? "" : ", ") + m;
  }
  if (!missing.empty()) throw DataError("zone " + zone + ": no generation data for " + missing);

  IntensitySeries out{zone, kind, {}};
  if (mode == ZoneMode::weighted) {
    std::map<Timestamp, BucketMix> pooled;
    for (const auto& m : members) {
      for (auto& bm : bucketize(dataset, m, kind, opts)) {
        auto [slot, inserted] = pooled.try_emplace(bm.bucket.start);
        if (inserted) slot->second.bucket = bm.bucket;
        slot->second.mix += bm.mix;
      }
    }
    for (auto& [start, bm] : pooled) {
      const double total = bm.mix.total();
      if (!(total > 0.0)) continue;
      out.points.push_back({std::move(bm.bucket), carbon_intensity(bm.mix, factors), total});
    }
    return out;
  }

  struct Acc {
    TimeBucket bucket;
    double ci_sum = 0.0;
    double energy = 0.0;
    int n = 0;
  };
  std::map<Timestamp, Acc> acc;
  for (const auto& m : members) {
    for (auto& p : intensity_series(dataset, m, kind, factors, opts).points) {
      auto [slot, inserted] = acc.try_emplace(p.bucket.start);
      if (inserted) slot->second.bucket = p.bucket;
      slot->second.ci_sum += p.ci;
      slot->second.energy += p.total_energy;
      ++slot->second.n;
    }
  }
  for (auto& [start, a] : acc) out.points.push_back({std::move(a.bucket), a.ci_sum / a.n, a.energy});
  return out;
}

/// `spatial_unit,bucket_kind,bucket_key,ci_g_per_kwh,total_energy_kwh`
inline void write_intensity_csv(std::ostream& out, const std::vector<IntensitySeries>& series) {
  out << "spatial_unit,bucket_kind,bucket_key,ci_g_per_kwh,total_energy_kwh\n";
  char buf[128];
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f", p.ci, p.total_energy);
      out << s.spatial_unit << ',' << to_string(s.kind) << ',' << p.bucket.key << ',' << buf << '\n';
    }
  }
}

inline nlohmann::json to_json(const IntensitySeries& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.points) {
    points.push_back({{"bucket_key", p.bucket.key},
                      {"start", format_timestamp(p.bucket.start)},
                      {"end", format_timestamp(p.bucket.end)},
                      {"ci_g_per_kwh", p.ci},
                      {"total_energy_kwh", p.total_energy}});
  }
  return {{"spatial_unit", s.spatial_unit}, {"bucket_kind", std::string(to_string(s.kind))}, {"points", points}};
}

}  // namespace stec
