#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stec/dataset.hpp"
#include "stec/energy.hpp"
#include "stec/error.hpp"
#include "stec/hardware.hpp"
#include "stec/intensity.hpp"

namespace stec {

enum class SpatialLevel { country, treaty_zone, global };
enum class TemporalLevel { day, season, year };

/// The supported cells of the spatial x temporal granularity grid.
enum class StecModel { cd, cs, zy, gy };

inline std::string_view to_string(SpatialLevel s) {
  switch (s) {
    case SpatialLevel::country: return "country";
    case SpatialLevel::treaty_zone: return "treaty_zone";
    case SpatialLevel::global: return "global";
  }
  return "?";
}

inline std::string_view to_string(TemporalLevel t) {
  switch (t) {
    case TemporalLevel::day: return "day";
    case TemporalLevel::season: return "season";
    case TemporalLevel::year: return "year";
  }
  return "?";
}

inline std::string_view to_string(StecModel m) {
  switch (m) {
    case StecModel::cd: return "STEC-CD";
    case StecModel::cs: return "STEC-CS";
    case StecModel::zy: return "STEC-ZY";
    case StecModel::gy: return "STEC-GY";
  }
  return "?";
}

struct GranularitySpec {
  SpatialLevel spatial = SpatialLevel::country;
  TemporalLevel temporal = TemporalLevel::day;
  /// Region ids at country level, zone ids at zone level; at global level
  /// the units whose CIs form the baseline.
  std::vector<std::string> spatial_units;
  std::optional<TimeSpan> period;

  /// Throws for cells outside CD/CS/ZY/GY.
  StecModel model() const {
    using S = SpatialLevel;
    using T = TemporalLevel;
    if (spatial == S::country && temporal == T::day) return StecModel::cd;
    if (spatial == S::country && temporal == T::season) return StecModel::cs;
    if (spatial == S::treaty_zone && temporal == T::year) return StecModel::zy;
    if (spatial == S::global && temporal == T::year) return StecModel::gy;
    throw DataError("unsupported granularity: (" + std::string(to_string(spatial)) + ", " +
                    std::string(to_string(temporal)) +
                    "); supported cells are (country, day), (country, season), (treaty_zone, year), (global, year)");
  }
};

inline GranularitySpec granularity_for(StecModel model, std::vector<std::string> units,
                                       std::optional<TimeSpan> period = std::nullopt) {
  switch (model) {
    case StecModel::cd: return {SpatialLevel::country, TemporalLevel::day, std::move(units), period};
    case StecModel::cs: return {SpatialLevel::country, TemporalLevel::season, std::move(units), period};
    case StecModel::zy: return {SpatialLevel::treaty_zone, TemporalLevel::year, std::move(units), period};
    case StecModel::gy: return {SpatialLevel::global, TemporalLevel::year, std::move(units), period};
  }
  throw DataError("unsupported granularity");
}

/// `cd`, `cs`, `zy`, `gy`. Other two-letter cells (td, ts, gd, gs, cy) are
/// recognised and rejected as unsupported; anything else is unknown.
inline StecModel parse_model(std::string_view s) {
  if (s == "cd") return StecModel::cd;
  if (s == "cs") return StecModel::cs;
  if (s == "zy") return StecModel::zy;
  if (s == "gy") return StecModel::gy;
  const std::set<std::string_view> blank_cells = {"td", "ts", "gd", "gs", "cy"};
  if (blank_cells.count(s)) throw DataError("unsupported granularity: " + std::string(s));
  throw DataError("unknown model: " + std::string(s));
}

inline BucketKind bucket_kind(TemporalLevel t) {
  switch (t) {
    case TemporalLevel::day: return BucketKind::day;
    case TemporalLevel::season: return BucketKind::season;
    case TemporalLevel::year: return BucketKind::year;
  }
  return BucketKind::year;
}

struct StecPoint {
  std::string unit;
  TimeBucket bucket;
  double ci = 0.0;        // g/kWh
  double embodied = 0.0;  // g/cm2 (CPU) or g/GB
};

struct StecSeries {
  HardwareSpec hardware;
  GranularitySpec granularity;
  std::vector<StecPoint> points;
  /// Fraction of (unit, bucket) cells that had data.
  double coverage = 1.0;
};

struct EvalContext {
  const GenerationDataset& dataset;
  const RegionRegistry& registry;
  const EmissionFactorTable& factors;
  SeasonConvention convention = SeasonConvention::northern_meteorological;
  ZoneMode baseline_mode = ZoneMode::unweighted;
};

/// Applies a hardware model to every bucket of an intensity series.
inline std::vector<StecPoint> apply_model(const HardwareSpec& hardware, const IntensitySeries& series) {
  std::vector<StecPoint> out;
  out.reserve(series.points.size());
  for (const auto& p : series.points) {
    out.push_back({series.spatial_unit, p.bucket, p.ci, embodied(hardware, p.ci)});
  }
  return out;
}

/// Year CI of one spatial unit: a registered zone is pooled over its
/// members, anything else is read as a region.
inline IntensitySeries unit_year_series(const EvalContext& ctx, const std::string& unit,
                                        const std::optional<TimeSpan>& period) {
  BucketOptions opts{ctx.convention, period};
  if (ctx.registry.has_zone(unit)) {
    return zone_intensity(ctx.dataset, ctx.registry, unit, BucketKind::year, ctx.factors, ZoneMode::weighted, opts);
  }
  return intensity_series(ctx.dataset, unit, BucketKind::year, ctx.factors, opts);
}

struct Baseline {
  int year = 0;
  double ci = 0.0;
  double value = 0.0;
};

/// Global/year baseline over `units` for one calendar year. Unweighted mode
/// evaluates the hardware at the mean of unit CIs; weighted mode at the CI
/// of the pooled generation.
inline Baseline baseline_gy(const HardwareSpec& hardware, const EvalContext& ctx,
                            const std::vector<std::string>& units, int year, ZoneMode mode) {
  if (units.empty()) throw DataError("baseline needs at least one spatial unit");
  const std::string key = std::to_string(year);
  double ci_sum = 0.0, emissions = 0.0, energy = 0.0;
  std::string missing;
  for (const auto& u : units) {
    auto series = unit_year_series(ctx, u, std::nullopt);
    const auto* p = series.find(key);
    if (!p) {
      missing += (missing.empty() ? "" : ", ") + u;
      continue;
    }
    ci_sum += p->ci;
    emissions += p->ci * p->total_energy;
    energy += p->total_energy;
  }
  if (!missing.empty()) throw DataError("baseline coverage: no " + key + " data for " + missing);
  const double ci = mode == ZoneMode::unweighted ? ci_sum / static_cast<double>(units.size()) : emissions / energy;
  return {year, ci, embodied(hardware, ci)};
}

/// One point per (unit, bucket) of the requested cell.
inline StecSeries evaluate(const HardwareSpec& hardware, const GranularitySpec& granularity, const EvalContext& ctx) {
  const StecModel model = granularity.model();
  if (granularity.spatial_units.empty()) throw DataError("no spatial units given");
  StecSeries out{hardware, granularity, {}, 1.0};
  const BucketKind kind = bucket_kind(granularity.temporal);
  const BucketOptions opts{ctx.convention, granularity.period};

  std::vector<IntensitySeries> per_unit;
  switch (model) {
    case StecModel::cd:
    case StecModel::cs:
      for (const auto& u : granularity.spatial_units) {
        if (!ctx.registry.has_region(u)) throw DataError("unknown country-level region: " + u);
        per_unit.push_back(intensity_series(ctx.dataset, u, kind, ctx.factors, opts));
      }
      break;
    case StecModel::zy:
      for (const auto& z : granularity.spatial_units) {
        if (!ctx.registry.has_zone(z)) throw DataError("unknown treaty zone: " + z);
        per_unit.push_back(zone_intensity(ctx.dataset, ctx.registry, z, kind, ctx.factors, ZoneMode::weighted, opts));
      }
      break;
    case StecModel::gy: {
      std::set<int> years;
      for (const auto& u : granularity.spatial_units) {
        for (const auto& p : unit_year_series(ctx, u, granularity.period).points) years.insert(bucket_year(p.bucket));
      }
      for (int y : years) {
        Baseline b = baseline_gy(hardware, ctx, granularity.spatial_units, y, ctx.baseline_mode);
        TimeBucket bucket = bucket_of(Timestamp{std::chrono::sys_days{std::chrono::year{y} / 1 / 1}}, BucketKind::year);
        out.points.push_back({"global", bucket, b.ci, b.value});
      }
      return out;
    }
  }

  std::set<std::string> keys;
  std::size_t filled = 0;
  for (const auto& s : per_unit) {
    for (const auto& p : s.points) keys.insert(p.bucket.key);
    filled += s.points.size();
    auto pts = apply_model(hardware, s);
    out.points.insert(out.points.end(), pts.begin(), pts.end());
  }
  const std::size_t cells = keys.size() * per_unit.size();
  out.coverage = cells == 0 ? 0.0 : static_cast<double>(filled) / static_cast<double>(cells);
  return out;
}

struct PointDiff {
  std::string unit;
  std::string bucket_key;
  double value = 0.0;
  double diff_pct = 0.0;
};

struct ComparisonReport {
  std::string hardware;  // CPU, Memory, SSD, HDD
  std::string hardware_label;
  std::string model;
  double baseline = 0.0;
  double avg_diff_pct = 0.0;
  double max_diff_pct = 0.0;
  double coverage = 1.0;
  std::vector<PointDiff> per_point;
};

/// Baseline values keyed by calendar year.
using BaselineByYear = std::map<int, double>;

/// |value - baseline| / baseline * 100 per point, averaged uniformly.
/// Each point is compared with the baseline of its bucket's year.
inline ComparisonReport compare(const StecSeries& series, const BaselineByYear& baselines) {
  if (series.points.empty()) throw DataError("cannot compare an empty series");
  ComparisonReport r;
  r.hardware = hardware_class(series.hardware);
  r.hardware_label = hardware_label(series.hardware);
  r.model = std::string(to_string(series.granularity.model()));
  r.coverage = series.coverage;
  double sum = 0.0;
  for (const auto& p : series.points) {
    auto it = baselines.find(bucket_year(p.bucket));
    if (it == baselines.end()) {
      throw DataError("baseline coverage: no baseline for year " + std::to_string(bucket_year(p.bucket)));
    }
    const double b = it->second;
    if (!(b > 0.0)) throw DataError("baseline must be positive");
    const double d = std::abs(p.embodied - b) / b * 100.0;
    r.per_point.push_back({p.unit, p.bucket.key, p.embodied, d});
    sum += d;
    r.max_diff_pct = std::max(r.max_diff_pct, d);
  }
  r.avg_diff_pct = sum / static_cast<double>(series.points.size());
  if (baselines.size() == 1) r.baseline = baselines.begin()->second;
  return r;
}

inline ComparisonReport compare(const StecSeries& series, double baseline) {
  if (!(baseline > 0.0)) throw DataError("baseline must be positive");
  BaselineByYear by_year;
  for (const auto& p : series.points) by_year[bucket_year(p.bucket)] = baseline;
  auto r = compare(series, by_year);
  r.baseline = baseline;
  return r;
}

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least-squares line through (ci, embodied) pairs.
inline AffineFit affine_consistency_check(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw DataError("affine check needs at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw DataError("affine check is degenerate: all CI values are equal");
  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (auto [x, y] : points) fit.max_residual = std::max(fit.max_residual, std::abs(y - (fit.slope * x + fit.intercept)));
  return fit;
}

// ---------------------------------------------------------------------------
// Exports

/// `unit,bucket_key,embodied,unit_of_measure`
inline void write_series_csv(std::ostream& out, const StecSeries& series) {
  out << "unit,bucket_key,embodied,unit_of_measure\n";
  const std::string uom = unit_of_measure(series.hardware);
  char buf[64];
  for (const auto& p : series.points) {
    std::snprintf(buf, sizeof buf, "%.6f", p.embodied);
    out << p.unit << ',' << p.bucket.key << ',' << buf << ',' << uom << '\n';
  }
}

inline nlohmann::json to_json(const StecSeries& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.points) {
    points.push_back({{"unit", p.unit}, {"bucket_key", p.bucket.key}, {"ci_g_per_kwh", p.ci}, {"embodied", p.embodied}});
  }
  return {{"hardware", hardware_label(s.hardware)},
          {"model", std::string(to_string(s.granularity.model()))},
          {"unit_of_measure", unit_of_measure(s.hardware)},
          {"coverage", s.coverage},
          {"points", points}};
}

/// `hardware,avg_diff_pct,max_diff_pct`, two decimals; an `Average` row is
/// appended when there is more than one report.
inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonReport>& reports) {
  out << "hardware,avg_diff_pct,max_diff_pct\n";
  char buf[64];
  double avg = 0.0, max = 0.0;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", r.avg_diff_pct, r.max_diff_pct);
    out << r.hardware << ',' << buf << '\n';
    avg += r.avg_diff_pct;
    max += r.max_diff_pct;
  }
  if (reports.size() > 1) {
    const double n = static_cast<double>(reports.size());
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", avg / n, max / n);
    out << "Average," << buf << '\n';
  }
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.per_point) {
    points.push_back({{"unit", p.unit}, {"bucket_key", p.bucket_key}, {"value", p.value}, {"diff_pct", p.diff_pct}});
  }
  return {{"hardware", r.hardware},         {"hardware_label", r.hardware_label}, {"model", r.model},
          {"baseline", r.baseline},         {"avg_diff_pct", r.avg_diff_pct},     {"max_diff_pct", r.max_diff_pct},
          {"coverage", r.coverage},         {"per_point", points}};
}

}  // namespace stec
