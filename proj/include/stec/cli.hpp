#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stec/error.hpp"
#include "stec/intensity.hpp"
#include "stec/project.hpp"
#include "stec/stec.hpp"

namespace stec::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kInternal = 1, kUserError = 2 };

struct IntensityArgs {
  std::optional<std::string> region;
  std::optional<std::string> zone;
  std::string bucket = "day";
  std::string zone_mode = "weighted";
  std::string out = "intensity.csv";
};

struct EmbodiedArgs {
  std::string hardware = "cpu:7nm";
  std::string model = "cd";
  std::vector<std::string> units;
  std::optional<std::string> from, to;
  std::string out = "embodied.csv";
};

struct CompareArgs {
  std::vector<std::string> hardware = {"cpu:7nm"};
  std::string model = "zy";
  std::vector<std::string> units;
  /// Units forming the GY baseline; defaults to `units`.
  std::vector<std::string> baseline_units;
  std::optional<std::string> from, to;
  std::string out = "compare.csv";
};

struct PlotArgs {
  std::string figure = "storm";
  std::vector<std::string> units;
  std::string hardware = "cpu:7nm";
  std::optional<std::string> from, to;
  std::string out = "plot.csv";
};

namespace detail {

inline std::optional<TimeSpan> span_of(const std::optional<std::string>& from, const std::optional<std::string>& to) {
  if (!from && !to) return std::nullopt;
  TimeSpan span{Timestamp::min(), Timestamp::max()};
  if (from) span.from = parse_timestamp(*from);
  if (to) span.to = parse_timestamp(*to);
  if (!(span.from < span.to)) throw DataError("empty time span: --from must precede --to");
  return span;
}

/// Opens `path` for writing, creating parent directories.
inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

inline bool wants_json(const std::filesystem::path& p) { return p.extension() == ".json"; }

inline std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline EvalContext eval_context(const Project& p) {
  return {p.dataset, p.registry, p.factors, p.config.season_convention, p.config.baseline_mode};
}

}  // namespace detail

/// Runs `command`, mapping data/user errors to 2 and anything else to 1.
template <class F>
int guarded(F&& command, std::ostream& err) {
  try {
    return command();
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

/// Per-file record counts, coverage spans and warnings.
inline int cmd_ingest(const Project& project, std::ostream& out, bool quiet) {
  if (!quiet) out << "datasets: " << project.files.size() << '\n';
  for (const auto& f : project.files) {
    const auto& ds = f.result.dataset;
    out << f.source.name << ": " << f.source.path.filename().string() << " records=" << ds.size()
        << " warnings=" << f.result.warning_count() << '\n';
    if (quiet) continue;
    for (const auto& region : ds.regions()) {
      auto span = ds.coverage(region);
      out << "  " << region << " resolution=" << to_string(*ds.resolution(region)) << " coverage=["
          << format_timestamp(span->from) << ", " << format_timestamp(span->to) << ")\n";
    }
    for (const auto& e : f.result.errors) out << "  warning: skipped " << e.to_string() << '\n';
    for (const auto& [label, n] : f.result.unmapped_labels) {
      out << "  warning: source label '" << label << "' mapped to other (" << n << "x)\n";
    }
  }
  return kOk;
}

inline int cmd_intensity(const Project& project, const IntensityArgs& args, std::ostream& log, bool quiet) {
  if (args.region.has_value() == args.zone.has_value()) throw DataError("give exactly one of --region or --zone");
  auto kind = parse_bucket_kind(args.bucket);
  if (!kind) throw DataError("unknown bucket kind: " + args.bucket);
  auto mode = parse_zone_mode(args.zone_mode);
  if (!mode) throw DataError("unknown zone mode: " + args.zone_mode);
  BucketOptions opts{project.config.season_convention, std::nullopt};

  IntensitySeries series;
  if (args.region) {
    if (!project.registry.has_region(*args.region)) throw DataError("unknown region: " + *args.region);
    series = intensity_series(project.dataset, *args.region, *kind, project.factors, opts);
  } else {
    series = zone_intensity(project.dataset, project.registry, *args.zone, *kind, project.factors, *mode, opts);
  }
  if (series.points.empty()) throw DataError("no generation data for " + series.spatial_unit);

  const auto path = project.output_path(args.out);
  auto file = detail::open_output(path);
  if (detail::wants_json(path)) {
    file << to_json(series).dump(2) << '\n';
  } else {
    write_intensity_csv(file, {series});
  }
  if (!quiet) log << "wrote " << series.points.size() << " buckets to " << path.string() << '\n';
  return kOk;
}

inline int cmd_embodied(const Project& project, const EmbodiedArgs& args, std::ostream& log, bool quiet) {
  const StecModel model = parse_model(args.model);
  const HardwareSpec hw = project.hardware.find(args.hardware);
  const auto spec = granularity_for(model, args.units, detail::span_of(args.from, args.to));
  const StecSeries series = evaluate(hw, spec, detail::eval_context(project));
  if (series.points.empty()) throw DataError("no data for the requested units and period");

  const auto path = project.output_path(args.out);
  auto file = detail::open_output(path);
  if (detail::wants_json(path)) {
    file << to_json(series).dump(2) << '\n';
  } else {
    write_series_csv(file, series);
  }
  if (!quiet) {
    if (model == StecModel::gy && series.points.size() == 1) {
      log << hardware_label(hw) << " " << to_string(model) << " = " << detail::fixed(series.points[0].embodied, 2)
          << ' ' << unit_of_measure(hw) << '\n';
    }
    log << "wrote " << series.points.size() << " points to " << path.string() << '\n';
  }
  return kOk;
}

/// Comparison reports for each hardware; baselines are computed per year
/// found in the series.
inline std::vector<ComparisonReport> run_compare(const Project& project, const CompareArgs& args) {
  const StecModel model = parse_model(args.model);
  const auto ctx = detail::eval_context(project);
  const auto baseline_units = args.baseline_units.empty() ? args.units : args.baseline_units;
  const auto spec = granularity_for(model, args.units, detail::span_of(args.from, args.to));
  std::vector<ComparisonReport> reports;
  for (const auto& label : args.hardware) {
    const HardwareSpec hw = project.hardware.find(label);
    const StecSeries series = evaluate(hw, spec, ctx);
    if (series.points.empty()) throw DataError("no data for the requested units and period");
    std::set<int> years;
    for (const auto& p : series.points) years.insert(bucket_year(p.bucket));
    BaselineByYear baselines;
    for (int y : years) baselines[y] = baseline_gy(hw, ctx, baseline_units, y, project.config.baseline_mode).value;
    reports.push_back(compare(series, baselines));
  }
  return reports;
}

/// Writes the CSV summary to `out` and the full reports next to it as JSON.
inline int cmd_compare(const Project& project, const CompareArgs& args, std::ostream& log, bool quiet) {
  const auto reports = run_compare(project, args);
  const auto path = project.output_path(args.out);
  {
    auto file = detail::open_output(path);
    write_comparison_csv(file, reports);
  }
  auto json_path = path;
  json_path.replace_extension(".json");
  {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) doc.push_back(to_json(r));
    auto file = detail::open_output(json_path);
    file << doc.dump(2) << '\n';
  }
  if (!quiet) {
    write_comparison_csv(log, reports);
    log << "wrote " << path.string() << " and " << json_path.string() << '\n';
  }
  return kOk;
}

/// Plot-ready tables:
/// - storm: hourly `time,ci_g_per_kwh,embodied_g_per_cm2,<source>_kwh...` for one region
/// - cd-timeline / cs-timeline: `unit,bucket_key,ci_g_per_kwh,embodied,gy_baseline`
inline int cmd_plotdata(const Project& project, const PlotArgs& args, std::ostream& log, bool quiet) {
  const HardwareSpec hw = project.hardware.find(args.hardware);
  const auto span = detail::span_of(args.from, args.to);
  const BucketOptions opts{project.config.season_convention, span};
  if (args.units.empty()) throw DataError("plotdata needs --units");

  std::ostringstream body;
  std::size_t rows = 0;
  if (args.figure == "storm") {
    if (args.units.size() != 1) throw DataError("storm figure takes exactly one region");
    const auto& region = args.units.front();
    const std::string value_col =
        std::holds_alternative<CpuProcessSpec>(hw) ? "embodied_g_per_cm2" : "embodied_g_per_gb";
    body << "time,ci_g_per_kwh," << value_col;
    for (auto s : kAllSources) body << ',' << to_string(s) << "_kwh";
    body << '\n';
    for (const auto& bm : bucketize(project.dataset, region, BucketKind::hour, opts)) {
      if (!(bm.mix.total() > 0.0)) continue;
      const double ci = carbon_intensity(bm.mix, project.factors);
      body << format_timestamp(bm.bucket.start) << ',' << detail::fixed(ci) << ',' << detail::fixed(embodied(hw, ci));
      for (auto s : kAllSources) body << ',' << detail::fixed(bm.mix[s]);
      body << '\n';
      ++rows;
    }
  } else if (args.figure == "cd-timeline" || args.figure == "cs-timeline") {
    const auto model = args.figure == "cd-timeline" ? StecModel::cd : StecModel::cs;
    const auto ctx = detail::eval_context(project);
    const auto series = evaluate(hw, granularity_for(model, args.units, span), ctx);
    BaselineByYear baselines;
    for (const auto& p : series.points) {
      const int y = bucket_year(p.bucket);
      if (!baselines.count(y)) baselines[y] = baseline_gy(hw, ctx, args.units, y, project.config.baseline_mode).value;
    }
    body << "unit,bucket_key,ci_g_per_kwh,embodied,gy_baseline\n";
    for (const auto& p : series.points) {
      body << p.unit << ',' << p.bucket.key << ',' << detail::fixed(p.ci) << ',' << detail::fixed(p.embodied) << ','
           << detail::fixed(baselines.at(bucket_year(p.bucket))) << '\n';
      ++rows;
    }
  } else {
    throw DataError("unknown figure: " + args.figure + " (expected cd-timeline, cs-timeline or storm)");
  }
  if (rows == 0) throw DataError("no data in the requested span");

  const auto path = project.output_path(args.out);
  auto file = detail::open_output(path);
  file << body.str();
  if (!quiet) log << "wrote " << rows << " rows to " << path.string() << '\n';
  return kOk;
}

}  // namespace stec::cli
