#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stec/dataset.hpp"
#include "stec/energy.hpp"
#include "stec/error.hpp"
#include "stec/time.hpp"

namespace stec {

/// Layouts accepted by parse_generation_csv.
///
/// - canonical: `region,interval_start,interval_length,source,energy_kwh`, kWh.
/// - entsoe_like: wide; first column is an hourly timestamp, then one column
///   per production type; MWh; the region comes from the region hint.
/// - owid_like: wide; `region` (or `country`/`entity`) and `year` columns,
///   then one column per source; TWh. An `iso_code` column is ignored.
enum class CsvSchema { canonical, entsoe_like, owid_like };

inline std::optional<CsvSchema> parse_schema(std::string_view s) {
  if (s == "canonical") return CsvSchema::canonical;
  if (s == "entsoe_like") return CsvSchema::entsoe_like;
  if (s == "owid_like") return CsvSchema::owid_like;
  return std::nullopt;
}

enum class EnergyUnit { kwh, mwh, gwh, twh };

inline double kwh_per(EnergyUnit u) {
  switch (u) {
    case EnergyUnit::kwh: return 1.0;
    case EnergyUnit::mwh: return 1e3;
    case EnergyUnit::gwh: return 1e6;
    case EnergyUnit::twh: return 1e9;
  }
  return 1.0;
}

inline std::optional<EnergyUnit> parse_unit(std::string_view s) {
  std::string l = detail::lower(s);
  if (l == "kwh") return EnergyUnit::kwh;
  if (l == "mwh") return EnergyUnit::mwh;
  if (l == "gwh") return EnergyUnit::gwh;
  if (l == "twh") return EnergyUnit::twh;
  return std::nullopt;
}

inline EnergyUnit default_unit(CsvSchema schema) {
  switch (schema) {
    case CsvSchema::canonical: return EnergyUnit::kwh;
    case CsvSchema::entsoe_like: return EnergyUnit::mwh;
    case CsvSchema::owid_like: return EnergyUnit::twh;
  }
  return EnergyUnit::kwh;
}

struct ParseOptions {
  std::optional<std::string> region_hint;
  /// Skip bad rows instead of failing the file.
  bool lenient = false;
  std::optional<EnergyUnit> unit;
  AliasTable aliases = AliasTable::builtin();
  /// When set, every region must resolve (by id or display name).
  const RegionRegistry* registry = nullptr;
};

struct RowError {
  std::size_t row = 0;  // 1-based file line; the header is row 1
  std::string message;

  std::string to_string() const { return "row " + std::to_string(row) + ": " + message; }
};

struct ParseResult {
  GenerationDataset dataset;
  std::vector<RowError> errors;
  /// Labels that fell through to `other`, with occurrence counts.
  std::map<std::string, std::size_t> unmapped_labels;

  std::size_t alias_warnings() const {
    std::size_t n = 0;
    for (auto& [label, count] : unmapped_labels) n += count;
    return n;
  }
  std::size_t warning_count() const { return errors.size() + alias_warnings(); }
};

/// Thrown when a file has hard errors and lenient mode is off.
class ParseError : public DataError {
public:
  ParseError(const std::string& path, std::vector<RowError> errors)
      : DataError(describe(path, errors)), errors_(std::move(errors)) {}

  const std::vector<RowError>& errors() const { return errors_; }

private:
  static std::string describe(const std::string& path, const std::vector<RowError>& errors) {
    std::string msg = path + ": " + std::to_string(errors.size()) + " bad row(s)";
    std::size_t shown = 0;
    for (const auto& e : errors) {
      if (shown++ == 5) {
        msg += "; ...";
        break;
      }
      msg += "; " + e.to_string();
    }
    return msg;
  }

  std::vector<RowError> errors_;
};

namespace detail {

/// Splits one CSV line; handles double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline bool is_missing_cell(const std::string& cell) {
  std::string t = lower(trim(cell));
  return t.empty() || t == "n/e" || t == "n/a" || t == "na" || t == "-" || t == "nan";
}

class RowReader {
public:
  RowReader(const std::string& path, const ParseOptions& opts) : path_(path), opts_(opts) {}

  std::string resolve_region(const std::string& raw) {
    std::string id = trim(raw);
    if (id.empty()) throw DataError("unresolvable region ''");
    if (opts_.registry) {
      auto resolved = opts_.registry->resolve(id);
      if (!resolved) throw DataError("unresolvable region '" + id + "'");
      return *resolved;
    }
    return id;
  }

  EnergySource map_source(const std::string& label, ParseResult& result) const {
    if (auto s = opts_.aliases.find(label)) return *s;
    ++result.unmapped_labels[trim(label)];
    return EnergySource::other;
  }

  double energy(const std::string& cell, EnergyUnit unit) const {
    double v = parse_double(cell, "energy");
    if (v < 0.0) throw DataError("negative energy");
    return v * kwh_per(unit);
  }

private:
  std::string path_;
  const ParseOptions& opts_;
};

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (!lines.empty() && lines.front().starts_with("\xEF\xBB\xBF")) lines.front().erase(0, 3);
  return lines;
}

}  // namespace detail

/// Parses generation data from a stream. `label` names the input in error
/// messages and becomes the dataset's provenance tag.
inline ParseResult parse_generation_csv(std::istream& in, const std::string& label, CsvSchema schema,
                                        const ParseOptions& opts = {}) {
  ParseResult result;
  auto lines = detail::read_lines(in);
  if (lines.empty()) throw DataError(label + ": empty file");
  auto header = detail::split_csv_line(lines.front());
  for (auto& h : header) h = detail::trim(h);

  const EnergyUnit unit = opts.unit.value_or(default_unit(schema));
  detail::RowReader reader(label, opts);
  std::vector<EnergyGenerationRecord> records;

  // Rows that contribute several records are committed only if every cell parses.
  auto process = [&](std::size_t row, auto&& fn) {
    std::vector<EnergyGenerationRecord> pending;
    try {
      fn(pending);
    } catch (const DataError& e) {
      result.errors.push_back({row, e.what()});
      return;
    }
    records.insert(records.end(), pending.begin(), pending.end());
  };

  if (schema == CsvSchema::canonical) {
    const std::vector<std::string> expected = {"region", "interval_start", "interval_length", "source",
                                               "energy_kwh"};
    if (header != expected) {
      throw DataError(label + ": canonical header must be region,interval_start,interval_length,source,energy_kwh");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      process(i + 1, [&](auto& out) {
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != 5) throw DataError("expected 5 fields, got " + std::to_string(f.size()));
        EnergyGenerationRecord r;
        r.region = reader.resolve_region(f[0]);
        r.interval_start = parse_timestamp(detail::trim(f[1]));
        auto len = parse_resolution(detail::trim(f[2]));
        if (!len) throw DataError("bad interval_length '" + detail::trim(f[2]) + "'");
        r.interval_length = *len;
        r.source = reader.map_source(f[3], result);
        r.energy_kwh = reader.energy(f[4], unit);
        out.push_back(std::move(r));
      });
    }
  } else if (schema == CsvSchema::entsoe_like) {
    if (!opts.region_hint) throw DataError(label + ": entsoe_like input needs a region hint");
    const std::string region = reader.resolve_region(*opts.region_hint);
    if (header.size() < 2) throw DataError(label + ": entsoe_like needs a timestamp and source columns");
    std::vector<EnergySource> column_source;
    for (std::size_t c = 1; c < header.size(); ++c) column_source.push_back(reader.map_source(header[c], result));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      process(i + 1, [&](auto& out) {
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != header.size()) throw DataError("expected " + std::to_string(header.size()) + " fields");
        Timestamp start = parse_timestamp(detail::trim(f[0]));
        EnergyMix mix;
        std::array<bool, kSourceCount> seen{};
        for (std::size_t c = 1; c < f.size(); ++c) {
          if (detail::is_missing_cell(f[c])) continue;
          auto s = column_source[c - 1];
          mix[s] += reader.energy(f[c], unit);
          seen[index_of(s)] = true;
        }
        for (auto s : kAllSources) {
          if (seen[index_of(s)]) out.push_back({region, start, Resolution::hour, s, mix[s]});
        }
      });
    }
  } else {
    std::optional<std::size_t> region_col, year_col;
    std::vector<std::pair<std::size_t, EnergySource>> source_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
      std::string h = detail::lower(header[c]);
      if (h == "region" || h == "country" || h == "entity") {
        region_col = c;
      } else if (h == "year") {
        year_col = c;
      } else if (h == "iso_code" || h == "code") {
        continue;
      } else {
        source_cols.emplace_back(c, reader.map_source(header[c], result));
      }
    }
    if (!region_col && !opts.region_hint) throw DataError(label + ": owid_like needs a region column or hint");
    if (!year_col) throw DataError(label + ": owid_like needs a year column");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      process(i + 1, [&](auto& out) {
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != header.size()) throw DataError("expected " + std::to_string(header.size()) + " fields");
        std::string region = reader.resolve_region(region_col ? f[*region_col] : *opts.region_hint);
        int year = 0;
        std::string ytext = detail::trim(f[*year_col]);
        if (ytext.size() != 4 || !detail::read_int(ytext, 0, 4, year)) {
          throw DataError("malformed timestamp: year '" + ytext + "'");
        }
        Timestamp start = parse_timestamp(ytext + "-01-01");
        EnergyMix mix;
        std::array<bool, kSourceCount> seen{};
        for (auto [c, s] : source_cols) {
          if (detail::is_missing_cell(f[c])) continue;
          mix[s] += reader.energy(f[c], unit);
          seen[index_of(s)] = true;
        }
        for (auto s : kAllSources) {
          if (seen[index_of(s)]) out.push_back({region, start, Resolution::year, s, mix[s]});
        }
      });
    }
  }

  if (!result.errors.empty() && !opts.lenient) throw ParseError(label, result.errors);
  result.dataset = GenerationDataset(std::move(records), {label});
  return result;
}

inline ParseResult parse_generation_csv(const std::string& path, CsvSchema schema, const ParseOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open generation file: " + path);
  return parse_generation_csv(in, path, schema, opts);
}

/// Writes records in the canonical schema. Energies use 17 significant
/// digits so a re-parse reproduces every double exactly.
inline void write_canonical_csv(std::ostream& out, const GenerationDataset& dataset) {
  out << "region,interval_start,interval_length,source,energy_kwh\n";
  char buf[64];
  for (const auto& r : dataset.records()) {
    std::snprintf(buf, sizeof buf, "%.17g", r.energy_kwh);
    out << r.region << ',' << format_timestamp(r.interval_start) << ',' << to_string(r.interval_length) << ','
        << to_string(r.source) << ',' << buf << '\n';
  }
}

}  // namespace stec
