// Generative checks. Every property runs >= 100 seeded cases.

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stec/stec.hpp"
#include "test_util.hpp"

using namespace stec;
using test::ts;

namespace {

constexpr int kCases = 120;
const EmissionFactorTable kFactors = EmissionFactorTable::builtin();

EnergyMix random_mix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> e(0.0, 1e6);
  std::bernoulli_distribution present(0.6);
  EnergyMix m;
  for (auto s : kAllSources) {
    if (present(rng)) m[s] = e(rng);
  }
  if (!(m.total() > 0.0)) m[EnergySource::coal] = 1.0 + e(rng);
  return m;
}

CpuProcessSpec random_cpu(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {"rand", 0.5 + 3.0 * u(rng), 50 + 300 * u(rng), 300 + 400 * u(rng), 0.3 + 0.7 * u(rng)};
}

/// A random spec from each of the three hardware families.
std::vector<HardwareSpec> random_hardware(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CalibrationContext ctx{100.0 + 700.0 * u(rng), "random"};
  const double mem_ec = 10 + 200 * u(rng);
  const double ssd_ec = 1 + 10 * u(rng);
  return {random_cpu(rng), calibrate_memory("rand", mem_ec, mem_ec * u(rng), ctx),
          calibrate_storage("rand", StorageKind::ssd, ssd_ec, ssd_ec * u(rng), ctx)};
}

std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Properties, CarbonIntensityIsScaleInvariant) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> k(1e-6, 1e6);
  for (int i = 0; i < kCases; ++i) {
    const EnergyMix m = random_mix(rng);
    const double factor = k(rng);
    EnergyMix scaled = m;
    for (auto& e : scaled.kwh) e *= factor;
    const double a = carbon_intensity(m, kFactors);
    EXPECT_NEAR(carbon_intensity(scaled, kFactors), a, 1e-12 * std::max(1.0, a)) << "case " << i;
  }
}

TEST(Properties, CarbonIntensityWithinFactorsOfPresentSources) {
  std::mt19937_64 rng(102);
  for (int i = 0; i < kCases; ++i) {
    const EnergyMix m = random_mix(rng);
    double lo = 1e9, hi = -1e9;
    for (auto s : kAllSources) {
      if (m[s] > 0.0) {
        lo = std::min(lo, kFactors.at(s));
        hi = std::max(hi, kFactors.at(s));
      }
    }
    const double ci = carbon_intensity(m, kFactors);
    EXPECT_GE(ci, lo) << "case " << i;
    EXPECT_LE(ci, hi) << "case " << i;
  }
}

TEST(Properties, MoreWindNeverRaisesIntensity) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> extra(1.0, 1e6);
  for (int i = 0; i < kCases; ++i) {
    const EnergyMix m = random_mix(rng);
    EnergyMix windier = m;
    windier[EnergySource::wind] += extra(rng);
    const double before = carbon_intensity(m, kFactors);
    const double after = carbon_intensity(windier, kFactors);
    EXPECT_LE(after, before) << "case " << i;
    if (before > 0.0) {
      EXPECT_LT(after, before) << "case " << i;
    }
  }
}

TEST(Properties, EveryHardwareModelIsAffineInIntensity) {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> ci(0.0, 800.0), lambda(0.0, 1.0);
  for (int i = 0; i < kCases; ++i) {
    for (const auto& hw : random_hardware(rng)) {
      const double a = ci(rng), b = ci(rng), l = lambda(rng);
      const double mixed = embodied(hw, l * a + (1 - l) * b);
      const double expect = l * embodied(hw, a) + (1 - l) * embodied(hw, b);
      EXPECT_NEAR(mixed, expect, 1e-9 * std::max(1.0, std::abs(expect))) << hardware_class(hw) << " case " << i;
      // the closed-form coefficients agree with the model itself
      EXPECT_NEAR(affine_of(hw)(a), embodied(hw, a), 1e-9 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST(Properties, PublishedRowsAreAffineAtAnyReference) {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> ref(50.0, 900.0), ci(0.0, 800.0);
  for (int i = 0; i < kCases; ++i) {
    const auto cat = builtin_catalog({ref(rng), "random"});
    const double a = ci(rng), b = ci(rng);
    for (const auto& m : cat.memories) {
      EXPECT_NEAR(memory_embodied(m, (a + b) / 2), (memory_embodied(m, a) + memory_embodied(m, b)) / 2, 1e-9);
    }
    for (const auto& s : cat.storages) {
      EXPECT_NEAR(storage_embodied(s, (a + b) / 2), (storage_embodied(s, a) + storage_embodied(s, b)) / 2, 1e-9);
    }
  }
}

TEST(Properties, AverageDifferenceNeverExceedsMaximum) {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> ci(0.0, 800.0);
  std::uniform_int_distribution<int> n(1, 40);
  for (int i = 0; i < kCases; ++i) {
    const HardwareSpec hw = random_cpu(rng);
    StecSeries series{hw, granularity_for(StecModel::cd, {"X"}), {}, 1.0};
    const int points = n(rng);
    for (int p = 0; p < points; ++p) {
      const Timestamp t = ts("2021-01-01") + std::chrono::days{p};
      const double c = ci(rng);
      series.points.push_back({"X", bucket_of(t, BucketKind::day), c, embodied(hw, c)});
    }
    const auto report = compare(series, embodied(hw, ci(rng)));
    EXPECT_LE(report.avg_diff_pct, report.max_diff_pct + 1e-12) << "case " << i;
    EXPECT_GE(report.avg_diff_pct, 0.0);
  }
}

TEST(Properties, FinerGranularityHasLargerMaximumDifference) {
  // Jan..Nov of one year, so every season nests inside the year.
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> e(0.0, 1e5), ci(0.0, 800.0);
  std::bernoulli_distribution present(0.5);
  RegionRegistry reg;
  reg.add_region({"R", "Region", "RR"});
  reg = register_zone(reg, "SOLO", {"R"});

  for (int i = 0; i < kCases; ++i) {
    const int year = 2015 + i % 10;
    const Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{year} / 1 / 1}};
    const Timestamp end = Timestamp{std::chrono::sys_days{std::chrono::year{year} / 12 / 1}};
    std::vector<EnergyGenerationRecord> recs;
    for (Timestamp t = start; t < end; t += std::chrono::days{1}) {
      recs.push_back({"R", t, Resolution::day, EnergySource::wind, 1.0 + e(rng)});
      for (auto s : {EnergySource::coal, EnergySource::natural_gas, EnergySource::solar}) {
        if (present(rng)) recs.push_back({"R", t, Resolution::day, s, e(rng)});
      }
    }
    const GenerationDataset ds(std::move(recs), {"random"});
    const EvalContext ctx{ds, reg, kFactors};

    for (const auto& hw : random_hardware(rng)) {
      const double baseline = std::max(1e-3, embodied(hw, ci(rng)));
      const double day = compare(evaluate(hw, granularity_for(StecModel::cd, {"R"}), ctx), baseline).max_diff_pct;
      const double season = compare(evaluate(hw, granularity_for(StecModel::cs, {"R"}), ctx), baseline).max_diff_pct;
      const double yr = compare(evaluate(hw, granularity_for(StecModel::zy, {"SOLO"}), ctx), baseline).max_diff_pct;
      const double tol = 1e-9 * std::max(1.0, day);
      EXPECT_GE(day + tol, season) << hardware_class(hw) << " case " << i;
      EXPECT_GE(season + tol, yr) << hardware_class(hw) << " case " << i;
    }
  }
}

TEST(Properties, AggregationAcrossNestingsMatchesPooledMix) {
  std::mt19937_64 rng(108);
  std::uniform_int_distribution<int> offset_days(0, 700);
  for (int i = 0; i < kCases; ++i) {
    const Timestamp start = ts("2019-10-01T00:00Z") + std::chrono::days{offset_days(rng)};
    const auto ds = test::random_hourly(rng, "IE", start, 24 * 45);
    const auto hourly = intensity_series(ds, "IE", BucketKind::hour, kFactors);

    // hour -> day -> season and hour -> day -> year; seasons do not nest in years
    const auto day = aggregate_intensity(hourly, BucketKind::day);
    const std::vector<std::pair<IntensitySeries, oracle::Level>> checks = {
        {day, oracle::Level::day},
        {aggregate_intensity(day, BucketKind::season), oracle::Level::season},
        {aggregate_intensity(day, BucketKind::year), oracle::Level::year},
        {aggregate_intensity(hourly, BucketKind::season), oracle::Level::season},
        {aggregate_intensity(hourly, BucketKind::year), oracle::Level::year},
        {intensity_series(ds, "IE", BucketKind::season, kFactors), oracle::Level::season},
        {intensity_series(ds, "IE", BucketKind::year, kFactors), oracle::Level::year},
    };
    for (const auto& [series, level] : checks) {
      const auto want = oracle::pooled_ci(ds, "IE", level);
      ASSERT_EQ(series.points.size(), want.size()) << "case " << i;
      for (const auto& p : series.points) {
        const double w = want.at(p.bucket.key);
        EXPECT_NEAR(p.ci, w, 1e-9 * std::max(1.0, w)) << p.bucket.key << " case " << i;
      }
    }
  }
}

TEST(Properties, RankingByIntensityEqualsRankingByEmbodied) {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> ci(0.0, 800.0);
  for (int i = 0; i < kCases; ++i) {
    std::vector<double> cis(12);
    for (auto& c : cis) c = ci(rng);
    std::vector<std::size_t> by_ci(cis.size());
    std::iota(by_ci.begin(), by_ci.end(), 0);
    std::sort(by_ci.begin(), by_ci.end(), [&](auto a, auto b) { return cis[a] < cis[b]; });
    for (const auto& hw : random_hardware(rng)) {
      ASSERT_GT(affine_of(hw).slope, 0.0);
      std::vector<double> values;
      for (auto k : by_ci) values.push_back(embodied(hw, cis[k]));
      EXPECT_EQ(values, sorted_copy(values)) << hardware_class(hw) << " case " << i;
    }
  }
}

TEST(Properties, ZoneUnitsRankTheSameUnderEveryHardware) {
  std::mt19937_64 rng(110);
  RegionRegistry reg;
  for (const char* r : {"A", "B", "C", "D"}) reg.add_region({r, r, r});
  for (const char* r : {"A", "B", "C", "D"}) reg = register_zone(reg, std::string("Z") + r, {r});
  std::uniform_real_distribution<double> e(1.0, 1e5);
  for (int i = 0; i < kCases; ++i) {
    std::vector<EnergyGenerationRecord> recs;
    for (const char* r : {"A", "B", "C", "D"}) {
      for (auto s : {EnergySource::coal, EnergySource::wind, EnergySource::oil}) {
        recs.push_back({r, ts("2022-01-01"), Resolution::year, s, e(rng)});
      }
    }
    const GenerationDataset ds(std::move(recs), {});
    const EvalContext ctx{ds, reg, kFactors};
    const auto spec = granularity_for(StecModel::zy, {"ZA", "ZB", "ZC", "ZD"});
    for (const auto& hw : random_hardware(rng)) {
      auto pts = evaluate(hw, spec, ctx).points;
      std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.ci < b.ci; });
      for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_LE(pts[k - 1].embodied, pts[k].embodied);
    }
  }
}
