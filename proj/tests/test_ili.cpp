#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dmdenkf/calendar.hpp"
#include "dmdenkf/ili.hpp"

using namespace dmdenkf;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ili_suite_scratch";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_text(const std::string& name, const std::string& body) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << body;
  out.close();
  return path.string();
}

const char* kHeader = "year,week,region,age_group,ili,total_patients\n";

// One complete week: every region and age group present.
std::string full_week(int year, int week) {
  std::string body;
  for (int region = 1; region <= kRegions; ++region)
    for (int a = 0; a < kAgeGroups; ++a)
      body += std::to_string(year) + "," + std::to_string(week) + "," +
              std::to_string(region) + "," +
              age_group_name(static_cast<AgeGroup>(a)) + ",5,200\n";
  return body;
}

}  // namespace

TEST_SUITE("ili") {

TEST_CASE("age group names round trip") {
  for (int a = 0; a < kAgeGroups; ++a) {
    const AgeGroup g = static_cast<AgeGroup>(a);
    CHECK(age_group_from_name(age_group_name(g)) == g);
  }
  CHECK_THROWS_AS(age_group_from_name("90+"), DataError);
}

TEST_CASE("csv loader accepts a complete file and computes rates") {
  const std::string path =
      write_text("ok.csv", std::string(kHeader) + full_week(2010, 3));
  const IliLoadResult loaded = load_ili_csv(path);
  CHECK(loaded.records.size() == kStrata);
  CHECK(loaded.warnings.empty());
  CHECK(loaded.records.front().rate() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("csv loader rejects malformed input") {
  CHECK_THROWS_AS(load_ili_csv(write_text("bad_header.csv",
                                          "year,week\n1,2\n")),
                  DataError);
  CHECK_THROWS_AS(
      load_ili_csv(write_text(
          "bad_week.csv", std::string(kHeader) + "2010,54,1,0-4,5,200\n")),
      DataError);
  CHECK_THROWS_AS(
      load_ili_csv(write_text(
          "bad_region.csv", std::string(kHeader) + "2010,3,11,0-4,5,200\n")),
      DataError);
  CHECK_THROWS_AS(
      load_ili_csv(write_text(
          "neg_count.csv", std::string(kHeader) + "2010,3,1,0-4,-5,200\n")),
      DataError);
  CHECK_THROWS_AS(
      load_ili_csv(write_text(
          "zero_total.csv", std::string(kHeader) + "2010,3,1,0-4,5,0\n")),
      DataError);
  CHECK_THROWS_AS(
      load_ili_csv(write_text("dup.csv", std::string(kHeader) +
                                             "2010,3,1,0-4,5,200\n"
                                             "2010,3,1,0-4,6,300\n")),
      DataError);
  CHECK_THROWS_AS(load_ili_csv((scratch_dir() / "missing.csv").string()),
                  DataError);
}

TEST_CASE("partial weeks load with a warning") {
  std::string body = full_week(2010, 3);
  body += "2010,4,1,0-4,5,200\n";  // week 4 has a single stratum
  const IliLoadResult loaded =
      load_ili_csv(write_text("partial.csv", std::string(kHeader) + body));
  CHECK(loaded.records.size() == kStrata + 1);
  CHECK(!loaded.warnings.empty());
}

TEST_CASE("csv write-read round trip") {
  IliFixtureSpec spec;
  spec.first_year = 2005;
  spec.last_year = 2006;
  spec.seed = 31;
  const std::vector<IliWeekRecord> records = make_ili_fixture(spec);
  const std::string path = (scratch_dir() / "roundtrip.csv").string();
  write_ili_csv(records, path);
  const IliLoadResult loaded = load_ili_csv(path);
  REQUIRE(loaded.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded.records[i].year == records[i].year);
    CHECK(loaded.records[i].week == records[i].week);
    CHECK(loaded.records[i].region == records[i].region);
    CHECK(loaded.records[i].age_group == records[i].age_group);
    CHECK(loaded.records[i].ili == records[i].ili);
    CHECK(loaded.records[i].total_patients == records[i].total_patients);
  }
}

TEST_CASE("population shares interpolate and clamp") {
  const long d0 = days_from_civil(2010, 1, 1);
  const long d1 = days_from_civil(2012, 1, 1);
  PopulationShares shares = PopulationShares::from_anchors(
      {{d1, {0.2, 0.3, 0.4, 0.1}}, {d0, {0.1, 0.3, 0.5, 0.1}}});

  CHECK(shares.share_at(d0, AgeGroup::Age0_4) == doctest::Approx(0.1));
  CHECK(shares.share_at(d1, AgeGroup::Age0_4) == doctest::Approx(0.2));
  const long mid = d0 + (d1 - d0) / 2;
  CHECK(shares.share_at(mid, AgeGroup::Age0_4) ==
        doctest::Approx(0.15).epsilon(1e-6));
  // Clamped outside the anchored range.
  CHECK(shares.share_at(d0 - 1000, AgeGroup::Age25_64) == doctest::Approx(0.5));
  CHECK(shares.share_at(d1 + 1000, AgeGroup::Age25_64) == doctest::Approx(0.4));

  const auto at_mid = shares.shares_at(mid);
  double sum = 0.0;
  for (double s : at_mid) sum += s;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(
      PopulationShares::from_anchors({{d0, {0.5, 0.2, 0.2, 0.2}}}),  // sums to 1.1
      DataError);
  CHECK_THROWS_AS(PopulationShares::from_anchors({}), DataError);
}

TEST_CASE("age totals use largest-remainder rounding") {
  const auto parts = allocate_age_totals(101, {0.06, 0.26, 0.52, 0.16});
  CHECK(parts[0] == 6);
  CHECK(parts[1] == 26);
  CHECK(parts[2] == 53);
  CHECK(parts[3] == 16);

  // Ties go to the lower index.
  const auto tied = allocate_age_totals(10, {0.25, 0.25, 0.25, 0.25});
  CHECK(tied[0] == 3);
  CHECK(tied[1] == 3);
  CHECK(tied[2] == 2);
  CHECK(tied[3] == 2);

  // The parts always sum to the input.
  for (long long total : {0LL, 1LL, 7LL, 99LL, 12345LL}) {
    const auto p = allocate_age_totals(total, {0.07, 0.33, 0.41, 0.19});
    CHECK(p[0] + p[1] + p[2] + p[3] == total);
  }
  CHECK_THROWS_AS(allocate_age_totals(-1, {0.25, 0.25, 0.25, 0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(allocate_age_totals(10, {0.9, 0.2, 0.2, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("log transform round trip and clamping") {
  Vec rates(3);
  rates << 0.0, 1.0, std::exp(1.0) - 1.0;
  const Vec logged = ili_transform(rates);
  CHECK(logged[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(logged[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logged[2] == doctest::Approx(1.0).epsilon(1e-12));

  int clamped = 0;
  const Vec back = ili_inverse_transform(logged, 1.0, &clamped);
  CHECK((back - rates).norm() <= 1e-12);
  CHECK(clamped == 0);

  Vec below(1);
  below << -0.5;  // decodes to exp(-0.5) - 1 < 0
  const Vec fixed = ili_inverse_transform(below, 1.0, &clamped);
  CHECK(fixed[0] == 0.0);
  CHECK(clamped == 1);

  Vec negative(1);
  negative << -0.1;
  CHECK_THROWS_AS(ili_transform(negative), DataError);
  CHECK_THROWS_AS(ili_transform(rates, 0.0), std::invalid_argument);
}

TEST_CASE("fixture is complete, deterministic, and nonnegative") {
  IliFixtureSpec spec;
  spec.first_year = 2004;
  spec.last_year = 2006;
  spec.seed = 17;
  const auto records = make_ili_fixture(spec);

  int weeks = 0;
  for (int year = 2004; year <= 2006; ++year) weeks += iso_weeks_in_year(year);
  CHECK(records.size() == static_cast<std::size_t>(weeks * kStrata));

  std::set<std::tuple<int, int, int, int>> keys;
  for (const IliWeekRecord& r : records) {
    CHECK(r.ili >= 0.0);
    CHECK(r.total_patients > 0.0);
    CHECK(r.ili <= r.total_patients);
    keys.insert({r.year, r.week, r.region, static_cast<int>(r.age_group)});
  }
  CHECK(keys.size() == records.size());  // no duplicate stratum-weeks

  const auto again = make_ili_fixture(spec);
  REQUIRE(again.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    CHECK(again[i].ili == records[i].ili);

  spec.seed = 18;
  const auto other = make_ili_fixture(spec);
  bool any_diff = false;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (other[i].ili != records[i].ili) any_diff = true;
  CHECK(any_diff);

  IliFixtureSpec bad;
  bad.first_year = 2010;
  bad.last_year = 2009;
  CHECK_THROWS_AS(make_ili_fixture(bad), std::invalid_argument);
}

TEST_CASE("forecasting pipeline on a small fixture") {
  IliFixtureSpec fspec;
  fspec.first_year = 2003;
  fspec.last_year = 2010;
  fspec.seed = 21;
  const auto records = make_ili_fixture(fspec);

  IliExperimentConfig cfg;
  cfg.rank = 4;
  cfg.max_horizon = 2;
  cfg.split = {2007, 52};
  cfg.ensemble_size = 30;
  cfg.seed = 22;
  cfg.seasons = {2008, 2009};

  const IliExperimentResult result = run_ili_experiment(records, cfg);

  CHECK(result.spin_up_weeks > 200);
  CHECK(result.filter_weeks > 100);
  REQUIRE(!result.forecasts.empty());
  REQUIRE(!result.baseline_forecasts.empty());

  // Forecasts cover every post-split target week; metrics restrict to the
  // configured seasons.
  const WeekLabel split{2007, 52};
  for (const ForecastRecord& r : result.forecasts) {
    CHECK(split < r.target);
    CHECK(r.horizon >= 1);
    CHECK(r.horizon <= 2);
    CHECK(std::isfinite(r.point));
    CHECK(r.lower <= r.upper + 1e-12);
    CHECK(r.prob_within_half >= 0.0);
    CHECK(r.prob_within_half <= 1.0);
  }
  const auto scored = season_filter(result.forecasts, cfg.seasons);
  REQUIRE(!scored.empty());
  CHECK(scored.size() < result.forecasts.size());
  for (const ForecastRecord& r : scored) {
    CHECK(in_season(r.target));
    const auto season = season_of(r.target);
    REQUIRE(season.has_value());
    CHECK(*season >= 2008);
    CHECK(*season <= 2009);
  }

  REQUIRE(result.log_score_by_horizon.count(1) == 1);
  REQUIRE(result.log_score_by_horizon.count(2) == 1);
  for (const auto& [h, score] : result.log_score_by_horizon) {
    CHECK(score > 0.0);
    CHECK(score <= 1.0);
  }
  for (const auto& [h, mse] : result.mse_by_horizon) CHECK(mse >= 0.0);
  CHECK(result.baseline_log_score > 0.0);
  CHECK(result.baseline_log_score <= 1.0);
  CHECK(result.baseline_mse >= 0.0);

  // The recorded truth equals the consultation-weighted national rate of the
  // target week, recomputed here from the raw records.
  const ForecastRecord& probe = result.forecasts.front();
  double ili_sum = 0.0, total_sum = 0.0;
  for (const IliWeekRecord& r : records) {
    if (r.year == probe.target.year && r.week == probe.target.week) {
      ili_sum += r.ili;
      total_sum += r.total_patients;
    }
  }
  REQUIRE(total_sum > 0.0);
  CHECK(probe.truth == doctest::Approx(100.0 * ili_sum / total_sum).epsilon(1e-9));

  // Determinism of the whole pipeline.
  const IliExperimentResult again = run_ili_experiment(records, cfg);
  REQUIRE(again.forecasts.size() == result.forecasts.size());
  for (const auto& [h, score] : result.log_score_by_horizon)
    CHECK(again.log_score_by_horizon.at(h) == score);
  for (std::size_t i = 0; i < result.forecasts.size(); ++i)
    CHECK(again.forecasts[i].point == result.forecasts[i].point);
}

TEST_CASE("pipeline validates the split against the data") {
  IliFixtureSpec fspec;
  fspec.first_year = 2004;
  fspec.last_year = 2005;
  fspec.seed = 23;
  const auto records = make_ili_fixture(fspec);

  IliExperimentConfig cfg;
  cfg.rank = 4;
  cfg.split = {2003, 10};  // before the data starts: no spin-up weeks
  CHECK_THROWS_AS(run_ili_experiment(records, cfg), std::invalid_argument);

  cfg.split = {2006, 20};  // past the end: nothing left to filter
  CHECK_THROWS_AS(run_ili_experiment(records, cfg), std::invalid_argument);

  CHECK_THROWS_AS(run_ili_experiment({}, cfg), DataError);
}

}  // TEST_SUITE
