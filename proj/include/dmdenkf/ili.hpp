#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmdenkf/dmdenkf.hpp"
#include "dmdenkf/evaluation.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

enum class AgeGroup { Age0_4 = 0, Age5_24 = 1, Age25_64 = 2, Age65Plus = 3 };

constexpr int kAgeGroups = 4;
constexpr int kRegions = 10;
constexpr int kStrata = kRegions * kAgeGroups;

std::string age_group_name(AgeGroup g);
AgeGroup age_group_from_name(const std::string& name);

// One surveillance stratum (region x age group) for one ISO week.
struct IliWeekRecord {
  int year = 0;
  int week = 0;
  int region = 0;  // 1..10
  AgeGroup age_group = AgeGroup::Age0_4;
  double ili = 0.0;
  double total_patients = 0.0;

  // Consultations for influenza-like illness per 100 consultations.
  double rate() const { return 100.0 * ili / total_patients; }
};

struct IliLoadResult {
  std::vector<IliWeekRecord> records;
  std::vector<std::string> warnings;  // one entry per partial week
};

// CSV schema: header "year,week,region,age_group,ili,total_patients".
// Malformed rows, negative counts, and duplicate stratum-weeks raise
// DataError with the offending line number or key.
IliLoadResult load_ili_csv(const std::string& path);
void write_ili_csv(const std::vector<IliWeekRecord>& records,
                   const std::string& path);

// Census age-share anchors, CSV schema "date,age_group,share" with dates as
// YYYY-MM-DD.  Shares for each date must sum to 1 within 1e-9.  Lookups
// interpolate linearly between anchors and clamp outside the anchored range.
class PopulationShares {
 public:
  static PopulationShares load_csv(const std::string& path);
  static PopulationShares from_anchors(
      std::vector<std::pair<long, std::array<double, kAgeGroups>>> anchors);

  double share_at(long day, AgeGroup g) const;
  std::array<double, kAgeGroups> shares_at(long day) const;

 private:
  // Sorted by serial day.
  std::vector<std::pair<long, std::array<double, kAgeGroups>>> anchors_;
};

// Split a regional consultation total into integer age-group totals
// proportional to the shares, using largest-remainder rounding so the parts
// always sum to the input exactly.
std::array<long long, kAgeGroups> allocate_age_totals(
    long long regional_total, const std::array<double, kAgeGroups>& shares);

// Variance-stabilizing transform ln(rate + c) and its inverse.  The inverse
// clamps at zero when a forecast dips below -c; `clamped`, when given,
// receives the number of clamped entries.
Vec ili_transform(const Vec& rates, double c = 1.0);
Vec ili_inverse_transform(const Vec& log_rates, double c = 1.0,
                          int* clamped = nullptr);

// Synthetic surveillance fixture: shared seasonal factors (annual and
// semiannual harmonics plus a slow multi-year component) mixed into the 40
// strata in the log domain, with iid Gaussian log-domain noise.  Counts are
// reconstructed so that loading the fixture reproduces the intended rates.
struct IliFixtureSpec {
  int first_year = 2003;
  int last_year = 2018;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

std::vector<IliWeekRecord> make_ili_fixture(const IliFixtureSpec& spec);

struct IliExperimentConfig {
  int delay = 1;       // 1 or 100 (the delay-embedded variant)
  int rank = 8;
  int max_horizon = 4;
  WeekLabel split = {2012, 52};  // last spin-up week
  int ensemble_size = 50;
  double alpha1 = -1.0;
  double alpha2 = -1.0;
  double meas_var = -1.0;
  std::uint64_t seed = 0;
  std::pair<int, int> seasons = {2012, 2017};  // season labels for metrics
  bool run_baseline = true;
  int pandemic_year = 2009;  // excluded from the historical baseline
  double transform_shift = 1.0;
};

struct IliExperimentResult {
  std::vector<ForecastRecord> forecasts;           // filter, all horizons
  std::vector<ForecastRecord> baseline_forecasts;  // horizon field is 0
  std::map<int, double> log_score_by_horizon;
  std::map<int, double> mse_by_horizon;
  double baseline_log_score = 0.0;
  double baseline_mse = 0.0;
  int spin_up_weeks = 0;
  int filter_weeks = 0;
  std::vector<std::string> warnings;
};

// Full forecasting study on weekly stratified records: build the 40-dim rate
// series, log-transform, spin up through config.split, then filter the
// remaining weeks producing 1..max_horizon week-ahead national forecasts.
// National truth and forecasts weight stratum rates by the target week's
// consultation totals.  Metrics aggregate in-season target weeks only.
IliExperimentResult run_ili_experiment(const std::vector<IliWeekRecord>& records,
                                       const IliExperimentConfig& config);

struct RankSweepEntry {
  int rank = 0;
  double log_score = 0.0;  // averaged over horizons
  double mse = 0.0;
};

std::vector<RankSweepEntry> run_rank_sweep(const std::vector<IliWeekRecord>& records,
                                           const IliExperimentConfig& base,
                                           int rank_lo, int rank_hi);

}  // namespace dmdenkf
