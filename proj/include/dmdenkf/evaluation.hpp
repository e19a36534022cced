#pragma once

#include <optional>
#include <vector>

#include "dmdenkf/baselines.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// One tracked eigenvalue estimate against truth at a single step.  When pair
// detection failed the modulus estimate falls back to the dominant
// eigenvalue's modulus and no argument estimate exists.
struct EigTrackRecord {
  double tau_true = 1.0;
  double theta_true = 0.0;
  double tau_est = 0.0;
  double theta_est = 0.0;
  bool pair_detected = true;
};

struct EigErrorSummary {
  double mean_modulus_error = 0.0;       // mean |tau_est - tau_true|
  std::vector<double> argument_errors;   // signed, wrapped to (-pi, pi],
                                         // pair-detected records only
  int failed_records = 0;
};

EigErrorSummary modulus_argument_errors(const std::vector<EigTrackRecord>& records);

// |truth - forecast| / |truth|; errors on zero truth.
double relative_error(const Vec& forecast, const Vec& truth);

// Geometric mean of probabilities, each floored at 1e-10.
double log_score(const std::vector<double>& probs);

// Fraction of sampled forecasts within +-0.5 of the truth.
double ensemble_prob_within_half(const std::vector<double>& members, double truth);

// Probability mass of a density within +-0.5 of the truth.
double density_prob_within_half(const GaussianKde& density, double truth);

// Fraction of values above Q3 + 1.5 IQR (quartiles by linear interpolation).
double outlier_rate_iqr(const std::vector<double>& values);

// ISO week label and season bookkeeping.  An in-season week is >= 40 or
// <= 20; the season starting in year Y covers weeks 40.. of Y and 1..20 of
// Y + 1 and is labeled by Y.
struct WeekLabel {
  int year = 0;
  int week = 0;

  auto operator<=>(const WeekLabel&) const = default;
};

bool in_season(const WeekLabel& w);
// Season label for an in-season week; nullopt for off-season weeks.
std::optional<int> season_of(const WeekLabel& w);

// One forecast against truth for a labeled target week.
struct ForecastRecord {
  WeekLabel target;
  int horizon = 0;
  double point = 0.0;
  double truth = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double prob_within_half = 0.0;
};

// Keep in-season records, optionally restricted to season labels inside
// [first_season, last_season].  Idempotent.
std::vector<ForecastRecord> season_filter(
    const std::vector<ForecastRecord>& records,
    std::optional<std::pair<int, int>> season_range = std::nullopt);

}  // namespace dmdenkf
