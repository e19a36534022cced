#include "dmdenkf/evaluation.hpp"

#include <cmath>

#include "dmdenkf/linalg.hpp"

namespace dmdenkf {

EigErrorSummary modulus_argument_errors(const std::vector<EigTrackRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("modulus_argument_errors: no records");
  EigErrorSummary out;
  double acc = 0.0;
  for (const EigTrackRecord& r : records) {
    acc += std::abs(r.tau_est - r.tau_true);
    if (r.pair_detected)
      out.argument_errors.push_back(wrap_angle(r.theta_est - r.theta_true));
    else
      ++out.failed_records;
  }
  out.mean_modulus_error = acc / static_cast<double>(records.size());
  return out;
}

double relative_error(const Vec& forecast, const Vec& truth) {
  if (forecast.size() != truth.size())
    throw std::invalid_argument("relative_error: dimension mismatch");
  const double denom = truth.norm();
  if (!(denom > 0.0))
    throw std::invalid_argument("relative_error: zero truth vector");
  return (truth - forecast).norm() / denom;
}

double log_score(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("log_score: no probabilities");
  double acc = 0.0;
  for (double p : probs) {
    if (p < 0.0 || p > 1.0 + 1e-12)
      throw std::invalid_argument("log_score: probability outside [0, 1]");
    acc += std::log(std::max(p, 1e-10));
  }
  return std::exp(acc / static_cast<double>(probs.size()));
}

double ensemble_prob_within_half(const std::vector<double>& members, double truth) {
  if (members.empty())
    throw std::invalid_argument("ensemble_prob_within_half: no members");
  int hits = 0;
  for (double m : members)
    if (std::abs(m - truth) <= 0.5) ++hits;
  return static_cast<double>(hits) / static_cast<double>(members.size());
}

double density_prob_within_half(const GaussianKde& density, double truth) {
  return density.mass(truth - 0.5, truth + 0.5);
}

double outlier_rate_iqr(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("outlier_rate_iqr: no values");
  const double q1 = quantile(values, 0.25);
  const double q3 = quantile(values, 0.75);
  const double cut = q3 + 1.5 * (q3 - q1);
  int outliers = 0;
  for (double v : values)
    if (v > cut) ++outliers;
  return static_cast<double>(outliers) / static_cast<double>(values.size());
}

bool in_season(const WeekLabel& w) { return w.week >= 40 || w.week <= 20; }

std::optional<int> season_of(const WeekLabel& w) {
  if (!in_season(w)) return std::nullopt;
  return w.week >= 40 ? w.year : w.year - 1;
}

std::vector<ForecastRecord> season_filter(
    const std::vector<ForecastRecord>& records,
    std::optional<std::pair<int, int>> season_range) {
  std::vector<ForecastRecord> out;
  for (const ForecastRecord& r : records) {
    const auto season = season_of(r.target);
    if (!season) continue;
    if (season_range &&
        (*season < season_range->first || *season > season_range->second))
      continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace dmdenkf
