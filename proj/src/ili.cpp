#include "dmdenkf/ili.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dmdenkf/calendar.hpp"
#include "dmdenkf/linalg.hpp"
#include "dmdenkf/rng.hpp"

namespace dmdenkf {

std::string age_group_name(AgeGroup g) {
  switch (g) {
    case AgeGroup::Age0_4: return "0-4";
    case AgeGroup::Age5_24: return "5-24";
    case AgeGroup::Age25_64: return "25-64";
    case AgeGroup::Age65Plus: return "65+";
  }
  throw std::invalid_argument("age_group_name: bad enum value");
}

AgeGroup age_group_from_name(const std::string& name) {
  if (name == "0-4") return AgeGroup::Age0_4;
  if (name == "5-24") return AgeGroup::Age5_24;
  if (name == "25-64") return AgeGroup::Age25_64;
  if (name == "65+") return AgeGroup::Age65Plus;
  throw DataError("unknown age group '" + name + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": malformed " + what +
                    " '" + s + "'");
  }
}

int parse_int(const std::string& s, int line_no, const char* what) {
  const double v = parse_number(s, line_no, what);
  if (v != std::floor(v))
    throw DataError("line " + std::to_string(line_no) + ": non-integer " + what +
                    " '" + s + "'");
  return static_cast<int>(v);
}

int stratum_index(int region, AgeGroup age) {
  return (region - 1) * kAgeGroups + static_cast<int>(age);
}

}  // namespace

IliLoadResult load_ili_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ILI file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty ILI file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "year,week,region,age_group,ili,total_patients")
    throw DataError("unexpected ILI header '" + line + "'");

  IliLoadResult out;
  std::set<std::tuple<int, int, int, int>> seen;
  std::map<std::pair<int, int>, int> strata_per_week;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw DataError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                      std::to_string(fields.size()));
    IliWeekRecord rec;
    rec.year = parse_int(fields[0], line_no, "year");
    rec.week = parse_int(fields[1], line_no, "week");
    rec.region = parse_int(fields[2], line_no, "region");
    rec.age_group = age_group_from_name(fields[3]);
    rec.ili = parse_number(fields[4], line_no, "ili count");
    rec.total_patients = parse_number(fields[5], line_no, "total_patients");

    if (rec.week < 1 || rec.week > 53)
      throw DataError("line " + std::to_string(line_no) + ": week out of range");
    if (rec.region < 1 || rec.region > kRegions)
      throw DataError("line " + std::to_string(line_no) + ": region out of range");
    if (rec.ili < 0.0 || rec.total_patients < 0.0)
      throw DataError("line " + std::to_string(line_no) + ": negative count");
    if (rec.total_patients <= 0.0)
      throw DataError("line " + std::to_string(line_no) + ": zero total_patients");

    const auto key = std::make_tuple(rec.year, rec.week, rec.region,
                                     static_cast<int>(rec.age_group));
    if (!seen.insert(key).second)
      throw DataError("duplicate stratum-week: year " + std::to_string(rec.year) +
                      " week " + std::to_string(rec.week) + " region " +
                      std::to_string(rec.region) + " age " +
                      age_group_name(rec.age_group));
    ++strata_per_week[{rec.year, rec.week}];
    out.records.push_back(rec);
  }
  for (const auto& [yw, count] : strata_per_week)
    if (count < kStrata)
      out.warnings.push_back("partial week: year " + std::to_string(yw.first) +
                             " week " + std::to_string(yw.second) + " has " +
                             std::to_string(count) + " of " +
                             std::to_string(kStrata) + " strata");
  return out;
}

void write_ili_csv(const std::vector<IliWeekRecord>& records,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ILI file '" + path + "'");
  out << "year,week,region,age_group,ili,total_patients\n";
  char buf[160];
  for (const IliWeekRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%s,%.17g,%.17g\n", r.year, r.week,
                  r.region, age_group_name(r.age_group).c_str(), r.ili,
                  r.total_patients);
    out << buf;
  }
}

PopulationShares PopulationShares::from_anchors(
    std::vector<std::pair<long, std::array<double, kAgeGroups>>> anchors) {
  if (anchors.empty())
    throw DataError("population shares: no anchors");
  std::sort(anchors.begin(), anchors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [day, shares] : anchors) {
    double sum = 0.0;
    for (double s : shares) {
      if (s < 0.0) throw DataError("population shares: negative share");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DataError("population shares: shares sum to " + std::to_string(sum) +
                      ", expected 1");
  }
  PopulationShares ps;
  ps.anchors_ = std::move(anchors);
  return ps;
}

PopulationShares PopulationShares::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open census file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty census file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,age_group,share")
    throw DataError("unexpected census header '" + line + "'");

  std::map<long, std::array<double, kAgeGroups>> by_date;
  std::map<long, int> counts;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw DataError("census line " + std::to_string(line_no) + ": expected 3 fields");
    long day = 0;
    try {
      day = parse_date(fields[0]);
    } catch (const std::exception& e) {
      throw DataError("census line " + std::to_string(line_no) + ": " + e.what());
    }
    const AgeGroup g = age_group_from_name(fields[1]);
    const double share = parse_number(fields[2], line_no, "share");
    by_date[day][static_cast<int>(g)] = share;
    ++counts[day];
  }
  std::vector<std::pair<long, std::array<double, kAgeGroups>>> anchors;
  for (const auto& [day, shares] : by_date) {
    if (counts[day] != kAgeGroups)
      throw DataError("census date with " + std::to_string(counts[day]) +
                      " of " + std::to_string(kAgeGroups) + " age groups");
    anchors.emplace_back(day, shares);
  }
  return from_anchors(std::move(anchors));
}

std::array<double, kAgeGroups> PopulationShares::shares_at(long day) const {
  if (day <= anchors_.front().first) return anchors_.front().second;
  if (day >= anchors_.back().first) return anchors_.back().second;
  auto hi = std::upper_bound(
      anchors_.begin(), anchors_.end(), day,
      [](long v, const auto& a) { return v < a.first; });
  const auto lo = hi - 1;
  const double t = static_cast<double>(day - lo->first) /
                   static_cast<double>(hi->first - lo->first);
  std::array<double, kAgeGroups> out{};
  for (int g = 0; g < kAgeGroups; ++g)
    out[g] = (1.0 - t) * lo->second[g] + t * hi->second[g];
  return out;
}

double PopulationShares::share_at(long day, AgeGroup g) const {
  return shares_at(day)[static_cast<int>(g)];
}

std::array<long long, kAgeGroups> allocate_age_totals(
    long long regional_total, const std::array<double, kAgeGroups>& shares) {
  if (regional_total < 0)
    throw std::invalid_argument("allocate_age_totals: negative total");
  double sum = 0.0;
  for (double s : shares) {
    if (s < 0.0) throw std::invalid_argument("allocate_age_totals: negative share");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("allocate_age_totals: shares must sum to 1");

  std::array<long long, kAgeGroups> parts{};
  std::array<std::pair<double, int>, kAgeGroups> remainders{};
  long long allocated = 0;
  for (int g = 0; g < kAgeGroups; ++g) {
    const double exact = static_cast<double>(regional_total) * shares[g];
    parts[g] = static_cast<long long>(std::floor(exact));
    remainders[g] = {exact - std::floor(exact), g};
    allocated += parts[g];
  }
  // Largest remainder first; ties break toward the lower age-group index so
  // the result is deterministic.
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long long i = 0; i < regional_total - allocated; ++i)
    ++parts[remainders[static_cast<std::size_t>(i) % kAgeGroups].second];
  return parts;
}

Vec ili_transform(const Vec& rates, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("ili_transform: shift must be positive");
  Vec out(rates.size());
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    if (rates[i] < 0.0) throw DataError("ili_transform: negative rate");
    out[i] = std::log(rates[i] + c);
  }
  return out;
}

Vec ili_inverse_transform(const Vec& log_rates, double c, int* clamped) {
  Vec out(log_rates.size());
  int clamps = 0;
  for (Eigen::Index i = 0; i < log_rates.size(); ++i) {
    const double rate = std::exp(log_rates[i]) - c;
    if (rate < 0.0) {
      out[i] = 0.0;
      ++clamps;
    } else {
      out[i] = rate;
    }
  }
  if (clamped) *clamped = clamps;
  return out;
}

std::vector<IliWeekRecord> make_ili_fixture(const IliFixtureSpec& spec) {
  if (spec.last_year < spec.first_year)
    throw std::invalid_argument("make_ili_fixture: bad year range");
  if (spec.noise < 0.0)
    throw std::invalid_argument("make_ili_fixture: negative noise");

  // Stratum mixing weights.  All annual terms live in span{cos wt, sin wt}
  // and likewise for the other factor pairs, so the noiseless log-rate
  // series has rank 7 (constant + three oscillator planes).
  const double age_base[kAgeGroups] = {1.05, 1.30, 0.95, 0.70};
  const double age_amp[kAgeGroups] = {0.55, 0.50, 0.42, 0.35};
  const double age_share[kAgeGroups] = {0.06, 0.26, 0.52, 0.16};

  Rng rng(derive_seed(spec.seed, "ili_fixture", 0));
  std::vector<IliWeekRecord> out;
  const double w_annual = 2.0 * M_PI / 52.0;
  const double w_semi = 2.0 * w_annual;
  const double w_slow = 2.0 * M_PI / 160.0;

  int t = 0;
  for (int year = spec.first_year; year <= spec.last_year; ++year) {
    const int weeks = iso_weeks_in_year(year);
    for (int week = 1; week <= weeks; ++week, ++t) {
      for (int region = 1; region <= kRegions; ++region) {
        const double region_phase = 0.35 * (region - 1) / kRegions;
        const double region_weight = 0.80 + 0.04 * (region - 1);
        for (int a = 0; a < kAgeGroups; ++a) {
          const double phase = region_phase + 0.12 * a;
          double g = age_base[a];
          g += age_amp[a] * std::cos(w_annual * t - 2.0 * M_PI * (5.0 / 52.0) - phase);
          g += 0.18 * std::cos(w_semi * t - 0.7 * phase);
          g += 0.10 * std::cos(w_slow * t + 0.5 * phase);
          g += spec.noise * rng.normal();

          const double rate = std::max(std::exp(g) - 1.0, 0.0);
          IliWeekRecord rec;
          rec.year = year;
          rec.week = week;
          rec.region = region;
          rec.age_group = static_cast<AgeGroup>(a);
          rec.total_patients =
              std::round(26000.0 * region_weight * age_share[a]);
          rec.ili = std::round(rate / 100.0 * rec.total_patients);
          out.push_back(rec);
        }
      }
    }
  }
  return out;
}

namespace {

WeekLabel next_week(const WeekLabel& w) {
  if (w.week < iso_weeks_in_year(w.year)) return {w.year, w.week + 1};
  return {w.year + 1, 1};
}

struct WeeklyGrid {
  std::vector<WeekLabel> labels;
  std::vector<Vec> rates;        // kStrata per week
  std::vector<Vec> totals;       // kStrata per week
  std::vector<double> national;  // 100 * sum(ili) / sum(total)
  std::vector<std::string> warnings;
};

WeeklyGrid build_weekly_grid(const std::vector<IliWeekRecord>& records) {
  if (records.empty()) throw DataError("ILI experiment: no records");

  std::map<WeekLabel, std::vector<const IliWeekRecord*>> by_week;
  for (const IliWeekRecord& r : records)
    by_week[{r.year, r.week}].push_back(&r);

  WeeklyGrid grid;
  const WeekLabel first = by_week.begin()->first;
  const WeekLabel last = by_week.rbegin()->first;

  Vec prev_rates, prev_totals;
  for (WeekLabel w = first;; w = next_week(w)) {
    Vec rates(kStrata), totals(kStrata);
    auto it = by_week.find(w);
    if (it == by_week.end()) {
      if (prev_rates.size() == 0)
        throw DataError("ILI experiment: series does not start on a complete week");
      rates = prev_rates;
      totals = prev_totals;
      grid.warnings.push_back("missing week " + std::to_string(w.year) + "-" +
                              std::to_string(w.week) + " carried forward");
    } else {
      std::vector<bool> filled(kStrata, false);
      for (const IliWeekRecord* r : it->second) {
        const int s = stratum_index(r->region, r->age_group);
        rates[s] = r->rate();
        totals[s] = r->total_patients;
        filled[s] = true;
      }
      int missing = 0;
      for (int s = 0; s < kStrata; ++s) {
        if (filled[s]) continue;
        ++missing;
        if (prev_rates.size() == 0)
          throw DataError("ILI experiment: first week is incomplete");
        rates[s] = prev_rates[s];
        totals[s] = prev_totals[s];
      }
      if (missing > 0)
        grid.warnings.push_back("week " + std::to_string(w.year) + "-" +
                                std::to_string(w.week) + ": " +
                                std::to_string(missing) +
                                " strata carried forward");
    }
    grid.labels.push_back(w);
    grid.rates.push_back(rates);
    grid.totals.push_back(totals);
    const double weighted = rates.dot(totals) / 100.0;  // total ili count
    grid.national.push_back(100.0 * weighted / totals.sum());
    prev_rates = std::move(rates);
    prev_totals = std::move(totals);
    if (w == last) break;
  }
  return grid;
}

double national_from_log_state(const Vec& log_state, const Vec& totals, double c) {
  const Vec rates = ili_inverse_transform(log_state, c);
  return rates.dot(totals) / totals.sum();
}

}  // namespace

IliExperimentResult run_ili_experiment(const std::vector<IliWeekRecord>& records,
                                       const IliExperimentConfig& config) {
  if (config.max_horizon < 1)
    throw std::invalid_argument("ILI experiment: max_horizon must be >= 1");
  if (config.rank < 1)
    throw std::invalid_argument("ILI experiment: rank must be >= 1");

  WeeklyGrid grid = build_weekly_grid(records);
  const auto T = static_cast<int>(grid.labels.size());

  int split_idx = 0;  // first post-spin-up index
  while (split_idx < T && !(config.split < grid.labels[split_idx])) ++split_idx;
  if (split_idx < config.delay + config.rank + 2)
    throw std::invalid_argument("ILI experiment: spin-up window too short for rank " +
                                std::to_string(config.rank) + " and delay " +
                                std::to_string(config.delay));
  if (split_idx >= T)
    throw std::invalid_argument("ILI experiment: no data after the split week");

  std::vector<Vec> series;
  series.reserve(T);
  for (int t = 0; t < T; ++t)
    series.push_back(ili_transform(grid.rates[t], config.transform_shift));

  DmdEnkfConfig fcfg;
  fcfg.spin_up_length = split_idx;
  fcfg.delay = config.delay;
  fcfg.truncation = SvdTruncation::fixed_rank(config.rank);
  fcfg.fitter = DmdEnkfConfig::Fitter::Tls;
  fcfg.ensemble_size = config.ensemble_size;
  fcfg.alpha1 = config.alpha1;
  fcfg.alpha2 = config.alpha2;
  fcfg.meas_var = config.meas_var;
  fcfg.seed = config.seed;

  IliExperimentResult out;
  out.spin_up_weeks = split_idx;
  out.filter_weeks = T - split_idx;
  out.warnings = grid.warnings;

  DmdEnkf model = spin_up(series, fcfg);
  std::vector<double> member_national(config.ensemble_size);
  for (int t = split_idx; t < T; ++t) {
    model = assimilate(model, series[t]);
    for (int h = 1; h <= config.max_horizon && t + h < T; ++h) {
      const DmdEnkfForecast fc = forecast(model, h);
      const Vec& totals = grid.totals[t + h];
      for (int j = 0; j < config.ensemble_size; ++j)
        member_national[j] =
            national_from_log_state(fc.members.col(j), totals, config.transform_shift);

      ForecastRecord rec;
      rec.target = grid.labels[t + h];
      rec.horizon = h;
      rec.point = national_from_log_state(fc.point, totals, config.transform_shift);
      rec.truth = grid.national[t + h];
      rec.lower = quantile(member_national, 0.025);
      rec.upper = quantile(member_national, 0.975);
      rec.prob_within_half = ensemble_prob_within_half(member_national, rec.truth);
      out.forecasts.push_back(rec);
    }
  }

  // Metrics over in-season target weeks within the configured season range.
  const auto season_range = std::make_optional(config.seasons);
  const std::vector<ForecastRecord> kept = season_filter(out.forecasts, season_range);
  for (int h = 1; h <= config.max_horizon; ++h) {
    std::vector<double> probs;
    double sq = 0.0;
    int count = 0;
    for (const ForecastRecord& r : kept) {
      if (r.horizon != h) continue;
      probs.push_back(r.prob_within_half);
      sq += (r.point - r.truth) * (r.point - r.truth);
      ++count;
    }
    if (count == 0) continue;
    out.log_score_by_horizon[h] = log_score(probs);
    out.mse_by_horizon[h] = sq / count;
  }

  if (config.run_baseline) {
    // Same-week kernel density over previous seasons, refreshed per target
    // year; evaluated at exactly the weeks the filter forecasts.
    std::vector<HistoricalBaseline::WeekValue> history;
    for (int t = 0; t < T; ++t)
      history.push_back({grid.labels[t].year, grid.labels[t].week, grid.national[t]});

    std::set<WeekLabel> targets;
    for (const ForecastRecord& r : out.forecasts) targets.insert(r.target);

    std::map<int, HistoricalBaseline> per_year;
    for (const WeekLabel& w : targets) {
      auto it = per_year.find(w.year);
      if (it == per_year.end())
        it = per_year
                 .emplace(w.year, HistoricalBaseline::build(history, w.year,
                                                            config.pandemic_year))
                 .first;
      if (!it->second.has_week(w.week)) {
        out.warnings.push_back("baseline: no historical samples for week " +
                               std::to_string(w.week) + ", target year " +
                               std::to_string(w.year) + " skipped");
        continue;
      }
      const KdePrediction pred = kde_predict(it->second, w.week);
      const int t = static_cast<int>(
          std::find(grid.labels.begin(), grid.labels.end(), w) - grid.labels.begin());
      ForecastRecord rec;
      rec.target = w;
      rec.horizon = 0;
      rec.point = pred.point;
      rec.truth = grid.national[t];
      rec.lower = pred.density.quantile(0.025);
      rec.upper = pred.density.quantile(0.975);
      rec.prob_within_half = density_prob_within_half(pred.density, rec.truth);
      out.baseline_forecasts.push_back(rec);
    }

    const std::vector<ForecastRecord> bkept =
        season_filter(out.baseline_forecasts, season_range);
    if (!bkept.empty()) {
      std::vector<double> probs;
      double sq = 0.0;
      for (const ForecastRecord& r : bkept) {
        probs.push_back(r.prob_within_half);
        sq += (r.point - r.truth) * (r.point - r.truth);
      }
      out.baseline_log_score = log_score(probs);
      out.baseline_mse = sq / static_cast<double>(bkept.size());
    }
  }
  return out;
}

std::vector<RankSweepEntry> run_rank_sweep(const std::vector<IliWeekRecord>& records,
                                           const IliExperimentConfig& base,
                                           int rank_lo, int rank_hi) {
  if (rank_lo < 1 || rank_hi < rank_lo)
    throw std::invalid_argument("run_rank_sweep: bad rank range");
  std::vector<RankSweepEntry> out;
  for (int r = rank_lo; r <= rank_hi; ++r) {
    IliExperimentConfig cfg = base;
    cfg.rank = r;
    cfg.run_baseline = false;
    const IliExperimentResult res = run_ili_experiment(records, cfg);
    RankSweepEntry e;
    e.rank = r;
    double ls = 0.0, mse = 0.0;
    int count = 0;
    for (const auto& [h, v] : res.log_score_by_horizon) {
      ls += v;
      mse += res.mse_by_horizon.at(h);
      ++count;
    }
    if (count > 0) {
      e.log_score = ls / count;
      e.mse = mse / count;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace dmdenkf
