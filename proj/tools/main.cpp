// Experiment runner: synthetic eigenvalue-tracking and forecasting studies,
// the filter-vs-particle-filter comparison, and the weekly ILI forecasting
// pipeline.  Every command is deterministic under a fixed seed and writes
// plot-ready CSV/JSON artifacts carrying a config echo.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmdenkf/csvio.hpp"
#include "dmdenkf/evaluation.hpp"
#include "dmdenkf/experiments.hpp"
#include "dmdenkf/ili.hpp"
#include "dmdenkf/types.hpp"

namespace {

using nlohmann::json;
using namespace dmdenkf;

std::string fd(double v) { return format_double(v); }

// Flags override config-file values override defaults.  A JSON config key is
// the long option name without dashes, hyphens replaced by underscores.
class Overlay {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    try {
      in >> j_;
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("config file '" + path + "': " +
                                  std::string(e.what()));
    }
    if (!j_.is_object())
      throw std::invalid_argument("config file '" + path + "' is not a JSON object");
  }

  template <typename T>
  void apply(const CLI::App* sub, const std::string& flag, T& var) const {
    if (sub->count("--" + flag) > 0) return;
    std::string key = flag;
    for (char& c : key)
      if (c == '-') c = '_';
    if (!j_.contains(key)) return;
    try {
      var = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }

 private:
  json j_ = json::object();
};

std::string resolve_output_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    const char* env = std::getenv("DMDENKF_OUTPUT_DIR");
    dir = (env && *env) ? env : ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string method_list_string(const std::vector<Method>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i > 0) out += ',';
    out += method_name(methods[i]);
  }
  return out;
}

// Accept short aliases alongside the canonical names.
std::vector<Method> parse_methods_flag(const std::string& csv) {
  if (csv.empty()) return all_methods();
  std::string expanded;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token == "hankel") token = "hankel_dmdenkf";
    if (token == "windowed") token = "windowed_tdmd";
    if (token == "online") token = "online_dmd";
    if (token == "streaming") token = "streaming_tdmd";
    if (!expanded.empty()) expanded += ',';
    expanded += token;
  }
  return parse_method_list(expanded);
}

// ---------------------------------------------------------------------------

struct CommonArgs {
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string config_path;
  int workers = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--seed", args.seed, "Base RNG seed");
  sub->add_option("--output-dir,-o", args.output_dir,
                  "Output directory (default: $DMDENKF_OUTPUT_DIR or .)");
  sub->add_option("--config", args.config_path, "JSON config file");
  sub->add_option("--workers", args.workers, "Worker threads for run fan-out");
}

void overlay_common(const Overlay& cfg, const CLI::App* sub, CommonArgs& args) {
  cfg.apply(sub, "seed", args.seed);
  cfg.apply(sub, "output-dir", args.output_dir);
  cfg.apply(sub, "workers", args.workers);
}

// ------------------------------- synth-eig --------------------------------

int cmd_synth_eig(const CLI::App* sub, CommonArgs& common, double sigma, int runs,
                  std::string methods_csv, int steps, int spin_up, int window,
                  double rho, int hankel_delay, int ensemble_size) {
  EigStudyConfig cfg;
  cfg.sigma = sigma;
  cfg.runs = runs;
  cfg.seed = common.seed;
  cfg.methods = parse_methods_flag(methods_csv);
  cfg.steps = steps;
  cfg.spin_up = spin_up;
  cfg.window = window;
  cfg.rho = rho;
  cfg.hankel_delay = hankel_delay;
  cfg.ensemble_size = ensemble_size;
  cfg.workers = common.workers;

  const json echo = {{"command", "synth-eig"},
                     {"sigma", cfg.sigma},
                     {"runs", cfg.runs},
                     {"seed", cfg.seed},
                     {"methods", method_list_string(cfg.methods)},
                     {"steps", cfg.steps},
                     {"spin_up", cfg.spin_up},
                     {"window", cfg.window},
                     {"rho", cfg.rho},
                     {"hankel_delay", cfg.hankel_delay},
                     {"ensemble_size", cfg.ensemble_size}};

  const EigStudyResult result = run_eig_study(cfg);
  const std::string dir = resolve_output_dir(common.output_dir);

  CsvFile table(join_path(dir, "eig_modulus_table.csv"), echo,
                {"method", "sigma", "mean_modulus_error", "n_runs", "seed"});
  for (const MethodEigResult& mr : result.methods)
    table.row({method_name(mr.method), fd(cfg.sigma), fd(mr.mean_modulus_error()),
               std::to_string(cfg.runs), std::to_string(cfg.seed)});
  table.close();

  CsvFile runs_csv(join_path(dir, "eig_run_errors.csv"), echo,
                   {"method", "run", "mean_modulus_error"});
  for (const MethodEigResult& mr : result.methods)
    for (std::size_t r = 0; r < mr.run_mean_modulus_error.size(); ++r)
      runs_csv.row({method_name(mr.method), std::to_string(r),
                    fd(mr.run_mean_modulus_error[r])});
  runs_csv.close();

  // Signed argument errors, binned over (-pi, pi] for distribution plots.
  const int bins = 128;
  const double lo = -M_PI, hi = M_PI;
  CsvFile hist(join_path(dir, "eig_argument_hist.csv"), echo,
               {"method", "bin_lo", "bin_hi", "count"});
  for (const MethodEigResult& mr : result.methods) {
    std::vector<long long> counts(bins, 0);
    for (double e : mr.argument_errors) {
      int b = static_cast<int>((e - lo) / (hi - lo) * bins);
      b = std::min(std::max(b, 0), bins - 1);
      ++counts[b];
    }
    for (int b = 0; b < bins; ++b)
      hist.row({method_name(mr.method), fd(lo + (hi - lo) * b / bins),
                fd(lo + (hi - lo) * (b + 1) / bins), std::to_string(counts[b])});
  }
  hist.close();

  CsvFile metrics(join_path(dir, "eig_metrics.csv"), echo,
                  {"method", "sigma", "metric", "value", "n_runs", "seed_base"});
  for (const MethodEigResult& mr : result.methods) {
    const auto put = [&](const std::string& name, double value) {
      metrics.row({method_name(mr.method), fd(cfg.sigma), name, fd(value),
                   std::to_string(cfg.runs), std::to_string(cfg.seed)});
    };
    put("mean_modulus_error", mr.mean_modulus_error());
    put("spin_up_pair_failures", mr.spin_up_pair_failures);
    put("fallback_records", mr.fallback_records);
    put("argument_error_count", static_cast<double>(mr.argument_errors.size()));
  }
  metrics.close();
  return 0;
}

// ------------------------------ enkf-vs-pf --------------------------------

int cmd_enkf_vs_pf(const CLI::App* sub, CommonArgs& common, double sigma, int runs,
                   std::string sizes_csv, int particles, int steps, int spin_up) {
  EnkfVsPfConfig cfg;
  cfg.sigma = sigma;
  cfg.runs = runs;
  cfg.seed = common.seed;
  cfg.particles = particles;
  cfg.steps = steps;
  cfg.spin_up = spin_up;
  cfg.workers = common.workers;
  if (!sizes_csv.empty()) {
    cfg.ensemble_sizes.clear();
    std::stringstream ss(sizes_csv);
    std::string token;
    while (std::getline(ss, token, ','))
      cfg.ensemble_sizes.push_back(std::stoi(token));
  }

  json sizes = json::array();
  for (int n : cfg.ensemble_sizes) sizes.push_back(n);
  const json echo = {{"command", "enkf-vs-pf"}, {"sigma", cfg.sigma},
                     {"runs", cfg.runs},        {"seed", cfg.seed},
                     {"sizes", sizes},          {"particles", cfg.particles},
                     {"steps", cfg.steps},      {"spin_up", cfg.spin_up}};

  const EnkfVsPfResult result = run_enkf_vs_pf(cfg);
  const std::string dir = resolve_output_dir(common.output_dir);

  CsvFile table(join_path(dir, "mse_vs_n.csv"), echo,
                {"method", "ensemble_size", "argument_mse", "n_runs", "seed"});
  for (const auto& [n, mse] : result.enkf_mse)
    table.row({"dmdenkf", std::to_string(n), fd(mse),
               std::to_string(result.pair_success_runs), std::to_string(cfg.seed)});
  table.row({"particle_filter", std::to_string(cfg.particles), fd(result.pf_mse),
             std::to_string(result.pair_success_runs), std::to_string(cfg.seed)});
  table.close();

  json payload;
  payload["pair_success_runs"] = result.pair_success_runs;
  payload["pair_failure_runs"] = result.pair_failure_runs;
  payload["pf_divergences"] = result.pf_divergences;
  json mse = json::object();
  for (const auto& [n, v] : result.enkf_mse) mse[std::to_string(n)] = v;
  payload["enkf_argument_mse"] = mse;
  payload["pf_argument_mse"] = result.pf_mse;
  if (!result.enkf_mse.empty() && result.pf_mse > 0.0)
    payload["mse_ratio_largest_n"] =
        result.enkf_mse.rbegin()->second / result.pf_mse;
  write_json_file(join_path(dir, "enkf_vs_pf.json"), echo, payload);
  return 0;
}

// ----------------------------- synth-pandemic -----------------------------

int cmd_synth_pandemic(const CLI::App* sub, CommonArgs& common, double sigma,
                       int runs, std::string methods_csv, int steps, int spin_up,
                       int horizon, int window, double rho, int hankel_delay,
                       int ensemble_size) {
  PandemicStudyConfig cfg;
  cfg.sigma = sigma;
  cfg.runs = runs;
  cfg.seed = common.seed;
  cfg.methods = parse_methods_flag(methods_csv);
  cfg.steps = steps;
  cfg.spin_up = spin_up;
  cfg.horizon = horizon;
  cfg.window = window;
  cfg.rho = rho;
  cfg.hankel_delay = hankel_delay;
  cfg.ensemble_size = ensemble_size;
  cfg.workers = common.workers;

  const json echo = {{"command", "synth-pandemic"},
                     {"sigma", cfg.sigma},
                     {"runs", cfg.runs},
                     {"seed", cfg.seed},
                     {"methods", method_list_string(cfg.methods)},
                     {"steps", cfg.steps},
                     {"spin_up", cfg.spin_up},
                     {"horizon", cfg.horizon},
                     {"window", cfg.window},
                     {"rho", cfg.rho},
                     {"hankel_delay", cfg.hankel_delay},
                     {"ensemble_size", cfg.ensemble_size}};

  const PandemicStudyResult result = run_pandemic_study(cfg);
  const std::string dir = resolve_output_dir(common.output_dir);

  CsvFile runs_csv(join_path(dir, "pandemic_run_errors.csv"), echo,
                   {"method", "sigma", "run", "mean_rel_error"});
  for (const MethodPandemicResult& mr : result.methods)
    for (std::size_t r = 0; r < mr.run_mean_rel_error.size(); ++r)
      runs_csv.row({method_name(mr.method), fd(cfg.sigma), std::to_string(r),
                    fd(mr.run_mean_rel_error[r])});
  runs_csv.close();

  CsvFile summary(join_path(dir, "pandemic_summary.csv"), echo,
                  {"method", "sigma", "metric", "value", "n_runs", "seed_base"});
  for (const MethodPandemicResult& mr : result.methods) {
    const auto put = [&](const std::string& name, double value) {
      summary.row({method_name(mr.method), fd(cfg.sigma), name, fd(value),
                   std::to_string(cfg.runs), std::to_string(cfg.seed)});
    };
    put("median_error", mr.median_error());
    put("mean_error", mr.mean_error());
    put("failure_rate", mr.failure_rate());
    put("clamped_forecasts", mr.clamped_forecasts);
  }
  summary.close();
  return 0;
}

// ---------------------------------- ili -----------------------------------

std::pair<int, int> parse_range(const std::string& text, const char* what) {
  const auto pos = text.find("..");
  if (pos == std::string::npos)
    throw std::invalid_argument(std::string(what) + ": expected LO..HI, got '" +
                                text + "'");
  try {
    return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 2))};
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": malformed range '" + text +
                                "'");
  }
}

int cmd_ili(const CLI::App* sub, CommonArgs& common, std::string data_path,
            bool use_fixture, int fixture_first, int fixture_last,
            double fixture_noise, int delay, int rank, int max_horizon,
            int split_year, int split_week, int ensemble_size, double alpha1,
            double alpha2, double meas_var, int season_first, int season_last,
            bool no_baseline, std::string rank_sweep) {
  if (data_path.empty() && !use_fixture)
    throw std::invalid_argument("ili: pass --data FILE or --fixture");
  if (!data_path.empty() && use_fixture)
    throw std::invalid_argument("ili: --data and --fixture are mutually exclusive");

  std::vector<IliWeekRecord> records;
  std::vector<std::string> load_warnings;
  if (use_fixture) {
    IliFixtureSpec fspec;
    fspec.first_year = fixture_first;
    fspec.last_year = fixture_last;
    fspec.noise = fixture_noise;
    fspec.seed = common.seed;
    records = make_ili_fixture(fspec);
  } else {
    IliLoadResult loaded = load_ili_csv(data_path);
    records = std::move(loaded.records);
    load_warnings = std::move(loaded.warnings);
  }

  IliExperimentConfig cfg;
  cfg.delay = delay;
  cfg.rank = rank;
  cfg.max_horizon = max_horizon;
  cfg.split = {split_year, split_week};
  cfg.ensemble_size = ensemble_size;
  cfg.alpha1 = alpha1;
  cfg.alpha2 = alpha2;
  cfg.meas_var = meas_var;
  cfg.seed = common.seed;
  cfg.seasons = {season_first, season_last};
  cfg.run_baseline = !no_baseline;

  json echo = {{"command", "ili"},
               {"source", use_fixture ? "fixture" : "data"},
               {"delay", cfg.delay},
               {"rank", cfg.rank},
               {"max_horizon", cfg.max_horizon},
               {"split_year", cfg.split.year},
               {"split_week", cfg.split.week},
               {"ensemble_size", cfg.ensemble_size},
               {"alpha1", cfg.alpha1},
               {"alpha2", cfg.alpha2},
               {"meas_var", cfg.meas_var},
               {"seed", cfg.seed},
               {"season_first", cfg.seasons.first},
               {"season_last", cfg.seasons.second},
               {"baseline", cfg.run_baseline}};
  if (use_fixture) {
    echo["fixture_first_year"] = fixture_first;
    echo["fixture_last_year"] = fixture_last;
    echo["fixture_noise"] = fixture_noise;
  }

  const IliExperimentResult result = run_ili_experiment(records, cfg);
  const std::string dir = resolve_output_dir(common.output_dir);

  const std::vector<std::string> fc_header = {
      "target_year", "target_week", "horizon", "point",
      "truth",       "lower",       "upper",   "prob_within_half"};
  const auto fc_row = [&](const ForecastRecord& r) {
    return std::vector<std::string>{
        std::to_string(r.target.year), std::to_string(r.target.week),
        std::to_string(r.horizon),     fd(r.point),
        fd(r.truth),                   fd(r.lower),
        fd(r.upper),                   fd(r.prob_within_half)};
  };

  CsvFile fc(join_path(dir, "ili_forecasts.csv"), echo, fc_header);
  for (const ForecastRecord& r : result.forecasts) fc.row(fc_row(r));
  fc.close();

  if (cfg.run_baseline) {
    CsvFile base(join_path(dir, "ili_baseline.csv"), echo, fc_header);
    for (const ForecastRecord& r : result.baseline_forecasts) base.row(fc_row(r));
    base.close();
  }

  json payload;
  json ls = json::object(), ms = json::object();
  for (const auto& [h, v] : result.log_score_by_horizon) ls[std::to_string(h)] = v;
  for (const auto& [h, v] : result.mse_by_horizon) ms[std::to_string(h)] = v;
  payload["log_score_by_horizon"] = ls;
  payload["mse_by_horizon"] = ms;
  if (cfg.run_baseline) {
    payload["baseline_log_score"] = result.baseline_log_score;
    payload["baseline_mse"] = result.baseline_mse;
  }
  payload["spin_up_weeks"] = result.spin_up_weeks;
  payload["filter_weeks"] = result.filter_weeks;
  json warn = json::array();
  for (const std::string& w : load_warnings) warn.push_back(w);
  for (const std::string& w : result.warnings) warn.push_back(w);
  payload["warnings"] = warn;
  write_json_file(join_path(dir, "ili_metrics.json"), echo, payload);

  if (!rank_sweep.empty()) {
    const auto [lo, hi] = parse_range(rank_sweep, "--rank-sweep");
    const std::vector<RankSweepEntry> sweep = run_rank_sweep(records, cfg, lo, hi);
    CsvFile sw(join_path(dir, "ili_rank_sweep.csv"), echo,
               {"rank", "log_score", "mse"});
    for (const RankSweepEntry& e : sweep)
      sw.row({std::to_string(e.rank), fd(e.log_score), fd(e.mse)});
    sw.close();
  }
  return 0;
}

// ------------------------------ make-ili-fixture ---------------------------

int cmd_make_fixture(CommonArgs& common, const std::string& out_path,
                     int first_year, int last_year, double noise) {
  IliFixtureSpec spec;
  spec.first_year = first_year;
  spec.last_year = last_year;
  spec.noise = noise;
  spec.seed = common.seed;
  write_ili_csv(make_ili_fixture(spec), out_path);
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"DMD-based tracking and forecasting experiment runner"};
  app.require_subcommand(1);

  // synth-eig
  CommonArgs eig_common;
  double eig_sigma = 0.5;
  int eig_runs = 1000;
  std::string eig_methods;
  int eig_steps = 500, eig_spin = 100, eig_window = 10, eig_hankel = 50,
      eig_ens = 50;
  double eig_rho = 0.9;
  CLI::App* eig = app.add_subcommand(
      "synth-eig", "Eigenvalue tracking study on the drifting rotation system");
  add_common(eig, eig_common);
  eig->add_option("--sigma", eig_sigma, "Measurement noise level");
  eig->add_option("--runs", eig_runs, "Monte Carlo runs");
  eig->add_option("--methods", eig_methods,
                  "Comma-separated method list (default: all five)");
  eig->add_option("--steps", eig_steps, "Series length");
  eig->add_option("--spin-up", eig_spin, "Snapshots consumed before scoring");
  eig->add_option("--window", eig_window, "Windowed TDMD window");
  eig->add_option("--rho", eig_rho, "Online DMD forgetting factor");
  eig->add_option("--hankel-delay", eig_hankel, "Hankel filter delay dimension");
  eig->add_option("--ensemble-size", eig_ens, "Filter ensemble size");

  // enkf-vs-pf
  CommonArgs pf_common;
  double pf_sigma = 0.5;
  int pf_runs = 150, pf_particles = 10000, pf_steps = 500, pf_spin = 100;
  std::string pf_sizes;
  CLI::App* pf = app.add_subcommand(
      "enkf-vs-pf", "Ensemble filter vs particle filter argument-error MSE");
  add_common(pf, pf_common);
  pf->add_option("--sigma", pf_sigma, "Measurement noise level");
  pf->add_option("--runs", pf_runs, "Monte Carlo runs");
  pf->add_option("--sizes", pf_sizes, "Ensemble size sweep, e.g. 5,10,20,40,50");
  pf->add_option("--particles", pf_particles, "Particle filter size");
  pf->add_option("--steps", pf_steps, "Series length");
  pf->add_option("--spin-up", pf_spin, "Spin-up length");

  // synth-pandemic
  CommonArgs pan_common;
  double pan_sigma = 0.05;
  int pan_runs = 1000;
  std::string pan_methods;
  int pan_steps = 1000, pan_spin = 100, pan_horizon = 50, pan_window = 10,
      pan_hankel = 50, pan_ens = 50;
  double pan_rho = 0.9;
  CLI::App* pan = app.add_subcommand(
      "synth-pandemic", "50-step-ahead forecasting study on the growth-decay system");
  add_common(pan, pan_common);
  pan->add_option("--sigma", pan_sigma, "Measurement noise level");
  pan->add_option("--runs", pan_runs, "Monte Carlo runs");
  pan->add_option("--methods", pan_methods,
                  "Comma-separated method list (default: all five)");
  pan->add_option("--steps", pan_steps, "Series length");
  pan->add_option("--spin-up", pan_spin, "Model initialization length");
  pan->add_option("--horizon", pan_horizon, "Forecast horizon in steps");
  pan->add_option("--window", pan_window, "Windowed TDMD window");
  pan->add_option("--rho", pan_rho, "Online DMD forgetting factor");
  pan->add_option("--hankel-delay", pan_hankel, "Hankel filter delay dimension");
  pan->add_option("--ensemble-size", pan_ens, "Filter ensemble size");

  // ili
  CommonArgs ili_common;
  std::string ili_data, ili_rank_sweep;
  bool ili_fixture = false, ili_no_baseline = false;
  int ili_fix_first = 2003, ili_fix_last = 2018;
  double ili_fix_noise = 0.05;
  int ili_delay = 1, ili_rank = 8, ili_horizon = 4;
  int ili_split_year = 2012, ili_split_week = 52;
  int ili_ens = 50, ili_season_first = 2012, ili_season_last = 2017;
  double ili_alpha1 = -1.0, ili_alpha2 = -1.0, ili_meas_var = -1.0;
  CLI::App* ili = app.add_subcommand(
      "ili", "Weekly influenza-like-illness forecasting pipeline");
  add_common(ili, ili_common);
  ili->add_option("--data", ili_data, "Stratified weekly CSV input");
  ili->add_flag("--fixture", ili_fixture, "Run on the synthetic fixture");
  ili->add_option("--fixture-first-year", ili_fix_first, "Fixture start year");
  ili->add_option("--fixture-last-year", ili_fix_last, "Fixture end year");
  ili->add_option("--fixture-noise", ili_fix_noise, "Fixture log-domain noise");
  ili->add_option("--delay", ili_delay, "Delay embedding dimension (1 or 100)");
  ili->add_option("--rank", ili_rank, "Truncation rank");
  ili->add_option("--max-horizon", ili_horizon, "Largest forecast horizon (weeks)");
  ili->add_option("--split-year", ili_split_year, "Last spin-up ISO year");
  ili->add_option("--split-week", ili_split_week, "Last spin-up ISO week");
  ili->add_option("--ensemble-size", ili_ens, "Filter ensemble size");
  ili->add_option("--alpha1", ili_alpha1, "State process noise (negative = auto)");
  ili->add_option("--alpha2", ili_alpha2, "Mode process noise (negative = auto)");
  ili->add_option("--meas-var", ili_meas_var,
                  "Measurement noise variance (negative = auto)");
  ili->add_option("--season-first", ili_season_first, "First scored season");
  ili->add_option("--season-last", ili_season_last, "Last scored season");
  ili->add_flag("--no-baseline", ili_no_baseline, "Skip the historical baseline");
  ili->add_option("--rank-sweep", ili_rank_sweep,
                  "Rank range LO..HI for the truncation sweep");

  // make-ili-fixture
  CommonArgs fix_common;
  std::string fix_out;
  int fix_first = 2003, fix_last = 2018;
  double fix_noise = 0.05;
  CLI::App* fix = app.add_subcommand("make-ili-fixture",
                                     "Write the synthetic weekly fixture CSV");
  add_common(fix, fix_common);
  fix->add_option("--out", fix_out, "Output CSV path")->required();
  fix->add_option("--first-year", fix_first, "First ISO year");
  fix->add_option("--last-year", fix_last, "Last ISO year");
  fix->add_option("--noise", fix_noise, "Log-domain noise level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (eig->parsed()) {
    Overlay cfg;
    cfg.load(eig_common.config_path);
    overlay_common(cfg, eig, eig_common);
    cfg.apply(eig, "sigma", eig_sigma);
    cfg.apply(eig, "runs", eig_runs);
    cfg.apply(eig, "methods", eig_methods);
    cfg.apply(eig, "steps", eig_steps);
    cfg.apply(eig, "spin-up", eig_spin);
    cfg.apply(eig, "window", eig_window);
    cfg.apply(eig, "rho", eig_rho);
    cfg.apply(eig, "hankel-delay", eig_hankel);
    cfg.apply(eig, "ensemble-size", eig_ens);
    return cmd_synth_eig(eig, eig_common, eig_sigma, eig_runs, eig_methods,
                         eig_steps, eig_spin, eig_window, eig_rho, eig_hankel,
                         eig_ens);
  }
  if (pf->parsed()) {
    Overlay cfg;
    cfg.load(pf_common.config_path);
    overlay_common(cfg, pf, pf_common);
    cfg.apply(pf, "sigma", pf_sigma);
    cfg.apply(pf, "runs", pf_runs);
    cfg.apply(pf, "sizes", pf_sizes);
    cfg.apply(pf, "particles", pf_particles);
    cfg.apply(pf, "steps", pf_steps);
    cfg.apply(pf, "spin-up", pf_spin);
    return cmd_enkf_vs_pf(pf, pf_common, pf_sigma, pf_runs, pf_sizes,
                          pf_particles, pf_steps, pf_spin);
  }
  if (pan->parsed()) {
    Overlay cfg;
    cfg.load(pan_common.config_path);
    overlay_common(cfg, pan, pan_common);
    cfg.apply(pan, "sigma", pan_sigma);
    cfg.apply(pan, "runs", pan_runs);
    cfg.apply(pan, "methods", pan_methods);
    cfg.apply(pan, "steps", pan_steps);
    cfg.apply(pan, "spin-up", pan_spin);
    cfg.apply(pan, "horizon", pan_horizon);
    cfg.apply(pan, "window", pan_window);
    cfg.apply(pan, "rho", pan_rho);
    cfg.apply(pan, "hankel-delay", pan_hankel);
    cfg.apply(pan, "ensemble-size", pan_ens);
    return cmd_synth_pandemic(pan, pan_common, pan_sigma, pan_runs, pan_methods,
                              pan_steps, pan_spin, pan_horizon, pan_window,
                              pan_rho, pan_hankel, pan_ens);
  }
  if (ili->parsed()) {
    Overlay cfg;
    cfg.load(ili_common.config_path);
    overlay_common(cfg, ili, ili_common);
    cfg.apply(ili, "data", ili_data);
    cfg.apply(ili, "fixture", ili_fixture);
    cfg.apply(ili, "fixture-first-year", ili_fix_first);
    cfg.apply(ili, "fixture-last-year", ili_fix_last);
    cfg.apply(ili, "fixture-noise", ili_fix_noise);
    cfg.apply(ili, "delay", ili_delay);
    cfg.apply(ili, "rank", ili_rank);
    cfg.apply(ili, "max-horizon", ili_horizon);
    cfg.apply(ili, "split-year", ili_split_year);
    cfg.apply(ili, "split-week", ili_split_week);
    cfg.apply(ili, "ensemble-size", ili_ens);
    cfg.apply(ili, "alpha1", ili_alpha1);
    cfg.apply(ili, "alpha2", ili_alpha2);
    cfg.apply(ili, "meas-var", ili_meas_var);
    cfg.apply(ili, "season-first", ili_season_first);
    cfg.apply(ili, "season-last", ili_season_last);
    cfg.apply(ili, "no-baseline", ili_no_baseline);
    cfg.apply(ili, "rank-sweep", ili_rank_sweep);
    return cmd_ili(ili, ili_common, ili_data, ili_fixture, ili_fix_first,
                   ili_fix_last, ili_fix_noise, ili_delay, ili_rank, ili_horizon,
                   ili_split_year, ili_split_week, ili_ens, ili_alpha1,
                   ili_alpha2, ili_meas_var, ili_season_first, ili_season_last,
                   ili_no_baseline, ili_rank_sweep);
  }
  // make-ili-fixture
  {
    Overlay cfg;
    cfg.load(fix_common.config_path);
    overlay_common(cfg, fix, fix_common);
    cfg.apply(fix, "out", fix_out);
    cfg.apply(fix, "first-year", fix_first);
    cfg.apply(fix, "last-year", fix_last);
    cfg.apply(fix, "noise", fix_noise);
    return cmd_make_fixture(fix_common, fix_out, fix_first, fix_last, fix_noise);
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const dmdenkf::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dmdenkf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
