#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "dmdenkf/types.hpp"

namespace dmdenkf {

enum class Method {
  WindowedTdmd,
  OnlineDmd,
  StreamingTdmd,
  DmdEnkf,
  HankelDmdEnkf,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);
// Comma-separated names; the empty string selects all five methods.
std::vector<Method> parse_method_list(const std::string& csv);
std::vector<Method> all_methods();

// Run `body(run)` for run = 0..runs-1 over `workers` threads.  Bodies must
// write to disjoint, preallocated slots; the result is then independent of
// the thread schedule and per-run seeds keep every study deterministic.
template <typename F>
void parallel_runs(int runs, int workers, F&& body) {
  if (workers <= 1) {
    for (int run = 0; run < runs; ++run) body(run);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int run = next.fetch_add(1); run < runs; run = next.fetch_add(1))
        body(run);
    });
  for (std::thread& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Rotating-system eigenvalue tracking: every method sees the same noisy
// series per run and reports a modulus estimate (and an argument estimate
// when it detects a conjugate pair) after each post-initialization snapshot.
// ---------------------------------------------------------------------------

struct EigStudyConfig {
  double sigma = 0.5;
  int runs = 1000;
  std::uint64_t seed = 0;
  std::vector<Method> methods;  // empty = all five
  int steps = 500;
  int spin_up = 100;    // snapshots consumed before estimates are scored
  int window = 10;      // windowed TDMD
  double rho = 0.9;     // online DMD forgetting factor
  int hankel_delay = 50;
  int ensemble_size = 50;
  int workers = 1;
};

struct MethodEigResult {
  Method method = Method::DmdEnkf;
  std::vector<double> run_mean_modulus_error;  // one entry per run
  std::vector<double> argument_errors;  // pooled signed errors, wrapped;
                                        // pair-detected estimates only
  int spin_up_pair_failures = 0;  // filter variants: runs whose spin-up
                                  // spectrum had no conjugate pair
  int fallback_records = 0;       // estimates scored via the dominant-modulus
                                  // fallback

  double mean_modulus_error() const;
};

struct EigStudyResult {
  EigStudyConfig config;
  std::vector<MethodEigResult> methods;
};

EigStudyResult run_eig_study(const EigStudyConfig& config);

// Spin-up-only pair-detection failure count over `runs` independent noisy
// rotation series (delay = 1 for the plain filter, > 1 for the Hankel
// variant).  Cheap enough for thousand-run rates.
int spin_up_pair_failures(double sigma, int runs, int delay, int spin_up,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Filter-quality comparison: the ensemble filter at several ensemble sizes
// against a bootstrap particle filter on the same spin-up model, scored by
// pooled squared eigenvalue-argument errors.  Runs whose spin-up failed to
// detect a conjugate pair are skipped (neither filter can repair a real
// spectrum); the particle filter score is reported over the same runs.
// ---------------------------------------------------------------------------

struct EnkfVsPfConfig {
  double sigma = 0.5;
  int runs = 150;
  std::vector<int> ensemble_sizes = {5, 10, 20, 40, 50};
  int particles = 10000;
  std::uint64_t seed = 0;
  int steps = 500;
  int spin_up = 100;
  int workers = 1;
};

struct EnkfVsPfResult {
  EnkfVsPfConfig config;
  int pair_success_runs = 0;
  int pair_failure_runs = 0;
  int pf_divergences = 0;                 // runs lost to filter divergence
  std::map<int, double> enkf_mse;         // ensemble size -> pooled MSE
  double pf_mse = 0.0;
};

EnkfVsPfResult run_enkf_vs_pf(const EnkfVsPfConfig& config);

// ---------------------------------------------------------------------------
// Growth-decay forecasting: 50-step-ahead forecasts issued after every
// snapshot once models are initialized, scored by the per-run mean relative
// error; run-level failures flagged by the interquartile outlier rule.
// ---------------------------------------------------------------------------

struct PandemicStudyConfig {
  double sigma = 0.05;
  int runs = 1000;
  std::uint64_t seed = 0;
  std::vector<Method> methods;  // empty = all five
  int steps = 1000;
  int spin_up = 100;
  int horizon = 50;
  int window = 10;
  double rho = 0.9;
  int hankel_delay = 50;
  int ensemble_size = 50;
  int workers = 1;
};

struct MethodPandemicResult {
  Method method = Method::DmdEnkf;
  std::vector<double> run_mean_rel_error;  // one entry per run
  int clamped_forecasts = 0;  // non-finite forecasts scored at the ceiling

  double median_error() const;
  double mean_error() const;
  double failure_rate() const;  // interquartile outlier fraction
};

struct PandemicStudyResult {
  PandemicStudyConfig config;
  std::vector<MethodPandemicResult> methods;
};

PandemicStudyResult run_pandemic_study(const PandemicStudyConfig& config);

}  // namespace dmdenkf
