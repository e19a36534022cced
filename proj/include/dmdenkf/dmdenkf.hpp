#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dmdenkf/dmd.hpp"
#include "dmdenkf/filters.hpp"
#include "dmdenkf/mu.hpp"
#include "dmdenkf/snapshots.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Configuration of the augmented filter.  alpha1 scales the process noise on
// the state block, alpha2 the noise on the eigenvalue parameters (alpha2 <<
// alpha1: eigenvalues drift slowly), meas_var the diagonal of R.  Negative
// values request data-driven defaults, resolved during spin_up:
//   alpha1   = 1e-2 * pooled variance of the spin-up data
//   alpha2   = 1e-3 * alpha1
//   meas_var = mean diagonal of the spin-up residual covariance C
struct DmdEnkfConfig {
  enum class Fitter { Exact, Tls };

  int spin_up_length = 100;
  int delay = 1;
  SvdTruncation truncation = SvdTruncation::fixed_rank(2);
  Fitter fitter = Fitter::Tls;
  int ensemble_size = 50;
  double alpha1 = -1.0;
  double alpha2 = -1.0;
  double meas_var = -1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DmdEnkfStep {
  Vec state_estimate;     // raw-state part of the analysis mean
  CVec eig_estimate;      // spectrum decoded from the mean mu block
  double innovation_norm; // |y - H zbar_forecast|
  Vec forecast_mean;      // deterministic one-step forecast mean (raw state)
};

// Filter state.  The augmented state is z = [x_embedded; mu] with dimension
// n*d + rank.  Propagation applies each member's own decoded spectrum to its
// state block through the spin-up modes and leaves mu untouched up to noise:
//   z_{k+1} = [Phi diag(lambda(mu_k))^1 pinv(Phi) x_k; mu_k] + w_k
// Observation picks out the newest raw-state block: H = [I_n 0 ... 0].
struct DmdEnkf {
  DmdEnkfConfig config;  // with resolved noise parameters
  DmdModel dmd;
  TemporalModeEncoding spin_up_encoding;
  Ensemble ensemble;  // (n*d + rank) x N
  std::vector<DmdEnkfStep> history;
  std::shared_ptr<const ModalPropagator> propagator;

  int n() const { return dmd.n; }
  int n_eff() const { return dmd.n_eff(); }
  int rank() const { return dmd.rank; }
  int aug_dim() const { return n_eff() + rank(); }

  // True when the spin-up spectrum contains at least one conjugate pair;
  // tracking studies on oscillatory systems treat its absence as a spin-up
  // pair-detection failure.
  bool pair_detected() const { return dmd.pairing.has_pair(); }
};

// Fit the spin-up surrogate on the first config.spin_up_length snapshots,
// encode its spectrum, and draw the initial ensemble from N(z0, P0) with
// z0 = [last embedded snapshot; mu] and P0 = blockdiag(C, alpha2 I_r), where
// C is the spin-up residual covariance (1/m)(X' - Phi L pinv(Phi) X)(...)^T.
DmdEnkf spin_up(const std::vector<Vec>& series, const DmdEnkfConfig& config);

// One assimilation step against measurement y (raw state dimension).  Pure:
// returns the updated filter.  The per-step RNG stream is derived from
// config.seed and the history length, so a restored checkpoint continues
// identically.
DmdEnkf assimilate(const DmdEnkf& model, const Vec& y);

struct DmdEnkfForecast {
  Vec point;    // ensemble mean, raw state dimension
  Vec lower;    // 2.5th percentile per dimension
  Vec upper;    // 97.5th percentile per dimension
  Mat members;  // n x N member forecasts
};

// p-step-ahead forecast: every member is propagated deterministically under
// its own decoded spectrum and restricted to the raw state block.
DmdEnkfForecast forecast(const DmdEnkf& model, int p);

// Refit on all data seen so far when the rolling mean of the recent
// innovation magnitudes has exceeded threshold for `window` consecutive
// steps.  Returns the model unchanged when the trigger condition fails.
DmdEnkf detect_and_respin(const DmdEnkf& model,
                          const std::vector<double>& recent_errors,
                          double threshold, int window,
                          const std::vector<Vec>& full_series);

// Checkpoint schema "dmdenkf-checkpoint-v1"; see README for the field list.
std::string to_checkpoint_json(const DmdEnkf& model);
DmdEnkf from_checkpoint_json(const std::string& text);

}  // namespace dmdenkf
