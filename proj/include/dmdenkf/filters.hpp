#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "dmdenkf/rng.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Sampler for N(0, C) given C in one of three forms: a dense covariance
// (factored once through a symmetric eigendecomposition), a diagonal of
// variances, or an explicit factor F with C = F F^T.  The factor form makes
// low-rank covariances cheap to draw from without ever materializing C.
class GaussianSampler {
 public:
  static GaussianSampler from_cov(const Mat& cov, double psd_tol = 1e-10);
  static GaussianSampler from_diag(const Vec& variances);
  static GaussianSampler from_factor(Mat factor);

  Vec draw(Rng& rng) const;
  void add_to(Mat& columns, Rng& rng) const;  // adds one draw per column

  Eigen::Index dim() const { return diag_mode_ ? stddev_.size() : factor_.rows(); }

 private:
  GaussianSampler() = default;
  bool diag_mode_ = false;
  Vec stddev_;  // diagonal mode
  Mat factor_;  // dense/factor mode, dim x k
};

// Discrete-time state-space model
//   x_{k+1} = F(x_k) + w_k,   w_k ~ N(0, Q)
//   y_k     = H x_k + v_k,    v_k ~ N(0, R)
// propagate may be nonlinear; the observation map is linear.
struct StateSpaceSpec {
  std::function<Vec(const Vec&)> propagate;
  Mat obs_matrix;   // H, l x dim
  Mat process_cov;  // Q, dim x dim
  Mat meas_cov;     // R, l x l

  // Checks symmetry (1e-12 relative) and positive semidefiniteness
  // (eigenvalues above -1e-10 times the scale) of Q and R.
  void validate() const;
};

struct Ensemble {
  Mat members;  // dim x N, one member per column
  std::uint64_t rng_seed = 0;

  Eigen::Index dim() const { return members.rows(); }
  Eigen::Index size() const { return members.cols(); }
};

// N independent draws from N(mean, cov).  Errors if cov is not symmetric
// PSD, naming the offending eigenvalue.
Ensemble enkf_init(const Vec& mean, const Mat& cov, int ensemble_size,
                   std::uint64_t seed);

// One perturbed-observation ensemble Kalman step: propagate every member
// with independent process noise, form the sample covariance (divisor N-1),
// apply the gain K = P H^T (H P H^T + R)^{-1} through a symmetric solve, and
// update each member against its own simulated measurement y + v_i.
Ensemble enkf_step(const Ensemble& ens, const StateSpaceSpec& model, const Vec& y,
                   std::uint64_t seed);

// Mean and unbiased sample covariance of the ensemble.
std::pair<Vec, Mat> ensemble_stats(const Ensemble& ens);

namespace detail {

// Shared EnKF kernel.  Q and R samplers are passed in factored form so the
// augmented filter can use diagonal process noise without a dense Q.  The
// deterministic forecast mean (before process noise) is reported for
// internal-consistency checks against point forecasts.
struct EnkfStepResult {
  Mat analysis;               // updated members
  Vec deterministic_mean;     // mean of F(x_i), before process noise
  Vec forecast_mean;          // mean after process noise
  Vec innovation;             // y - H * forecast_mean
};

EnkfStepResult enkf_step_kernel(const Mat& members,
                                const std::function<Vec(const Vec&)>& propagate,
                                const Mat& H, const GaussianSampler& q_sampler,
                                const GaussianSampler& r_sampler, const Mat& R,
                                const Vec& y, std::uint64_t seed);

}  // namespace detail

// Weighted particle set for the sequential importance resampling filter.
struct ParticleSet {
  Mat particles;  // dim x N
  Vec weights;    // sums to 1

  Eigen::Index dim() const { return particles.rows(); }
  Eigen::Index size() const { return particles.cols(); }
};

ParticleSet pf_init(const Vec& mean, const Mat& cov, int particle_count,
                    std::uint64_t seed);

double effective_sample_size(const Vec& weights);

// One bootstrap particle filter step: propagate with process noise, reweight
// by the Gaussian likelihood of y (log-weights with max shift), and resample
// multinomially when the effective sample size drops below N/2.
ParticleSet pf_step(const ParticleSet& ps, const StateSpaceSpec& model, const Vec& y,
                    std::uint64_t seed);

// Weighted mean of the particle set.
Vec particle_mean(const ParticleSet& ps);

}  // namespace dmdenkf
