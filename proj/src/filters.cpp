#include "dmdenkf/filters.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace dmdenkf {

namespace {

void check_symmetric(const Mat& m, const char* name) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(name) + " must be square");
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NumericalError(std::string(name) + " is not symmetric");
}

}  // namespace

GaussianSampler GaussianSampler::from_cov(const Mat& cov, double psd_tol) {
  check_symmetric(cov, "covariance");
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.info() != Eigen::Success)
    throw NumericalError("covariance eigendecomposition failed");
  const Vec& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  Vec sqrt_ev(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -psd_tol * scale)
      throw NumericalError("covariance is not positive semidefinite: eigenvalue " +
                           std::to_string(i) + " = " + std::to_string(ev[i]));
    sqrt_ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  GaussianSampler s;
  s.diag_mode_ = false;
  s.factor_ = eig.eigenvectors() * sqrt_ev.asDiagonal();
  return s;
}

GaussianSampler GaussianSampler::from_diag(const Vec& variances) {
  for (Eigen::Index i = 0; i < variances.size(); ++i)
    if (variances[i] < 0.0)
      throw NumericalError("diagonal covariance has negative variance at index " +
                           std::to_string(i));
  GaussianSampler s;
  s.diag_mode_ = true;
  s.stddev_ = variances.cwiseSqrt();
  return s;
}

GaussianSampler GaussianSampler::from_factor(Mat factor) {
  GaussianSampler s;
  s.diag_mode_ = false;
  s.factor_ = std::move(factor);
  return s;
}

Vec GaussianSampler::draw(Rng& rng) const {
  if (diag_mode_) return stddev_.cwiseProduct(rng.normal_vec(stddev_.size()));
  return factor_ * rng.normal_vec(factor_.cols());
}

void GaussianSampler::add_to(Mat& columns, Rng& rng) const {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) columns.col(j) += draw(rng);
}

void StateSpaceSpec::validate() const {
  if (!propagate) throw std::invalid_argument("state space: missing propagation map");
  check_symmetric(process_cov, "process covariance");
  check_symmetric(meas_cov, "measurement covariance");
  if (obs_matrix.cols() != process_cov.rows())
    throw std::invalid_argument("state space: H and Q dimensions disagree");
  if (obs_matrix.rows() != meas_cov.rows())
    throw std::invalid_argument("state space: H and R dimensions disagree");
  for (const Mat* m : {&process_cov, &meas_cov}) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(*m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
      throw NumericalError("state space: covariance has negative eigenvalue " +
                           std::to_string(eig.eigenvalues().minCoeff()));
  }
}

Ensemble enkf_init(const Vec& mean, const Mat& cov, int ensemble_size,
                   std::uint64_t seed) {
  if (ensemble_size < 2)
    throw std::invalid_argument("enkf_init: ensemble size must be >= 2");
  if (cov.rows() != mean.size())
    throw std::invalid_argument("enkf_init: mean and covariance dimensions disagree");
  const GaussianSampler sampler = GaussianSampler::from_cov(cov);
  Rng rng(seed);
  Ensemble ens;
  ens.rng_seed = seed;
  ens.members.resize(mean.size(), ensemble_size);
  for (int j = 0; j < ensemble_size; ++j) ens.members.col(j) = mean + sampler.draw(rng);
  return ens;
}

namespace detail {

EnkfStepResult enkf_step_kernel(const Mat& members,
                                const std::function<Vec(const Vec&)>& propagate,
                                const Mat& H, const GaussianSampler& q_sampler,
                                const GaussianSampler& r_sampler, const Mat& R,
                                const Vec& y, std::uint64_t seed) {
  const auto N = members.cols();
  if (N < 2) throw std::invalid_argument("enkf_step: ensemble size must be >= 2");
  if (H.cols() != members.rows())
    throw std::invalid_argument("enkf_step: H does not match state dimension");
  if (y.size() != H.rows())
    throw std::invalid_argument("enkf_step: measurement does not match H");

  Rng rng(seed);
  EnkfStepResult out;

  Mat fc(members.rows(), N);
  for (Eigen::Index j = 0; j < N; ++j) {
    fc.col(j) = propagate(members.col(j));
    if (!fc.col(j).allFinite())
      throw NumericalError("enkf_step: propagation produced non-finite state in member " +
                           std::to_string(j));
  }
  out.deterministic_mean = fc.rowwise().mean();
  q_sampler.add_to(fc, rng);
  out.forecast_mean = fc.rowwise().mean();

  // Gain through anomaly products; the full state covariance is never formed.
  Mat anomalies = fc.colwise() - out.forecast_mean;
  Mat obs_anomalies = H * anomalies;  // l x N
  const double inv_nm1 = 1.0 / static_cast<double>(N - 1);
  Mat S = obs_anomalies * obs_anomalies.transpose() * inv_nm1 + R;
  Eigen::LDLT<Mat> ldlt(S);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14 ||
      !ldlt.isPositive())
    throw NumericalError("enkf_step: singular innovation covariance");
  Mat cross = anomalies * obs_anomalies.transpose() * inv_nm1;  // dim x l
  Mat gain = ldlt.solve(cross.transpose()).transpose();         // dim x l

  Mat predicted = H * fc;  // l x N
  out.analysis.resize(members.rows(), N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec simulated = y + r_sampler.draw(rng);
    out.analysis.col(j) = fc.col(j) + gain * (simulated - predicted.col(j));
  }
  out.innovation = y - H * out.forecast_mean;
  return out;
}

}  // namespace detail

Ensemble enkf_step(const Ensemble& ens, const StateSpaceSpec& model, const Vec& y,
                   std::uint64_t seed) {
  const GaussianSampler q = GaussianSampler::from_cov(model.process_cov);
  const GaussianSampler r = GaussianSampler::from_cov(model.meas_cov);
  auto result = detail::enkf_step_kernel(ens.members, model.propagate,
                                         model.obs_matrix, q, r, model.meas_cov, y,
                                         seed);
  return Ensemble{std::move(result.analysis), seed};
}

std::pair<Vec, Mat> ensemble_stats(const Ensemble& ens) {
  if (ens.size() < 2)
    throw std::invalid_argument("ensemble_stats: need at least 2 members");
  const Vec mean = ens.members.rowwise().mean();
  const Mat anomalies = ens.members.colwise() - mean;
  const Mat cov =
      anomalies * anomalies.transpose() / static_cast<double>(ens.size() - 1);
  return {mean, cov};
}

ParticleSet pf_init(const Vec& mean, const Mat& cov, int particle_count,
                    std::uint64_t seed) {
  if (particle_count < 2)
    throw std::invalid_argument("pf_init: particle count must be >= 2");
  const GaussianSampler sampler = GaussianSampler::from_cov(cov);
  Rng rng(seed);
  ParticleSet ps;
  ps.particles.resize(mean.size(), particle_count);
  for (int j = 0; j < particle_count; ++j) ps.particles.col(j) = mean + sampler.draw(rng);
  ps.weights = Vec::Constant(particle_count, 1.0 / particle_count);
  return ps;
}

double effective_sample_size(const Vec& weights) {
  const double s2 = weights.squaredNorm();
  if (s2 <= 0.0) throw std::invalid_argument("effective_sample_size: zero weights");
  return 1.0 / s2;
}

ParticleSet pf_step(const ParticleSet& ps, const StateSpaceSpec& model, const Vec& y,
                    std::uint64_t seed) {
  const auto N = ps.size();
  if (N < 2) throw std::invalid_argument("pf_step: particle count must be >= 2");
  Rng rng(seed);

  const GaussianSampler q = GaussianSampler::from_cov(model.process_cov);
  Mat prop(ps.dim(), N);
  for (Eigen::Index j = 0; j < N; ++j) prop.col(j) = model.propagate(ps.particles.col(j));
  q.add_to(prop, rng);

  Eigen::LDLT<Mat> rldlt(model.meas_cov);
  if (rldlt.info() != Eigen::Success || rldlt.rcond() < 1e-14)
    throw NumericalError("pf_step: singular measurement covariance");

  // Log-weights with a max shift; raw likelihoods may underflow long before
  // the filter is actually lost.
  Vec log_w(N);
  double min_maha = std::numeric_limits<double>::infinity();
  const Mat innovations = (-(model.obs_matrix * prop)).colwise() + y;  // l x N
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec e = innovations.col(j);
    const double maha = e.dot(rldlt.solve(e));
    min_maha = std::min(min_maha, maha);
    log_w[j] = (ps.weights[j] > 0.0 ? std::log(ps.weights[j]) : -std::numeric_limits<double>::infinity()) -
               0.5 * maha;
  }
  if (!std::isfinite(min_maha) || 0.5 * min_maha > 708.0)
    throw NumericalError(
        "pf_step: filter divergence, all likelihoods underflow to zero; "
        "min Mahalanobis distance = " +
        std::to_string(std::sqrt(std::max(min_maha, 0.0))));

  const double shift = log_w.maxCoeff();
  Vec w = (log_w.array() - shift).exp();
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericalError("pf_step: all-zero likelihoods");
  w /= total;

  ParticleSet out;
  if (effective_sample_size(w) < static_cast<double>(N) / 2.0) {
    // Multinomial resampling: N independent categorical draws.
    Vec cdf(N);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      acc += w[j];
      cdf[j] = acc;
    }
    cdf[N - 1] = 1.0;
    out.particles.resize(ps.dim(), N);
    for (Eigen::Index j = 0; j < N; ++j) {
      const double u = rng.uniform();
      const double* it = std::lower_bound(cdf.data(), cdf.data() + N, u);
      const auto pick = static_cast<Eigen::Index>(it - cdf.data());
      out.particles.col(j) = prop.col(std::min(pick, N - 1));
    }
    out.weights = Vec::Constant(N, 1.0 / static_cast<double>(N));
  } else {
    out.particles = std::move(prop);
    out.weights = std::move(w);
  }
  return out;
}

Vec particle_mean(const ParticleSet& ps) { return ps.particles * ps.weights; }

}  // namespace dmdenkf
