#include "dmdenkf/dmdenkf.hpp"

#include <algorithm>
#include <cmath>

#include "dmdenkf/linalg.hpp"

namespace dmdenkf {

void DmdEnkfConfig::validate() const {
  if (spin_up_length < 2)
    throw std::invalid_argument("dmdenkf config: spin_up_length must be >= 2");
  if (delay < 1) throw std::invalid_argument("dmdenkf config: delay must be >= 1");
  if (spin_up_length < delay + 1)
    throw std::invalid_argument("dmdenkf config: spin_up_length must exceed delay");
  if (ensemble_size < 2)
    throw std::invalid_argument("dmdenkf config: ensemble_size must be >= 2");
  // Negative values mean "resolve from data".  Explicit values must give a
  // positive state noise and a strictly smaller (possibly zero) parameter
  // noise; alpha2 == 0 freezes the spectrum.
  if (alpha1 >= 0.0 && alpha1 <= 0.0)
    throw std::invalid_argument("dmdenkf config: alpha1 must be positive");
  if (alpha2 >= 0.0 && alpha1 > 0.0 && alpha2 >= alpha1)
    throw std::invalid_argument("dmdenkf config: alpha2 must be smaller than alpha1");
  if (meas_var >= 0.0 && meas_var <= 0.0)
    throw std::invalid_argument("dmdenkf config: meas_var must be positive");
}

namespace {

Mat obs_matrix_for(const DmdEnkf& model) {
  Mat H = Mat::Zero(model.n(), model.aug_dim());
  H.topLeftCorner(model.n(), model.n()) = Mat::Identity(model.n(), model.n());
  return H;
}

Vec q_diagonal(const DmdEnkf& model) {
  Vec q(model.aug_dim());
  q.head(model.n_eff()).setConstant(model.config.alpha1);
  q.tail(model.rank()).setConstant(model.config.alpha2);
  return q;
}

// Per-member propagation: decode the member's mu block and advance its state
// block p steps through the spin-up modes.
struct MemberPropagator {
  const DmdEnkf& model;
  int p;

  Vec operator()(const Vec& z) const {
    const int ne = model.n_eff();
    const int r = model.rank();
    CVec lambda;
    try {
      decode_lambda_into(z.tail(r), model.dmd.pairing, lambda);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("dmdenkf propagation: ") + e.what());
    }
    Vec out(z.size());
    out.head(ne) = model.propagator->apply(z.head(ne), lambda, p);
    out.tail(r) = z.tail(r);
    return out;
  }
};

}  // namespace

DmdEnkf spin_up(const std::vector<Vec>& series, const DmdEnkfConfig& config) {
  config.validate();
  const int m = config.spin_up_length;
  if (static_cast<int>(series.size()) < m)
    throw std::invalid_argument("spin_up: series shorter than spin_up_length");

  const std::vector<Vec> window(series.begin(), series.begin() + m);
  const SnapshotPair pair = build_snapshots(window, config.delay);
  DmdModel fit = (config.fitter == DmdEnkfConfig::Fitter::Tls)
                     ? fit_tdmd(pair, config.truncation)
                     : fit_exact_dmd(pair, config.truncation);

  DmdEnkf model;
  model.config = config;
  model.dmd = std::move(fit);
  model.propagator = std::make_shared<ModalPropagator>(model.dmd);
  model.spin_up_encoding = encode_mu(model.dmd);

  // Residuals of the spin-up fit drive both the initial state uncertainty
  // and the default measurement noise.
  const CMat lam_phi_pinv =
      model.dmd.eigs.asDiagonal() * model.propagator->phi_pinv();
  const Mat recon = (model.dmd.modes * (lam_phi_pinv * pair.X.cast<Complex>())).real();
  const Mat resid = pair.Xprime - recon;
  const double inv_m = 1.0 / static_cast<double>(m);

  if (model.config.alpha1 < 0.0) {
    // Pooled per-dimension variance of the raw spin-up window.
    double acc = 0.0;
    Mat raw(window.front().size(), m);
    for (int j = 0; j < m; ++j) raw.col(j) = window[j];
    const Vec rmean = raw.rowwise().mean();
    for (int i = 0; i < raw.rows(); ++i)
      acc += (raw.row(i).array() - rmean[i]).square().sum() / (m - 1);
    model.config.alpha1 = 1e-2 * acc / static_cast<double>(raw.rows());
    if (model.config.alpha1 <= 0.0) model.config.alpha1 = 1e-12;
  }
  if (model.config.alpha2 < 0.0) model.config.alpha2 = 1e-3 * model.config.alpha1;
  if (model.config.meas_var < 0.0) {
    model.config.meas_var =
        inv_m * resid.array().square().sum() / static_cast<double>(resid.rows());
    if (model.config.meas_var <= 0.0) model.config.meas_var = 1e-12;
  }

  // z0 = [h(x_m); mu], P0 = blockdiag(C, alpha2 I_r) with C = (1/m) E E^T.
  // Draws use the factor form [E / sqrt(m); sqrt(alpha2) I] directly, which
  // is exact and avoids factorizing C.
  const int ne = model.n_eff();
  const int r = model.rank();
  Vec z0(ne + r);
  z0.head(ne) = pair.Xprime.col(pair.cols() - 1);
  z0.tail(r) = model.spin_up_encoding.mu;

  Mat factor = Mat::Zero(ne + r, resid.cols() + r);
  factor.topLeftCorner(ne, resid.cols()) = resid * std::sqrt(inv_m);
  factor.bottomRightCorner(r, r) =
      std::sqrt(model.config.alpha2) * Mat::Identity(r, r);
  const GaussianSampler init_sampler = GaussianSampler::from_factor(std::move(factor));

  Rng rng(derive_seed(config.seed, "spin_up", 0));
  model.ensemble.rng_seed = config.seed;
  model.ensemble.members.resize(ne + r, config.ensemble_size);
  for (int j = 0; j < config.ensemble_size; ++j)
    model.ensemble.members.col(j) = z0 + init_sampler.draw(rng);
  return model;
}

DmdEnkf assimilate(const DmdEnkf& model, const Vec& y) {
  if (y.size() != model.n())
    throw std::invalid_argument("assimilate: measurement dimension mismatch");
  if (!y.allFinite()) throw DataError("assimilate: non-finite measurement");

  const std::uint64_t step_seed =
      derive_seed(model.config.seed, "assimilate", model.history.size());
  const Mat H = obs_matrix_for(model);
  const Mat R = model.config.meas_var * Mat::Identity(model.n(), model.n());
  const GaussianSampler q = GaussianSampler::from_diag(q_diagonal(model));
  const GaussianSampler rs =
      GaussianSampler::from_diag(Vec::Constant(model.n(), model.config.meas_var));

  MemberPropagator prop{model, 1};
  auto result = detail::enkf_step_kernel(model.ensemble.members, prop, H, q, rs, R,
                                         y, step_seed);

  DmdEnkf out = model;
  out.ensemble.members = std::move(result.analysis);
  out.ensemble.rng_seed = step_seed;

  const Vec mean = out.ensemble.members.rowwise().mean();
  DmdEnkfStep rec;
  rec.state_estimate = mean.head(model.n());
  try {
    rec.eig_estimate = decode_lambda(mean.tail(model.rank()), model.dmd.pairing);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("assimilate: mean spectrum undecodable: ") +
                         e.what());
  }
  rec.innovation_norm = result.innovation.norm();
  rec.forecast_mean = result.deterministic_mean.head(model.n());
  out.history.push_back(std::move(rec));
  return out;
}

DmdEnkfForecast forecast(const DmdEnkf& model, int p) {
  if (p < 0) throw std::invalid_argument("forecast: horizon must be >= 0");
  const auto N = model.ensemble.size();
  const int n = model.n();
  MemberPropagator prop{model, p};

  DmdEnkfForecast fc;
  fc.members.resize(n, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    try {
      fc.members.col(j) = prop(model.ensemble.members.col(j)).head(n);
    } catch (const NumericalError& e) {
      throw NumericalError("forecast: member " + std::to_string(j) + ": " + e.what());
    }
  }
  fc.point = fc.members.rowwise().mean();
  fc.lower.resize(n);
  fc.upper.resize(n);
  std::vector<double> row(N);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) row[j] = fc.members(i, j);
    fc.lower[i] = quantile(row, 0.025);
    fc.upper[i] = quantile(row, 0.975);
  }
  return fc;
}

DmdEnkf detect_and_respin(const DmdEnkf& model,
                          const std::vector<double>& recent_errors,
                          double threshold, int window,
                          const std::vector<Vec>& full_series) {
  if (window < 1) throw std::invalid_argument("detect_and_respin: window must be >= 1");
  if (!(threshold > 0.0))
    throw std::invalid_argument("detect_and_respin: threshold must be positive");
  const auto k = static_cast<int>(recent_errors.size());
  if (k < window) return model;

  // Trigger only when the rolling mean has stayed above threshold for the
  // last `window` positions (partial windows use the available prefix).
  for (int t = k - window; t < k; ++t) {
    const int lo = std::max(0, t - window + 1);
    double s = 0.0;
    for (int i = lo; i <= t; ++i) s += recent_errors[i];
    if (!(s / static_cast<double>(t - lo + 1) > threshold)) return model;
  }

  DmdEnkfConfig cfg = model.config;
  cfg.spin_up_length = static_cast<int>(full_series.size());
  cfg.seed = derive_seed(model.config.seed, "respin", model.history.size());
  DmdEnkf refit = spin_up(full_series, cfg);
  // The refit keeps the caller's configuration identity but carries the new
  // surrogate; history continues so downstream step seeds never repeat.
  refit.config.spin_up_length = model.config.spin_up_length;
  refit.history = model.history;
  return refit;
}

}  // namespace dmdenkf
