#include "dmdenkf/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dmdenkf/rng.hpp"

namespace dmdenkf {

RotationSeries gen_rotation(const RotationSeriesSpec& spec) {
  if (spec.steps < 2) throw std::invalid_argument("gen_rotation: need at least 2 steps");
  if (spec.sigma < 0.0) throw std::invalid_argument("gen_rotation: sigma must be >= 0");

  RotationSeries out;
  out.truth.reserve(spec.steps);
  out.noisy.reserve(spec.steps);
  out.theta.reserve(spec.steps - 1);

  Vec x(2);
  x << 1.0, 0.0;
  out.truth.push_back(x);

  // theta_k = theta_start + (k-1)(theta_end-theta_start)/(steps-1): the end
  // value indexes the final snapshot, so the last applied angle stops one
  // increment short of it.
  const double dtheta = (spec.theta_end - spec.theta_start) / (spec.steps - 1);
  for (int k = 1; k < spec.steps; ++k) {
    const double theta = spec.theta_start + (k - 1) * dtheta;
    out.theta.push_back(theta);
    const double c = std::cos(theta), s = std::sin(theta);
    Vec next(2);
    next << c * x[0] - s * x[1], s * x[0] + c * x[1];
    out.truth.push_back(next);
    x = next;
  }

  Rng rng(derive_seed(spec.seed, "rotation_noise", 0));
  for (const Vec& t : out.truth) {
    Vec y = t;
    y[0] += spec.sigma * rng.normal();
    y[1] += spec.sigma * rng.normal();
    out.noisy.push_back(y);
  }
  return out;
}

PandemicSeries gen_pandemic(const PandemicSeriesSpec& spec) {
  if (spec.steps < 2) throw std::invalid_argument("gen_pandemic: need at least 2 steps");
  if (spec.dim < 1) throw std::invalid_argument("gen_pandemic: dim must be >= 1");
  if (spec.sigma < 0.0) throw std::invalid_argument("gen_pandemic: sigma must be >= 0");

  Rng sys_rng(derive_seed(spec.seed_system, "pandemic_system", 0));
  Mat A = sys_rng.uniform_mat(spec.dim, spec.dim);

  // Normalize to unit spectral radius; the dominant eigenvalue of a positive
  // matrix is real and positive, so gamma_k is exactly the dominant
  // eigenvalue of gamma_k * A_hat.
  Eigen::EigenSolver<Mat> eig(A);
  if (eig.info() != Eigen::Success)
    throw NumericalError("gen_pandemic: eigendecomposition failed");
  const double radius = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius > 0.0)) throw NumericalError("gen_pandemic: zero spectral radius");

  PandemicSeries out;
  out.A_hat = A / radius;
  out.truth.reserve(spec.steps);
  out.noisy.reserve(spec.steps);
  out.gamma.reserve(spec.steps - 1);

  Vec x = Vec::Ones(spec.dim);
  out.truth.push_back(x);
  const double dgamma = (spec.gamma_end - spec.gamma_start) / (spec.steps - 1);
  for (int k = 1; k < spec.steps; ++k) {
    const double gamma = spec.gamma_start + (k - 1) * dgamma;
    out.gamma.push_back(gamma);
    x = (gamma * (out.A_hat * x)).eval();
    out.truth.push_back(x);
  }

  Rng noise_rng(derive_seed(spec.seed_noise, "pandemic_noise", 0));
  for (const Vec& t : out.truth) {
    Vec y = t;
    for (int i = 0; i < spec.dim; ++i) y[i] += spec.sigma * noise_rng.normal();
    out.noisy.push_back(y);
  }
  return out;
}

}  // namespace dmdenkf
