#pragma once

#include <cstdint>
#include <vector>

#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Planar rotation with a linearly drifting angle:
//   x_{k+1} = R(theta_k) x_k,  theta_k = theta_start + (k-1) * dtheta,
// k = 1..steps-1, with dtheta spreading the drift evenly over the series.
// Truth eigenvalues at step k are exp(+-i theta_k).  The observed series
// adds iid N(0, sigma^2 I_2) noise to every snapshot.
struct RotationSeriesSpec {
  int steps = 500;
  double theta_start = M_PI / 64.0;
  double theta_end = M_PI / 64.0 + 7.0 * M_PI / 64.0;
  double sigma = 0.05;
  std::uint64_t seed = 0;
};

struct RotationSeries {
  std::vector<Vec> truth;
  std::vector<Vec> noisy;
  std::vector<double> theta;  // theta_k for k = 1..steps-1
};

RotationSeries gen_rotation(const RotationSeriesSpec& spec);

// Growth-decay surrogate: a random nonnegative matrix normalized to unit
// spectral radius, scaled by a factor gamma_k that drifts linearly from
// gamma_start (growth) through 1 to gamma_end (decay):
//   x_{k+1} = gamma_k Ahat x_k,  x_1 = ones.
// The dominant eigenvalue at step k is exactly gamma_k.
struct PandemicSeriesSpec {
  int steps = 1000;
  int dim = 3;
  double gamma_start = 1.01;
  double gamma_end = 0.99;
  double sigma = 0.05;
  std::uint64_t seed_system = 0;  // draws the random matrix
  std::uint64_t seed_noise = 0;   // draws the measurement noise
};

struct PandemicSeries {
  std::vector<Vec> truth;
  std::vector<Vec> noisy;
  std::vector<double> gamma;  // gamma_k for k = 1..steps-1
  Mat A_hat;                  // normalized system matrix
};

PandemicSeries gen_pandemic(const PandemicSeriesSpec& spec);

}  // namespace dmdenkf
