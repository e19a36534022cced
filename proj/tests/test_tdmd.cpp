#include <doctest.h>

#include <cmath>
#include <vector>

#include "dmdenkf/dmd.hpp"
#include "dmdenkf/rng.hpp"
#include "dmdenkf/snapshots.hpp"
#include "dmdenkf/synthetic.hpp"

using namespace dmdenkf;

namespace {

Mat rot2(double theta) {
  Mat a(2, 2);
  a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return a;
}

std::vector<Vec> rotation_series(double theta, int steps) {
  Vec x(2);
  x << 1, 0;
  std::vector<Vec> series = {x};
  for (int k = 1; k < steps; ++k) series.push_back(rot2(theta) * series.back());
  return series;
}

std::vector<Vec> add_noise(const std::vector<Vec>& series, double sigma,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out;
  out.reserve(series.size());
  for (const Vec& x : series) out.push_back(x + sigma * rng.normal_vec(x.size()));
  return out;
}

}  // namespace

TEST_SUITE("tdmd") {

TEST_CASE("equals the exact fit on noiseless data") {
  const auto series = rotation_series(0.3, 40);
  const SnapshotPair pair = build_snapshots(series, 1);
  const DmdModel exact = fit_exact_dmd(pair, SvdTruncation::fixed_rank(2));
  const DmdModel tls = fit_tdmd(pair, SvdTruncation::fixed_rank(2));

  REQUIRE(tls.rank == exact.rank);
  for (int i = 0; i < tls.rank; ++i)
    CHECK(std::abs(tls.eigs[i] - exact.eigs[i]) <= 1e-9);
  for (int k = 0; k < 40; ++k)
    CHECK((predict(tls, k) - predict(exact, k)).norm() <= 1e-8);
}

TEST_CASE("equals the exact fit on a noiseless three-dimensional system") {
  // Stationary system with a conjugate pair and a real mode of comparable
  // modulus, mixed through a non-orthogonal basis.
  Mat block = Mat::Zero(3, 3);
  block(0, 0) = 0.95 * std::cos(0.4);
  block(0, 1) = -0.95 * std::sin(0.4);
  block(1, 0) = 0.95 * std::sin(0.4);
  block(1, 1) = 0.95 * std::cos(0.4);
  block(2, 2) = 0.9;
  Mat t(3, 3);
  t << 1, 2, 0, 0, 1, 1, 1, 0, 3;
  const Mat a = t * block * t.inverse();

  std::vector<Vec> series;
  Vec x(3);
  x << 1.0, 0.5, -0.3;
  for (int k = 0; k < 30; ++k) {
    series.push_back(x);
    x = a * x;
  }
  const SnapshotPair pair = build_snapshots(series, 1);
  const DmdModel exact = fit_exact_dmd(pair, SvdTruncation::fixed_rank(3));
  const DmdModel tls = fit_tdmd(pair, SvdTruncation::fixed_rank(3));
  REQUIRE(tls.rank == exact.rank);
  for (int i = 0; i < tls.rank; ++i)
    CHECK(std::abs(tls.eigs[i] - exact.eigs[i]) <= 1e-8);
}

TEST_CASE("debiases the modulus under symmetric measurement noise") {
  // With iid noise on every snapshot the exact fit sees noisy inputs and
  // noisy outputs; its least-squares solution shrinks the spectrum toward the
  // origin, while the total-least-squares projection treats both sides
  // symmetrically.  Averaged over seeds the exact modulus must sit below one
  // and the symmetric fit must land closer to it.
  const double theta = 0.35, sigma = 0.1;
  const auto truth = rotation_series(theta, 300);

  double dmd_bias = 0.0, dmd_abs = 0.0, tls_abs = 0.0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    const auto noisy = add_noise(truth, sigma, derive_seed(900, t));
    const SnapshotPair pair = build_snapshots(noisy, 1);
    const DmdModel exact = fit_exact_dmd(pair, SvdTruncation::fixed_rank(2));
    const DmdModel tls = fit_tdmd(pair, SvdTruncation::fixed_rank(2));
    const double m_exact = std::abs(exact.eigs[0]);
    const double m_tls = std::abs(tls.eigs[0]);
    dmd_bias += m_exact - 1.0;
    dmd_abs += std::abs(m_exact - 1.0);
    tls_abs += std::abs(m_tls - 1.0);
  }
  dmd_bias /= trials;
  dmd_abs /= trials;
  tls_abs /= trials;

  CHECK(dmd_bias < 0.0);
  CHECK(tls_abs < dmd_abs);
}

TEST_CASE("noisy data still yields a valid conjugate-closed model") {
  const auto noisy = add_noise(rotation_series(0.2, 120), 0.05, 77);
  const DmdModel model = fit_tdmd(build_snapshots(noisy, 1),
                                  SvdTruncation::fixed_rank(2));
  REQUIRE(model.rank == 2);
  model.pairing.validate(model.eigs);
  CHECK(model.eigs.allFinite());
  CHECK(model.modes.allFinite());
}

TEST_CASE("energy truncation resolves rank from the input spectrum") {
  const auto series = rotation_series(0.3, 40);
  const DmdModel model = fit_tdmd(build_snapshots(series, 1),
                                  SvdTruncation::energy_threshold(0.99));
  CHECK(model.rank == 2);
}

}  // TEST_SUITE
