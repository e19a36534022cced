#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "dmdenkf/dmd.hpp"
#include "dmdenkf/rng.hpp"
#include "dmdenkf/snapshots.hpp"

using namespace dmdenkf;

namespace {

Mat rot2(double theta) {
  Mat a(2, 2);
  a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return a;
}

std::vector<Vec> iterate(const Mat& a, const Vec& x1, int steps) {
  std::vector<Vec> series = {x1};
  for (int k = 1; k < steps; ++k) series.push_back(a * series.back());
  return series;
}

// The library's spectrum ordering: descending modulus, then ascending
// argument lifted to [0, 2pi).
void spectral_sort(std::vector<Complex>& v) {
  std::sort(v.begin(), v.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12) return ma > mb;
    double aa = std::arg(a), ab = std::arg(b);
    if (aa < 0) aa += 2 * M_PI;
    if (ab < 0) ab += 2 * M_PI;
    return aa < ab;
  });
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("dmd") {

TEST_CASE("recovers a diagonal operator and reconstructs the series") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 0.9;
  a(1, 1) = 0.5;
  const auto series = iterate(a, v2(1, 1), 20);
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));

  REQUIRE(model.rank == 2);
  CHECK(model.eigs[0].real() == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(model.eigs[0].imag() == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(model.eigs[1].real() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(!model.pairing.has_pair());

  for (int k = 0; k < 20; ++k)
    CHECK((predict(model, k) - series[k]).norm() <= 1e-9 * series[k].norm());
}

TEST_CASE("rotation data yields a conjugate pair with positive leader argument") {
  const double theta = 0.3;
  const auto series = iterate(rot2(theta), v2(1, 0), 30);
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));

  REQUIRE(model.rank == 2);
  REQUIRE(model.pairing.has_pair());
  const auto pairs = model.pairing.pairs();
  REQUIRE(pairs.size() == 1);
  const Complex leader = model.eigs[pairs[0].first];
  CHECK(leader.imag() > 0.0);
  CHECK(std::abs(leader) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::arg(leader) == doctest::Approx(theta).epsilon(1e-10));
  CHECK(model.eigs[pairs[0].second] == std::conj(leader));

  // Modes are eigenvectors of the underlying operator.
  const Mat a = rot2(theta);
  for (int i = 0; i < model.rank; ++i) {
    const CVec av = a.cast<Complex>() * model.modes.col(i);
    CHECK((av - model.eigs[i] * model.modes.col(i)).norm() <=
          1e-9 * model.modes.col(i).norm());
  }

  // Amplitudes solve the first-snapshot projection.
  CHECK((model.modes * model.amplitudes - series[0].cast<Complex>()).norm() <= 1e-9);
}

TEST_CASE("matches a dense eigendecomposition on a full-rank system") {
  // Dense 3x3 operator with known spectrum {0.95 e^{+-0.4i}, 0.6}: a rotation
  // block and a real mode, conjugated by a fixed invertible map.
  Mat b = Mat::Zero(3, 3);
  b.topLeftCorner(2, 2) = 0.95 * rot2(0.4);
  b(2, 2) = 0.6;
  Mat t(3, 3);
  t << 1, 2, 0, 0, 1, 1, 1, 0, 3;
  const Mat a = t * b * t.inverse();

  Vec x1(3);
  x1 << 1, -1, 2;
  const auto series = iterate(a, x1, 25);
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(3));

  REQUIRE(model.rank == 3);
  std::vector<Complex> expected = {0.95 * std::polar(1.0, 0.4),
                                   0.95 * std::polar(1.0, -0.4), Complex(0.6, 0)};
  spectral_sort(expected);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(model.eigs[i] - expected[i]) <= 1e-9);

  for (int k = 0; k < 25; ++k)
    CHECK((predict(model, k) - series[k]).norm() <= 1e-8 * series[k].norm());
}

TEST_CASE("zero eigenvalue falls back to the projected mode") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 0.8;
  const auto series = iterate(a, v2(1, 1), 4);
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));

  REQUIRE(model.rank == 2);
  CHECK(model.zero_eigs.size() == 1);
  CHECK(std::abs(model.eigs[0] - Complex(0.8, 0)) <= 1e-10);
  CHECK(std::abs(model.eigs[1]) <= 1e-10);
  CHECK((predict(model, 0) - series[0]).norm() <= 1e-8);
  CHECK((predict(model, 1) - series[1]).norm() <= 1e-8);
  CHECK((predict(model, 2) - series[2]).norm() <= 1e-8);
}

TEST_CASE("rank shrinks on a deficient spectrum, with a warning") {
  const std::vector<Vec> series = {v2(1, 1), v2(1, 1), v2(1, 1)};
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));
  CHECK(model.rank == 1);
  CHECK(!model.warnings.empty());
  CHECK(std::abs(model.eigs[0] - Complex(1, 0)) <= 1e-10);
}

TEST_CASE("all-zero data is rejected") {
  const std::vector<Vec> series = {v2(0, 0), v2(0, 0), v2(0, 0)};
  CHECK_THROWS_AS(
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(1)),
      NumericalError);
}

TEST_CASE("pairing detection") {
  CVec lam(3);
  lam << Complex(0.9, 0), Complex(0.5, 0.5), Complex(0.5, -0.5);
  const Pairing p = Pairing::detect(lam);
  CHECK(p.partner == std::vector<int>{0, 2, 1});
  CHECK(p.is_real(0));
  CHECK(p.is_leader(1));
  CHECK(!p.is_leader(2));
  CHECK(p.has_pair());
  CHECK(p.singletons() == std::vector<int>{0});
  const auto pairs = p.pairs();
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<int, int>(1, 2));
  p.validate(lam);

  CVec real_only(2);
  real_only << Complex(1, 0), Complex(-0.5, 0);
  CHECK(!Pairing::detect(real_only).has_pair());

  CVec unmatched(2);
  unmatched << Complex(0.5, 0.5), Complex(0.9, 0);
  CHECK_THROWS_AS(Pairing::detect(unmatched), NumericalError);
}

TEST_CASE("modal propagator agrees with direct propagation") {
  const auto series = iterate(rot2(0.25), v2(1, 0), 30);
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));
  const ModalPropagator prop(model);

  Rng rng(7);
  const Vec x = rng.normal_vec(2);
  for (int p = 0; p <= 3; ++p) {
    const Vec via_class = prop.apply(x, model.eigs, p);
    const Vec via_free = propagate_state(model, x, model.eigs, p);
    CHECK((via_class - via_free).norm() <= 1e-12);
    // Full-rank model: modal propagation equals applying the operator p times.
    Vec ref = x;
    for (int i = 0; i < p; ++i) ref = (rot2(0.25) * ref).eval();
    CHECK((via_class - ref).norm() <= 1e-9);
  }
}

TEST_CASE("delay embedding exposes a hidden oscillation in scalar data") {
  const double omega = 0.7;
  std::vector<Vec> series;
  for (int k = 1; k <= 40; ++k) {
    Vec v(1);
    v << std::cos(omega * (k - 1));
    series.push_back(v);
  }
  const DmdModel model =
      fit_exact_dmd(build_snapshots(series, 2), SvdTruncation::fixed_rank(2));

  REQUIRE(model.rank == 2);
  REQUIRE(model.d == 2);
  REQUIRE(model.n == 1);
  REQUIRE(model.pairing.has_pair());
  const auto pr = model.pairing.pairs().front();
  CHECK(std::abs(model.eigs[pr.first]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::arg(model.eigs[pr.first]) == doctest::Approx(omega).epsilon(1e-8));

  // predict(k) tracks the newest block: the first embedded snapshot is
  // h(x_2), so predict(k) reproduces x_{2+k}.
  for (int k = 0; k < 30; ++k)
    CHECK(predict(model, k)[0] ==
          doctest::Approx(std::cos(omega * (k + 1))).epsilon(1e-6));
}

TEST_CASE("energy threshold finds the true rank of noiseless rotation data") {
  const auto series = iterate(rot2(0.3), v2(1, 0), 40);
  const DmdModel model = fit_exact_dmd(build_snapshots(series, 1),
                                       SvdTruncation::energy_threshold(0.99));
  CHECK(model.rank == 2);
}

}  // TEST_SUITE
