#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dmdenkf/synthetic.hpp"

using namespace dmdenkf;

TEST_SUITE("synthetic") {

TEST_CASE("rotation series follows its drifting angle schedule") {
  RotationSeriesSpec spec;
  spec.sigma = 0.0;
  spec.seed = 1;
  const RotationSeries series = gen_rotation(spec);

  REQUIRE(series.truth.size() == 500);
  REQUIRE(series.theta.size() == 499);

  CHECK(series.theta.front() == doctest::Approx(M_PI / 64).epsilon(1e-15));
  const double dtheta = (7.0 * M_PI / 64) / 499.0;
  for (std::size_t k = 1; k < series.theta.size(); ++k)
    CHECK(series.theta[k] - series.theta[k - 1] ==
          doctest::Approx(dtheta).epsilon(1e-10));
  CHECK(series.theta.back() ==
        doctest::Approx(M_PI / 64 + 498 * dtheta).epsilon(1e-12));

  CHECK(series.truth.front()[0] == 1.0);
  CHECK(series.truth.front()[1] == 0.0);
  for (const Vec& x : series.truth)
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // Each step applies the scheduled rotation.
  for (std::size_t k = 0; k < series.theta.size(); ++k) {
    const double c = std::cos(series.theta[k]), s = std::sin(series.theta[k]);
    Vec expected(2);
    expected << c * series.truth[k][0] - s * series.truth[k][1],
        s * series.truth[k][0] + c * series.truth[k][1];
    CHECK((series.truth[k + 1] - expected).norm() <= 1e-12);
  }

  // Zero noise copies the truth.
  for (std::size_t k = 0; k < series.truth.size(); ++k)
    CHECK((series.noisy[k] - series.truth[k]).norm() == 0.0);
}

TEST_CASE("rotation noise is seed-deterministic") {
  RotationSeriesSpec spec;
  spec.sigma = 0.5;
  spec.seed = 7;
  const RotationSeries a = gen_rotation(spec);
  const RotationSeries b = gen_rotation(spec);
  spec.seed = 8;
  const RotationSeries c = gen_rotation(spec);

  double same = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < a.noisy.size(); ++k) {
    same += (a.noisy[k] - b.noisy[k]).norm();
    diff += (a.noisy[k] - c.noisy[k]).norm();
    CHECK((a.truth[k] - c.truth[k]).norm() == 0.0);  // truth ignores the seed
  }
  CHECK(same == 0.0);
  CHECK(diff > 0.0);
}

TEST_CASE("growth-decay series has unit spectral radius and scheduled gamma") {
  PandemicSeriesSpec spec;
  spec.sigma = 0.0;
  spec.seed_system = 3;
  spec.seed_noise = 4;
  const PandemicSeries series = gen_pandemic(spec);

  REQUIRE(series.truth.size() == 1000);
  REQUIRE(series.gamma.size() == 999);
  REQUIRE(series.A_hat.rows() == 3);

  const Eigen::EigenSolver<Mat> eig(series.A_hat);
  CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK(series.gamma.front() == doctest::Approx(1.01).epsilon(1e-15));
  const double dgamma = -0.02 / 999.0;
  CHECK(series.gamma.back() ==
        doctest::Approx(1.01 + 998 * dgamma).epsilon(1e-12));

  CHECK((series.truth.front() - Vec::Ones(3)).norm() == 0.0);
  for (std::size_t k = 0; k < series.gamma.size(); ++k) {
    const Vec expected = series.gamma[k] * (series.A_hat * series.truth[k]);
    CHECK((series.truth[k + 1] - expected).norm() <= 1e-12);
  }

  for (std::size_t k = 0; k < series.truth.size(); ++k)
    CHECK((series.noisy[k] - series.truth[k]).norm() == 0.0);
}

TEST_CASE("growth-decay norm peaks strictly inside the run") {
  PandemicSeriesSpec spec;
  spec.sigma = 0.0;
  spec.seed_system = 5;
  spec.seed_noise = 6;
  const PandemicSeries series = gen_pandemic(spec);

  std::size_t arg_max = 0;
  double best = 0.0;
  for (std::size_t k = 0; k < series.truth.size(); ++k) {
    const double norm = series.truth[k].norm();
    if (norm > best) {
      best = norm;
      arg_max = k;
    }
  }
  CHECK(arg_max > 100);
  CHECK(arg_max < 900);
  CHECK(best > series.truth.front().norm());
  CHECK(best > series.truth.back().norm());
}

TEST_CASE("separate seeds control the system and the noise") {
  PandemicSeriesSpec spec;
  spec.sigma = 0.05;
  spec.seed_system = 10;
  spec.seed_noise = 20;
  const PandemicSeries a = gen_pandemic(spec);

  spec.seed_noise = 21;
  const PandemicSeries b = gen_pandemic(spec);
  CHECK((a.A_hat - b.A_hat).norm() == 0.0);
  CHECK((a.truth[500] - b.truth[500]).norm() == 0.0);
  CHECK((a.noisy[500] - b.noisy[500]).norm() != 0.0);

  spec.seed_system = 11;
  const PandemicSeries c = gen_pandemic(spec);
  CHECK((a.A_hat - c.A_hat).norm() != 0.0);
}

TEST_CASE("generator specs are validated") {
  RotationSeriesSpec r;
  r.steps = 1;
  CHECK_THROWS_AS(gen_rotation(r), std::invalid_argument);
  r.steps = 10;
  r.sigma = -1.0;
  CHECK_THROWS_AS(gen_rotation(r), std::invalid_argument);

  PandemicSeriesSpec p;
  p.dim = 0;
  CHECK_THROWS_AS(gen_pandemic(p), std::invalid_argument);
  p.dim = 3;
  p.sigma = -0.1;
  CHECK_THROWS_AS(gen_pandemic(p), std::invalid_argument);
}

}  // TEST_SUITE
