#include <doctest.h>

#include <cmath>
#include <vector>

#include "dmdenkf/baselines.hpp"
#include "dmdenkf/rng.hpp"
#include "dmdenkf/snapshots.hpp"

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

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("streaming step is a batch refit over everything seen") {
  const auto series = rotation_series(0.3, 25);
  const DmdModel stepped =
      streaming_tdmd_step(series, SvdTruncation::fixed_rank(2));
  const DmdModel batch =
      fit_tdmd(build_snapshots(series, 1), SvdTruncation::fixed_rank(2));
  REQUIRE(stepped.rank == batch.rank);
  for (int i = 0; i < stepped.rank; ++i)
    CHECK(std::abs(stepped.eigs[i] - batch.eigs[i]) <= 1e-14);
}

TEST_CASE("windowed fits track only the recent buffer") {
  const auto series = rotation_series(0.3, 20);
  WindowedTdmd wt(8, SvdTruncation::fixed_rank(2));

  CHECK(!wt.step(series[0]).has_value());  // one snapshot: warming up
  std::optional<DmdModel> model;
  for (std::size_t k = 1; k < series.size(); ++k) {
    model = wt.step(series[k]);
    CHECK(model.has_value());
    CHECK(static_cast<int>(wt.buffer().size()) <= 8);
  }

  REQUIRE(model.has_value());
  const auto pr = model->pairing.pairs().front();
  CHECK(std::abs(model->eigs[pr.first]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(std::arg(model->eigs[pr.first])) ==
        doctest::Approx(0.3).epsilon(1e-8));

  // Identical to a batch fit on the last eight snapshots.
  const std::vector<Vec> tail(series.end() - 8, series.end());
  const DmdModel batch =
      fit_tdmd(build_snapshots(tail, 1), SvdTruncation::fixed_rank(2));
  for (int i = 0; i < batch.rank; ++i)
    CHECK(std::abs(model->eigs[i] - batch.eigs[i]) <= 1e-12);

  CHECK_THROWS_AS(WindowedTdmd(1, SvdTruncation::fixed_rank(1)),
                  std::invalid_argument);
}

TEST_CASE("recursive least squares reproduces the weighted batch solution") {
  // Scalar stream: pairs (1 -> 2) then (2 -> 3).
  OnlineDmd od = OnlineDmd::init({v1(1), v1(2)}, 1.0);
  CHECK(od.A()(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(od.P()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  od.step(v1(2), v1(3));
  // Equal weights: argmin_a (2-a)^2 + (3-2a)^2 = 1.6.
  CHECK(od.A()(0, 0) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(od.P()(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  const CVec spec = od.spectrum();
  REQUIRE(spec.size() == 1);
  CHECK(std::abs(spec[0] - Complex(1.6, 0)) <= 1e-12);

  // Forgetting factor 0.5 halves the old pair's weight:
  // argmin_a 0.5 (2-a)^2 + (3-2a)^2 = 14/9.
  OnlineDmd forgetful = OnlineDmd::init({v1(1), v1(2)}, 0.5);
  forgetful.step(v1(2), v1(3));
  CHECK(forgetful.A()(0, 0) == doctest::Approx(14.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("online updates converge to a static operator") {
  const auto series = rotation_series(0.4, 70);
  const std::vector<Vec> prefix(series.begin(), series.begin() + 10);
  OnlineDmd od = OnlineDmd::init(prefix, 0.9);
  for (std::size_t k = 10; k < series.size(); ++k)
    od.step(series[k - 1], series[k]);
  CHECK((od.A() - rot2(0.4)).norm() <= 1e-6);
  CHECK(od.warnings().empty());
}

TEST_CASE("online initialization validates its inputs") {
  CHECK_THROWS_AS(OnlineDmd::init({v1(1), v1(2)}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(OnlineDmd::init({v1(1), v1(2)}, 1.5), std::invalid_argument);

  // Two-dimensional states spanning a line: singular Gramian.
  Vec a(2), b(2), c(2);
  a << 1, 0;
  b << 2, 0;
  c << 4, 0;
  CHECK_THROWS_AS(OnlineDmd::init({a, b, c}, 1.0), NumericalError);

  OnlineDmd od = OnlineDmd::init({v1(1), v1(2)}, 1.0);
  CHECK_THROWS_AS(od.step(Vec::Ones(2), v1(1)), std::invalid_argument);
}

TEST_CASE("silverman bandwidth on a hand-computed sample") {
  // {1..5}: sd = sqrt(2.5), IQR = 2 so IQR/1.34 wins;
  // h = 0.9 * (2/1.34) * 5^(-1/5).
  const GaussianKde kde = GaussianKde::silverman({1, 2, 3, 4, 5});
  CHECK(kde.bandwidth() == doctest::Approx(0.973585).epsilon(1e-4));
  CHECK(kde.samples().size() == 5);
}

TEST_CASE("kernel density integrates to one and inverts its own cdf") {
  const GaussianKde kde = GaussianKde::silverman({0.2, 1.1, 1.4, 3.0, 4.2, 4.4});
  const double h = kde.bandwidth();
  const double lo = 0.2 - 8 * h, hi = 4.4 + 8 * h;

  // Trapezoid integral of the density.
  const int n = 4000;
  double integral = 0.0;
  double prev = kde.pdf(lo);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double cur = kde.pdf(x);
    integral += 0.5 * (prev + cur) * (hi - lo) / n;
    prev = cur;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

  CHECK(kde.cdf(lo) <= 1e-9);
  CHECK(kde.cdf(hi) >= 1.0 - 1e-9);
  CHECK(kde.mass(1.0, 3.0) ==
        doctest::Approx(kde.cdf(3.0) - kde.cdf(1.0)).epsilon(1e-12));

  for (double p : {0.1, 0.3, 0.5, 0.9})
    CHECK(kde.cdf(kde.quantile(p)) == doctest::Approx(p).epsilon(1e-8));

  // Symmetric sample: the median sits at the center of symmetry.
  const GaussianKde sym(std::vector<double>{-2, -1, 1, 2}, 0.7);
  CHECK(sym.median() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("single and degenerate samples stay proper densities") {
  const GaussianKde point({5.0}, 2.0);
  CHECK(point.pdf(5.0) ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(2 * M_PI))).epsilon(1e-12));
  CHECK(point.cdf(5.0) == doctest::Approx(0.5).epsilon(1e-12));

  const GaussianKde flat = GaussianKde::silverman({3.0, 3.0, 3.0});
  CHECK(flat.bandwidth() > 0.0);
  CHECK(flat.cdf(3.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("historical baseline collects prior seasons and skips exclusions") {
  std::vector<HistoricalBaseline::WeekValue> history;
  for (int year = 2006; year <= 2012; ++year)
    history.push_back({year, 7, static_cast<double>(year - 2000)});
  history.push_back({2007, 9, 1.5});

  const HistoricalBaseline base = HistoricalBaseline::build(history, 2012, 2009);
  REQUIRE(base.has_week(7));
  const std::vector<double>& s = base.samples_for(7);
  CHECK(s.size() == 5);  // 2006..2011 minus the excluded 2009
  for (double v : s) CHECK(v != 9.0);

  CHECK(base.has_week(9));
  CHECK(!base.has_week(10));
  CHECK_THROWS_AS(base.samples_for(10), std::invalid_argument);

  const KdePrediction pred = kde_predict(base, 7);
  CHECK(pred.point == doctest::Approx(pred.density.median()).epsilon(1e-12));
  CHECK(pred.density.samples().size() == 5);
}

}  // TEST_SUITE
