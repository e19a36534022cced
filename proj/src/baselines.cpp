#include "dmdenkf/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "dmdenkf/linalg.hpp"

namespace dmdenkf {

DmdModel streaming_tdmd_step(const std::vector<Vec>& all_data,
                             const SvdTruncation& trunc) {
  return fit_tdmd(build_snapshots(all_data, 1), trunc);
}

WindowedTdmd::WindowedTdmd(int window, SvdTruncation trunc)
    : window_(window), trunc_(trunc) {
  if (window < 2) throw std::invalid_argument("WindowedTdmd: window must be >= 2");
}

std::optional<DmdModel> WindowedTdmd::step(const Vec& snapshot) {
  buffer_.push_back(snapshot);
  while (static_cast<int>(buffer_.size()) > window_) buffer_.pop_front();
  const int pairs = static_cast<int>(buffer_.size()) - 1;
  if (pairs < 1) return std::nullopt;  // still warming up
  // A drop-smallest policy needs more than `drop` column pairs before it can
  // retain any direction; keep warming up until then.
  if (trunc_.policy() == SvdTruncation::Policy::DropSmallest &&
      pairs <= trunc_.drop())
    return std::nullopt;
  const std::vector<Vec> data(buffer_.begin(), buffer_.end());
  return fit_tdmd(build_snapshots(data, 1), trunc_);
}

OnlineDmd OnlineDmd::init(const std::vector<Vec>& prefix, double rho) {
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("OnlineDmd: rho must lie in (0, 1]");
  const SnapshotPair pair = build_snapshots(prefix, 1);
  const auto n = pair.X.rows();
  if (pair.X.cols() < n)
    throw std::invalid_argument("OnlineDmd: prefix shorter than state dimension");

  const Mat gram = pair.X * pair.X.transpose();
  Eigen::FullPivLU<Mat> lu(gram);
  if (!lu.isInvertible())
    throw NumericalError("OnlineDmd: prefix Gramian is singular; need richer data");

  OnlineDmd o;
  o.rho_ = rho;
  o.P_ = lu.inverse();
  o.A_ = pair.Xprime * pair.X.transpose() * o.P_;
  return o;
}

CVec OnlineDmd::step(const Vec& x_in, const Vec& x_out) {
  if (x_in.size() != A_.cols() || x_out.size() != A_.rows())
    throw std::invalid_argument("OnlineDmd: state dimension mismatch");
  const Vec Px = P_ * x_in;
  const double gamma = 1.0 / (rho_ + x_in.dot(Px));
  A_ += gamma * (x_out - A_ * x_in) * Px.transpose();
  P_ = (P_ - gamma * Px * Px.transpose()) / rho_;

  const double scale = std::max(1.0, P_.cwiseAbs().maxCoeff());
  const double asym = (P_ - P_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    warnings_.push_back("P lost symmetry (|P - P^T| = " + std::to_string(asym) +
                        "); re-symmetrized");
  P_ = ((P_ + P_.transpose()) * 0.5).eval();
  return spectrum();
}

CVec OnlineDmd::spectrum() const {
  Eigen::EigenSolver<Mat> eig(A_);
  if (eig.info() != Eigen::Success)
    throw NumericalError("OnlineDmd: eigendecomposition failed");
  return eig.eigenvalues();
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

}  // namespace

GaussianKde::GaussianKde(std::vector<double> samples, double bandwidth)
    : samples_(std::move(samples)), h_(bandwidth) {
  if (samples_.empty()) throw std::invalid_argument("GaussianKde: empty sample set");
  if (!(h_ > 0.0)) throw std::invalid_argument("GaussianKde: bandwidth must be positive");
}

GaussianKde GaussianKde::silverman(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("GaussianKde: empty sample set");
  const auto n = static_cast<double>(samples.size());
  double spread = 0.0;
  if (samples.size() >= 2) {
    const double sd = std::sqrt(sample_variance(samples));
    const double iqr =
        dmdenkf::quantile(samples, 0.75) - dmdenkf::quantile(samples, 0.25);
    spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  }
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) {
    // Degenerate sample (single point or all equal): any positive bandwidth
    // gives a valid density with the right median; keep it narrow.
    const double scale = std::max(1.0, std::abs(samples.front()));
    h = 1e-3 * scale;
  }
  return GaussianKde(std::move(samples), h);
}

double GaussianKde::pdf(double x) const {
  const double inv_h = 1.0 / h_;
  double acc = 0.0;
  for (double v : samples_) {
    const double z = (x - v) * inv_h;
    acc += std::exp(-0.5 * z * z);
  }
  return acc * inv_h / (std::sqrt(2.0 * M_PI) * static_cast<double>(samples_.size()));
}

double GaussianKde::cdf(double x) const {
  double acc = 0.0;
  for (double v : samples_) acc += normal_cdf((x - v) / h_);
  return acc / static_cast<double>(samples_.size());
}

double GaussianKde::mass(double lo, double hi) const {
  if (lo > hi) std::swap(lo, hi);
  return cdf(hi) - cdf(lo);
}

double GaussianKde::quantile(double p) const {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("GaussianKde: quantile level must lie in (0, 1)");
  const auto [mn, mx] = std::minmax_element(samples_.begin(), samples_.end());
  double lo = *mn - 40.0 * h_;
  double hi = *mx + 40.0 * h_;
  // cdf(lo) < p < cdf(hi) for any p away from the extreme tails; bisect.
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi) + std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

HistoricalBaseline HistoricalBaseline::build(const std::vector<WeekValue>& history,
                                             int before_year, int excluded_year) {
  HistoricalBaseline hb;
  for (const WeekValue& wv : history) {
    if (wv.year >= before_year || wv.year == excluded_year) continue;
    hb.week_samples_[wv.week].push_back(wv.value);
  }
  return hb;
}

bool HistoricalBaseline::has_week(int week) const {
  return week_samples_.count(week) > 0;
}

const std::vector<double>& HistoricalBaseline::samples_for(int week) const {
  auto it = week_samples_.find(week);
  if (it == week_samples_.end())
    throw std::invalid_argument("HistoricalBaseline: no samples for week " +
                                std::to_string(week));
  return it->second;
}

KdePrediction kde_predict(const HistoricalBaseline& baseline, int week) {
  GaussianKde kde = GaussianKde::silverman(baseline.samples_for(week));
  const double med = kde.median();
  return {std::move(kde), med};
}

}  // namespace dmdenkf
