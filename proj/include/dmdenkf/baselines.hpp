#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmdenkf/dmd.hpp"
#include "dmdenkf/snapshots.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Batch refit over everything seen so far; stands in for a streaming
// total-least-squares method as the fully-converged reference.
DmdModel streaming_tdmd_step(const std::vector<Vec>& all_data,
                             const SvdTruncation& trunc);

// Sliding-window TDMD over the last `window` snapshots.  Emits a model only
// once the window holds at least two snapshots (more under a drop-smallest
// truncation, which needs enough column pairs to retain a direction).
class WindowedTdmd {
 public:
  WindowedTdmd(int window, SvdTruncation trunc);

  std::optional<DmdModel> step(const Vec& snapshot);

  int window() const { return window_; }
  const std::deque<Vec>& buffer() const { return buffer_; }

 private:
  int window_;
  SvdTruncation trunc_;
  std::deque<Vec> buffer_;
};

// Rank-one recursive least squares update of the full operator A with
// exponential forgetting: the pair seen k updates ago carries weight rho^k.
// P tracks the inverse of the weighted input Gramian.
class OnlineDmd {
 public:
  // Batch-initialize from an equally weighted prefix (A = X' pinv(X),
  // P = (X X^T)^{-1}); forgetting starts with the first update.
  static OnlineDmd init(const std::vector<Vec>& prefix, double rho);

  // Incorporate the pair (x_in -> x_out) and return the current spectrum.
  CVec step(const Vec& x_in, const Vec& x_out);

  CVec spectrum() const;
  const Mat& A() const { return A_; }
  const Mat& P() const { return P_; }
  double rho() const { return rho_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  OnlineDmd() = default;
  Mat A_;
  Mat P_;
  double rho_ = 1.0;
  std::vector<std::string> warnings_;
};

// Gaussian kernel density estimate with a fixed bandwidth.
class GaussianKde {
 public:
  GaussianKde(std::vector<double> samples, double bandwidth);

  // Silverman's rule: h = 0.9 min(sigma, IQR/1.34) n^{-1/5}, with fallbacks
  // for degenerate samples so the density always integrates to one.
  static GaussianKde silverman(std::vector<double> samples);

  double pdf(double x) const;
  double cdf(double x) const;
  double mass(double lo, double hi) const;
  // Quantile by bisection on the mixture CDF to 1e-10.
  double quantile(double p) const;
  double median() const { return quantile(0.5); }

  double bandwidth() const { return h_; }
  const std::vector<double>& samples() const { return samples_; }

 private:
  std::vector<double> samples_;
  double h_;
};

// Same-week historical samples from seasons before `before_year`, excluding
// the pandemic year, keyed by ISO week number.
class HistoricalBaseline {
 public:
  struct WeekValue {
    int year;
    int week;
    double value;
  };

  static HistoricalBaseline build(const std::vector<WeekValue>& history,
                                  int before_year, int excluded_year = 2009);

  bool has_week(int week) const;
  const std::vector<double>& samples_for(int week) const;

 private:
  std::map<int, std::vector<double>> week_samples_;
};

struct KdePrediction {
  GaussianKde density;
  double point;  // median of the density
};

// Kernel density prediction for one ISO week.  Errors when the baseline has
// no samples for that week.
KdePrediction kde_predict(const HistoricalBaseline& baseline, int week);

}  // namespace dmdenkf
