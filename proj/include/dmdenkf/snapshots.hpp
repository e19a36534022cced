#pragma once

#include <vector>

#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Paired snapshot matrices X, X' with X' one step ahead of X columnwise.
// For delay dimension d > 1 the columns are delay-embedded states
//   h(x_k) = [x_k; x_{k-1}; ...; x_{k-(d-1)}]   (newest block on top)
// so X has n*d rows and m-d columns when built from m raw snapshots.
struct SnapshotPair {
  Mat X;
  Mat Xprime;
  int n = 0;  // raw state dimension
  int d = 1;  // delay embedding dimension

  int n_eff() const { return n * d; }
  Eigen::Index cols() const { return X.cols(); }
};

SnapshotPair build_snapshots(const std::vector<Vec>& series, int d = 1);

// Embed the trailing d raw states of a series into a single column,
// newest block on top.  Requires series.size() >= d.
Vec embed_tail(const std::vector<Vec>& series, int d);

// SVD truncation policy: keep a fixed rank, keep enough singular values to
// capture an energy fraction, or drop the k smallest.
class SvdTruncation {
 public:
  enum class Policy { FixedRank, EnergyThreshold, DropSmallest };

  static SvdTruncation fixed_rank(int r);
  static SvdTruncation energy_threshold(double fraction);
  static SvdTruncation drop_smallest(int k);

  // Number of singular values to retain given the spectrum of the data
  // matrix, before any zero-singular-value shrinking.
  int resolve(const Vec& singular_values) const;

  Policy policy() const { return policy_; }
  int rank() const { return rank_; }
  int drop() const { return drop_; }
  double energy() const { return energy_; }

 private:
  SvdTruncation() = default;
  Policy policy_ = Policy::FixedRank;
  int rank_ = 0;
  int drop_ = 0;
  double energy_ = 1.0;
};

}  // namespace dmdenkf
