#include "dmdenkf/snapshots.hpp"

#include <cmath>

namespace dmdenkf {

SnapshotPair build_snapshots(const std::vector<Vec>& series, int d) {
  if (d < 1) throw std::invalid_argument("build_snapshots: delay dimension must be >= 1");
  const auto m = static_cast<int>(series.size());
  if (m < d + 1)
    throw std::invalid_argument(
        "build_snapshots: insufficient data, need at least d + 1 = " +
        std::to_string(d + 1) + " snapshots, got " + std::to_string(m));
  const auto n = static_cast<int>(series.front().size());
  if (n == 0) throw DataError("build_snapshots: zero-dimensional snapshots");
  for (const Vec& x : series) {
    if (static_cast<int>(x.size()) != n)
      throw DataError("build_snapshots: inconsistent snapshot dimensions");
    if (!x.allFinite()) throw DataError("build_snapshots: non-finite snapshot entry");
  }

  const int cols = m - d;
  SnapshotPair pair;
  pair.n = n;
  pair.d = d;
  pair.X.resize(n * d, cols);
  pair.Xprime.resize(n * d, cols);
  for (int j = 0; j < cols; ++j) {
    // Column j of X embeds x_{d+j} down to x_{1+j} (1-based), newest on top.
    for (int blk = 0; blk < d; ++blk) {
      pair.X.block(blk * n, j, n, 1) = series[d - 1 + j - blk];
      pair.Xprime.block(blk * n, j, n, 1) = series[d + j - blk];
    }
  }
  return pair;
}

Vec embed_tail(const std::vector<Vec>& series, int d) {
  if (d < 1) throw std::invalid_argument("embed_tail: delay dimension must be >= 1");
  if (static_cast<int>(series.size()) < d)
    throw std::invalid_argument("embed_tail: series shorter than delay dimension");
  const auto n = static_cast<int>(series.back().size());
  Vec h(n * d);
  const auto last = series.size() - 1;
  for (int blk = 0; blk < d; ++blk) h.segment(blk * n, n) = series[last - blk];
  return h;
}

SvdTruncation SvdTruncation::fixed_rank(int r) {
  if (r < 1) throw std::invalid_argument("SvdTruncation: fixed rank must be >= 1");
  SvdTruncation t;
  t.policy_ = Policy::FixedRank;
  t.rank_ = r;
  return t;
}

SvdTruncation SvdTruncation::energy_threshold(double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("SvdTruncation: energy fraction must lie in (0, 1]");
  SvdTruncation t;
  t.policy_ = Policy::EnergyThreshold;
  t.energy_ = fraction;
  return t;
}

SvdTruncation SvdTruncation::drop_smallest(int k) {
  if (k < 0) throw std::invalid_argument("SvdTruncation: drop count must be >= 0");
  SvdTruncation t;
  t.policy_ = Policy::DropSmallest;
  t.drop_ = k;
  return t;
}

int SvdTruncation::resolve(const Vec& singular_values) const {
  const auto available = static_cast<int>(singular_values.size());
  if (available == 0) throw std::invalid_argument("SvdTruncation: empty spectrum");
  switch (policy_) {
    case Policy::FixedRank:
      return std::min(rank_, available);
    case Policy::DropSmallest: {
      const int r = available - drop_;
      if (r < 1)
        throw std::invalid_argument(
            "SvdTruncation: dropping " + std::to_string(drop_) +
            " of " + std::to_string(available) + " singular values leaves none");
      return r;
    }
    case Policy::EnergyThreshold: {
      // Smallest r whose cumulative squared singular values reach the
      // requested fraction of the total energy.
      const double total = singular_values.squaredNorm();
      if (total <= 0.0) return 1;
      double acc = 0.0;
      for (int i = 0; i < available; ++i) {
        acc += singular_values[i] * singular_values[i];
        if (acc >= energy_ * total - 1e-15 * total) return i + 1;
      }
      return available;
    }
  }
  throw std::logic_error("SvdTruncation: unknown policy");
}

}  // namespace dmdenkf
