#include "dmdenkf/dmd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmdenkf/linalg.hpp"

namespace dmdenkf {

namespace {

// Argument mapped into [0, 2pi).
double arg2pi(const Complex& z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

// Integer power by repeated squaring; cpow_int(0, 0) == 1.
Complex cpow_int(Complex z, int p) {
  Complex acc(1.0, 0.0);
  while (p > 0) {
    if (p & 1) acc *= z;
    z *= z;
    p >>= 1;
  }
  return acc;
}

// Order: descending modulus, then ascending argument in [0, 2pi).  Within a
// conjugate pair this puts the member with positive imaginary part first.
std::vector<int> spectral_order(const CVec& lambda) {
  std::vector<int> idx(lambda.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(lambda[a]), mb = std::abs(lambda[b]);
    if (ma != mb) return ma > mb;
    return arg2pi(lambda[a]) < arg2pi(lambda[b]);
  });
  return idx;
}

}  // namespace

CMat pinv(const CMat& a, double rel_tol) {
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) throw std::invalid_argument("pinv: empty matrix");
  const double cut = rel_tol * s[0];
  CVec sinv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    sinv[i] = (s[i] > cut && s[i] > 0.0) ? Complex(1.0 / s[i], 0.0) : Complex(0.0, 0.0);
  return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().adjoint();
}

std::vector<std::pair<int, int>> Pairing::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size(); ++i)
    if (partner[i] > i) out.emplace_back(i, partner[i]);
  return out;
}

std::vector<int> Pairing::singletons() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (partner[i] == i) out.push_back(i);
  return out;
}

bool Pairing::has_pair() const {
  for (int i = 0; i < size(); ++i)
    if (partner[i] != i) return true;
  return false;
}

Pairing Pairing::detect(const CVec& lambda, double tol) {
  const auto r = static_cast<int>(lambda.size());
  Pairing p;
  p.partner.assign(r, -1);
  for (int i = 0; i < r; ++i) {
    if (p.partner[i] >= 0) continue;
    if (std::abs(lambda[i].imag()) <= tol) {
      p.partner[i] = i;
      continue;
    }
    int best = -1;
    double best_dist = tol;
    for (int j = i + 1; j < r; ++j) {
      if (p.partner[j] >= 0) continue;
      const double dist = std::abs(lambda[j] - std::conj(lambda[i]));
      if (dist <= best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best < 0)
      throw NumericalError(
          "conjugate pairing: eigenvalue " + std::to_string(i) +
          " is complex but has no conjugate partner within tolerance");
    p.partner[i] = best;
    p.partner[best] = i;
  }
  return p;
}

void Pairing::validate(const CVec& lambda, double tol) const {
  if (static_cast<int>(lambda.size()) != size())
    throw std::invalid_argument("pairing: size mismatch with spectrum");
  for (int i = 0; i < size(); ++i) {
    const int j = partner[i];
    if (j < 0 || j >= size() || partner[j] != i)
      throw std::invalid_argument("pairing: inconsistent partner table");
    if (j == i) {
      if (std::abs(lambda[i].imag()) > tol)
        throw NumericalError("pairing: eigenvalue marked real has imaginary part");
    } else if (std::abs(lambda[j] - std::conj(lambda[i])) > tol) {
      throw NumericalError("pairing: eigenvalues marked as a pair are not conjugate");
    }
  }
}

namespace {

DmdModel fit_exact_dmd_impl(const SnapshotPair& pair, const SvdTruncation& trunc,
                            std::vector<std::string> warnings) {
  const Mat& X = pair.X;
  const Mat& Xp = pair.Xprime;

  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  if (s[0] <= 0.0) throw NumericalError("fit_exact_dmd: all-zero data matrix");

  int r = trunc.resolve(s);
  // LAPACK-style numerical rank cutoff.
  const double ztol =
      static_cast<double>(std::max(X.rows(), X.cols())) *
      std::numeric_limits<double>::epsilon() * s[0];
  int num_rank = 0;
  while (num_rank < s.size() && s[num_rank] > ztol) ++num_rank;
  if (r > num_rank) {
    warnings.push_back("rank shrunk from " + std::to_string(r) + " to " +
                       std::to_string(num_rank) +
                       ": trailing singular values are numerically zero");
    r = num_rank;
  }

  const Mat U = svd.matrixU().leftCols(r);
  const Mat V = svd.matrixV().leftCols(r);
  const Vec sr = s.head(r);

  // L = X' V S^-1, so Atilde = U^T L and the exact modes are L W.
  const Mat L = Xp * V * sr.cwiseInverse().asDiagonal();
  const Mat Atilde = U.transpose() * L;

  Eigen::EigenSolver<Mat> eig(Atilde);
  if (eig.info() != Eigen::Success)
    throw NumericalError("fit_exact_dmd: eigendecomposition failed");
  CVec lambda_raw = eig.eigenvalues();
  CMat W_raw = eig.eigenvectors();

  const std::vector<int> order = spectral_order(lambda_raw);
  CVec lambda(r);
  CMat W(r, r);
  for (int i = 0; i < r; ++i) {
    lambda[i] = lambda_raw[order[i]];
    W.col(i) = W_raw.col(order[i]);
  }

  Pairing pairing = Pairing::detect(lambda);
  // Enforce the conjugate structure exactly: the follower of each pair is
  // the elementwise conjugate of its leader, and real eigenvalues carry
  // exactly real eigenvectors (a phase rotation keeps them eigenvectors).
  for (int i = 0; i < r; ++i) {
    const int j = pairing.partner[i];
    if (j == i) {
      lambda[i] = Complex(lambda[i].real(), 0.0);
      Eigen::Index k;
      W.col(i).cwiseAbs().maxCoeff(&k);
      const Complex piv = W(k, i);
      if (std::abs(piv) > 0.0) W.col(i) *= std::conj(piv) / std::abs(piv);
      W.col(i) = W.col(i).real().template cast<Complex>();
      const double nrm = W.col(i).norm();
      if (nrm > 0.0) W.col(i) /= nrm;
    } else if (j > i) {
      lambda[j] = std::conj(lambda[i]);
      W.col(j) = W.col(i).conjugate();
    }
  }

  DmdModel model;
  model.n = pair.n;
  model.d = pair.d;
  model.rank = r;
  model.eigs = lambda;
  model.pairing = pairing;
  model.warnings = std::move(warnings);

  // Exact modes, with the projected fallback U w for zero eigenvalues where
  // the image L w vanishes with lambda.
  const double lam_cut = 1e-12 * std::max(std::abs(lambda[0]), 1e-300);
  model.modes.resize(X.rows(), r);
  const CMat LW = L * W;
  for (int i = 0; i < r; ++i) {
    if (std::abs(lambda[i]) <= lam_cut) {
      model.zero_eigs.push_back(i);
      model.modes.col(i) = (U * W.col(i).real()).template cast<Complex>();
      model.warnings.push_back("eigenvalue " + std::to_string(i) +
                               " is numerically zero; using projected mode");
    } else {
      model.modes.col(i) = LW.col(i);
    }
  }

  // Amplitudes from the first embedded snapshot, with the same conjugate
  // structure enforced (exact in exact arithmetic since X is real).
  const CVec x1 = X.col(0).template cast<Complex>();
  CVec b = model.modes.completeOrthogonalDecomposition().solve(x1);
  for (int i = 0; i < r; ++i) {
    const int j = pairing.partner[i];
    if (j == i)
      b[i] = Complex(b[i].real(), 0.0);
    else if (j > i)
      b[j] = std::conj(b[i]);
  }
  model.amplitudes = b;
  return model;
}

}  // namespace

DmdModel fit_exact_dmd(const SnapshotPair& pair, const SvdTruncation& trunc) {
  return fit_exact_dmd_impl(pair, trunc, {});
}

DmdModel fit_tdmd(const SnapshotPair& pair, const SvdTruncation& trunc) {
  // Resolve the target rank against X's spectrum so truncation policies mean
  // the same thing here as in the plain fit.
  Eigen::BDCSVD<Mat> svd_x(pair.X);
  const Vec& sx = svd_x.singularValues();
  if (sx[0] <= 0.0) throw NumericalError("fit_tdmd: all-zero data matrix");
  const int r = trunc.resolve(sx);

  Mat Z(2 * pair.X.rows(), pair.X.cols());
  Z.topRows(pair.X.rows()) = pair.X;
  Z.bottomRows(pair.X.rows()) = pair.Xprime;

  Eigen::BDCSVD<Mat> svd_z(Z, Eigen::ComputeThinV);
  const Vec& sz = svd_z.singularValues();
  const double ztol =
      static_cast<double>(std::max(Z.rows(), Z.cols())) *
      std::numeric_limits<double>::epsilon() * sz[0];
  int zrank = 0;
  while (zrank < sz.size() && sz[zrank] > ztol) ++zrank;

  std::vector<std::string> warnings;
  int rp = r;
  if (rp > zrank) {
    warnings.push_back("stacked data rank " + std::to_string(zrank) +
                       " below requested rank " + std::to_string(r) +
                       "; projection rank shrunk");
    rp = zrank;
  }

  const Mat Vp = svd_z.matrixV().leftCols(rp);
  SnapshotPair projected;
  projected.n = pair.n;
  projected.d = pair.d;
  projected.X = (pair.X * Vp) * Vp.transpose();
  projected.Xprime = (pair.Xprime * Vp) * Vp.transpose();

  return fit_exact_dmd_impl(projected, SvdTruncation::fixed_rank(rp),
                            std::move(warnings));
}

Vec predict(const DmdModel& model, int k) {
  if (k < 0) throw std::invalid_argument("predict: step must be >= 0");
  CVec c = model.amplitudes;
  for (int i = 0; i < model.rank; ++i) c[i] *= cpow_int(model.eigs[i], k);
  const CVec full = model.modes * c;
  return full.head(model.n).real();
}

ModalPropagator::ModalPropagator(const DmdModel& model)
    : phi_(model.modes), phi_pinv_(pinv(model.modes)) {}

CVec ModalPropagator::apply_complex(const Vec& x, const CVec& lambda, int p) const {
  if (lambda.size() != phi_.cols())
    throw std::invalid_argument("ModalPropagator: spectrum size mismatch");
  CVec c = phi_pinv_ * x.template cast<Complex>();
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= cpow_int(lambda[i], p);
  return phi_ * c;
}

Vec ModalPropagator::apply(const Vec& x, const CVec& lambda, int p) const {
  return apply_complex(x, lambda, p).real();
}

Vec propagate_state(const DmdModel& model, const Vec& x, const CVec& lambda_override,
                    int p) {
  if (p < 0) throw std::invalid_argument("propagate_state: step must be >= 0");
  if (x.size() != model.n_eff())
    throw std::invalid_argument("propagate_state: state dimension mismatch");
  return ModalPropagator(model).apply(x, lambda_override, p);
}

}  // namespace dmdenkf
