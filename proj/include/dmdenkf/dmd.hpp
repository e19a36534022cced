#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmdenkf/snapshots.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Conjugate-pair structure of a spectrum.  partner[i] == i marks a real
// eigenvalue; otherwise partner[i] == j with lambda_j the complex conjugate
// of lambda_i.  The pair member with the smaller index is its leader and,
// under the ordering used here (descending modulus, then ascending argument
// in [0, 2pi)), the leader carries the argument in (0, pi).
struct Pairing {
  std::vector<int> partner;

  int size() const { return static_cast<int>(partner.size()); }
  bool is_real(int i) const { return partner[i] == i; }
  bool is_leader(int i) const { return partner[i] > i; }

  std::vector<std::pair<int, int>> pairs() const;
  std::vector<int> singletons() const;
  bool has_pair() const;

  // Match eigenvalues against their conjugates at absolute tolerance tol.
  // Throws NumericalError if a complex eigenvalue has no conjugate partner.
  static Pairing detect(const CVec& lambda, double tol = 1e-8);

  void validate(const CVec& lambda, double tol = 1e-8) const;
};

// Rank-r linear surrogate x_{k+1} ~ A x_k in modal form.  modes holds the
// spatial modes Phi (n_eff x r), eigs the temporal modes lambda, amplitudes
// the projection b of the first snapshot onto the modes.  A reconstructed
// state k steps after the first snapshot is Re(Phi diag(eigs)^k b).
struct DmdModel {
  CMat modes;
  CVec eigs;
  CVec amplitudes;
  int rank = 0;
  int n = 0;  // raw state dimension
  int d = 1;  // delay embedding dimension
  Pairing pairing;
  // Indices of eigenvalues treated as zero; their mode columns fall back to
  // the projected form (POD basis times eigenvector) because the exact-mode
  // formula divides by lambda.
  std::vector<int> zero_eigs;
  std::vector<std::string> warnings;

  int n_eff() const { return n * d; }
};

// Exact-mode DMD of the pair (X, X') at the requested truncation.
// Throws NumericalError on all-zero data; shrinks the rank with a warning
// when the truncated spectrum contains numerically zero singular values.
DmdModel fit_exact_dmd(const SnapshotPair& pair, const SvdTruncation& trunc);

// Total-least-squares DMD: both X and X' are projected onto the leading
// right-singular subspace of the stacked matrix [X; X'] before the exact
// fit, which removes the asymmetry between input and output noise.
DmdModel fit_tdmd(const SnapshotPair& pair, const SvdTruncation& trunc);

// Reconstruction k steps after the first snapshot, restricted to the raw
// state dimension (first n rows of the embedded state).  k = 0 gives the
// least-squares reconstruction of the first snapshot itself.
Vec predict(const DmdModel& model, int k);

// Apply Phi diag(lambda_override)^p pinv(Phi) to an embedded state and take
// the real part.  Used by the filtering layer, where every ensemble member
// carries its own spectrum.  Returns the full embedded state.
Vec propagate_state(const DmdModel& model, const Vec& x, const CVec& lambda_override,
                    int p);

// Precomputed pinv(Phi) for repeated propagation; see propagate_state.
class ModalPropagator {
 public:
  explicit ModalPropagator(const DmdModel& model);

  // y = Re(Phi diag(lambda)^p pinv(Phi) x); lambda must have model rank.
  Vec apply(const Vec& x, const CVec& lambda, int p) const;
  // Complex result before taking the real part (for residue diagnostics).
  CVec apply_complex(const Vec& x, const CVec& lambda, int p) const;

  const CMat& phi() const { return phi_; }
  const CMat& phi_pinv() const { return phi_pinv_; }

 private:
  CMat phi_;
  CMat phi_pinv_;
};

}  // namespace dmdenkf
