#pragma once

#include "dmdenkf/dmd.hpp"
#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Real parameterization mu of a conjugate-closed spectrum, giving the filter
// exactly rank(model) real degrees of freedom.  For a real eigenvalue the mu
// entry is the signed eigenvalue itself expressed as modulus times sign, kept
// as modulus tau for nonnegative reals and -tau for negative reals folded via
// the argument convention below; in practice:
//   - real eigenvalue at index i:         mu[i] = lambda_i (real part)
//   - conjugate pair (i, j), i leader:    mu[i] = tau (shared modulus)
//                                         mu[j] = theta (leader argument, in (0, pi))
// Decoding reverses this: lambda_i = mu[i] for reals and
// lambda_{i,j} = mu[i] * exp(+-i mu[j]) for pairs.  After filtering the mu
// vector drifts freely in R^r; decoding stays conjugate-closed by
// construction, but a pair modulus that has drifted negative is rejected.
struct TemporalModeEncoding {
  Vec mu;
  Pairing pairing;
};

// Encode a spectrum.  The pairing must validate against lambda.
TemporalModeEncoding encode_mu(const CVec& lambda, const Pairing& pairing);

// Convenience overload using the model's own spectrum and pairing.
TemporalModeEncoding encode_mu(const DmdModel& model);

CVec decode_lambda(const TemporalModeEncoding& enc);
CVec decode_lambda(const Vec& mu, const Pairing& pairing);

// Allocation-free variant for per-member hot loops; accepts vector blocks
// (ensemble mu tails) without copying.
void decode_lambda_into(const Eigen::Ref<const Vec>& mu, const Pairing& pairing,
                        CVec& lambda);

}  // namespace dmdenkf
