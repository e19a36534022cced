#include "dmdenkf/mu.hpp"

#include <cmath>

namespace dmdenkf {

TemporalModeEncoding encode_mu(const CVec& lambda, const Pairing& pairing) {
  pairing.validate(lambda);
  Vec mu(lambda.size());
  for (int i = 0; i < pairing.size(); ++i) {
    const int j = pairing.partner[i];
    if (j == i) {
      // Real eigenvalue: store it signed, so spectra with negative real
      // modes survive the round trip.
      mu[i] = lambda[i].real();
    } else if (j > i) {
      mu[i] = std::abs(lambda[i]);
      double theta = std::arg(lambda[i]);
      if (theta < 0.0) theta += 2.0 * M_PI;
      mu[j] = theta;
    }
  }
  return {mu, pairing};
}

TemporalModeEncoding encode_mu(const DmdModel& model) {
  return encode_mu(model.eigs, model.pairing);
}

void decode_lambda_into(const Eigen::Ref<const Vec>& mu, const Pairing& pairing,
                        CVec& lambda) {
  if (mu.size() != pairing.size())
    throw std::invalid_argument("decode_lambda: mu size does not match pairing");
  lambda.resize(mu.size());
  for (int i = 0; i < pairing.size(); ++i) {
    const int j = pairing.partner[i];
    if (j == i) {
      lambda[i] = Complex(mu[i], 0.0);
    } else if (j > i) {
      const double tau = mu[i];
      if (tau < 0.0)
        throw NumericalError("decode_lambda: cannot decode negative modulus at index " +
                             std::to_string(i));
      const double theta = mu[j];
      lambda[i] = Complex(tau * std::cos(theta), tau * std::sin(theta));
      lambda[j] = std::conj(lambda[i]);
    }
  }
}

CVec decode_lambda(const Vec& mu, const Pairing& pairing) {
  CVec lambda;
  decode_lambda_into(mu, pairing, lambda);
  return lambda;
}

CVec decode_lambda(const TemporalModeEncoding& enc) {
  return decode_lambda(enc.mu, enc.pairing);
}

}  // namespace dmdenkf
