#include <json.hpp>

#include "dmdenkf/dmdenkf.hpp"

namespace dmdenkf {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {  // row-major nested arrays
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& rows) {
  const auto r = rows.size();
  const auto c = r == 0 ? 0 : rows[0].size();
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DataError("checkpoint: ragged matrix rows");
    for (std::size_t j = 0; j < c; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

json cvec_to_json(const CVec& v) {
  json o;
  o["real"] = vec_to_json(v.real());
  o["imag"] = vec_to_json(v.imag());
  return o;
}

CVec cvec_from_json(const json& o) {
  const Vec re = vec_from_json(o.at("real"));
  const Vec im = vec_from_json(o.at("imag"));
  if (re.size() != im.size()) throw DataError("checkpoint: complex vector size mismatch");
  CVec v(re.size());
  v.real() = re;
  v.imag() = im;
  return v;
}

std::string policy_name(SvdTruncation::Policy p) {
  switch (p) {
    case SvdTruncation::Policy::FixedRank: return "fixed_rank";
    case SvdTruncation::Policy::EnergyThreshold: return "energy_threshold";
    case SvdTruncation::Policy::DropSmallest: return "drop_smallest";
  }
  return "fixed_rank";
}

SvdTruncation trunc_from_json(const json& o) {
  const std::string policy = o.at("policy").get<std::string>();
  if (policy == "fixed_rank") return SvdTruncation::fixed_rank(o.at("value").get<int>());
  if (policy == "energy_threshold")
    return SvdTruncation::energy_threshold(o.at("value").get<double>());
  if (policy == "drop_smallest")
    return SvdTruncation::drop_smallest(o.at("value").get<int>());
  throw DataError("checkpoint: unknown truncation policy " + policy);
}

}  // namespace

std::string to_checkpoint_json(const DmdEnkf& model) {
  json j;
  j["format"] = "dmdenkf-checkpoint-v1";

  json cfg;
  cfg["spin_up_length"] = model.config.spin_up_length;
  cfg["delay"] = model.config.delay;
  cfg["truncation"]["policy"] = policy_name(model.config.truncation.policy());
  switch (model.config.truncation.policy()) {
    case SvdTruncation::Policy::FixedRank:
      cfg["truncation"]["value"] = model.config.truncation.rank();
      break;
    case SvdTruncation::Policy::EnergyThreshold:
      cfg["truncation"]["value"] = model.config.truncation.energy();
      break;
    case SvdTruncation::Policy::DropSmallest:
      cfg["truncation"]["value"] = model.config.truncation.drop();
      break;
  }
  cfg["fitter"] = model.config.fitter == DmdEnkfConfig::Fitter::Tls ? "tls" : "exact";
  cfg["ensemble_size"] = model.config.ensemble_size;
  cfg["alpha1"] = model.config.alpha1;
  cfg["alpha2"] = model.config.alpha2;
  cfg["meas_var"] = model.config.meas_var;
  cfg["seed"] = model.config.seed;
  j["config"] = std::move(cfg);

  json dmd;
  dmd["n"] = model.dmd.n;
  dmd["d"] = model.dmd.d;
  dmd["rank"] = model.dmd.rank;
  dmd["modes_real"] = mat_to_json(model.dmd.modes.real());
  dmd["modes_imag"] = mat_to_json(model.dmd.modes.imag());
  dmd["eigs"] = cvec_to_json(model.dmd.eigs);
  dmd["amplitudes"] = cvec_to_json(model.dmd.amplitudes);
  dmd["pairing"] = model.dmd.pairing.partner;
  dmd["zero_eigs"] = model.dmd.zero_eigs;
  dmd["warnings"] = model.dmd.warnings;
  j["dmd"] = std::move(dmd);

  j["mu"] = vec_to_json(model.spin_up_encoding.mu);
  j["ensemble"]["members"] = mat_to_json(model.ensemble.members);
  j["ensemble"]["rng_seed"] = model.ensemble.rng_seed;

  json hist = json::array();
  for (const DmdEnkfStep& s : model.history) {
    json rec;
    rec["state_estimate"] = vec_to_json(s.state_estimate);
    rec["eig_estimate"] = cvec_to_json(s.eig_estimate);
    rec["innovation_norm"] = s.innovation_norm;
    rec["forecast_mean"] = vec_to_json(s.forecast_mean);
    hist.push_back(std::move(rec));
  }
  j["history"] = std::move(hist);
  return j.dump(2);
}

DmdEnkf from_checkpoint_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw DataError(std::string("checkpoint: parse failure: ") + e.what());
  }
  if (j.value("format", "") != "dmdenkf-checkpoint-v1")
    throw DataError("checkpoint: unrecognized format tag");

  DmdEnkf model;
  const json& cfg = j.at("config");
  model.config.spin_up_length = cfg.at("spin_up_length").get<int>();
  model.config.delay = cfg.at("delay").get<int>();
  model.config.truncation = trunc_from_json(cfg.at("truncation"));
  model.config.fitter = cfg.at("fitter").get<std::string>() == "tls"
                            ? DmdEnkfConfig::Fitter::Tls
                            : DmdEnkfConfig::Fitter::Exact;
  model.config.ensemble_size = cfg.at("ensemble_size").get<int>();
  model.config.alpha1 = cfg.at("alpha1").get<double>();
  model.config.alpha2 = cfg.at("alpha2").get<double>();
  model.config.meas_var = cfg.at("meas_var").get<double>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();

  const json& dmd = j.at("dmd");
  model.dmd.n = dmd.at("n").get<int>();
  model.dmd.d = dmd.at("d").get<int>();
  model.dmd.rank = dmd.at("rank").get<int>();
  const Mat mre = mat_from_json(dmd.at("modes_real"));
  const Mat mim = mat_from_json(dmd.at("modes_imag"));
  if (mre.rows() != mim.rows() || mre.cols() != mim.cols())
    throw DataError("checkpoint: mode matrix size mismatch");
  model.dmd.modes.resize(mre.rows(), mre.cols());
  model.dmd.modes.real() = mre;
  model.dmd.modes.imag() = mim;
  model.dmd.eigs = cvec_from_json(dmd.at("eigs"));
  model.dmd.amplitudes = cvec_from_json(dmd.at("amplitudes"));
  model.dmd.pairing.partner = dmd.at("pairing").get<std::vector<int>>();
  model.dmd.zero_eigs = dmd.at("zero_eigs").get<std::vector<int>>();
  model.dmd.warnings = dmd.at("warnings").get<std::vector<std::string>>();
  model.dmd.pairing.validate(model.dmd.eigs);

  model.spin_up_encoding.mu = vec_from_json(j.at("mu"));
  model.spin_up_encoding.pairing = model.dmd.pairing;
  model.ensemble.members = mat_from_json(j.at("ensemble").at("members"));
  model.ensemble.rng_seed = j.at("ensemble").at("rng_seed").get<std::uint64_t>();
  if (model.ensemble.members.rows() != model.dmd.n_eff() + model.dmd.rank)
    throw DataError("checkpoint: ensemble dimension disagrees with model");

  for (const json& rec : j.at("history")) {
    DmdEnkfStep s;
    s.state_estimate = vec_from_json(rec.at("state_estimate"));
    s.eig_estimate = cvec_from_json(rec.at("eig_estimate"));
    s.innovation_norm = rec.at("innovation_norm").get<double>();
    s.forecast_mean = vec_from_json(rec.at("forecast_mean"));
    model.history.push_back(std::move(s));
  }

  model.propagator = std::make_shared<ModalPropagator>(model.dmd);
  return model;
}

}  // namespace dmdenkf
