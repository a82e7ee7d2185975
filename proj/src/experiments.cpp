#include "laglan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "laglan/numerics.hpp"
#include "laglan/simulate.hpp"

namespace laglan {

double RegimeRequest::v_n(int n) const {
  switch (mode) {
    case GammaMode::Zero: return 0.0;
    case GammaMode::Finite: return value / n;
    case GammaMode::Infinite: return value;
  }
  return 0.0;
}

double RegimeRequest::gamma() const {
  switch (mode) {
    case GammaMode::Zero: return 0.0;
    case GammaMode::Finite: return value;
    case GammaMode::Infinite:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

RegimeRequest parse_regime(const std::string& text) {
  RegimeRequest req;
  if (text == "zero") return req;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon == std::string::npos || colon + 1 == text.size()) {
    if (head == "finite" || head == "infinite") {
      throw std::invalid_argument("regime '" + head +
                                  "' needs a value, e.g. " + head +
                                  (head == "finite" ? ":1.0" : ":0.25"));
    }
    throw std::invalid_argument("unknown regime '" + text +
                                "' (want zero | finite:<gamma> | "
                                "infinite:<v>)");
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text.substr(colon + 1), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("regime value in '" + text +
                                "' is not a number");
  }
  if (used != text.size() - colon - 1) {
    throw std::invalid_argument("regime value in '" + text +
                                "' is not a number");
  }
  if (head == "finite") {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("finite regime needs gamma >= 0");
    }
    req.mode = GammaMode::Finite;
  } else if (head == "infinite") {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("infinite regime needs v > 0");
    }
    req.mode = GammaMode::Infinite;
  } else {
    throw std::invalid_argument("unknown regime '" + head +
                                "' (want zero | finite:<gamma> | "
                                "infinite:<v>)");
  }
  req.value = value;
  return req;
}

std::string to_string(const RegimeRequest& regime) {
  std::ostringstream os;
  switch (regime.mode) {
    case GammaMode::Zero: return "zero";
    case GammaMode::Finite: os << "finite:" << regime.value; break;
    case GammaMode::Infinite: os << "infinite:" << regime.value; break;
  }
  return os.str();
}

ModelSpec spec_for(const RegimeRequest& regime, int n, double rho,
                   double theta) {
  ModelSpec spec;
  spec.n = n;
  spec.rho = rho;
  spec.v_n = regime.v_n(n);
  spec.theta = theta;
  spec.gamma_mode = regime.mode;
  spec.gamma = regime.mode == GammaMode::Finite ? regime.value : 0.0;
  spec.validate();
  return spec;
}

std::vector<RegimeRequest> preset_regimes() {
  return {RegimeRequest{GammaMode::Zero, 0.0},
          RegimeRequest{GammaMode::Finite, 1.0},
          RegimeRequest{GammaMode::Infinite, 0.25}};
}

// ---------------------------------------------------------------------------
// Structure-level sweeps
// ---------------------------------------------------------------------------

std::vector<FrobeniusReport> frobenius_sweep(const RegimeRequest& regime,
                                             double rho, double alpha,
                                             double beta,
                                             const std::vector<int>& ns) {
  std::vector<FrobeniusReport> out;
  out.reserve(ns.size());
  for (int n : ns) {
    out.push_back(frobenius_limit_check(spec_for(regime, n, rho), alpha,
                                        beta));
  }
  return out;
}

std::vector<HellingerScanRow> hellinger_bound_scan(
    const std::vector<int>& ns, const std::vector<double>& vs,
    const std::vector<double>& rhos, int per_case) {
  if (per_case < 1) {
    throw std::invalid_argument("hellinger_bound_scan: per_case must be >= 1");
  }
  std::vector<HellingerScanRow> out;
  out.reserve(ns.size() * vs.size() * rhos.size() * per_case);
  for (int n : ns) {
    for (double v : vs) {
      const double top = theta_bound(n, v);
      for (double rho : rhos) {
        ModelSpec spec;
        spec.n = n;
        spec.rho = rho;
        spec.v_n = v;
        spec.gamma_mode = GammaMode::Infinite;  // irrelevant to the matrices
        for (int k = 1; k <= per_case; ++k) {
          spec.theta = top * k / (per_case + 1);
          HellingerScanRow row;
          row.n = n;
          row.v_n = v;
          row.rho = rho;
          row.theta = spec.theta;
          row.h2 = hellinger_squared(
              make_covariance(spec, CovarianceKind::ExactC),
              make_covariance(spec, CovarianceKind::SurrogateCtilde));
          const double nth = n * spec.theta;
          row.bound = 2.0 * rho * rho * nth * nth * spec.theta / (v * v);
          row.ok = row.h2 <= row.bound;
          out.push_back(row);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local-statistic campaigns
// ---------------------------------------------------------------------------

CltCampaign lan_clt_campaign(const ModelSpec& spec, int m,
                             std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("lan_clt_campaign: m must be >= 1");
  const LanEngine engine(spec);
  CltCampaign out;
  out.spec = engine.spec();
  out.m = m;
  out.seed = seed;

  std::vector<double> t_raw(m), s_raw(m);
  parallel_for(m, [&](std::size_t rep) {
    std::mt19937_64 rng = substream_engine(seed, rep);
    const LanStats stats =
        engine.stats_spectral(engine.gbar().sample_spectral(rng));
    t_raw[rep] = stats.T;
    s_raw[rep] = stats.S;
  });

  const LimitConstants& lc = engine.limits();
  out.t_scaled.resize(m);
  const double sd_t = std::sqrt(lc.I);
  for (int i = 0; i < m; ++i) out.t_scaled[i] = t_raw[i] / sd_t;
  out.ks_t = ks_statistic(out.t_scaled, [](double x) {
    return normal_cdf(x);
  });
  if (lc.J > 0.0) {
    out.s_scaled.resize(m);
    for (int i = 0; i < m; ++i) out.s_scaled[i] = s_raw[i] / std::sqrt(lc.J);
    out.ks_s = ks_statistic(out.s_scaled, [](double x) {
      return normal_cdf(x);
    });
  } else {
    out.ks_s = std::numeric_limits<double>::quiet_NaN();
  }
  out.corr_ts = pearson_correlation(t_raw, s_raw);
  return out;
}

std::vector<ResidualSummary> residual_campaign(const ModelSpec& spec,
                                               const std::vector<double>& us,
                                               int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("residual_campaign: m must be >= 1");
  const LanEngine engine(spec);
  // Touch every density once so parallel replications only read the cache.
  for (double u : us) {
    engine.log_ratio(Eigen::VectorXd::Zero(2 * spec.n), u);
  }
  std::vector<std::vector<double>> abs_res(us.size(),
                                           std::vector<double>(m));
  parallel_for(m, [&](std::size_t rep) {
    std::mt19937_64 rng = substream_engine(seed, rep);
    const Eigen::VectorXd diff =
        engine.gbar().from_spectral(engine.gbar().sample_spectral(rng));
    const Eigen::VectorXd z = block_cumsum(diff);
    for (std::size_t j = 0; j < us.size(); ++j) {
      abs_res[j][rep] = std::abs(engine.residual(z, us[j]));
    }
  });
  std::vector<ResidualSummary> out(us.size());
  for (std::size_t j = 0; j < us.size(); ++j) {
    out[j].spec = engine.spec();
    out[j].u = us[j];
    out[j].m = m;
    out[j].seed = seed;
    out[j].median_abs = median(abs_res[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimator campaigns
// ---------------------------------------------------------------------------

EstimateCampaign estimate_campaign(const ModelSpec& spec, double c_true,
                                   double eta, int m, std::uint64_t seed,
                                   const EstimateOptions& opt) {
  if (m < 1) throw std::invalid_argument("estimate_campaign: m must be >= 1");
  if (!(eta > 0.0)) {
    throw std::invalid_argument("estimate_campaign: eta must be > 0");
  }
  EstimateCampaign out;
  out.spec = spec;
  out.spec.theta = c_true * eta;
  out.spec.validate();
  if (!in_theta_range(out.spec)) {
    std::ostringstream msg;
    msg << "estimate_campaign: true lag " << out.spec.theta
        << " outside the admissible window "
        << theta_bound(spec.n, spec.v_n);
    throw std::invalid_argument(msg.str());
  }
  out.eta = eta;
  out.c_true = c_true;
  out.m = m;
  out.seed = seed;

  const Regime regime = classify_regime(out.spec);
  const double scale = eta / regime.r;
  const MvnFactor factor(
      make_covariance(out.spec, CovarianceKind::ExactC).matrix);

  out.records.resize(m);
  parallel_for(m, [&](std::size_t rep) {
    std::mt19937_64 rng = substream_engine(seed, rep);
    const Eigen::VectorXd z = factor.draw(rng);
    const QuasiLikelihood lik(out.spec, z, eta);
    const QmleResult qm = qmle(lik, opt);
    const QbeResult qb = qbe(lik, opt);
    EstimateRecord& rec = out.records[rep];
    rec.replication = static_cast<int>(rep);
    rec.seed = rep;
    rec.c_true = c_true;
    rec.c_hat = qm.c_hat;
    rec.c_tilde = qb.c_tilde;
    rec.rescaled_hat = (qm.c_hat - c_true) * scale;
    rec.rescaled_tilde = (qb.c_tilde - c_true) * scale;
    rec.loglik_at_hat = qm.value;
    rec.ok = qm.ok && qb.ok && qb.converged;
  });

  double hat = 0.0, tilde = 0.0;
  int good = 0;
  for (const EstimateRecord& rec : out.records) {
    if (!rec.ok) continue;
    hat += rec.rescaled_hat * rec.rescaled_hat;
    tilde += rec.rescaled_tilde * rec.rescaled_tilde;
    ++good;
  }
  out.failures = m - good;
  if (good > 0) {
    out.hat_moment = hat / good;
    out.tilde_moment = tilde / good;
  }
  return out;
}

double eta_log_rule(int n) {
  if (n < 2) throw std::invalid_argument("eta_log_rule: n must be >= 2");
  return 1.0 / (n * std::log(static_cast<double>(n)));
}

double eta_window_rule(const ModelSpec& spec, double c_max) {
  if (!(c_max > 0.0)) {
    throw std::invalid_argument("eta_window_rule: c_max must be > 0");
  }
  return 0.98 * theta_bound(spec.n, spec.v_n) / c_max;
}

// ---------------------------------------------------------------------------
// Limit-experiment tables
// ---------------------------------------------------------------------------

std::vector<EfficiencyRow> efficiency_table(const std::vector<double>& rhos,
                                            double gamma) {
  std::vector<EfficiencyRow> out;
  out.reserve(rhos.size());
  for (double rho : rhos) {
    const LimitConstants lc = limit_constants(rho, gamma);
    EfficiencyRow row;
    row.rho = rho;
    row.gamma = gamma;
    row.I = lc.I;
    row.J = lc.J;
    row.mle_var = mle_limit_variance(lc.I, lc.J);
    row.bayes_var = bayes_limit_variance(lc.I, lc.J);
    row.ratio = row.bayes_var / row.mle_var;
    out.push_back(row);
  }
  return out;
}

}  // namespace laglan
