#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laglan/inference.hpp"
#include "laglan/limitexp.hpp"

/// @file experiments.hpp
/// Batch campaigns shared by the command-line driver and the acceptance
/// suite: convergence sweeps, Monte Carlo verification of the local
/// expansion, and full simulate-estimate-rescale studies.  Every campaign
/// is deterministic in (parameters, seed) with replication substreams, so
/// reports are independent of scheduling.

namespace laglan {

// ---------------------------------------------------------------------------
// Regime requests
// ---------------------------------------------------------------------------

/// A noise regime as requested on a command line: the declared limit of
/// n v_n plus the one number that pins v_n at each n.
struct RegimeRequest {
  GammaMode mode = GammaMode::Zero;
  double value = 0.0;  ///< gamma when finite, v_n when infinite; else unused

  double v_n(int n) const;
  double gamma() const;  ///< 0, value, or +infinity
};

/// Parses "zero", "finite:<gamma>", or "infinite:<v>".
RegimeRequest parse_regime(const std::string& text);

std::string to_string(const RegimeRequest& regime);

/// Model at size n under the requested regime.
ModelSpec spec_for(const RegimeRequest& regime, int n, double rho,
                   double theta = 0.0);

/// The three regime presets used across verification campaigns:
/// zero, finite gamma = 1, infinite with v_n = 0.25.
std::vector<RegimeRequest> preset_regimes();

// ---------------------------------------------------------------------------
// Structure-level sweeps
// ---------------------------------------------------------------------------

/// Frobenius limit reports along an n-grid at fixed weights (alpha, beta).
std::vector<FrobeniusReport> frobenius_sweep(const RegimeRequest& regime,
                                             double rho, double alpha,
                                             double beta,
                                             const std::vector<int>& ns);

/// One point of the Hellinger bound scan: squared distance between the
/// exact and surrogate models against 2 rho^2 n^2 |theta|^3 / v_n^2.
struct HellingerScanRow {
  int n = 0;
  double v_n = 0.0, rho = 0.0, theta = 0.0;
  double h2 = 0.0;
  double bound = 0.0;
  bool ok = false;  ///< h2 <= bound
};

/// Scans positive lags strictly inside the admissible window: theta_k =
/// k / (per_case + 1) * theta_bound for k = 1..per_case, at every (n, v,
/// rho) combination.
std::vector<HellingerScanRow> hellinger_bound_scan(
    const std::vector<int>& ns, const std::vector<double>& vs,
    const std::vector<double>& rhos, int per_case);

// ---------------------------------------------------------------------------
// Local-statistic campaigns
// ---------------------------------------------------------------------------

/// Monte Carlo of the two local statistics under lag zero, with their
/// standardized marginals summarized against N(0, 1).
struct CltCampaign {
  ModelSpec spec;
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<double> t_scaled;  ///< T / sqrt(I)
  std::vector<double> s_scaled;  ///< S / sqrt(J); empty when J = 0
  double ks_t = 0.0;
  double ks_s = 0.0;  ///< NaN when J = 0
  double corr_ts = 0.0;
};

/// Draws data spectrally (the null differenced covariance is sampled in its
/// eigenbasis), so one replication costs one kernel multiply.
CltCampaign lan_clt_campaign(const ModelSpec& spec, int m,
                             std::uint64_t seed);

/// Median absolute expansion error at one rescaled lag u.
struct ResidualSummary {
  ModelSpec spec;
  double u = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  double median_abs = 0.0;
};

/// Median |log_ratio - predictable part| over m replications drawn under
/// lag zero, for each u.  All u values share the same draws.
std::vector<ResidualSummary> residual_campaign(const ModelSpec& spec,
                                               const std::vector<double>& us,
                                               int m, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Estimator campaigns
// ---------------------------------------------------------------------------

/// One replication of the simulate-estimate pipeline.
struct EstimateRecord {
  int replication = 0;
  std::uint64_t seed = 0;  ///< substream id of the draw
  double c_true = 0.0;
  double c_hat = 0.0;
  double c_tilde = 0.0;
  double rescaled_hat = 0.0;    ///< (c_hat - c_true) eta / r
  double rescaled_tilde = 0.0;  ///< (c_tilde - c_true) eta / r
  double loglik_at_hat = 0.0;
  bool ok = false;
};

struct EstimateCampaign {
  ModelSpec spec;  ///< theta holds the true lag c_true * eta
  double eta = 0.0;
  double c_true = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<EstimateRecord> records;
  int failures = 0;
  double hat_moment = 0.0;    ///< mean rescaled_hat^2 over ok records
  double tilde_moment = 0.0;  ///< mean rescaled_tilde^2 over ok records
};

/// Simulates the exact model at theta = c_true * eta and runs both
/// estimators on the surrogate profile per replication.  Draws come from
/// one shared Cholesky factor with per-replication substreams.
EstimateCampaign estimate_campaign(const ModelSpec& spec, double c_true,
                                   double eta, int m, std::uint64_t seed,
                                   const EstimateOptions& opt = {});

/// Localization scale n^{-1} / log n: shrinks faster than the estimation
/// rate of the noiseless regime while keeping the grid inside the window.
double eta_log_rule(int n);

/// Localization scale 0.98 theta_bound / c_max: the widest scale for which
/// every grid lag c * eta, |c| <= c_max, stays strictly admissible.  Used
/// where the admissible window, not the convergence rate, binds.
double eta_window_rule(const ModelSpec& spec, double c_max);

// ---------------------------------------------------------------------------
// Limit-experiment tables
// ---------------------------------------------------------------------------

/// Second moments of the two limit estimators and their efficiency ratio.
struct EfficiencyRow {
  double rho = 0.0;
  double gamma = 0.0;
  double I = 0.0, J = 0.0;
  double mle_var = 0.0;
  double bayes_var = 0.0;
  double ratio = 0.0;  ///< bayes_var / mle_var
};

/// One row per rho at fixed gamma (may be +infinity: ratio is then 1).
std::vector<EfficiencyRow> efficiency_table(const std::vector<double>& rhos,
                                            double gamma);

}  // namespace laglan
