#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "laglan/spectral.hpp"
#include "laglan/structure.hpp"

namespace laglan {

/// Increments within each coordinate block: (x, y) becomes
/// (x_1, x_2 - x_1, .., y_1, y_2 - y_1, ..).  Unit-determinant change of
/// variables, so densities of the two representations agree.
Eigen::VectorXd block_difference(const Eigen::VectorXd& z);

/// Inverse of block_difference: partial sums within each block.
Eigen::VectorXd block_cumsum(const Eigen::VectorXd& z);

/// Gaussian log-density under a realized covariance model, with the
/// Cholesky factor cached at construction.  For the differenced kind the
/// density is that of the increment vector; loglik() differences raw data
/// internally, which makes the value agree with the surrogate kind exactly.
class GaussianDensity {
 public:
  /// Throws std::domain_error naming theta when the matrix is not PD.
  explicit GaussianDensity(CovarianceModel model);

  const CovarianceModel& model() const { return model_; }
  double log_det() const { return log_det_; }
  double loglik(const Eigen::VectorXd& z) const;

 private:
  CovarianceModel model_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

/// Log-density of raw data z under the covariance selected by (spec, kind).
/// One factorization per call; use GaussianDensity to amortize it.
double loglik(const ModelSpec& spec, const Eigen::VectorXd& z,
              CovarianceKind kind);

/// The two local statistics and their limit variances for the declared
/// regime.  T is the odd (lag-sign) statistic, S the even (lag-size) one.
struct LanStats {
  double T = 0.0;
  double S = 0.0;
  double I = 0.0;  ///< limit variance of T
  double J = 0.0;  ///< limit variance of S
};

/// u T + |u| S - u^2 (I + J) / 2: the predictable part of the local
/// log-likelihood ratio at rescaled parameter u.
double lan_center(const LanStats& stats, double u);

/// Machinery for the local experiment at the origin of one design:
/// spectral statistics of the differenced data and log-likelihood ratios
/// against lag zero.  Shared state is immutable after construction except
/// for an internal factorization cache, which is mutex-guarded, so one
/// engine may serve many threads.
class LanEngine {
 public:
  /// The spec's theta field is ignored; the engine pins the origin.
  explicit LanEngine(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const Regime& regime() const { return regime_; }
  const LimitConstants& limits() const { return limits_; }
  const GbarDct& gbar() const { return gbar_; }

  /// tr(Gbar^{-1} Sbar), the centering of the even statistic.  The odd
  /// centering tr(Gbar^{-1} Tbar) vanishes identically: the conjugated odd
  /// part is block-off-diagonal while Gbar^{-1} is block-diagonal.
  double even_trace() const { return even_trace_; }

  /// Statistics of raw data (differenced internally).
  LanStats stats(const Eigen::VectorXd& z) const;

  /// Statistics of a draw already in spectral coordinates, as produced by
  /// GbarDct::sample_spectral; saves both rotations.
  LanStats stats_spectral(const Eigen::VectorXd& w) const;

  /// Log-likelihood ratio of lag r_n u against lag zero, evaluated on raw
  /// data under the chosen covariance kind.
  double log_ratio(const Eigen::VectorXd& z, double u,
                   CovarianceKind kind = CovarianceKind::ExactC) const;

  /// log_ratio minus lan_center: the expansion error at rescaled u.
  double residual(const Eigen::VectorXd& z, double u,
                  CovarianceKind kind = CovarianceKind::ExactC) const;

 private:
  const GaussianDensity& density_at(double theta, CovarianceKind kind) const;

  ModelSpec spec_;
  Regime regime_;
  LimitConstants limits_;
  GbarDct gbar_;
  Eigen::MatrixXd kernel_;
  double even_trace_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, int>, std::unique_ptr<GaussianDensity>>
      cache_;
};

/// Squared Hellinger distance between two centered Gaussians,
/// 2 (1 - det(A)^{1/4} det(B)^{1/4} / det((A+B)/2)^{1/2}), evaluated in
/// log-space through one eigendecomposition of the midpoint-whitened
/// difference; exact zero for identical inputs.  Throws std::domain_error
/// when either input is not PD.
double hellinger_squared(const CovarianceModel& a, const CovarianceModel& b);

/// Hellinger distance, the square root of hellinger_squared.
double hellinger(const CovarianceModel& a, const CovarianceModel& b);

/// Log-likelihood profile c -> loglik of fixed data under the differenced
/// family at lag c * eta, backed by a sparse factorization with the
/// symbolic analysis shared across evaluations.  Lags outside the
/// admissible range and non-PD matrices yield -infinity rather than
/// throwing, so optimizers can probe the whole interval.
class QuasiLikelihood {
 public:
  QuasiLikelihood(const ModelSpec& spec, const Eigen::VectorXd& z,
                  double eta);

  double eta() const { return eta_; }
  int n() const { return spec_.n; }

  double operator()(double c) const;

 private:
  ModelSpec spec_;
  double eta_ = 0.0;
  DiffCovFamily family_;
  Eigen::VectorXd ztilde_;
  mutable Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  mutable bool pattern_ready_ = false;
};

/// Search interval, kink handling, and tolerances shared by the two
/// estimators.  The profile is optimized separately on [c_lo, 0] and
/// [0, c_hi] because the lag family is only one-sidedly smooth at zero.
struct EstimateOptions {
  double c_lo = -5.0;
  double c_hi = 5.0;
  int grid_per_side = 33;   ///< coarse scan nodes on each side
  double c_tol = 1e-6;      ///< golden-section bracket width
  double quad_tol = 1e-8;   ///< Simpson tolerance for the posterior mean
  std::function<double(double)> prior;  ///< posterior weight; empty: uniform
};

struct QmleResult {
  double c_hat = 0.0;
  double value = 0.0;  ///< profile value at c_hat
  int evals = 0;
  bool ok = false;  ///< false when every evaluation was non-finite
};

/// Maximizes the profile over the closure of the interval: coarse grid on
/// each side of the kink, then golden-section refinement of the best
/// bracket, better side wins.
QmleResult qmle(const std::function<double(double)>& profile,
                const EstimateOptions& opt = {});

struct QbeResult {
  double c_tilde = 0.0;
  double mass = 0.0;  ///< posterior normalizer on the exp(profile - max) scale
  double err = 0.0;   ///< accumulated quadrature error estimate
  int evals = 0;
  bool converged = false;  ///< quadrature met its tolerance everywhere
  bool ok = false;
};

/// Posterior mean of c under exp(profile) times the prior: adaptive Simpson
/// on each side of the kink with the profile maximum subtracted before
/// exponentiation.
QbeResult qbe(const std::function<double(double)>& profile,
              const EstimateOptions& opt = {});

// The profile object holds a factorization and therefore cannot be copied
// into a std::function; these wrappers capture it by reference.
inline QmleResult qmle(const QuasiLikelihood& lik,
                       const EstimateOptions& opt = {}) {
  return qmle([&lik](double c) { return lik(c); }, opt);
}

inline QbeResult qbe(const QuasiLikelihood& lik,
                     const EstimateOptions& opt = {}) {
  return qbe([&lik](double c) { return lik(c); }, opt);
}

}  // namespace laglan
