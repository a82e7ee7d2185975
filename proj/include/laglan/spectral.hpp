#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "laglan/model.hpp"

/// @file spectral.hpp
/// Cosine basis that diagonalizes the difference product F, spectral images
/// of the structure matrices, asymptotic limit constants, and the
/// Frobenius-norm diagnostics built on top of them.
///
/// The basis is the symmetric orthogonal matrix with entries
///   u_ij = 2 cos(xi_i (2j - 1)) / sqrt(2n + 1),   xi_i = pi (i - 1/2) / (2n + 1),
/// under which U F U = diag(lambda), lambda_i = 2 (1 - cos 2 xi_i).
/// The doubled basis (1/sqrt 2) [[U, -U], [U, U]] block-diagonalizes Gbar into
/// scalar spectra f_{1+rho} and f_{1-rho} with f_a(x) = a/n + 2 v_n (1 - cos x).

namespace laglan {

struct DctBasis {
  int n = 0;
  Eigen::VectorXd xi;      ///< angles xi_i
  Eigen::VectorXd lambda;  ///< eigenvalues of F: 2 (1 - cos 2 xi_i)
  Eigen::VectorXd c;       ///< first column of U (image of e_1)
  Eigen::MatrixXd U;       ///< symmetric orthogonal basis
};

/// Builds the basis for sample size n.  O(n^2) cosines with exact integer
/// angle reduction, so orthogonality holds to near machine precision.
DctBasis dct_basis(int n);

/// Spectral image of T + R under conjugation by the basis, evaluated through
/// its closed-form sine kernel in O(n^2) without touching U.  The result is
/// not symmetric; its transpose is the image of R - T, and subtracting the
/// rank-one c c^T (image of R) leaves the image of T.
Eigen::MatrixXd cross_kernel(const DctBasis& basis);

// ---------------------------------------------------------------------------
// Scalar spectra
// ---------------------------------------------------------------------------

/// Scalar spectral functions attached to one model size: f_a is the spectrum
/// of a E/n + v_n F along the basis angles, g_a = sin / f_a its oscillating
/// relative.
struct SpectralFns {
  int n = 0;
  double v_n = 0.0;

  double f(double a, double x) const {
    return a / n + 2.0 * v_n * (1.0 - std::cos(x));
  }
  double g(double a, double x) const { return std::sin(x) / f(a, x); }

  /// Exact supremum of g_a over (0, pi).
  double sup_g(double a) const {
    const double an = a / n;
    return 1.0 / std::sqrt(an * an + 4.0 * an * v_n);
  }

  /// Uniform bound on |g_a'|.
  double derivative_bound(double a) const { return 3.0 * n / a; }
};

// ---------------------------------------------------------------------------
// Limit constants
// ---------------------------------------------------------------------------

/// Limiting Frobenius mass of one noise channel with weight a; the even
/// variance constant combines the two channels at weights 1 +- rho.
double single_channel_limit(double a, double gamma);

/// Variance constants of the two limiting statistics.  gamma is the limit of
/// n v_n and may be infinity; rho is the driving correlation.
struct LimitConstants {
  double rho = 0.0;
  double gamma = 0.0;  ///< may be +infinity
  double I = 0.0;      ///< variance of the odd (sign-sensitive) statistic
  double J = 0.0;      ///< variance of the even (magnitude) statistic

  /// Single-channel Frobenius limit as a function of the channel weight a;
  /// J = rho^2 (J0(1 + rho) + J0(1 - rho)) / 8.
  double J0(double a) const;
};

LimitConstants limit_constants(double rho, double gamma);

/// Limit constants for the regime a spec lives in.
LimitConstants limit_constants(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Frobenius diagnostics
// ---------------------------------------------------------------------------

/// Finite-n Frobenius mass of the scaled score combination against its limit.
struct FrobeniusReport {
  int n = 0;
  double rho = 0.0, v_n = 0.0;
  double alpha = 0.0, beta = 0.0;
  GammaMode mode = GammaMode::Zero;
  double gamma = 0.0;
  double N = 0.0, r = 0.0;
  double lhs = 0.0;      ///< rho^2 r^2 ||Gbar^{-1/2}(a Tbar + b Sbar) Gbar^{-1/2}||_F^2
  double rhs = 0.0;      ///< 2 (alpha^2 I + beta^2 J)
  double rel_err = 0.0;  ///< against rhs; against 2(alpha^2+beta^2) I when rhs = 0
  double sp_norm_scaled = 0.0;  ///< ||Gbar^{-1/2}(..)Gbar^{-1/2}||_2 / N
};

/// Evaluates the report through the spectral representation: one O(n^2)
/// kernel for the odd part, O(n) sums for the even part, and a power
/// iteration for the spectral norm.
FrobeniusReport frobenius_limit_check(const ModelSpec& spec, double alpha,
                                      double beta);

/// Same quantities from dense eigendecompositions; O(n^3), for cross-checks.
FrobeniusReport frobenius_limit_check_dense(const ModelSpec& spec,
                                            double alpha, double beta);

// ---------------------------------------------------------------------------
// Lemma-level diagnostics
// ---------------------------------------------------------------------------

/// One finite-n quantity against its asymptotic limit.  When no limit is
/// claimed (bound-only quantities) limit and rel_err are NaN; when the limit
/// is exactly zero rel_err holds the absolute value instead.
struct LemmaReport {
  std::string id;
  int n = 0;
  double a = 0.0, b = 0.0, c = 0.0;
  double value = 0.0;
  double limit = 0.0;
  double rel_err = 0.0;
};

/// Mass of the leading fraction c of the resolvent spectrum 1/f_a, scaled by
/// 1/(n N).
LemmaReport resolvent_mass_check(const ModelSpec& spec, double a, double c);

/// Scaled cross-product r^2 sum of g_a g_b over the leading fraction c.
LemmaReport resolvent_cross_check(const ModelSpec& spec, double a, double b,
                                  double c);

/// Pure trigonometric sine-power sum; approaches 2 from the diagonal of the
/// cross kernel.
LemmaReport sine_power_sum_check(int n);

/// r^2 ||G_a^{-1/2} S G_a^{-1/2}||_F^2 against the single-channel limit J0(a).
LemmaReport single_channel_frobenius_check(const ModelSpec& spec, double a);

/// r^2 ||G_a^{-1/2} T G_b^{-1/2}||_F^2 against its two-channel limit.
LemmaReport cross_channel_frobenius_check(const ModelSpec& spec, double a,
                                          double b);

/// Scaled corner mass N^{-2} (e_1^T G_a^{-1} e_1)(e_1^T G_b^{-1} e_1); bounded
/// along n but with no claimed limit.
LemmaReport corner_mass_check(const ModelSpec& spec, double a, double b);

/// All six diagnostics at shared parameters (a, b, c).
std::vector<LemmaReport> lemma_diagnostics(const ModelSpec& spec, double a,
                                           double b, double c);

// ---------------------------------------------------------------------------
// Block-spectral operator
// ---------------------------------------------------------------------------

/// Gbar in the doubled cosine basis.  Solves, log-determinants, quadratic
/// forms, and exact sampling all reduce to the two scalar spectra plus two
/// dense U multiplications.
class GbarDct {
 public:
  GbarDct(DctBasis basis, double rho, double v_n);

  const DctBasis& basis() const { return basis_; }
  int n() const { return basis_.n; }
  double rho() const { return rho_; }
  double v_n() const { return v_n_; }
  const Eigen::VectorXd& f_plus() const { return fp_; }
  const Eigen::VectorXd& f_minus() const { return fm_; }

  double log_det() const;

  /// W = Ubar^T z.
  Eigen::VectorXd to_spectral(const Eigen::VectorXd& z) const;
  /// z = Ubar w.
  Eigen::VectorXd from_spectral(const Eigen::VectorXd& w) const;

  Eigen::VectorXd solve(const Eigen::VectorXd& z) const;
  double quad_form(const Eigen::VectorXd& z) const;

  /// Draws N(0, Gbar) exactly: 2n standard normals scaled by sqrt(f) in the
  /// spectral domain, then rotated back.
  Eigen::VectorXd sample(std::mt19937_64& rng) const;

  /// Same draw left in spectral coordinates (saves the rotation when the
  /// consumer works spectrally anyway).
  Eigen::VectorXd sample_spectral(std::mt19937_64& rng) const;

 private:
  DctBasis basis_;
  double rho_ = 0.0;
  double v_n_ = 0.0;
  Eigen::VectorXd fp_, fm_;
};

}  // namespace laglan
