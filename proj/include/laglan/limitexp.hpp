#pragma once

#include <cstdint>
#include <vector>

namespace laglan {

/// Half-line Gaussian tail transform psi(x) = int_0^inf e^{u x - u^2/2} du
/// = sqrt(2 pi) e^{x^2/2} Phi(x).  The product form is used down to x = -30;
/// below that the Mills-ratio series -1/x (1 - 1/x^2 + 3/x^4 - ...) takes
/// over before the product degenerates to inf * 0.  At least 10 significant
/// digits over |x| <= 8 and graceful behavior in both tails (overflows to
/// inf only past x ~ 38.6, where the true value exceeds double range).
double psi(double x);

/// log psi(x), finite for every finite x.
double log_psi(double x);

/// (x psi(x) - y psi(y)) / (psi(x) + psi(y)) evaluated in log space: the
/// posterior-mean kernel of the limit experiment in standardized
/// coordinates, safe for arguments far beyond the overflow point of psi.
double posterior_ratio(double x, double y);

/// Argmax over u of u zeta1 + |u| zeta2 - u^2 (I + J) / 2, by the
/// three-branch closed form; the middle branch is the atom at zero.
double u_hat(double zeta1, double zeta2, double I, double J);

/// Posterior mean of u under the same process with a flat prior:
/// posterior_ratio at x = (zeta1+zeta2)/sqrt(I+J), y = (zeta2-zeta1)/sqrt(I+J),
/// scaled by 1/sqrt(I+J).  Collapses to zeta1 / I exactly when J = 0.
double u_tilde(double zeta1, double zeta2, double I, double J);

/// One draw of the limit experiment with both estimator functionals.
struct LimitDraw {
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double u_hat = 0.0;
  double u_tilde = 0.0;
};

/// m independent draws at the limit constants of (rho, gamma): zeta1 ~
/// N(0, I) and zeta2 ~ N(0, J) independent.  Draws are generated in
/// substream chunks of 8192, so batches are prefix-stable in m and
/// parallelize across chunks.
std::vector<LimitDraw> sample_limit(double rho, double gamma,
                                    std::uint64_t seed, int m);

/// E[u_hat^2] = (1/(I+J)) (1 - arctan(sqrt(J/I))/pi + sqrt(I J)/(pi (I+J))).
/// Reduces to 1/I exactly at J = 0.  Throws std::domain_error unless I > 0
/// and J >= 0.
double mle_limit_variance(double I, double J);

/// P(u_hat = 0) = arctan(sqrt(J/I)) / pi, the atom of the argmax at zero.
double argmax_zero_probability(double I, double J);

struct QuadratureValue {
  double value = 0.0;
  double previous = 0.0;  ///< estimate at half the node count
  int nodes = 0;
  bool converged = false;
};

/// E[u_tilde^2] by tensor Gauss-Hermite quadrature in decorrelated
/// coordinates (x = s, y = R s + sqrt(1-R^2) t with s, t independent
/// standard normals and R = (J-I)/(J+I)), doubling the per-axis node count
/// until the relative change drops below 1e-6.
QuadratureValue bayes_limit_variance_quad(double I, double J);

/// Value of bayes_limit_variance_quad; throws std::runtime_error quoting
/// the last two estimates if node doubling fails to settle.
double bayes_limit_variance(double I, double J);

}  // namespace laglan
