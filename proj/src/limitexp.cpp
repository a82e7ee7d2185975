#include "laglan/limitexp.hpp"

#include "laglan/numerics.hpp"
#include "laglan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace laglan {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Below this point the product e^{x^2/2} Phi(x) approaches inf * 0; the
// Mills-ratio series is already accurate to ~1e-12 here and improves as x
// falls further.
constexpr double kMillsCut = -30.0;

// Mills-ratio asymptotic series for psi at large negative x:
//   psi(x) = -1/x (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
// Asymptotic, so summation stops when terms no longer shrink.
double mills_series(double x) {
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    if (std::abs(term) < 1e-17 * sum) break;
    sum += term;
  }
  return sum;  // psi(x) = sum / (-x)
}

void check_limit_args(double I, double J, const char* who) {
  if (!(I > 0.0)) {
    std::ostringstream msg;
    msg << who << ": requires I > 0, got I = " << I;
    throw std::domain_error(msg.str());
  }
  if (!(J >= 0.0)) {
    std::ostringstream msg;
    msg << who << ": requires J >= 0, got J = " << J;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double psi(double x) {
  if (x <= kMillsCut) return mills_series(x) / -x;
  return kSqrt2Pi * std::exp(0.5 * x * x) * normal_cdf(x);
}

double log_psi(double x) {
  if (x <= kMillsCut) return std::log(mills_series(x)) - std::log(-x);
  if (x >= 8.0) {
    // Phi(x) = 1 - Phi(-x) with Phi(-x) tiny; log1p keeps full precision.
    return kHalfLog2Pi + 0.5 * x * x + std::log1p(-normal_cdf(-x));
  }
  return std::log(psi(x));
}

double posterior_ratio(double x, double y) {
  const double lx = log_psi(x);
  const double ly = log_psi(y);
  const double top = std::max(lx, ly);
  const double ex = std::exp(lx - top);
  const double ey = std::exp(ly - top);
  return (x * ex - y * ey) / (ex + ey);
}

double u_hat(double zeta1, double zeta2, double I, double J) {
  const double curvature = I + J;
  if (zeta1 > std::max(-zeta2, 0.0)) return (zeta1 + zeta2) / curvature;
  if (zeta1 < std::min(zeta2, 0.0)) return (zeta1 - zeta2) / curvature;
  return 0.0;
}

double u_tilde(double zeta1, double zeta2, double I, double J) {
  if (J == 0.0) return zeta1 / I;  // y = -x and the ratio collapses exactly
  const double root = std::sqrt(I + J);
  return posterior_ratio((zeta1 + zeta2) / root, (zeta2 - zeta1) / root) /
         root;
}

std::vector<LimitDraw> sample_limit(double rho, double gamma,
                                    std::uint64_t seed, int m) {
  if (m < 0) throw std::invalid_argument("sample_limit: m must be >= 0");
  const LimitConstants lc = limit_constants(rho, gamma);
  const double sd1 = std::sqrt(lc.I);
  const double sd2 = std::sqrt(lc.J);
  std::vector<LimitDraw> draws(static_cast<std::size_t>(m));
  constexpr int kChunk = 8192;
  const std::size_t chunks =
      (static_cast<std::size_t>(m) + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng = substream_engine(seed, c);
    std::normal_distribution<double> normal;
    const int lo = static_cast<int>(c) * kChunk;
    const int hi = std::min(m, lo + kChunk);
    for (int i = lo; i < hi; ++i) {
      const double g1 = normal(rng);
      const double g2 = normal(rng);  // drawn even when sd2 = 0: keeps the
                                      // stream alignment regime-independent
      LimitDraw& d = draws[static_cast<std::size_t>(i)];
      d.zeta1 = sd1 * g1;
      d.zeta2 = sd2 * g2;
      d.u_hat = laglan::u_hat(d.zeta1, d.zeta2, lc.I, lc.J);
      d.u_tilde = laglan::u_tilde(d.zeta1, d.zeta2, lc.I, lc.J);
    }
  });
  return draws;
}

double mle_limit_variance(double I, double J) {
  check_limit_args(I, J, "mle_limit_variance");
  const double total = I + J;
  return (1.0 - std::atan(std::sqrt(J / I)) / M_PI +
          std::sqrt(I * J) / (M_PI * total)) /
         total;
}

double argmax_zero_probability(double I, double J) {
  check_limit_args(I, J, "argmax_zero_probability");
  return std::atan(std::sqrt(J / I)) / M_PI;
}

QuadratureValue bayes_limit_variance_quad(double I, double J) {
  check_limit_args(I, J, "bayes_limit_variance");
  QuadratureValue out;
  if (J == 0.0) {
    out.value = 1.0 / I;
    out.previous = out.value;
    out.converged = true;
    return out;
  }
  const double total = I + J;
  const double corr = (J - I) / total;
  const double resid = std::sqrt(1.0 - corr * corr);
  const double sqrt2 = std::sqrt(2.0);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 20; k <= 1280; k *= 2) {
    const GaussHermite rule = gauss_hermite(k);
    // (x, y) standard bivariate normal with correlation corr, decorrelated
    // as x = s, y = corr s + resid t over independent s, t.
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      const double s = sqrt2 * rule.nodes[i];
      double row = 0.0;
      for (int j = 0; j < k; ++j) {
        const double t = sqrt2 * rule.nodes[j];
        const double g = posterior_ratio(s, corr * s + resid * t);
        row += rule.weights[j] * g * g;
      }
      acc += rule.weights[i] * row;
    }
    const double value = acc / (M_PI * total);
    out.previous = prev;
    out.value = value;
    out.nodes = k;
    if (std::isfinite(prev) &&
        std::abs(value - prev) <= 1e-6 * std::abs(value)) {
      out.converged = true;
      break;
    }
    prev = value;
  }
  return out;
}

double bayes_limit_variance(double I, double J) {
  const QuadratureValue q = bayes_limit_variance_quad(I, J);
  if (!q.converged) {
    std::ostringstream msg;
    msg << "bayes_limit_variance: node doubling stalled at " << q.nodes
        << " nodes per axis; last two estimates " << q.previous << " and "
        << q.value;
    throw std::runtime_error(msg.str());
  }
  return q.value;
}

}  // namespace laglan
