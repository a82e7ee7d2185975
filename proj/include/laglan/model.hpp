#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace laglan {

// Declared limit of n * v_n along the experiment sequence.  The pair
// (n, v_n) alone cannot identify the limit, so the caller states it and
// every rate downstream is derived from the declaration.
enum class GammaMode { Zero, Finite, Infinite };

inline const char* to_string(GammaMode m) {
  switch (m) {
    case GammaMode::Zero: return "zero";
    case GammaMode::Finite: return "finite";
    case GammaMode::Infinite: return "infinite";
  }
  return "?";
}

// One observation design: n samples per series on [0, 1], correlation rho,
// noise variance v_n, time lag theta.
struct ModelSpec {
  int n = 0;
  double rho = 0.0;
  double v_n = 0.0;
  double theta = 0.0;
  GammaMode gamma_mode = GammaMode::Zero;
  double gamma = 0.0;  // used when gamma_mode == Finite

  void validate() const;
};

// Effective sample size and localization rate implied by the noise regime.
struct Regime {
  GammaMode mode;
  double gamma;  // 0, finite value, or +inf
  double N;      // sqrt(n / v_n) when gamma = inf, else n
  double r;      // N^(-3/2)
};

inline void ModelSpec::validate() const {
  if (n < 1) throw std::invalid_argument("ModelSpec: n must be >= 1");
  if (!(rho > -1.0 && rho < 1.0) || rho == 0.0)
    throw std::invalid_argument("ModelSpec: rho must lie in (-1,0) or (0,1)");
  if (!(v_n >= 0.0) || !std::isfinite(v_n))
    throw std::invalid_argument("ModelSpec: v_n must be finite and >= 0");
  if (gamma_mode == GammaMode::Infinite && v_n <= 0.0)
    throw std::invalid_argument(
        "ModelSpec: gamma_mode = infinite requires v_n > 0");
  if (gamma_mode == GammaMode::Finite && !(gamma >= 0.0))
    throw std::invalid_argument("ModelSpec: finite gamma must be >= 0");
}

inline Regime classify_regime(const ModelSpec& spec) {
  spec.validate();
  Regime reg;
  reg.mode = spec.gamma_mode;
  switch (spec.gamma_mode) {
    case GammaMode::Zero:
      reg.gamma = 0.0;
      reg.N = static_cast<double>(spec.n);
      break;
    case GammaMode::Finite:
      reg.gamma = spec.gamma;
      reg.N = static_cast<double>(spec.n);
      break;
    case GammaMode::Infinite:
      reg.gamma = std::numeric_limits<double>::infinity();
      reg.N = std::sqrt(static_cast<double>(spec.n) / spec.v_n);
      break;
  }
  reg.r = std::pow(reg.N, -1.5);
  return reg;
}

// Largest |theta| for which the observed-difference covariance stays a valid
// Gaussian model: the lagged series' residual noise variance
// v_n - n theta^2 + |theta| must be nonnegative.
inline double theta_bound(int n, double v_n) {
  return (1.0 + std::sqrt(1.0 + 4.0 * n * v_n)) / (2.0 * n);
}

inline bool in_theta_range(const ModelSpec& spec) {
  return std::abs(spec.theta) <= theta_bound(spec.n, spec.v_n);
}

}  // namespace laglan
