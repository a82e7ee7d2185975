#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

/// @file numerics.hpp
/// Shared numerical plumbing: reproducible RNG substreams, scalar
/// optimization, quadrature, Gauss-Hermite rules, and small statistical
/// helpers used by the simulation and estimation layers.

namespace laglan {

/// Advances a 64-bit SplitMix state and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Builds an independent engine for logical stream `stream` under a master
/// seed.  Streams are stable: (seed, stream) fully determines the engine
/// state, so replication r can be regenerated without drawing r-1 others.
std::mt19937_64 substream_engine(std::uint64_t seed, std::uint64_t stream);

/// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// ---------------------------------------------------------------------------
// Scalar maximization
// ---------------------------------------------------------------------------

struct GoldenResult {
  double x = 0.0;      ///< argmax estimate
  double value = 0.0;  ///< objective at x
  int evals = 0;       ///< number of objective evaluations
};

/// Golden-section search for the maximum of a unimodal objective on [lo, hi].
/// Shrinks the bracket until its width falls below xtol.
template <class F>
GoldenResult golden_section_max(F&& f, double lo, double hi, double xtol) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  GoldenResult out;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  out.evals = 2;
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
    ++out.evals;
    if (out.evals > 400) break;  // xtol below spacing of doubles; bail out
  }
  if (f1 < f2) {
    out.x = x2;
    out.value = f2;
  } else {
    out.x = x1;
    out.value = f1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadResult {
  Eigen::VectorXd value;  ///< integral estimate, one entry per component
  double err = 0.0;       ///< accumulated local error estimate (max norm)
  int evals = 0;
  bool converged = true;
};

namespace detail {

template <class F>
void simpson_recurse(F& f, double a, double m, double b,
                     const Eigen::VectorXd& fa, const Eigen::VectorXd& fm,
                     const Eigen::VectorXd& fb, const Eigen::VectorXd& whole,
                     double tol, int depth, QuadResult& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Eigen::VectorXd flm = f(lm);
  const Eigen::VectorXd frm = f(rm);
  out.evals += 2;
  const Eigen::VectorXd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Eigen::VectorXd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Eigen::VectorXd delta = left + right - whole;
  const double err = delta.cwiseAbs().maxCoeff();
  if (depth <= 0 || err < 15.0 * tol) {
    // Richardson extrapolation on the two-panel estimate.
    out.value += left + right + delta / 15.0;
    out.err += err / 15.0;
    if (depth <= 0 && err >= 15.0 * tol) out.converged = false;
    return;
  }
  simpson_recurse(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1, out);
  simpson_recurse(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1, out);
}

}  // namespace detail

/// Adaptive Simpson quadrature for a vector-valued integrand on [a, b].
/// `tol` is an absolute tolerance on the max-norm of the result.
template <class F>
QuadResult adaptive_simpson(F&& f, double a, double b, double tol,
                            int max_depth = 30) {
  QuadResult out;
  const double m = 0.5 * (a + b);
  const Eigen::VectorXd fa = f(a);
  const Eigen::VectorXd fm = f(m);
  const Eigen::VectorXd fb = f(b);
  out.evals = 3;
  out.value = Eigen::VectorXd::Zero(fa.size());
  const Eigen::VectorXd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::simpson_recurse(f, a, m, b, fa, fm, fb, whole, tol, max_depth, out);
  return out;
}

/// Nodes and weights for the physicists' Gauss-Hermite rule:
///   integral of exp(-t^2) f(t) dt  ==  sum_i weights[i] * f(nodes[i]).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Computes the k-point Gauss-Hermite rule from the Jacobi matrix of the
/// Hermite recurrence (eigenvalues give nodes, first eigenvector components
/// give weights).
GaussHermite gauss_hermite(int k);

// ---------------------------------------------------------------------------
// Sample statistics
// ---------------------------------------------------------------------------

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
double ks_statistic(std::vector<double> xs,
                    const std::function<double(double)>& cdf);

/// Pearson correlation of two equally long samples.
double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y);

double sample_mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // denominator m-1
double median(std::vector<double> x);

// ---------------------------------------------------------------------------
// Parallel map
// ---------------------------------------------------------------------------

/// Number of worker threads: LAGLAN_THREADS if set, hardware concurrency
/// otherwise, at least 1.
int worker_count();

/// Runs fn(i) for i in [0, count).  Work items must be independent; results
/// should be written to preassigned slots so the output does not depend on
/// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace laglan
