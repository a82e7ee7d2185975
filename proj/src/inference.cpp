#include "laglan/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "laglan/numerics.hpp"

namespace laglan {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Eigen::VectorXd block_difference(const Eigen::VectorXd& z) {
  const Eigen::Index size = z.size();
  if (size % 2 != 0) {
    throw std::invalid_argument("block_difference: even length required");
  }
  const Eigen::Index half = size / 2;
  Eigen::VectorXd out(size);
  for (Eigen::Index b = 0; b < size; b += half) {
    out(b) = z(b);
    for (Eigen::Index i = 1; i < half; ++i) {
      out(b + i) = z(b + i) - z(b + i - 1);
    }
  }
  return out;
}

Eigen::VectorXd block_cumsum(const Eigen::VectorXd& z) {
  const Eigen::Index size = z.size();
  if (size % 2 != 0) {
    throw std::invalid_argument("block_cumsum: even length required");
  }
  const Eigen::Index half = size / 2;
  Eigen::VectorXd out(size);
  for (Eigen::Index b = 0; b < size; b += half) {
    out(b) = z(b);
    for (Eigen::Index i = 1; i < half; ++i) {
      out(b + i) = out(b + i - 1) + z(b + i);
    }
  }
  return out;
}

GaussianDensity::GaussianDensity(CovarianceModel model)
    : model_(std::move(model)) {
  llt_.compute(model_.matrix);
  if (llt_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "GaussianDensity: " << to_string(model_.kind)
        << " covariance at theta = " << model_.spec.theta
        << " is not positive definite";
    throw std::domain_error(msg.str());
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double GaussianDensity::loglik(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd zz = (model_.kind == CovarianceKind::DifferencedV)
                                 ? block_difference(z)
                                 : z;
  const double quad = zz.dot(llt_.solve(zz));
  return -model_.spec.n * kLog2Pi - 0.5 * (log_det_ + quad);
}

double loglik(const ModelSpec& spec, const Eigen::VectorXd& z,
              CovarianceKind kind) {
  return GaussianDensity(make_covariance(spec, kind)).loglik(z);
}

double lan_center(const LanStats& stats, double u) {
  return u * stats.T + std::abs(u) * stats.S -
         0.5 * u * u * (stats.I + stats.J);
}

LanEngine::LanEngine(ModelSpec spec)
    : spec_(std::move(spec)),
      regime_(classify_regime(spec_)),
      limits_(limit_constants(spec_)),
      gbar_(dct_basis(spec_.n), spec_.rho, spec_.v_n),
      kernel_(cross_kernel(gbar_.basis())) {
  spec_.theta = 0.0;
  const Eigen::ArrayXd lam = gbar_.basis().lambda.array();
  const Eigen::ArrayXd c2 = gbar_.basis().c.array().square();
  even_trace_ = 0.5 * (((lam + 2.0 * c2) / gbar_.f_plus().array()).sum() -
                       (lam / gbar_.f_minus().array()).sum());
}

LanStats LanEngine::stats(const Eigen::VectorXd& z) const {
  return stats_spectral(gbar_.to_spectral(block_difference(z)));
}

LanStats LanEngine::stats_spectral(const Eigen::VectorXd& w) const {
  const int n = spec_.n;
  const Eigen::VectorXd a1 =
      (w.head(n).array() / gbar_.f_plus().array()).matrix();
  const Eigen::VectorXd a2 =
      (w.tail(n).array() / gbar_.f_minus().array()).matrix();

  const double quad_odd = a1.dot(kernel_ * a2);

  const Eigen::ArrayXd lam = gbar_.basis().lambda.array();
  const double cw = gbar_.basis().c.dot(a1);
  const double quad_even = 0.5 * ((lam * a1.array().square()).sum() +
                                  2.0 * cw * cw -
                                  (lam * a2.array().square()).sum());

  // Orientation: the covariance family moves as Gbar minus the lag terms,
  // so the centered quadratic forms acquire a NEGATIVE mean under a
  // positive lag; the leading minus points both statistics the way the
  // expansion needs (odd statistic drifts to +u I under lag r u).
  const double scale = -0.5 * spec_.rho * regime_.r;
  LanStats out;
  out.T = scale * quad_odd;  // odd centering vanishes identically
  out.S = scale * (quad_even - even_trace_);
  out.I = limits_.I;
  out.J = limits_.J;
  return out;
}

const GaussianDensity& LanEngine::density_at(double theta,
                                             CovarianceKind kind) const {
  const std::pair<double, int> key(theta, static_cast<int>(kind));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    ModelSpec at = spec_;
    at.theta = theta;
    it = cache_
             .emplace(key, std::make_unique<GaussianDensity>(
                               make_covariance(at, kind)))
             .first;
  }
  return *it->second;
}

double LanEngine::log_ratio(const Eigen::VectorXd& z, double u,
                            CovarianceKind kind) const {
  const GaussianDensity& shifted = density_at(regime_.r * u, kind);
  const GaussianDensity& origin = density_at(0.0, kind);
  return shifted.loglik(z) - origin.loglik(z);
}

double LanEngine::residual(const Eigen::VectorXd& z, double u,
                           CovarianceKind kind) const {
  return log_ratio(z, u, kind) - lan_center(stats(z), u);
}

double hellinger_squared(const CovarianceModel& a, const CovarianceModel& b) {
  const Eigen::MatrixXd& A = a.matrix;
  const Eigen::MatrixXd& B = b.matrix;
  if (A.rows() != B.rows()) {
    throw std::invalid_argument("hellinger: dimension mismatch");
  }

  const Eigen::MatrixXd mid = 0.5 * (A + B);
  Eigen::LLT<Eigen::MatrixXd> llt(mid);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("hellinger: midpoint covariance is not PD");
  }

  // Whiten the half-difference by the midpoint: A and B are PD exactly when
  // every eigenvalue nu of the whitened difference has |nu| < 1, and
  // det A det B = det(mid)^2 prod (1 - nu^2).
  const Eigen::MatrixXd diff = 0.5 * (A - B);
  const Eigen::MatrixXd half = llt.matrixL().solve(diff);
  const Eigen::MatrixXd white = llt.matrixL().solve(half.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(white,
                                                     Eigen::EigenvaluesOnly);

  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double nu = eig.eigenvalues()(i);
    if (!(std::abs(nu) < 1.0)) {
      throw std::domain_error("hellinger: an input covariance is not PD");
    }
    log_sum += std::log1p(-nu * nu);
  }
  return -2.0 * std::expm1(0.25 * log_sum);
}

double hellinger(const CovarianceModel& a, const CovarianceModel& b) {
  return std::sqrt(std::max(0.0, hellinger_squared(a, b)));
}

QuasiLikelihood::QuasiLikelihood(const ModelSpec& spec,
                                 const Eigen::VectorXd& z, double eta)
    : spec_(spec),
      eta_(eta),
      family_(spec.n, spec.rho, spec.v_n),
      ztilde_(block_difference(z)) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("QuasiLikelihood: eta > 0 required");
  }
}

double QuasiLikelihood::operator()(double c) const {
  const double theta = c * eta_;
  if (!(std::abs(theta) <= theta_bound(spec_.n, spec_.v_n))) return kNegInf;

  const Eigen::SparseMatrix<double> v = family_.matrix(theta);
  if (!pattern_ready_) {
    solver_.analyzePattern(v);
    pattern_ready_ = true;
  }
  solver_.factorize(v);
  if (solver_.info() != Eigen::Success) return kNegInf;
  const Eigen::VectorXd d = solver_.vectorD();
  if (d.minCoeff() <= 0.0) return kNegInf;

  const double log_det = d.array().log().sum();
  const double quad = ztilde_.dot(solver_.solve(ztilde_));
  return -spec_.n * kLog2Pi - 0.5 * (log_det + quad);
}

namespace {

struct SideScan {
  bool any = false;
  double c = 0.0;
  double value = kNegInf;
  int evals = 0;
};

// Coarse grid over [lo, hi], then golden-section inside the bracket around
// the best node.  Non-finite values lose every comparison.
SideScan scan_side(const std::function<double(double)>& profile, double lo,
                   double hi, int nodes, double xtol) {
  SideScan out;
  std::vector<double> cs(nodes), vs(nodes);
  for (int i = 0; i < nodes; ++i) {
    cs[i] = lo + (hi - lo) * i / (nodes - 1);
    vs[i] = profile(cs[i]);
  }
  out.evals = nodes;

  int best = -1;
  for (int i = 0; i < nodes; ++i) {
    if (std::isfinite(vs[i]) && (best < 0 || vs[i] > vs[best])) best = i;
  }
  if (best < 0) return out;

  out.any = true;
  out.c = cs[best];
  out.value = vs[best];

  const GoldenResult fine =
      golden_section_max(profile, cs[std::max(best - 1, 0)],
                         cs[std::min(best + 1, nodes - 1)], xtol);
  out.evals += fine.evals;
  if (std::isfinite(fine.value) && fine.value > out.value) {
    out.c = fine.x;
    out.value = fine.value;
  }
  return out;
}

std::vector<std::pair<double, double>> kink_sides(const EstimateOptions& opt) {
  if (!(opt.c_lo < opt.c_hi)) {
    throw std::invalid_argument("EstimateOptions: c_lo < c_hi required");
  }
  if (opt.grid_per_side < 2) {
    throw std::invalid_argument("EstimateOptions: grid_per_side >= 2");
  }
  std::vector<std::pair<double, double>> sides;
  if (opt.c_lo < 0.0) sides.emplace_back(opt.c_lo, std::min(0.0, opt.c_hi));
  if (opt.c_hi > 0.0) sides.emplace_back(std::max(0.0, opt.c_lo), opt.c_hi);
  return sides;
}

}  // namespace

QmleResult qmle(const std::function<double(double)>& profile,
                const EstimateOptions& opt) {
  QmleResult out;
  for (const auto& [lo, hi] : kink_sides(opt)) {
    const SideScan side =
        scan_side(profile, lo, hi, opt.grid_per_side, opt.c_tol);
    out.evals += side.evals;
    if (side.any && (!out.ok || side.value > out.value)) {
      out.ok = true;
      out.c_hat = side.c;
      out.value = side.value;
    }
  }
  return out;
}

QbeResult qbe(const std::function<double(double)>& profile,
              const EstimateOptions& opt) {
  QbeResult out;
  const QmleResult peak = qmle(profile, opt);
  out.evals = peak.evals;
  if (!peak.ok) return out;

  const double scale = peak.value;
  auto integrand = [&](double c) -> Eigen::VectorXd {
    const double lq = profile(c);
    double w = std::isfinite(lq) ? std::exp(lq - scale) : 0.0;
    if (opt.prior) w *= opt.prior(c);
    return Eigen::Vector2d(w, c * w);
  };

  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  out.converged = true;
  for (const auto& [lo, hi] : kink_sides(opt)) {
    const QuadResult q = adaptive_simpson(integrand, lo, hi, opt.quad_tol);
    total += q.value;
    out.err += q.err;
    out.evals += q.evals;
    out.converged = out.converged && q.converged;
  }

  if (!(total(0) > 0.0) || !std::isfinite(total(0))) {
    out.converged = false;
    return out;
  }
  out.mass = total(0);
  out.c_tilde = total(1) / total(0);
  out.ok = true;
  return out;
}

}  // namespace laglan
