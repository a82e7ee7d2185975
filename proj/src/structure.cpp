#include "laglan/structure.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace laglan {

namespace {

/// Lag layout shared by the covariance builders: the component carrying the
/// lag and the per-coordinate start times of the two driving motions.
struct LagLayout {
  double lag = 0.0;   ///< |theta|
  bool on_y = true;   ///< true: Y is lagged (theta >= 0), false: X is lagged
};

LagLayout layout_of(const ModelSpec& spec) {
  return {std::abs(spec.theta), spec.theta >= 0.0};
}

void require_admissible(const ModelSpec& spec, const char* where) {
  if (!in_theta_range(spec)) {
    std::ostringstream msg;
    msg << where << ": theta = " << spec.theta
        << " outside the admissible range |theta| <= "
        << theta_bound(spec.n, spec.v_n) << " for n = " << spec.n
        << ", v_n = " << spec.v_n;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

StructureSet build_structures(const ModelSpec& spec) {
  spec.validate();
  const int n = spec.n;
  StructureSet s;
  s.n = n;

  s.nabla = Eigen::MatrixXd::Identity(n, n);
  for (int i = 1; i < n; ++i) s.nabla(i, i - 1) = -1.0;

  s.F = s.nabla * s.nabla.transpose();
  s.R = Eigen::MatrixXd::Zero(n, n);
  s.R(0, 0) = 1.0;
  s.S = s.nabla.transpose() + s.nabla;
  s.T = s.nabla.transpose() - s.nabla;

  const Eigen::MatrixXd g =
      Eigen::MatrixXd::Identity(n, n) / spec.n + spec.v_n * s.F;
  const Eigen::MatrixXd cross =
      (spec.rho / spec.n) * Eigen::MatrixXd::Identity(n, n);

  s.Gbar.resize(2 * n, 2 * n);
  s.Gbar << g, cross, cross, g;

  s.Sbar.resize(2 * n, 2 * n);
  s.Sbar << 0.5 * s.R, 0.5 * s.S, 0.5 * s.S, 0.5 * s.R;

  s.Tbar.resize(2 * n, 2 * n);
  s.Tbar << -0.5 * s.R, 0.5 * s.T, -0.5 * s.T, 0.5 * s.R;

  s.nabla_bar_plus = s.Tbar + s.Sbar;
  s.nabla_bar_minus = s.Tbar - s.Sbar;
  return s;
}

double brownian_kernel(double s, double t) {
  if (s >= 0.0 && t >= 0.0) return std::min(s, t);
  if (s <= 0.0 && t <= 0.0) return std::min(-s, -t);
  return 0.0;
}

const char* to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::ExactC: return "exact";
    case CovarianceKind::SurrogateCtilde: return "surrogate";
    case CovarianceKind::DifferencedV: return "differenced";
  }
  return "unknown";
}

CovarianceModel exact_covariance(const ModelSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const LagLayout lay = layout_of(spec);

  // Observation times of the two driving motions; the lagged component
  // starts lag units earlier.
  Eigen::VectorXd sx(n), sy(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) / spec.n;
    sx(i) = lay.on_y ? t : t - lay.lag;
    sy(i) = lay.on_y ? t - lay.lag : t;
  }

  CovarianceModel out;
  out.kind = CovarianceKind::ExactC;
  out.spec = spec;
  out.matrix.setZero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.matrix(i, j) = brownian_kernel(sx(i), sx(j));
      out.matrix(n + i, n + j) = brownian_kernel(sy(i), sy(j));
      out.matrix(i, n + j) = spec.rho * brownian_kernel(sx(i), sy(j));
      out.matrix(n + j, i) = out.matrix(i, n + j);
    }
    out.matrix(i, i) += spec.v_n;
    out.matrix(n + i, n + i) += spec.v_n;
  }
  return out;
}

CovarianceModel surrogate_covariance(const ModelSpec& spec) {
  spec.validate();
  require_admissible(spec, "surrogate_covariance");
  const int n = spec.n;
  const LagLayout lay = layout_of(spec);

  CovarianceModel out;
  out.kind = CovarianceKind::SurrogateCtilde;
  out.spec = spec;
  out.matrix.setZero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double base = static_cast<double>(std::min(i, j) + 1) / spec.n;
      out.matrix(i, j) = lay.on_y ? base : base - lay.lag;
      out.matrix(n + i, n + j) = lay.on_y ? base - lay.lag : base;
      // The lagged coordinate loses lag units of cross covariance against
      // earlier-or-equal indices of the other one.
      const bool hit = lay.on_y ? (i >= j) : (j >= i);
      out.matrix(i, n + j) = spec.rho * (hit ? base - lay.lag : base);
      out.matrix(n + j, i) = out.matrix(i, n + j);
    }
    out.matrix(i, i) += spec.v_n;
    out.matrix(n + i, n + i) += spec.v_n;
  }
  return out;
}

CovarianceModel differenced_covariance(const ModelSpec& spec) {
  spec.validate();
  require_admissible(spec, "differenced_covariance");
  const int n = spec.n;
  const LagLayout lay = layout_of(spec);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    g(i, i) = 1.0 / spec.n + spec.v_n * (i == 0 ? 1.0 : 2.0);
    if (i > 0) {
      g(i, i - 1) = -spec.v_n;
      g(i - 1, i) = -spec.v_n;
    }
  }

  // Cross block: rho/n on the diagonal, minus lag times the difference
  // matrix oriented toward the lagged coordinate.
  Eigen::MatrixXd xy = (spec.rho / spec.n) * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    const double d = spec.rho * lay.lag;
    xy(i, i) -= d;
    if (lay.on_y) {
      if (i + 1 < n) xy(i, i + 1) += d;  // -lag * nabla^T
    } else {
      if (i > 0) xy(i, i - 1) += d;  // -lag * nabla
    }
  }

  Eigen::MatrixXd xx = g;
  Eigen::MatrixXd yy = g;
  (lay.on_y ? yy : xx)(0, 0) -= lay.lag;

  CovarianceModel out;
  out.kind = CovarianceKind::DifferencedV;
  out.spec = spec;
  out.matrix.resize(2 * n, 2 * n);
  out.matrix << xx, xy, xy.transpose(), yy;
  return out;
}

CovarianceModel make_covariance(const ModelSpec& spec, CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::ExactC: return exact_covariance(spec);
    case CovarianceKind::SurrogateCtilde: return surrogate_covariance(spec);
    case CovarianceKind::DifferencedV: return differenced_covariance(spec);
  }
  throw std::invalid_argument("make_covariance: unknown kind");
}

DiffCovFamily::DiffCovFamily(int n, double rho, double v_n)
    : n_(n), rho_(rho), v_n_(v_n) {
  ModelSpec probe{n, rho, v_n, 0.0,
                  v_n == 0.0 ? GammaMode::Zero : GammaMode::Infinite, 0.0};
  probe.validate();

  auto push = [&](int r, int c, double base, double odd, double even) {
    rows_.push_back(r);
    cols_.push_back(c);
    base_.push_back(base);
    odd_.push_back(odd);
    even_.push_back(even);
  };
  auto push_sym = [&](int r, int c, double base, double odd, double even) {
    push(r, c, base, odd, even);
    push(c, r, base, odd, even);
  };

  const double gd0 = 1.0 / n + v_n;
  const double gd = 1.0 / n + 2.0 * v_n;
  for (int i = 0; i < n; ++i) {
    const double diag = (i == 0) ? gd0 : gd;
    // Corner corrections live at (0,0) of each diagonal block.
    push(i, i, diag, i == 0 ? -0.5 : 0.0, i == 0 ? 0.5 : 0.0);
    push(n + i, n + i, diag, i == 0 ? 0.5 : 0.0, i == 0 ? 0.5 : 0.0);
    if (i > 0) {
      push_sym(i, i - 1, -v_n, 0.0, 0.0);
      push_sym(n + i, n + i - 1, -v_n, 0.0, 0.0);
    }
    // Cross block and its mirror.
    push_sym(i, n + i, rho / n, 0.0, rho);
    if (i + 1 < n) push_sym(i, n + i + 1, 0.0, -0.5 * rho, -0.5 * rho);
    if (i > 0) push_sym(i, n + i - 1, 0.0, 0.5 * rho, -0.5 * rho);
  }
}

Eigen::SparseMatrix<double> DiffCovFamily::matrix(double theta) const {
  const double bound = theta_bound(n_, v_n_);
  if (!(std::abs(theta) <= bound)) {
    std::ostringstream msg;
    msg << "DiffCovFamily::matrix: theta = " << theta
        << " outside the admissible range |theta| <= " << bound
        << " for n = " << n_ << ", v_n = " << v_n_;
    throw std::domain_error(msg.str());
  }
  const double alag = std::abs(theta);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(rows_.size());
  // Zeros are kept so every theta yields the same pattern and symbolic
  // factorizations can be reused across evaluations.
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    trips.emplace_back(rows_[k], cols_[k],
                       base_[k] - theta * odd_[k] - alag * even_[k]);
  }
  Eigen::SparseMatrix<double> m(2 * n_, 2 * n_);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

PsdReport verify_psd(const Eigen::MatrixXd& a, double tol_scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a,
                                                     Eigen::EigenvaluesOnly);
  PsdReport rep;
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.max_abs_eigenvalue = eig.eigenvalues().cwiseAbs().maxCoeff();
  rep.ok = rep.min_eigenvalue >= -tol_scale * rep.max_abs_eigenvalue;
  return rep;
}

}  // namespace laglan
