#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "laglan/model.hpp"

/// @file structure.hpp
/// Structure matrices of the differencing calculus and the three covariance
/// models of the observation vector Z = (X_1..X_n, Y_1..Y_n).
///
/// Conventions, used throughout the library:
///  - nabla is the lower-bidiagonal first-difference matrix (1 on the
///    diagonal, -1 on the subdiagonal), so (nabla x)_i = x_i - x_{i-1}.
///  - F = nabla nabla^T, R = e_1 e_1^T, S = nabla^T + nabla, T = nabla^T - nabla.
///    These satisfy S = F + R exactly.
///  - Barred matrices are the 2n x 2n block extensions acting on the stacked
///    vector (X, Y).

namespace laglan {

/// Dense structure matrices for one sample size.
struct StructureSet {
  int n = 0;

  Eigen::MatrixXd nabla;  ///< first-difference matrix
  Eigen::MatrixXd F;      ///< nabla nabla^T, tridiagonal
  Eigen::MatrixXd R;      ///< e_1 e_1^T corner matrix
  Eigen::MatrixXd S;      ///< nabla^T + nabla
  Eigen::MatrixXd T;      ///< nabla^T - nabla

  Eigen::MatrixXd Gbar;             ///< covariance of the differenced pair at lag 0
  Eigen::MatrixXd Sbar;             ///< symmetric block extension of S
  Eigen::MatrixXd Tbar;             ///< antisymmetric-in-blocks extension of T
  Eigen::MatrixXd nabla_bar_plus;   ///< Tbar + Sbar
  Eigen::MatrixXd nabla_bar_minus;  ///< Tbar - Sbar
};

/// Builds all structure matrices for spec.n, with Gbar assembled from
/// (rho, v_n).  Dense; intended for n up to a few thousand.
StructureSet build_structures(const ModelSpec& spec);

/// Covariance kernel of a two-sided Brownian motion started at 0:
/// min(|s|, |t|) when s and t share a sign, 0 otherwise.
double brownian_kernel(double s, double t);

enum class CovarianceKind { ExactC, SurrogateCtilde, DifferencedV };

const char* to_string(CovarianceKind kind);

/// A realized covariance matrix together with the model it came from.
struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::ExactC;
  ModelSpec spec;
  Eigen::MatrixXd matrix;  ///< 2n x 2n, symmetric
};

/// Exact covariance of Z under the lagged model.  Valid for any theta; a
/// negative lag shifts the X coordinate instead of Y.
CovarianceModel exact_covariance(const ModelSpec& spec);

/// Covariance of Z under the surrogate model that replaces the lagged noise
/// by a linear-in-theta perturbation.  Requires theta in the admissible
/// range (in_theta_range), which keeps the perturbed noise variance
/// nonnegative; throws std::domain_error otherwise.
CovarianceModel surrogate_covariance(const ModelSpec& spec);

/// Covariance of the differenced vector (I_2 (x) nabla) Z under the
/// surrogate model.  Equals Gbar plus a rank-respecting correction that is
/// linear in theta and |theta|; agrees with conjugating
/// surrogate_covariance by the block difference matrix to rounding error.
CovarianceModel differenced_covariance(const ModelSpec& spec);

/// Dispatches on kind to the builder above.
CovarianceModel make_covariance(const ModelSpec& spec, CovarianceKind kind);

/// Fast family V(theta) over a fixed sparsity pattern, for likelihood scans:
/// V(theta) = base - theta * odd - |theta| * even, all three sharing the
/// pattern of the union of supports.  base encodes Gbar for the (n, rho, v_n)
/// given at construction.
class DiffCovFamily {
 public:
  DiffCovFamily(int n, double rho, double v_n);

  int n() const { return n_; }

  /// Assembles V(theta) as a sparse symmetric matrix (full storage).
  Eigen::SparseMatrix<double> matrix(double theta) const;

 private:
  int n_ = 0;
  double rho_ = 0.0;
  double v_n_ = 0.0;
  /// Pattern triplets: row, col, and the three aligned coefficient arrays.
  std::vector<int> rows_, cols_;
  std::vector<double> base_, odd_, even_;
};

/// Result of a positive-semidefiniteness check.
struct PsdReport {
  bool ok = false;
  double min_eigenvalue = 0.0;
  double max_abs_eigenvalue = 0.0;  ///< spectral norm of the input
};

/// Checks that the smallest eigenvalue is no smaller than
/// -tol_scale * ||A||_2 (eigenvalue floor relative to the spectral norm).
PsdReport verify_psd(const Eigen::MatrixXd& a, double tol_scale = 1e-10);

}  // namespace laglan
