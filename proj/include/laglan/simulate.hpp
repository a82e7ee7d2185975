#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>

#include "laglan/structure.hpp"

namespace laglan {

/// Scale factor A with A A^T equal to a fixed covariance, for drawing
/// correlated normals.  Positive definite input yields the Cholesky factor;
/// otherwise the constructor falls back to an eigendecomposition with the
/// negative part of the spectrum clamped to zero, and min_eigenvalue()
/// reports how far below zero the spectrum reached.
class MvnFactor {
 public:
  explicit MvnFactor(const Eigen::MatrixXd& cov);

  int dim() const { return static_cast<int>(scale_.rows()); }
  bool clamped() const { return clamped_; }
  double min_eigenvalue() const { return min_eig_; }
  const Eigen::MatrixXd& scale() const { return scale_; }

  /// One draw A z with z standard normal; consumes dim() variates from rng.
  Eigen::VectorXd draw(std::mt19937_64& rng) const;

 private:
  Eigen::MatrixXd scale_;
  bool clamped_ = false;
  double min_eig_ = 0.0;
};

/// Independent draws from one covariance model, one replication per row,
/// columns ordered (x_1 .. x_n, y_1 .. y_n).
struct SampleBatch {
  CovarianceModel model;
  std::uint64_t seed = 0;
  Eigen::MatrixXd data;  ///< reps x 2n

  int reps() const { return static_cast<int>(data.rows()); }
};

/// Draws `reps` paths from the covariance selected by `kind`.  Replication
/// r consumes substream r of `seed` and nothing else, so a batch is a
/// row-for-row prefix of every longer batch with the same arguments.
SampleBatch sample_paths(const ModelSpec& spec, CovarianceKind kind,
                         std::uint64_t seed, int reps);

/// CSV dump with an x1..xn,y1..yn header, at round-trip precision.
void write_csv(std::ostream& os, const SampleBatch& batch);

}  // namespace laglan
