#include "laglan/simulate.hpp"

#include <ostream>
#include <stdexcept>
#include <utility>

#include "laglan/numerics.hpp"

namespace laglan {

MvnFactor::MvnFactor(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) {
    throw std::invalid_argument("MvnFactor: square matrix required");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    scale_ = llt.matrixL();
    return;
  }
  // Indefinite to rounding: keep the nonnegative spectral part.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  clamped_ = true;
  min_eig_ = es.eigenvalues().minCoeff();
  scale_ = es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd MvnFactor::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z(i) = normal(rng);
  return scale_ * z;
}

SampleBatch sample_paths(const ModelSpec& spec, CovarianceKind kind,
                         std::uint64_t seed, int reps) {
  if (reps < 0) throw std::invalid_argument("sample_paths: reps >= 0");
  CovarianceModel model = make_covariance(spec, kind);
  const MvnFactor factor(model.matrix);

  SampleBatch batch;
  batch.model = std::move(model);
  batch.seed = seed;
  batch.data.resize(reps, 2 * spec.n);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    std::mt19937_64 rng = substream_engine(seed, r);
    batch.data.row(static_cast<Eigen::Index>(r)) = factor.draw(rng);
  });
  return batch;
}

void write_csv(std::ostream& os, const SampleBatch& batch) {
  const int n = batch.model.spec.n;
  for (int j = 0; j < n; ++j) os << (j ? "," : "") << 'x' << (j + 1);
  for (int j = 0; j < n; ++j) os << ",y" << (j + 1);
  os << '\n';
  const std::streamsize keep = os.precision(17);
  for (int r = 0; r < batch.reps(); ++r) {
    for (Eigen::Index j = 0; j < batch.data.cols(); ++j) {
      if (j) os << ',';
      os << batch.data(r, j);
    }
    os << '\n';
  }
  os.precision(keep);
}

}  // namespace laglan
