#include "laglan/inference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "laglan/numerics.hpp"
#include "laglan/simulate.hpp"

namespace laglan {
namespace {

ModelSpec spec_of(int n, double rho, double v_n, double theta,
                  GammaMode mode) {
  ModelSpec spec;
  spec.n = n;
  spec.rho = rho;
  spec.v_n = v_n;
  spec.theta = theta;
  spec.gamma_mode = mode;
  spec.gamma = mode == GammaMode::Finite ? n * v_n : 0.0;
  return spec;
}

Eigen::VectorXd pseudo_data(int size, std::uint64_t stream) {
  std::mt19937_64 rng = substream_engine(0xDA7A, stream);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(size);
  for (int i = 0; i < size; ++i) z(i) = normal(rng);
  return z;
}

TEST(BlockDifference, TakesIncrementsPerBlock) {
  Eigen::VectorXd z(6);
  z << 1.0, 3.0, 6.0, 2.0, 2.5, 1.0;
  Eigen::VectorXd expected(6);
  expected << 1.0, 2.0, 3.0, 2.0, 0.5, -1.5;
  EXPECT_EQ((block_difference(z) - expected).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(block_difference(Eigen::VectorXd::Zero(5)),
               std::invalid_argument);
}

TEST(Loglik, HandValueForSmallestDesign) {
  // n = 1, v = 0, rho = 1/2: covariance [[1, 1/2], [1/2, 1]], so the
  // density at the origin is -log(2 pi) - log(det)/2 with det = 3/4, and
  // z = (1, 1) adds -z' Sigma^{-1} z / 2 = -2/3.
  const ModelSpec spec = spec_of(1, 0.5, 0.0, 0.0, GammaMode::Zero);
  const double at_zero = -std::log(2.0 * M_PI) - 0.5 * std::log(0.75);
  for (CovarianceKind kind :
       {CovarianceKind::ExactC, CovarianceKind::SurrogateCtilde,
        CovarianceKind::DifferencedV}) {
    EXPECT_NEAR(loglik(spec, Eigen::VectorXd::Zero(2), kind), at_zero, 1e-12)
        << to_string(kind);
    EXPECT_NEAR(loglik(spec, Eigen::VectorXd::Ones(2), kind),
                at_zero - 2.0 / 3.0, 1e-12)
        << to_string(kind);
  }
}

TEST(Loglik, DifferencedAgreesWithSurrogate) {
  // Differencing has unit Jacobian, so both kinds give the same density.
  const double bound = theta_bound(7, 0.1);
  for (double theta : {0.6 * bound, -0.6 * bound}) {
    const ModelSpec spec = spec_of(7, -0.4, 0.1, theta, GammaMode::Finite);
    const Eigen::VectorXd z = pseudo_data(14, 1);
    EXPECT_NEAR(loglik(spec, z, CovarianceKind::DifferencedV),
                loglik(spec, z, CovarianceKind::SurrogateCtilde), 1e-8);
  }
}

TEST(Loglik, SwappingSeriesAndLagSignIsInvariant) {
  const ModelSpec spec = spec_of(6, 0.55, 0.2, 0.04, GammaMode::Infinite);
  ModelSpec mirrored = spec;
  mirrored.theta = -spec.theta;

  const Eigen::VectorXd z = pseudo_data(12, 2);
  Eigen::VectorXd swapped(12);
  swapped << z.tail(6), z.head(6);

  EXPECT_NEAR(loglik(spec, z, CovarianceKind::SurrogateCtilde),
              loglik(mirrored, swapped, CovarianceKind::SurrogateCtilde),
              1e-10);
}

TEST(Loglik, SingularCovarianceThrowsWithTheta) {
  // Noiseless with the lag exactly one grid step: the first lagged
  // coordinate degenerates to time zero.
  const ModelSpec spec = spec_of(8, 0.5, 0.0, 1.0 / 8.0, GammaMode::Zero);
  try {
    loglik(spec, Eigen::VectorXd::Zero(16), CovarianceKind::ExactC);
    FAIL() << "expected a domain error";
  } catch (const std::domain_error& err) {
    EXPECT_NE(std::string(err.what()).find("theta"), std::string::npos);
  }
}

TEST(LanEngine, TracesMatchDenseComputation) {
  const ModelSpec spec = spec_of(24, 0.45, 0.08, 0.0, GammaMode::Finite);
  const LanEngine engine(spec);
  const StructureSet s = build_structures(spec);
  const Eigen::MatrixXd ginv = s.Gbar.inverse();

  // The odd trace vanishes identically; the even one has a closed form.
  EXPECT_LT(std::abs((ginv * s.Tbar).trace()), 1e-10);
  EXPECT_NEAR(engine.even_trace(), (ginv * s.Sbar).trace(), 1e-8);
}

TEST(LanEngine, StatsMatchDenseQuadraticForms) {
  const ModelSpec spec = spec_of(9, -0.35, 0.3, 0.0, GammaMode::Infinite);
  const LanEngine engine(spec);
  const StructureSet s = build_structures(spec);
  const Eigen::MatrixXd ginv = s.Gbar.inverse();

  const Eigen::VectorXd z = pseudo_data(18, 3);
  const Eigen::VectorXd zt = block_difference(z);
  const double scale = -0.5 * spec.rho * engine.regime().r;
  const double t_dense =
      scale * (zt.dot(ginv * s.Tbar * ginv * zt) - (ginv * s.Tbar).trace());
  const double s_dense =
      scale * (zt.dot(ginv * s.Sbar * ginv * zt) - (ginv * s.Sbar).trace());

  const LanStats stats = engine.stats(z);
  EXPECT_NEAR(stats.T, t_dense, 1e-8);
  EXPECT_NEAR(stats.S, s_dense, 1e-8);
  EXPECT_EQ(stats.I, engine.limits().I);
  EXPECT_EQ(stats.J, engine.limits().J);
}

TEST(LanEngine, StatsAreCenteredUnderTheNull) {
  const ModelSpec spec = spec_of(64, 0.6, 1.0 / 64.0, 0.0, GammaMode::Finite);
  const LanEngine engine(spec);

  const int m = 10000;
  std::vector<double> ts(m), ss(m);
  for (int r = 0; r < m; ++r) {
    std::mt19937_64 rng = substream_engine(11, r);
    const LanStats stats =
        engine.stats_spectral(engine.gbar().sample_spectral(rng));
    ts[r] = stats.T;
    ss[r] = stats.S;
  }
  const double se_t = std::sqrt(sample_variance(ts) / m);
  const double se_s = std::sqrt(sample_variance(ss) / m);
  EXPECT_LT(std::abs(sample_mean(ts)), 4.0 * se_t);
  EXPECT_LT(std::abs(sample_mean(ss)), 4.0 * se_s);
}

TEST(LanEngine, SpectralStatsAgreeWithRawStats) {
  const ModelSpec spec = spec_of(16, 0.3, 0.05, 0.0, GammaMode::Finite);
  const LanEngine engine(spec);
  std::mt19937_64 rng_a = substream_engine(21, 5);
  std::mt19937_64 rng_b = substream_engine(21, 5);

  const Eigen::VectorXd w = engine.gbar().sample_spectral(rng_a);
  const Eigen::VectorXd ztilde = engine.gbar().sample(rng_b);

  // Undo the differencing so the raw-data entry point sees levels.
  Eigen::VectorXd z(32);
  for (int b = 0; b < 32; b += 16) {
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) {
      acc += ztilde(b + i);
      z(b + i) = acc;
    }
  }

  const LanStats from_w = engine.stats_spectral(w);
  const LanStats from_z = engine.stats(z);
  EXPECT_NEAR(from_w.T, from_z.T, 1e-9);
  EXPECT_NEAR(from_w.S, from_z.S, 1e-9);
}

TEST(LanEngine, ResidualIsExactlyZeroAtTheOrigin) {
  const ModelSpec spec = spec_of(12, 0.5, 0.02, 0.0, GammaMode::Finite);
  const LanEngine engine(spec);
  const Eigen::VectorXd z = pseudo_data(24, 4);
  EXPECT_EQ(engine.residual(z, 0.0), 0.0);
}

TEST(LanEngine, CenteringIsOddInTAndEvenInS) {
  LanStats stats;
  stats.T = 0.37;
  stats.S = -0.12;
  stats.I = 0.8;
  stats.J = 1.1;
  const double curvature = 0.5 * (stats.I + stats.J);
  EXPECT_EQ(lan_center(stats, -1.0), -stats.T + stats.S - curvature);
  EXPECT_EQ(lan_center(stats, 1.0), stats.T + stats.S - curvature);
  EXPECT_EQ(lan_center(stats, 0.0), 0.0);
}

TEST(LanEngine, ResidualMedianShrinksWithN) {
  const int m = 200;
  std::vector<double> medians;
  for (int n : {32, 256}) {
    const ModelSpec spec = spec_of(n, 0.6, 0.0, 0.0, GammaMode::Zero);
    const LanEngine engine(spec);
    const SampleBatch batch =
        sample_paths(spec, CovarianceKind::ExactC, 31, m);
    std::vector<double> abs_res(m);
    for (int r = 0; r < m; ++r) {
      abs_res[r] = std::abs(engine.residual(batch.data.row(r), 1.0));
    }
    medians.push_back(median(abs_res));
  }
  EXPECT_LT(medians[1], medians[0]);
}

// Under dominant noise the exact-model residual carries a slowly decaying
// model-transfer component; the expansion itself is checked against the
// surrogate likelihood, where the decay is visible at these sizes.
TEST(LanEngine, SurrogateResidualShrinksWhereNoiseDominates) {
  const int m = 150;
  std::vector<double> medians;
  for (int n : {128, 512}) {
    const ModelSpec spec = spec_of(n, 0.5, 0.25, 0.0, GammaMode::Infinite);
    const LanEngine engine(spec);
    const SampleBatch batch =
        sample_paths(spec, CovarianceKind::ExactC, 31, m);
    std::vector<double> abs_res(m);
    for (int r = 0; r < m; ++r) {
      abs_res[r] = std::abs(engine.residual(batch.data.row(r), 2.0,
                                            CovarianceKind::DifferencedV));
    }
    medians.push_back(median(abs_res));
  }
  EXPECT_LT(medians[1], medians[0]);
}

TEST(Hellinger, ZeroForIdenticalInputs) {
  const ModelSpec spec = spec_of(6, 0.4, 0.15, 0.03, GammaMode::Infinite);
  const CovarianceModel c = exact_covariance(spec);
  EXPECT_EQ(hellinger_squared(c, c), 0.0);
  EXPECT_EQ(hellinger(c, c), 0.0);
}

TEST(Hellinger, MatchesDirectDeterminantFormula) {
  const ModelSpec a_spec = spec_of(5, 0.5, 0.2, 0.08, GammaMode::Infinite);
  const ModelSpec b_spec = spec_of(5, 0.5, 0.2, 0.03, GammaMode::Infinite);
  const CovarianceModel a = exact_covariance(a_spec);
  const CovarianceModel b = surrogate_covariance(b_spec);

  const Eigen::MatrixXd mid = 0.5 * (a.matrix + b.matrix);
  const double direct =
      2.0 * (1.0 - std::pow(a.matrix.determinant(), 0.25) *
                       std::pow(b.matrix.determinant(), 0.25) /
                       std::sqrt(mid.determinant()));
  EXPECT_NEAR(hellinger_squared(a, b), direct, 1e-12);
}

TEST(Hellinger, ExactAndSurrogateCoincideWithinOneStep) {
  for (int n : {4, 16}) {
    const ModelSpec spec =
        spec_of(n, -0.7, 0.25, 1.0 / n, GammaMode::Infinite);
    const double h = hellinger(exact_covariance(spec),
                               surrogate_covariance(spec));
    EXPECT_LE(h, 1e-7) << "n=" << n;
  }
}

TEST(Hellinger, RejectsNonPdInput) {
  CovarianceModel bad;
  bad.matrix = Eigen::Vector2d(1.0, -0.5).asDiagonal();
  CovarianceModel id;
  id.matrix = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(hellinger_squared(bad, id), std::domain_error);

  CovarianceModel small;
  small.matrix = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_THROW(hellinger_squared(small, id), std::invalid_argument);
}

TEST(QuasiLikelihood, MatchesDenseEvaluationAndRange) {
  const ModelSpec spec = spec_of(12, 0.5, 0.1, 0.0, GammaMode::Finite);
  const Eigen::VectorXd z = pseudo_data(24, 6);
  const double eta = 0.4 * theta_bound(spec.n, spec.v_n);
  const QuasiLikelihood lik(spec, z, eta);

  for (double c : {-2.0, -0.5, 0.0, 0.7, 2.2}) {
    ModelSpec at = spec;
    at.theta = c * eta;
    EXPECT_NEAR(lik(c), loglik(at, z, CovarianceKind::DifferencedV), 1e-9)
        << "c=" << c;
  }
  EXPECT_EQ(lik(4.0), -std::numeric_limits<double>::infinity());
}

TEST(Qmle, RefinesSyntheticPeaks) {
  const auto smooth = [](double c) { return -(c - 0.7) * (c - 0.7); };
  const QmleResult at_peak = qmle(smooth);
  ASSERT_TRUE(at_peak.ok);
  EXPECT_NEAR(at_peak.c_hat, 0.7, 1e-5);

  const auto kinked = [](double c) { return -std::abs(c); };
  const QmleResult at_kink = qmle(kinked);
  ASSERT_TRUE(at_kink.ok);
  EXPECT_NEAR(at_kink.c_hat, 0.0, 1e-6);

  EstimateOptions onesided;
  onesided.c_lo = 2.0;
  onesided.c_hi = 5.0;
  const QmleResult clipped = qmle(smooth, onesided);
  ASSERT_TRUE(clipped.ok);
  EXPECT_NEAR(clipped.c_hat, 2.0, 1e-5);
}

TEST(Qmle, ReportsFailureWhenNothingIsFinite) {
  const auto nowhere = [](double) {
    return -std::numeric_limits<double>::infinity();
  };
  const QmleResult result = qmle(nowhere);
  EXPECT_FALSE(result.ok);
  EXPECT_GT(result.evals, 0);
}

TEST(Qmle, AgreesWithFineGridOnSampledData) {
  // Optimizer cross-validation: on 95% of replications the estimator must
  // sit within 2e-4 of a delta = 1e-4 grid argmax around it.
  const int m = 200;
  const ModelSpec spec = spec_of(32, 0.6, 0.0, 0.0, GammaMode::Zero);
  const double eta = 1.0 / (spec.n * std::log(spec.n));
  ModelSpec truth = spec;
  truth.theta = eta;  // c_true = 1

  const SampleBatch batch =
      sample_paths(truth, CovarianceKind::ExactC, 404, m);
  int agree = 0;
  for (int r = 0; r < m; ++r) {
    const QuasiLikelihood lik(spec, batch.data.row(r), eta);
    const QmleResult fit = qmle(lik);
    ASSERT_TRUE(fit.ok);

    double best_c = fit.c_hat, best_v = fit.value;
    for (int k = -200; k <= 200; ++k) {
      const double c = std::clamp(fit.c_hat + 1e-4 * k, -5.0, 5.0);
      const double v = lik(c);
      if (std::isfinite(v) && v > best_v) {
        best_v = v;
        best_c = c;
      }
    }
    if (std::abs(best_c - fit.c_hat) <= 2e-4) ++agree;
  }
  EXPECT_GE(agree, 190);
}

TEST(Qbe, SymmetricProfileGivesItsCenter) {
  const auto profile = [](double c) {
    return -(c - 0.7) * (c - 0.7) / 0.02;
  };
  const QbeResult result = qbe(profile);
  ASSERT_TRUE(result.ok);
  EXPECT_TRUE(result.converged);
  EXPECT_NEAR(result.c_tilde, 0.7, 1e-6);
}

TEST(Qbe, KinkedProfileBalancesAtZero) {
  const auto profile = [](double c) { return -5.0 * std::abs(c); };
  const QbeResult result = qbe(profile);
  ASSERT_TRUE(result.ok);
  EXPECT_NEAR(result.c_tilde, 0.0, 1e-6);
}

TEST(Qbe, StableUnderToleranceTightening) {
  const ModelSpec spec = spec_of(32, 0.6, 0.0, 0.0, GammaMode::Zero);
  const double eta = 1.0 / (spec.n * std::log(spec.n));
  ModelSpec truth = spec;
  truth.theta = eta;
  const SampleBatch batch =
      sample_paths(truth, CovarianceKind::ExactC, 505, 1);
  const QuasiLikelihood lik(spec, batch.data.row(0), eta);

  EstimateOptions loose;
  EstimateOptions tight;
  tight.quad_tol = loose.quad_tol / 16.0;
  const QbeResult a = qbe(lik, loose);
  const QbeResult b = qbe(lik, tight);
  ASSERT_TRUE(a.ok);
  ASSERT_TRUE(b.ok);
  EXPECT_TRUE(a.converged);
  EXPECT_TRUE(b.converged);
  EXPECT_LT(std::abs(a.c_tilde - b.c_tilde), 1e-6);
}

TEST(Qbe, UniformPriorFactorCancels) {
  const auto profile = [](double c) { return -(c - 0.4) * (c - 0.4); };
  EstimateOptions flat;
  flat.prior = [](double) { return 0.37; };
  const QbeResult with_prior = qbe(profile, flat);
  const QbeResult without = qbe(profile);
  ASSERT_TRUE(with_prior.ok);
  ASSERT_TRUE(without.ok);
  EXPECT_NEAR(with_prior.c_tilde, without.c_tilde, 1e-9);
}

}  // namespace
}  // namespace laglan
