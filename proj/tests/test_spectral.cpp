#include "laglan/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "laglan/numerics.hpp"
#include "laglan/structure.hpp"

namespace {

using namespace laglan;

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

ModelSpec make_spec(int n, double rho, double v_n,
                    GammaMode mode = GammaMode::Zero, double gamma = 0.0) {
  ModelSpec spec;
  spec.n = n;
  spec.rho = rho;
  spec.v_n = v_n;
  spec.theta = 0.0;
  spec.gamma_mode = mode;
  spec.gamma = gamma;
  return spec;
}

ModelSpec zero_spec(int n, double rho = 0.5) {
  return make_spec(n, rho, 0.0, GammaMode::Zero);
}

ModelSpec finite_spec(int n, double gamma, double rho = 0.5) {
  return make_spec(n, rho, gamma / n, GammaMode::Finite, gamma);
}

ModelSpec infinite_spec(int n, double v, double rho = 0.5) {
  return make_spec(n, rho, v, GammaMode::Infinite);
}

// ===========================================================================
// Basis
// ===========================================================================

TEST(DctBasis, SizeOneClosedForm) {
  const DctBasis basis = dct_basis(1);
  EXPECT_NEAR(basis.xi(0), M_PI / 6.0, 1e-15);
  EXPECT_NEAR(basis.U(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(basis.lambda(0), 1.0, 1e-15);
  EXPECT_NEAR(basis.c(0), 1.0, 1e-15);
}

TEST(DctBasis, OrthogonalAndDiagonalizing) {
  for (int n : {1, 2, 3, 8, 64, 512}) {
    const DctBasis basis = dct_basis(n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    EXPECT_LT(max_abs_diff(basis.U.transpose() * basis.U, eye), 1e-12)
        << "orthogonality n=" << n;
    EXPECT_LT(max_abs_diff(basis.U, basis.U.transpose()), 0.0 + 1e-18)
        << "symmetry n=" << n;

    const StructureSet s = build_structures(zero_spec(n));
    EXPECT_LT(max_abs_diff(basis.U * s.F * basis.U,
                           basis.lambda.asDiagonal().toDenseMatrix()),
              1e-12)
        << "diagonalization n=" << n;
    EXPECT_LT((basis.U.col(0) - basis.c).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(DctBasis, EigenvaluesIncreaseFromZero) {
  const DctBasis basis = dct_basis(64);
  for (int i = 1; i < 64; ++i) EXPECT_GT(basis.lambda(i), basis.lambda(i - 1));
  EXPECT_GT(basis.lambda(0), 0.0);
  EXPECT_LT(basis.lambda(63), 4.0);
}

// ===========================================================================
// Cross kernel
// ===========================================================================

TEST(CrossKernel, SizeOneIsUnity) {
  const DctBasis basis = dct_basis(1);
  const Eigen::MatrixXd kernel = cross_kernel(basis);
  EXPECT_NEAR(kernel(0, 0), 1.0, 1e-14);
}

TEST(CrossKernel, MatchesDenseConjugation) {
  for (int n : {1, 2, 3, 5, 16, 64}) {
    const DctBasis basis = dct_basis(n);
    const StructureSet s = build_structures(zero_spec(n));
    const Eigen::MatrixXd dense = basis.U * (s.T + s.R) * basis.U;
    EXPECT_LT(max_abs_diff(cross_kernel(basis), dense), 1e-11) << "n=" << n;
  }
}

TEST(CrossKernel, SymmetrizesToRankOne) {
  // kernel + kernel^T is the image of 2R, the rank-one 2 c c^T.
  const DctBasis basis = dct_basis(32);
  const Eigen::MatrixXd kernel = cross_kernel(basis);
  const Eigen::MatrixXd rank1 = 2.0 * basis.c * basis.c.transpose();
  EXPECT_LT(max_abs_diff(kernel + kernel.transpose(), rank1), 1e-12);
}

TEST(CrossKernel, DiagonalSinePowers) {
  const int n = 17;
  const DctBasis basis = dct_basis(n);
  const Eigen::MatrixXd kernel = cross_kernel(basis);
  for (int i = 0; i < n; ++i) {
    const double s = std::sin(n * 2.0 * basis.xi(i));
    EXPECT_NEAR(kernel(i, i), 4.0 / (2.0 * n + 1.0) * s * s, 1e-12);
  }
}

// ===========================================================================
// Scalar spectra
// ===========================================================================

TEST(SpectralFns, SupremumIsAttainedBound) {
  const SpectralFns fns{64, 0.01};
  for (double a : {0.5, 1.5}) {
    const double sup = fns.sup_g(a);
    double best = 0.0;
    for (int k = 1; k < 4096; ++k) {
      const double x = M_PI * k / 4096.0;
      best = std::max(best, fns.g(a, x));
      EXPECT_LE(fns.g(a, x), sup * (1.0 + 1e-12));
    }
    EXPECT_GT(best, 0.999 * sup);  // grid nearly attains the supremum
  }
}

// ===========================================================================
// Limit constants
// ===========================================================================

TEST(LimitConstants, SmallNoiseClosedForm) {
  const LimitConstants lc = limit_constants(0.5, 0.0);
  EXPECT_NEAR(lc.I, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(lc.J, 5.0 / 6.0, 1e-13);
  EXPECT_NEAR(lc.J0(0.5), 24.0, 1e-12);
  EXPECT_NEAR(lc.J0(1.5), 6.0 / 2.25, 1e-12);
}

TEST(LimitConstants, LargeNoiseClosedForm) {
  const LimitConstants lc =
      limit_constants(0.5, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(lc.I, 0.06470476127563018, 1e-14);
  EXPECT_DOUBLE_EQ(lc.J, 0.0);
}

TEST(LimitConstants, EvenInCorrelation) {
  for (double gamma : {0.0, 0.3, 7.0}) {
    const LimitConstants plus = limit_constants(0.6, gamma);
    const LimitConstants minus = limit_constants(-0.6, gamma);
    EXPECT_NEAR(plus.I, minus.I, 1e-15);
    EXPECT_NEAR(plus.J, minus.J, 1e-15);
  }
}

TEST(LimitConstants, ContinuousAtSmallGamma) {
  const LimitConstants base = limit_constants(0.5, 0.0);
  const LimitConstants near0 = limit_constants(0.5, 1e-6);
  EXPECT_LT(std::abs(near0.I - base.I), 1e-4);
  EXPECT_LT(std::abs(near0.J - base.J), 1e-3);
  EXPECT_LT(near0.I, base.I);  // noise strictly reduces the odd variance
  EXPECT_LT(near0.J, base.J);
}

TEST(LimitConstants, SeriesAndDirectBranchesAgree) {
  // The evaluation switches between a series and the closed form; values on
  // both sides of each switch must line up smoothly.
  for (double a : {0.5, 1.0, 1.5}) {
    const double gx = a * 1e-3 / 4.0;  // switch point of the channel series
    const double lo = single_channel_limit(a, 0.999 * gx);
    const double hi = single_channel_limit(a, 1.001 * gx);
    EXPECT_LT(std::abs(lo - hi) / std::abs(lo), 1e-5) << "a=" << a;
  }
  for (double rho : {0.3, 0.9}) {
    const double gs = 1e-4 * (1.0 - rho * rho);
    const double lo = limit_constants(rho, 0.999 * gs).I;
    const double hi = limit_constants(rho, 1.001 * gs).I;
    EXPECT_LT(std::abs(lo - hi) / std::abs(lo), 1e-5) << "rho=" << rho;
  }
}

TEST(LimitConstants, LargeGammaMatchesScaledLimit) {
  // gamma^{3/2} I_gamma approaches the infinite-noise constant from below;
  // the leading deficit is rho^2 / (4 I_inf sqrt(gamma)), so the ratio is
  // checked against that corrected value and the even part must die under
  // the same scaling.
  const double rho = 0.5;
  const LimitConstants inf =
      limit_constants(rho, std::numeric_limits<double>::infinity());
  for (double gamma : {1e8, 1e10, 1e12}) {
    const LimitConstants fin = limit_constants(rho, gamma);
    const double scale = std::pow(gamma, 1.5);
    const double deficit = rho * rho / (4.0 * inf.I * std::sqrt(gamma));
    EXPECT_NEAR(scale * fin.I / inf.I, 1.0 - deficit, 1e-2 * deficit)
        << "gamma=" << gamma;
    EXPECT_LT(scale * fin.J, 1e-3) << "gamma=" << gamma;
  }
}

// ===========================================================================
// Frobenius diagnostics
// ===========================================================================

TEST(FrobeniusCheck, SpectralPathMatchesDense) {
  for (int n : {8, 32, 128}) {
    std::vector<ModelSpec> specs = {zero_spec(n), finite_spec(n, 1.0),
                                    infinite_spec(n, 0.25)};
    for (const ModelSpec& spec : specs) {
      for (auto [alpha, beta] :
           {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{1.0, 1.0}}) {
        const FrobeniusReport fast =
            frobenius_limit_check(spec, alpha, beta);
        const FrobeniusReport dense =
            frobenius_limit_check_dense(spec, alpha, beta);
        EXPECT_LT(std::abs(fast.lhs - dense.lhs) / dense.lhs, 1e-8)
            << "n=" << n << " v=" << spec.v_n << " a=" << alpha
            << " b=" << beta;
        // Power iteration approaches the true norm from below.
        EXPECT_LE(fast.sp_norm_scaled, dense.sp_norm_scaled * (1.0 + 1e-6));
        EXPECT_GT(fast.sp_norm_scaled, 0.80 * dense.sp_norm_scaled);
      }
    }
  }
}

TEST(FrobeniusCheck, SmallNoiseMassApproachesLimit) {
  const FrobeniusReport rep =
      frobenius_limit_check(zero_spec(2048), 1.0, 1.0);
  EXPECT_LT(rep.rel_err, 0.05);
  EXPECT_GT(rep.lhs, 0.0);
  EXPECT_NEAR(rep.rhs, 2.0 * (1.0 / 6.0 + 5.0 / 6.0), 1e-12);
}

TEST(FrobeniusCheck, ScaledSpectralNormStaysBounded) {
  double prev = 0.0;
  for (int n : {128, 512, 2048}) {
    const FrobeniusReport rep =
        frobenius_limit_check(infinite_spec(n, 0.25), 1.0, 1.0);
    EXPECT_LT(rep.sp_norm_scaled, 10.0);
    if (prev > 0.0) EXPECT_LT(rep.sp_norm_scaled, 2.0 * prev);
    prev = rep.sp_norm_scaled;
  }
}

// ===========================================================================
// Lemma diagnostics
// ===========================================================================

TEST(LemmaChecks, ResolventMassSmallNoiseRiemann) {
  // v = 0 collapses the sum to floor(c n) / (n a).
  const LemmaReport rep = resolvent_mass_check(zero_spec(256), 1.5, 0.5);
  EXPECT_NEAR(rep.limit, 0.5 / 1.5, 1e-15);
  EXPECT_LT(rep.rel_err, 0.01);
}

TEST(LemmaChecks, ResolventMassLargeNoise) {
  const LemmaReport rep =
      resolvent_mass_check(infinite_spec(2048, 0.25), 1.0, 1.0);
  EXPECT_NEAR(rep.limit, 0.5, 1e-15);
  EXPECT_LT(rep.rel_err, 0.05);
}

TEST(LemmaChecks, ResolventMassFiniteGamma) {
  const LemmaReport rep = resolvent_mass_check(finite_spec(4096, 1.0), 1.0, 1.0);
  // arctan closes at pi/2: limit = 1 / sqrt(a (a + 4 gamma)).
  EXPECT_NEAR(rep.limit, 1.0 / std::sqrt(5.0), 1e-14);
  EXPECT_LT(rep.rel_err, 0.02);
}

TEST(LemmaChecks, ResolventCrossAllRegimes) {
  const LemmaReport zero = resolvent_cross_check(zero_spec(2048), 1.5, 0.5, 1.0);
  EXPECT_NEAR(zero.limit, 1.0 / (2.0 * 1.5 * 0.5), 1e-14);
  EXPECT_LT(zero.rel_err, 0.02);

  const LemmaReport fin =
      resolvent_cross_check(finite_spec(4096, 1.0), 1.5, 0.5, 1.0);
  EXPECT_LT(fin.rel_err, 0.05);

  const LemmaReport inf =
      resolvent_cross_check(infinite_spec(2048, 0.25), 1.5, 0.5, 1.0);
  EXPECT_NEAR(inf.limit, 1.0 / (2.0 * (std::sqrt(1.5) + std::sqrt(0.5))),
              1e-14);
  EXPECT_LT(inf.rel_err, 0.05);
}

TEST(LemmaChecks, CrossProductConsistentWithChannelLimit) {
  // Four times the full-range cross-product limit equals the two-channel
  // Frobenius limit, in every regime.
  const double a = 1.5, b = 0.5;
  {
    const ModelSpec spec = zero_spec(64);
    EXPECT_NEAR(4.0 * resolvent_cross_check(spec, a, b, 1.0).limit,
                cross_channel_frobenius_check(spec, a, b).limit, 1e-12);
  }
  {
    const ModelSpec spec = finite_spec(64, 2.5);
    EXPECT_NEAR(4.0 * resolvent_cross_check(spec, a, b, 1.0).limit,
                cross_channel_frobenius_check(spec, a, b).limit, 1e-12);
  }
  {
    const ModelSpec spec = infinite_spec(64, 0.25);
    EXPECT_NEAR(4.0 * resolvent_cross_check(spec, a, b, 1.0).limit,
                cross_channel_frobenius_check(spec, a, b).limit, 1e-12);
  }
}

TEST(LemmaChecks, SinePowerSumApproachesTwo) {
  const LemmaReport rep = sine_power_sum_check(4096);
  EXPECT_GT(rep.value, 1.9);
  EXPECT_LT(rep.value, 2.1);
  const LemmaReport coarse = sine_power_sum_check(64);
  EXPECT_GT(coarse.value, 1.5);
  EXPECT_LT(coarse.value, 2.5);
}

TEST(LemmaChecks, SingleChannelFrobenius) {
  for (double a : {0.5, 1.5}) {
    const LemmaReport zero = single_channel_frobenius_check(zero_spec(2048), a);
    EXPECT_NEAR(zero.limit, 6.0 / (a * a), 1e-12);
    EXPECT_LT(zero.rel_err, 0.10) << "a=" << a;

    const LemmaReport fin =
        single_channel_frobenius_check(finite_spec(2048, 1.0), a);
    EXPECT_LT(fin.rel_err, 0.10) << "a=" << a;

    const LemmaReport inf =
        single_channel_frobenius_check(infinite_spec(2048, 0.25), a);
    EXPECT_EQ(inf.limit, 0.0);
    EXPECT_LT(inf.rel_err, 0.1);  // absolute value against a vanishing limit
  }
}

TEST(LemmaChecks, CrossChannelFrobenius) {
  const LemmaReport zero =
      cross_channel_frobenius_check(zero_spec(2048), 1.5, 0.5);
  EXPECT_NEAR(zero.limit, 8.0 / 3.0, 1e-12);
  EXPECT_LT(zero.rel_err, 0.10);

  const LemmaReport fin =
      cross_channel_frobenius_check(finite_spec(2048, 1.0), 1.5, 0.5);
  EXPECT_LT(fin.rel_err, 0.10);

  const LemmaReport inf =
      cross_channel_frobenius_check(infinite_spec(2048, 0.25), 1.5, 0.5);
  EXPECT_NEAR(inf.limit, 2.0 / (std::sqrt(1.5) + std::sqrt(0.5)), 1e-14);
  EXPECT_LT(inf.rel_err, 0.10);
}

TEST(LemmaChecks, CornerMassExactAtZeroNoise) {
  const LemmaReport rep = corner_mass_check(zero_spec(128), 1.5, 0.5);
  EXPECT_NEAR(rep.value, 1.0 / (1.5 * 0.5), 1e-10);
  EXPECT_TRUE(std::isnan(rep.limit));
}

TEST(LemmaChecks, CornerMassBoundedInLargeNoise) {
  double prev = 0.0;
  for (int n : {128, 512, 2048}) {
    const LemmaReport rep =
        corner_mass_check(infinite_spec(n, 0.25), 1.5, 0.5);
    EXPECT_LT(rep.value, 4.0);
    if (prev > 0.0) EXPECT_LT(std::abs(rep.value - prev), 0.5 * prev + 0.1);
    prev = rep.value;
  }
}

TEST(LemmaChecks, AggregateReturnsAllSix) {
  const auto reports = lemma_diagnostics(zero_spec(64), 1.5, 0.5, 1.0);
  ASSERT_EQ(reports.size(), 6u);
  EXPECT_EQ(reports[0].id, "resolvent_mass");
  EXPECT_EQ(reports[5].id, "corner_mass");
}

// ===========================================================================
// Block-spectral operator
// ===========================================================================

class GbarDctTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = make_spec(48, -0.4, 0.02, GammaMode::Infinite);
    op_ = std::make_unique<GbarDct>(dct_basis(spec_.n), spec_.rho, spec_.v_n);
    gbar_ = build_structures(spec_).Gbar;
    rng_ = substream_engine(42, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    z_.resize(2 * spec_.n);
    for (int i = 0; i < z_.size(); ++i) z_(i) = normal(rng_);
  }

  ModelSpec spec_;
  std::unique_ptr<GbarDct> op_;
  Eigen::MatrixXd gbar_;
  std::mt19937_64 rng_;
  Eigen::VectorXd z_;
};

TEST_F(GbarDctTest, RoundTripsBetweenDomains) {
  const Eigen::VectorXd back = op_->from_spectral(op_->to_spectral(z_));
  EXPECT_LT((back - z_).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(GbarDctTest, DiagonalizesTheBlockCovariance) {
  Eigen::VectorXd w = op_->to_spectral(z_);
  Eigen::VectorXd scaled(w.size());
  scaled.head(spec_.n) = w.head(spec_.n).cwiseProduct(op_->f_plus());
  scaled.tail(spec_.n) = w.tail(spec_.n).cwiseProduct(op_->f_minus());
  const Eigen::VectorXd via_op = op_->from_spectral(scaled);
  EXPECT_LT((gbar_ * z_ - via_op).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(GbarDctTest, SolveInvertsTheCovariance) {
  const Eigen::VectorXd x = op_->solve(z_);
  EXPECT_LT((gbar_ * x - z_).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(GbarDctTest, LogDetMatchesDense) {
  Eigen::LLT<Eigen::MatrixXd> llt(gbar_);
  const double dense =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  EXPECT_NEAR(op_->log_det(), dense, 1e-9 * std::abs(dense));
}

TEST_F(GbarDctTest, QuadFormMatchesSolve) {
  EXPECT_NEAR(op_->quad_form(z_), z_.dot(op_->solve(z_)), 1e-9);
}

TEST_F(GbarDctTest, SamplingIsDeterministicPerStream) {
  auto r1 = substream_engine(7, 3);
  auto r2 = substream_engine(7, 3);
  const Eigen::VectorXd s1 = op_->sample(r1);
  const Eigen::VectorXd s2 = op_->sample(r2);
  EXPECT_EQ((s1 - s2).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(GbarDctTest, SpectralSampleMatchesRotatedSample) {
  auto r1 = substream_engine(9, 1);
  auto r2 = substream_engine(9, 1);
  const Eigen::VectorXd direct = op_->sample(r1);
  const Eigen::VectorXd rotated = op_->from_spectral(op_->sample_spectral(r2));
  EXPECT_LT((direct - rotated).cwiseAbs().maxCoeff(), 1e-14);
}

}  // namespace
