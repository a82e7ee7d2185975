#include "laglan/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "laglan/numerics.hpp"
#include "laglan/structure.hpp"

namespace laglan {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// sin(pi k / q) with exact integer reduction of k modulo 2q; keeps the
/// argument small so large-index table entries lose no precision.
double sin_pi_ratio(std::int64_t k, std::int64_t q) {
  std::int64_t m = k % (2 * q);
  if (m < 0) m += 2 * q;
  const bool flip = m >= q;
  if (flip) m -= q;
  const double s = std::sin(kPi * static_cast<double>(m) / static_cast<double>(q));
  return flip ? -s : s;
}

/// cos(pi k / q), same reduction.
double cos_pi_ratio(std::int64_t k, std::int64_t q) {
  std::int64_t m = k % (2 * q);
  if (m < 0) m += 2 * q;
  if (m > q) m = 2 * q - m;  // cos is even around pi
  // Reflect into [0, q/2] where cos is positive, for a stable kernel.
  if (2 * m <= q) return std::cos(kPi * static_cast<double>(m) / q);
  return -std::cos(kPi * static_cast<double>(q - m) / q);
}

double gamma_of(const ModelSpec& spec) {
  switch (spec.gamma_mode) {
    case GammaMode::Zero: return 0.0;
    case GammaMode::Finite: return spec.gamma;
    case GammaMode::Infinite: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

/// arctan(sqrt(1 + 4 gamma / a) tan(pi c / 2)), the recurring boundary term
/// of the resolvent integrals; c >= 1 closes the integral at pi/2.
double resolvent_angle(double a, double gamma, double c) {
  if (c >= 1.0) return kPi / 2.0;
  return std::atan(std::sqrt(1.0 + 4.0 * gamma / a) * std::tan(kPi * c / 2.0));
}

double sqr(double x) { return x * x; }

}  // namespace

// ---------------------------------------------------------------------------
// Basis
// ---------------------------------------------------------------------------

DctBasis dct_basis(int n) {
  if (n < 1) throw std::invalid_argument("dct_basis: n must be positive");
  DctBasis basis;
  basis.n = n;
  const std::int64_t q = 2 * n + 1;
  const double scale = 2.0 / std::sqrt(static_cast<double>(q));

  basis.xi.resize(n);
  basis.lambda.resize(n);
  basis.c.resize(n);
  basis.U.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const std::int64_t ki = 2 * i + 1;  // 2 (i+1) - 1
    basis.xi(i) = kPi * static_cast<double>(ki) / (2.0 * q);
    // lambda_i = 2 (1 - cos 2 xi_i), 2 xi_i = pi * ki / q.
    basis.lambda(i) = 2.0 * (1.0 - cos_pi_ratio(ki, q));
    basis.c(i) = scale * cos_pi_ratio(ki, 2 * q);  // cos(xi_i)
    for (int j = 0; j <= i; ++j) {
      const std::int64_t kj = 2 * j + 1;
      const double u = scale * cos_pi_ratio(ki * kj, 2 * q);
      basis.U(i, j) = u;
      basis.U(j, i) = u;
    }
  }
  return basis;
}

Eigen::MatrixXd cross_kernel(const DctBasis& basis) {
  const int n = basis.n;
  const std::int64_t q = 2 * n + 1;

  // Tables over half-angle multiples: sp[m] = sin(pi m / q) and
  // snp[m] = sin(pi n m / q) cover every angle the kernel needs.
  Eigen::VectorXd sp(2 * n), snp(2 * n);
  for (int m = 0; m < 2 * n; ++m) {
    sp(m) = sin_pi_ratio(m, q);
    snp(m) = sin_pi_ratio(static_cast<std::int64_t>(n) * m, q);
  }

  Eigen::MatrixXd kernel(n, n);
  const double scale = 4.0 / static_cast<double>(q);
  for (int j = 0; j < n; ++j) {
    const double col = scale * sp(2 * j + 1);  // sin(2 xi_j)
    for (int i = 0; i < n; ++i) {
      const int sum = i + j + 1;  // (i+1) + (j+1) - 1
      double acc = sqr(snp(sum)) / sp(sum);
      if (i != j) {
        const int diff = std::abs(i - j);
        const double tail = sqr(snp(diff)) / sp(diff);
        acc += (j > i) ? tail : -tail;
      }
      kernel(i, j) = col * acc;
    }
  }
  return kernel;
}

// ---------------------------------------------------------------------------
// Limit constants
// ---------------------------------------------------------------------------

double single_channel_limit(double a, double gamma) {
  if (a <= 0.0) throw std::invalid_argument("single_channel_limit: a > 0");
  if (std::isinf(gamma)) return 0.0;
  if (gamma == 0.0) return 6.0 / (a * a);
  const double x = 4.0 * gamma / a;
  if (x < 1e-3) {
    // Leading series; the direct form cancels to O(x^2) and loses digits.
    return 6.0 / (a * a) - 40.0 * gamma / (a * a * a) +
           210.0 * gamma * gamma / (a * a * a * a);
  }
  const double s = a / (a + 4.0 * gamma);
  const double rs = std::sqrt(s);
  return (2.0 - 3.0 * rs + s * rs) / (2.0 * gamma * gamma);
}

double LimitConstants::J0(double a) const { return single_channel_limit(a, gamma); }

LimitConstants limit_constants(double rho, double gamma) {
  if (!(rho > -1.0 && rho < 1.0) || rho == 0.0)
    throw std::invalid_argument("limit_constants: rho in (-1,0) or (0,1)");
  if (!(gamma >= 0.0))
    throw std::invalid_argument("limit_constants: gamma must be >= 0");

  LimitConstants lc;
  lc.rho = rho;
  lc.gamma = gamma;

  const double omr2 = (1.0 - rho) * (1.0 + rho);
  if (std::isinf(gamma)) {
    lc.I = rho * rho / (2.0 * (std::sqrt(1.0 + rho) + std::sqrt(1.0 - rho)));
  } else if (gamma == 0.0) {
    lc.I = rho * rho / (2.0 * omr2);
  } else if (gamma < 1e-4 * omr2) {
    // Two-term series; the closed form subtracts 2 rho from a bracket that
    // approaches 2 rho and cancels badly for tiny gamma.
    lc.I = rho * rho / (2.0 * omr2) * (1.0 - 4.0 * gamma / omr2);
  } else {
    const double plus = std::sqrt((1.0 + rho) * (1.0 + rho + 4.0 * gamma));
    const double minus = std::sqrt((1.0 - rho) * (1.0 - rho + 4.0 * gamma));
    lc.I = rho * (plus - minus - 2.0 * rho) / (8.0 * gamma * gamma);
  }

  lc.J = rho * rho *
         (single_channel_limit(1.0 + rho, gamma) +
          single_channel_limit(1.0 - rho, gamma)) /
         8.0;
  return lc;
}

LimitConstants limit_constants(const ModelSpec& spec) {
  return limit_constants(spec.rho, gamma_of(spec));
}

// ---------------------------------------------------------------------------
// Frobenius diagnostics
// ---------------------------------------------------------------------------

namespace {

struct SpectralWork {
  Eigen::VectorXd fp, fm;  // spectra of the two channels
  Eigen::VectorXd lambda, c;
};

SpectralWork spectral_work(const DctBasis& basis, double rho, double v_n) {
  SpectralWork w;
  const int n = basis.n;
  w.lambda = basis.lambda;
  w.c = basis.c;
  w.fp = ((1.0 + rho) / n + v_n * basis.lambda.array()).matrix();
  w.fm = ((1.0 - rho) / n + v_n * basis.lambda.array()).matrix();
  return w;
}

void fill_regime(FrobeniusReport& rep, const ModelSpec& spec) {
  const Regime reg = classify_regime(spec);
  rep.n = spec.n;
  rep.rho = spec.rho;
  rep.v_n = spec.v_n;
  rep.mode = spec.gamma_mode;
  rep.gamma = gamma_of(spec);
  rep.N = reg.N;
  rep.r = reg.r;
}

void finish_report(FrobeniusReport& rep, const ModelSpec& spec,
                   double frob_sq, double sp_norm) {
  const double r2 = rep.r * rep.r;
  rep.lhs = spec.rho * spec.rho * r2 * frob_sq;
  const LimitConstants lc = limit_constants(spec);
  rep.rhs = 2.0 * (rep.alpha * rep.alpha * lc.I + rep.beta * rep.beta * lc.J);
  const double denom =
      rep.rhs > 0.0
          ? rep.rhs
          : 2.0 * (rep.alpha * rep.alpha + rep.beta * rep.beta) * lc.I;
  rep.rel_err = std::abs(rep.lhs - rep.rhs) / denom;
  rep.sp_norm_scaled = sp_norm / rep.N;
}

}  // namespace

FrobeniusReport frobenius_limit_check(const ModelSpec& spec, double alpha,
                                      double beta) {
  spec.validate();
  FrobeniusReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  fill_regime(rep, spec);

  const DctBasis basis = dct_basis(spec.n);
  const SpectralWork w = spectral_work(basis, spec.rho, spec.v_n);
  const Eigen::MatrixXd kernel = cross_kernel(basis);
  const int n = spec.n;

  // Odd part: weighted Frobenius mass of the cross kernel.
  double odd = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += sqr(kernel(i, j)) / w.fm(j);
    odd += acc / w.fp(i);
  }

  // Even part: diagonal-plus-rank-one masses of the two channels.
  const Eigen::ArrayXd lp = w.lambda.array() / w.fp.array();
  const Eigen::ArrayXd lm = w.lambda.array() / w.fm.array();
  const Eigen::ArrayXd wp = w.c.array().square() / w.fp.array();
  const double even_plus =
      (lp * lp).sum() + 4.0 * (lp * wp).sum() + 4.0 * sqr(wp.sum());
  const double even_minus = (lm * lm).sum();

  const double frob_sq =
      (2.0 * alpha * alpha * odd + beta * beta * (even_plus + even_minus)) /
      4.0;

  // Spectral norm via power iteration on the squared operator in spectral
  // coordinates.
  const Eigen::ArrayXd isp = w.fp.array().rsqrt();
  const Eigen::ArrayXd ism = w.fm.array().rsqrt();
  const Eigen::VectorXd wvec = (w.c.array() * isp).matrix();
  auto apply = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd x1 = x.head(n), x2 = x.tail(n);
    Eigen::VectorXd y(2 * n);
    // (beta/2) H+ x1 + (alpha/2) Mt x2
    Eigen::VectorXd t1 = (beta / 2.0) *
                         ((lp * x1.array()).matrix() + 2.0 * wvec * wvec.dot(x1));
    t1 += (alpha / 2.0) *
          (isp * (kernel * (ism * x2.array()).matrix()).array()).matrix();
    // (alpha/2) Mt^T x1 - (beta/2) H- x2
    Eigen::VectorXd t2 =
        (alpha / 2.0) *
        (ism * (kernel.transpose() * (isp * x1.array()).matrix()).array())
            .matrix();
    t2 -= (beta / 2.0) * (lm * x2.array()).matrix();
    y << t1, t2;
    return y;
  };

  std::mt19937_64 rng = substream_engine(0x5eed5eedULL, spec.n);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(2 * n);
  for (int i = 0; i < 2 * n; ++i) v(i) = normal(rng);
  v.normalize();
  double norm_sq = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd u = apply(apply(v));
    norm_sq = u.norm();
    if (norm_sq == 0.0) break;
    v = u / norm_sq;
  }
  finish_report(rep, spec, frob_sq, std::sqrt(norm_sq));
  return rep;
}

FrobeniusReport frobenius_limit_check_dense(const ModelSpec& spec,
                                            double alpha, double beta) {
  spec.validate();
  FrobeniusReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  fill_regime(rep, spec);

  const StructureSet s = build_structures(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gbar(s.Gbar);
  const Eigen::MatrixXd isqrt = gbar.operatorInverseSqrt();
  const Eigen::MatrixXd x = isqrt * (alpha * s.Tbar + beta * s.Sbar) * isqrt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xe(x, Eigen::EigenvaluesOnly);
  finish_report(rep, spec, x.squaredNorm(),
                xe.eigenvalues().cwiseAbs().maxCoeff());
  return rep;
}

// ---------------------------------------------------------------------------
// Lemma-level diagnostics
// ---------------------------------------------------------------------------

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

LemmaReport make_report(const char* id, const ModelSpec& spec, double a,
                        double b, double c, double value, double limit) {
  LemmaReport rep;
  rep.id = id;
  rep.n = spec.n;
  rep.a = a;
  rep.b = b;
  rep.c = c;
  rep.value = value;
  rep.limit = limit;
  if (std::isnan(limit))
    rep.rel_err = kNaN;
  else if (limit == 0.0)
    rep.rel_err = std::abs(value);  // absolute error when the limit vanishes
  else
    rep.rel_err = std::abs(value - limit) / std::abs(limit);
  return rep;
}

int leading_count(int n, double c) {
  const int m = static_cast<int>(std::floor(c * n));
  return std::max(0, std::min(n, m));
}

}  // namespace

LemmaReport resolvent_mass_check(const ModelSpec& spec, double a, double c) {
  spec.validate();
  const DctBasis basis = dct_basis(spec.n);
  const SpectralFns fns{spec.n, spec.v_n};
  const Regime reg = classify_regime(spec);
  const int m = leading_count(spec.n, c);

  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += 1.0 / fns.f(a, 2.0 * basis.xi(i));
  const double value = sum / (static_cast<double>(spec.n) * reg.N);

  const double gamma = gamma_of(spec);
  double limit;
  if (std::isinf(gamma)) {
    limit = 1.0 / (2.0 * std::sqrt(a));
  } else {
    limit = 2.0 / (kPi * std::sqrt(a * (a + 4.0 * gamma))) *
            resolvent_angle(a, gamma, c);
  }
  return make_report("resolvent_mass", spec, a, kNaN, c, value, limit);
}

LemmaReport resolvent_cross_check(const ModelSpec& spec, double a, double b,
                                  double c) {
  spec.validate();
  const DctBasis basis = dct_basis(spec.n);
  const SpectralFns fns{spec.n, spec.v_n};
  const Regime reg = classify_regime(spec);
  const int m = leading_count(spec.n, c);

  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = 2.0 * basis.xi(i);
    sum += fns.g(a, x) * fns.g(b, x);
  }
  const double value = reg.r * reg.r * sum;

  const double gamma = gamma_of(spec);
  double limit;
  if (std::isinf(gamma)) {
    limit = 1.0 / (2.0 * (std::sqrt(a) + std::sqrt(b)));
  } else if (gamma == 0.0) {
    limit = (c - std::sin(2.0 * kPi * c) / (2.0 * kPi)) / (2.0 * a * b);
  } else {
    if (a == b)
      throw std::invalid_argument(
          "resolvent_cross_check: equal channel weights need a dedicated "
          "limit in the finite regime");
    const double wa = std::sqrt(a * (a + 4.0 * gamma));
    const double wb = std::sqrt(b * (b + 4.0 * gamma));
    limit = (wb * resolvent_angle(b, gamma, c) - wa * resolvent_angle(a, gamma, c)) /
                (2.0 * kPi * gamma * gamma * (b - a)) -
            c / (4.0 * gamma * gamma);
  }
  return make_report("resolvent_cross", spec, a, b, c, value, limit);
}

LemmaReport sine_power_sum_check(int n) {
  if (n < 1) throw std::invalid_argument("sine_power_sum_check: n >= 1");
  const std::int64_t q = 2 * n + 1;
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double num = sin_pi_ratio(static_cast<std::int64_t>(n) * i, q);
    const double den = sin_pi_ratio(i, q);
    sum += sqr(sqr(num)) / sqr(den);
  }
  const double scale = 4.0 / static_cast<double>(q);
  ModelSpec dummy{n, 0.5, 0.0, 0.0, GammaMode::Zero, 0.0};
  return make_report("sine_power_sum", dummy, kNaN, kNaN, kNaN,
                     scale * scale * sum, 2.0);
}

LemmaReport single_channel_frobenius_check(const ModelSpec& spec, double a) {
  spec.validate();
  const DctBasis basis = dct_basis(spec.n);
  const Regime reg = classify_regime(spec);
  const SpectralFns fns{spec.n, spec.v_n};

  Eigen::ArrayXd f(spec.n);
  for (int i = 0; i < spec.n; ++i) f(i) = fns.f(a, 2.0 * basis.xi(i));
  const Eigen::ArrayXd lf = basis.lambda.array() / f;
  const Eigen::ArrayXd wf = basis.c.array().square() / f;
  // || G_a^{-1/2} (F + R) G_a^{-1/2} ||_F^2 with U S U = diag(lambda) + c c^T.
  const double frob_sq = (lf * lf).sum() + 2.0 * (lf * wf).sum() + sqr(wf.sum());
  const double value = reg.r * reg.r * frob_sq;
  return make_report("single_channel_frobenius", spec, a, kNaN, kNaN, value,
                     single_channel_limit(a, gamma_of(spec)));
}

LemmaReport cross_channel_frobenius_check(const ModelSpec& spec, double a,
                                          double b) {
  spec.validate();
  const DctBasis basis = dct_basis(spec.n);
  const Regime reg = classify_regime(spec);
  const SpectralFns fns{spec.n, spec.v_n};
  const Eigen::MatrixXd kernel = cross_kernel(basis);
  const int n = spec.n;

  Eigen::ArrayXd fa(n), fb(n);
  for (int i = 0; i < n; ++i) {
    fa(i) = fns.f(a, 2.0 * basis.xi(i));
    fb(i) = fns.f(b, 2.0 * basis.xi(i));
  }
  // U T U = kernel - c c^T.
  double frob_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += sqr(kernel(i, j) - basis.c(i) * basis.c(j)) / fb(j);
    frob_sq += acc / fa(i);
  }
  const double value = reg.r * reg.r * frob_sq;

  const double gamma = gamma_of(spec);
  double limit;
  if (std::isinf(gamma)) {
    limit = 2.0 / (std::sqrt(a) + std::sqrt(b));
  } else if (gamma == 0.0) {
    limit = 2.0 / (a * b);
  } else {
    if (a == b)
      throw std::invalid_argument(
          "cross_channel_frobenius_check: equal channel weights need a "
          "dedicated limit in the finite regime");
    const double wa = std::sqrt(a * (a + 4.0 * gamma));
    const double wb = std::sqrt(b * (b + 4.0 * gamma));
    limit = (wb - wa) / (gamma * gamma * (b - a)) - 1.0 / (gamma * gamma);
  }
  return make_report("cross_channel_frobenius", spec, a, b, kNaN, value, limit);
}

LemmaReport corner_mass_check(const ModelSpec& spec, double a, double b) {
  spec.validate();
  const DctBasis basis = dct_basis(spec.n);
  const Regime reg = classify_regime(spec);
  const SpectralFns fns{spec.n, spec.v_n};

  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double c2 = sqr(basis.c(i));
    ma += c2 / fns.f(a, 2.0 * basis.xi(i));
    mb += c2 / fns.f(b, 2.0 * basis.xi(i));
  }
  const double value = ma * mb / (reg.N * reg.N);
  return make_report("corner_mass", spec, a, b, kNaN, value, kNaN);
}

std::vector<LemmaReport> lemma_diagnostics(const ModelSpec& spec, double a,
                                           double b, double c) {
  return {resolvent_mass_check(spec, a, c),
          resolvent_cross_check(spec, a, b, c),
          sine_power_sum_check(spec.n),
          single_channel_frobenius_check(spec, a),
          cross_channel_frobenius_check(spec, a, b),
          corner_mass_check(spec, a, b)};
}

// ---------------------------------------------------------------------------
// Block-spectral operator
// ---------------------------------------------------------------------------

GbarDct::GbarDct(DctBasis basis, double rho, double v_n)
    : basis_(std::move(basis)), rho_(rho), v_n_(v_n) {
  const int n = basis_.n;
  fp_ = ((1.0 + rho_) / n + v_n_ * basis_.lambda.array()).matrix();
  fm_ = ((1.0 - rho_) / n + v_n_ * basis_.lambda.array()).matrix();
}

double GbarDct::log_det() const {
  return fp_.array().log().sum() + fm_.array().log().sum();
}

Eigen::VectorXd GbarDct::to_spectral(const Eigen::VectorXd& z) const {
  const int n = basis_.n;
  const Eigen::VectorXd z1 = z.head(n), z2 = z.tail(n);
  Eigen::VectorXd w(2 * n);
  w.head(n) = basis_.U * (z1 + z2) / std::sqrt(2.0);
  w.tail(n) = basis_.U * (z2 - z1) / std::sqrt(2.0);
  return w;
}

Eigen::VectorXd GbarDct::from_spectral(const Eigen::VectorXd& w) const {
  const int n = basis_.n;
  const Eigen::VectorXd w1 = w.head(n), w2 = w.tail(n);
  Eigen::VectorXd z(2 * n);
  z.head(n) = basis_.U * (w1 - w2) / std::sqrt(2.0);
  z.tail(n) = basis_.U * (w1 + w2) / std::sqrt(2.0);
  return z;
}

Eigen::VectorXd GbarDct::solve(const Eigen::VectorXd& z) const {
  const int n = basis_.n;
  Eigen::VectorXd w = to_spectral(z);
  w.head(n).array() /= fp_.array();
  w.tail(n).array() /= fm_.array();
  return from_spectral(w);
}

double GbarDct::quad_form(const Eigen::VectorXd& z) const {
  const int n = basis_.n;
  const Eigen::VectorXd w = to_spectral(z);
  return (w.head(n).array().square() / fp_.array()).sum() +
         (w.tail(n).array().square() / fm_.array()).sum();
}

Eigen::VectorXd GbarDct::sample_spectral(std::mt19937_64& rng) const {
  const int n = basis_.n;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(2 * n);
  for (int i = 0; i < 2 * n; ++i) w(i) = normal(rng);
  w.head(n).array() *= fp_.array().sqrt();
  w.tail(n).array() *= fm_.array().sqrt();
  return w;
}

Eigen::VectorXd GbarDct::sample(std::mt19937_64& rng) const {
  return from_spectral(sample_spectral(rng));
}

}  // namespace laglan
