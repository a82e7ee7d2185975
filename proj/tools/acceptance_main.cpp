#include <CLI11.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "laglan/experiments.hpp"
#include "laglan/inference.hpp"
#include "laglan/limitexp.hpp"
#include "laglan/spectral.hpp"
#include "laglan/structure.hpp"

/// Acceptance suite: ten numbered criteria, one result line each, with the
/// measured values and the tolerance pinned next to the check.  Runs all
/// criteria by default (roughly half an hour single-threaded; the estimator
/// campaigns dominate); --only N restricts to a subset.  Exit 0 iff every
/// selected criterion passes.

namespace {

struct CheckResult {
  bool ok = true;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * x);
  return buf;
}

// 1. The cosine basis diagonalizes the difference product and is orthogonal.
CheckResult check_basis_diagonalization() {
  constexpr double kTol = 1e-10;
  double worst_diag = 0.0, worst_orth = 0.0;
  for (int n : {1, 2, 8, 64, 512}) {
    const laglan::DctBasis basis = laglan::dct_basis(n);
    laglan::ModelSpec spec;
    spec.n = n;
    spec.rho = 0.5;  // F does not depend on (rho, v_n)
    const laglan::StructureSet st = laglan::build_structures(spec);
    const Eigen::MatrixXd diag_err =
        basis.U * st.F * basis.U -
        Eigen::MatrixXd(basis.lambda.asDiagonal());
    const Eigen::MatrixXd orth_err =
        basis.U.transpose() * basis.U - Eigen::MatrixXd::Identity(n, n);
    worst_diag = std::max(worst_diag, diag_err.cwiseAbs().maxCoeff());
    worst_orth = std::max(worst_orth, orth_err.cwiseAbs().maxCoeff());
  }
  CheckResult out;
  out.ok = worst_diag < kTol && worst_orth < kTol;
  out.detail = "diag " + num(worst_diag) + ", orthogonality " +
               num(worst_orth) + " (tol 1e-10, n up to 512)";
  return out;
}

// 2. Exact and surrogate covariances agree entrywise and in Hellinger
//    distance for small lags.
CheckResult check_surrogate_equivalence() {
  constexpr double kEntryTol = 1e-12;
  constexpr double kHellingerTol = 1e-7;
  double worst_entry = 0.0, worst_h = 0.0;
  for (int n : {4, 16, 64}) {
    for (double v : {0.05, 0.25}) {
      for (double rho : {-0.7, 0.5}) {
        for (double scaled : {0.0, 0.5, 1.0, -0.5, -1.0}) {
          laglan::ModelSpec spec;
          spec.n = n;
          spec.rho = rho;
          spec.v_n = v;
          spec.theta = scaled / n;
          spec.gamma_mode = laglan::GammaMode::Finite;
          spec.gamma = n * v;
          const laglan::CovarianceModel exact = laglan::exact_covariance(spec);
          const laglan::CovarianceModel surr =
              laglan::surrogate_covariance(spec);
          worst_entry = std::max(
              worst_entry, (exact.matrix - surr.matrix).cwiseAbs().maxCoeff());
          worst_h = std::max(worst_h, laglan::hellinger(exact, surr));
        }
      }
    }
  }
  CheckResult out;
  out.ok = worst_entry < kEntryTol && worst_h < kHellingerTol;
  out.detail = "entrywise " + num(worst_entry) + " (tol 1e-12), hellinger " +
               num(worst_h) + " (tol 1e-7)";
  return out;
}

// 3. The cubic lag bound on the squared Hellinger distance holds on a dense
//    admissible grid.
CheckResult check_hellinger_bound() {
  const std::vector<laglan::HellingerScanRow> rows =
      laglan::hellinger_bound_scan({16, 64}, {0.05, 0.25},
                                   {0.3, -0.3, 0.7, -0.7}, 21);
  int violations = 0;
  double worst_ratio = 0.0;
  for (const auto& row : rows) {
    if (!row.ok) ++violations;
    if (row.bound > 0.0) worst_ratio = std::max(worst_ratio, row.h2 / row.bound);
  }
  CheckResult out;
  out.ok = violations == 0;
  out.detail = std::to_string(violations) + " violations in " +
               std::to_string(rows.size()) + " points, max h2/bound " +
               num(worst_ratio);
  return out;
}

// 4. The scaled Frobenius mass of every weighted score combination converges
//    to its limit along the n-grid in each regime.
CheckResult check_frobenius_limits() {
  constexpr double kFinalTol = 0.05;
  constexpr double kStepSlack = 1.10;
  const std::vector<int> ns = {128, 256, 512, 1024, 2048};
  const std::vector<std::pair<double, double>> weights = {
      {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  double worst_final = 0.0, worst_step = 0.0;
  std::string worst_cell;
  bool ok = true;
  for (const laglan::RegimeRequest& regime : laglan::preset_regimes()) {
    for (const auto& [alpha, beta] : weights) {
      const std::vector<laglan::FrobeniusReport> reports =
          laglan::frobenius_sweep(regime, 0.5, alpha, beta, ns);
      for (std::size_t i = 1; i < reports.size(); ++i) {
        const double step = reports[i].rel_err / reports[i - 1].rel_err;
        worst_step = std::max(worst_step, step);
        if (step > kStepSlack) ok = false;
      }
      const double final_err = reports.back().rel_err;
      if (final_err > worst_final) {
        worst_final = final_err;
        worst_cell = laglan::to_string(regime) + " (" + num(alpha) + "," +
                     num(beta) + ")";
      }
      if (final_err >= kFinalTol) ok = false;
    }
  }
  CheckResult out;
  out.ok = ok;
  out.detail = "max rel err " + pct(worst_final) + " at n=2048 [" +
               worst_cell + "] (tol 5%), max step ratio " + num(worst_step) +
               " (slack 1.10)";
  return out;
}

// 5. Kernel-level limits: the sine power sum and the one- and two-channel
//    Frobenius masses sit near their closed-form limits.
CheckResult check_kernel_lemmas() {
  constexpr double kSineTol = 0.05;
  constexpr double kChannelTol = 0.10;
  const laglan::LemmaReport sine = laglan::sine_power_sum_check(4096);
  double worst_channel = 0.0;
  for (const laglan::RegimeRequest& regime : laglan::preset_regimes()) {
    const laglan::ModelSpec spec = laglan::spec_for(regime, 2048, 0.5);
    for (double a : {0.5, 1.5}) {
      worst_channel = std::max(
          worst_channel,
          laglan::single_channel_frobenius_check(spec, a).rel_err);
    }
    worst_channel = std::max(
        worst_channel,
        laglan::cross_channel_frobenius_check(spec, 0.5, 1.5).rel_err);
  }
  CheckResult out;
  out.ok = sine.rel_err < kSineTol && worst_channel < kChannelTol;
  out.detail = "sine sum rel err " + pct(sine.rel_err) +
               " (tol 5%), max channel rel err " + pct(worst_channel) +
               " (tol 10%)";
  return out;
}

// 6. The two local statistics are jointly Gaussian in the limit: standard
//    normal marginals by KS distance, vanishing cross-correlation.
CheckResult check_statistic_normality() {
  constexpr double kTol = 0.05;
  constexpr int kReps = 2000;
  constexpr std::uint64_t kSeed = 11;
  double worst_ks_t = 0.0, worst_ks_s = 0.0, worst_corr = 0.0;
  bool ok = true;
  for (const laglan::RegimeRequest& regime : laglan::preset_regimes()) {
    const laglan::CltCampaign camp = laglan::lan_clt_campaign(
        laglan::spec_for(regime, 2048, 0.5), kReps, kSeed);
    worst_ks_t = std::max(worst_ks_t, camp.ks_t);
    if (camp.ks_t >= kTol) ok = false;
    if (!std::isnan(camp.ks_s)) {
      worst_ks_s = std::max(worst_ks_s, camp.ks_s);
      if (camp.ks_s >= kTol) ok = false;
    }
    worst_corr = std::max(worst_corr, std::abs(camp.corr_ts));
    if (std::abs(camp.corr_ts) >= kTol) ok = false;
  }
  CheckResult out;
  out.ok = ok;
  out.detail = "max KS odd " + num(worst_ks_t) + ", even " + num(worst_ks_s) +
               ", |corr| " + num(worst_corr) + " (tol 0.05)";
  return out;
}

// 7. The local expansion error shrinks with n at every probed rescaled lag
//    and is small at the largest size.
CheckResult check_expansion_residual() {
  constexpr double kFinalTol = 0.1;
  constexpr int kReps = 500;
  constexpr std::uint64_t kSeed = 13;
  const std::vector<double> us = {1.0, -1.0, 2.0};
  const std::vector<int> ns = {128, 512, 2048};
  double worst_final = 0.0;
  std::string worst_cell;
  int monotone_breaks = 0;
  std::string first_break;
  bool ok = true;
  for (const laglan::RegimeRequest& regime : laglan::preset_regimes()) {
    std::vector<std::vector<double>> med_by_u(us.size());
    for (int n : ns) {
      const std::vector<laglan::ResidualSummary> rows =
          laglan::residual_campaign(laglan::spec_for(regime, n, 0.5), us,
                                    kReps, kSeed);
      for (std::size_t j = 0; j < us.size(); ++j)
        med_by_u[j].push_back(rows[j].median_abs);
    }
    for (std::size_t j = 0; j < us.size(); ++j) {
      const std::vector<double>& meds = med_by_u[j];
      const std::string cell =
          laglan::to_string(regime) + " u=" + num(us[j]);
      for (std::size_t i = 1; i < meds.size(); ++i) {
        if (meds[i] >= meds[i - 1]) {
          ok = false;
          if (monotone_breaks == 0) first_break = cell;
          ++monotone_breaks;
        }
      }
      if (meds.back() > worst_final) {
        worst_final = meds.back();
        worst_cell = cell;
      }
      if (meds.back() >= kFinalTol) ok = false;
    }
  }
  CheckResult out;
  out.ok = ok;
  out.detail = "max median at n=2048 " + num(worst_final) + " [" +
               worst_cell + "] (tol 0.1), " +
               (monotone_breaks == 0
                    ? std::string("medians decrease along n")
                    : std::to_string(monotone_breaks) +
                          " monotonicity breaks (first " + first_break + ")");
  return out;
}

// 8. Limit-experiment moments: Monte Carlo agrees with the closed form for
//    the argmax and with quadrature for the posterior mean; the degenerate
//    case collapses to 1/I exactly.
CheckResult check_limit_moments() {
  constexpr double kHatTol = 0.01;
  constexpr double kTildeTol = 0.02;
  constexpr int kDraws = 1000000;
  constexpr std::uint64_t kSeed = 17;
  double worst_hat = 0.0, worst_tilde = 0.0;
  bool ok = true;
  const std::vector<std::pair<double, double>> cases = {{0.5, 0.0},
                                                        {0.6, 1.0}};
  for (const auto& [rho, gamma] : cases) {
    const laglan::LimitConstants lc = laglan::limit_constants(rho, gamma);
    const double closed = laglan::mle_limit_variance(lc.I, lc.J);
    const double quad = laglan::bayes_limit_variance(lc.I, lc.J);
    const std::vector<laglan::LimitDraw> draws =
        laglan::sample_limit(rho, gamma, kSeed, kDraws);
    double mc_hat = 0.0, mc_tilde = 0.0;
    for (const laglan::LimitDraw& d : draws) {
      mc_hat += d.u_hat * d.u_hat;
      mc_tilde += d.u_tilde * d.u_tilde;
    }
    mc_hat /= kDraws;
    mc_tilde /= kDraws;
    const double err_hat = std::abs(mc_hat - closed) / closed;
    const double err_tilde = std::abs(mc_tilde - quad) / quad;
    worst_hat = std::max(worst_hat, err_hat);
    worst_tilde = std::max(worst_tilde, err_tilde);
    if (err_hat >= kHatTol || err_tilde >= kTildeTol) ok = false;
  }
  const laglan::LimitConstants degenerate = laglan::limit_constants(
      0.5, std::numeric_limits<double>::infinity());
  const bool exact_collapse =
      laglan::mle_limit_variance(degenerate.I, 0.0) == 1.0 / degenerate.I &&
      laglan::bayes_limit_variance(degenerate.I, 0.0) == 1.0 / degenerate.I;
  if (!exact_collapse) ok = false;
  CheckResult out;
  out.ok = ok;
  out.detail = "MC vs closed " + pct(worst_hat) + " (tol 1%), vs quadrature " +
               pct(worst_tilde) + " (tol 2%), degenerate collapse " +
               (exact_collapse ? "exact" : "BROKEN");
  return out;
}

// 9. The posterior-mean-to-argmax efficiency ratio decays as the driving
//    correlation approaches one.
CheckResult check_efficiency_decay() {
  const std::vector<laglan::EfficiencyRow> table =
      laglan::efficiency_table({0.5, 0.9, 0.99, 0.999}, 0.0);
  bool ok = true;
  for (std::size_t i = 1; i < table.size(); ++i)
    if (table[i].ratio >= table[i - 1].ratio) ok = false;
  const bool halved = table[3].ratio < 0.5 * table[1].ratio;
  if (!halved) ok = false;
  std::ostringstream detail;
  detail << "ratios";
  for (const laglan::EfficiencyRow& row : table) detail << " " << num(row.ratio);
  detail << (ok ? " strictly decreasing, " : " NOT decreasing, ")
         << "last/0.9 " << num(table[3].ratio / table[1].ratio)
         << " (need < 0.5)";
  CheckResult out;
  out.ok = ok;
  out.detail = detail.str();
  return out;
}

// 10. Full simulate-estimate pipeline: rescaled second moments of both
//     estimators against the limit-experiment predictions in the noiseless
//     and noise-dominated regimes.
CheckResult check_estimator_convergence() {
  constexpr double kTol = 0.15;
  constexpr int kReps = 1000;
  struct Leg {
    const char* name;
    const char* regime;
    std::uint64_t seed;
  };
  const std::vector<Leg> legs = {{"zero", "zero", 19},
                                 {"infinite", "infinite:0.25", 23}};
  bool ok = true;
  std::ostringstream detail;
  for (const Leg& leg : legs) {
    const laglan::RegimeRequest regime = laglan::parse_regime(leg.regime);
    const laglan::ModelSpec spec = laglan::spec_for(regime, 2048, 0.5);
    const laglan::LimitConstants lc = laglan::limit_constants(spec);
    const double hat_target = laglan::mle_limit_variance(lc.I, lc.J);
    const double tilde_target = laglan::bayes_limit_variance(lc.I, lc.J);
    const double eta = regime.mode == laglan::GammaMode::Infinite
                           ? laglan::eta_window_rule(spec, 5.0)
                           : laglan::eta_log_rule(spec.n);
    const laglan::EstimateCampaign camp =
        laglan::estimate_campaign(spec, 0.0, eta, kReps, leg.seed);
    const double err_hat =
        std::abs(camp.hat_moment - hat_target) / hat_target;
    const double err_tilde =
        std::abs(camp.tilde_moment - tilde_target) / tilde_target;
    if (err_hat >= kTol || err_tilde >= kTol) ok = false;
    if (&leg != &legs.front()) detail << "; ";
    detail << leg.name << " argmax " << num(camp.hat_moment) << "/"
           << num(hat_target) << " (" << pct(err_hat) << "), posterior mean "
           << num(camp.tilde_moment) << "/" << num(tilde_target) << " ("
           << pct(err_tilde) << ")";
    if (camp.failures > 0) detail << ", failures " << camp.failures;
  }
  detail << " (tol 15%)";
  CheckResult out;
  out.ok = ok;
  out.detail = detail.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Acceptance suite: one line per criterion, exit 0 iff all pass"};
  std::vector<int> only;
  app.add_option("--only", only,
                 "criterion numbers to run (repeatable; default: all)");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* label;
    CheckResult (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, "basis-diagonalization", check_basis_diagonalization},
      {2, "surrogate-equivalence", check_surrogate_equivalence},
      {3, "hellinger-bound", check_hellinger_bound},
      {4, "frobenius-limits", check_frobenius_limits},
      {5, "kernel-lemmas", check_kernel_lemmas},
      {6, "statistic-normality", check_statistic_normality},
      {7, "expansion-residual", check_expansion_residual},
      {8, "limit-moments", check_limit_moments},
      {9, "efficiency-decay", check_efficiency_decay},
      {10, "estimator-convergence", check_estimator_convergence},
  };

  int ran = 0, passed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] %2d %-24s %7.1fs  %s\n", result.ok ? "PASS" : "FAIL",
                c.id, c.label, secs, result.detail.c_str());
    std::fflush(stdout);
    ++ran;
    if (result.ok) ++passed;
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
