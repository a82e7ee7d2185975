#include "laglan/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace laglan {

std::mt19937_64 substream_engine(std::uint64_t seed, std::uint64_t stream) {
  // Decorrelate (seed, stream) pairs through SplitMix before seeding the
  // Mersenne twister; seed_seq spreads the four words over the full state.
  std::uint64_t state = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  std::uint64_t words[4];
  for (auto& w : words) w = splitmix64(state);
  std::seed_seq seq{
      static_cast<std::uint32_t>(words[0]), static_cast<std::uint32_t>(words[0] >> 32),
      static_cast<std::uint32_t>(words[1]), static_cast<std::uint32_t>(words[1] >> 32),
      static_cast<std::uint32_t>(words[2]), static_cast<std::uint32_t>(words[2] >> 32),
      static_cast<std::uint32_t>(words[3]), static_cast<std::uint32_t>(words[3] >> 32)};
  return std::mt19937_64(seq);
}

GaussHermite gauss_hermite(int k) {
  if (k < 1) throw std::invalid_argument("gauss_hermite: k must be positive");
  GaussHermite rule;
  if (k == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
    return rule;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
  for (int j = 1; j < k; ++j) {
    const double beta = std::sqrt(j / 2.0);
    jacobi(j, j - 1) = beta;
    jacobi(j - 1, j) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  rule.nodes = eig.eigenvalues();
  rule.weights =
      std::sqrt(M_PI) * eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

double ks_statistic(std::vector<double> xs,
                    const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = cdf(xs[i]);
    d = std::max(d, std::abs(u - static_cast<double>(i + 1) / m));
    d = std::max(d, std::abs(u - static_cast<double>(i) / m));
  }
  return d;
}

double sample_mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("sample_mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: need m >= 2");
  const double mu = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("median: empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  std::nth_element(x.begin(), x.begin() + mid - 1, x.end());
  return 0.5 * (x[mid - 1] + hi);
}

double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: bad sample sizes");
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

int worker_count() {
  if (const char* env = std::getenv("LAGLAN_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc >= 1 ? static_cast<int>(hc) : 1;
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  const int threads = worker_count();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::size_t>(count, static_cast<std::size_t>(threads)));
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace laglan
