#include "chaosint/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace chaosint {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t replicate, std::uint64_t index) {
  std::uint64_t s = mix64(mix64(mix64(seed) ^ replicate) ^ index);
  s = mix64(s);
  // 53-bit mantissa, shifted off the endpoints
  return (static_cast<double>(s >> 11) + 0.5) * 0x1.0p-53;
}

// AS241 (PPND16): rational approximations on three regions, |error| ~ 1e-16.
double normal_icdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("normal_icdf: u must be in (0,1)");
  const double q = u - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return q < 0.0 ? -val : val;
}

double sample_one(const Family& fam, std::uint64_t seed, std::uint64_t replicate,
                  std::uint64_t index) {
  const double u = uniform01(seed, replicate, index);
  switch (fam.kind) {
    case Kind::Gaussian:
      return normal_icdf(u);
    case Kind::Rademacher:
      return u < 0.5 ? -1.0 : 1.0;
    case Kind::Uniform:
      return std::sqrt(3.0) * (2.0 * u - 1.0);
    case Kind::CenteredExponential:
      return -std::log1p(-u) - 1.0;
    case Kind::TwoPoint:
      return u < fam.p ? std::sqrt((1.0 - fam.p) / fam.p) : -std::sqrt(fam.p / (1.0 - fam.p));
  }
  throw std::logic_error("sample_one: unreachable");
}

Realization sample(const Model& model, int n, std::uint64_t seed, std::uint64_t replicate) {
  if (n > model.size()) throw std::invalid_argument("sample: n exceeds the model size");
  Realization r;
  r.seed = seed;
  r.replicate = replicate;
  r.model_tag = model.tag();
  r.x.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    r.x[static_cast<std::size_t>(j)] =
        sample_one(model.family(j), seed, replicate, static_cast<std::uint64_t>(j));
  return r;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHAOSINT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_replicates(int m, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, m);
  if (threads <= 1) {
    for (int r = 0; r < m; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr error;
  std::mutex error_mu;
  const int chunk = (m + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(m, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int r = lo; r < hi; ++r) fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MCEstimate estimate(const std::function<double(const Realization&)>& functional,
                    const Model& model, int n, int replicates, std::uint64_t seed, int threads) {
  if (replicates < 2) throw std::invalid_argument("estimate: need at least 2 replicates");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> vals(static_cast<std::size_t>(replicates));
  parallel_replicates(replicates, resolve_threads(threads), [&](int r) {
    const Realization omega = sample(model, n, seed, static_cast<std::uint64_t>(r));
    const double v = functional(omega);
    if (!std::isfinite(v))
      throw std::runtime_error("estimate: non-finite functional value at replicate " +
                               std::to_string(r));
    vals[static_cast<std::size_t>(r)] = v;
  });
  const double mean = pairwise_sum(vals) / replicates;
  std::vector<double> sq(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double d = vals[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / (replicates - 1);
  MCEstimate e;
  e.mean = mean;
  e.se = std::sqrt(var / replicates);
  e.replicates = replicates;
  e.seed = seed;
  e.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

}  // namespace chaosint
