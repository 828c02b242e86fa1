#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosint/distributions.hpp"
#include "chaosint/graded.hpp"

namespace chaosint {

// Counter-based splittable stream: one uniform per (seed, replicate, index),
// no shared state, replicate-level parallelism without stream sharing.
std::uint64_t mix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t replicate, std::uint64_t index);

// Wichura's percentage points of the normal distribution (double precision).
double normal_icdf(double u);

// Inverse-CDF / exact discrete draw for one variable.
double sample_one(const Family& fam, std::uint64_t seed, std::uint64_t replicate,
                  std::uint64_t index);

Realization sample(const Model& model, int n, std::uint64_t seed, std::uint64_t replicate);

// Fixed-shape pairwise reduction; the result depends only on element order,
// never on thread scheduling.
double pairwise_sum(std::span<const double> xs);

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;
  double elapsed_s = 0.0;  // diagnostics only; never serialized into reports
};

// Resolves a worker count: `requested` if positive, else CHAOSINT_THREADS,
// else the hardware concurrency. Results are invariant under the choice.
int resolve_threads(int requested);

// Runs fn(r) for r in [0, m) over fixed disjoint blocks; rethrows the first
// worker exception. Callers must write to disjoint slots keyed by r.
void parallel_replicates(int m, int threads, const std::function<void(int)>& fn);

MCEstimate estimate(const std::function<double(const Realization&)>& functional,
                    const Model& model, int n, int replicates, std::uint64_t seed,
                    int threads = 0);

}  // namespace chaosint
