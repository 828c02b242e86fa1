#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chaosint/integral.hpp"

namespace chaosint {

// Graded decomposition of the square of an order-2 element, assembled from
// the closed-form right-hand side
//   order 4: f o f
//   order 3: a_1(f o f)
//   order 2: 4 f ~1 f + a_2(f o f)
//   order 1: a_3(f o f) + 4 a_1(f ~1 f) - 6 a_1(pi_1(f ~1 f))
//   order 0: 2 |f|^2 + a_4(f o f)
// and, independently, from the polynomial oracle. Residuals are emitted per
// order; they vanish for Gaussian models and at order 4 for every family.
struct SquareDecompReport {
  std::array<double, 5> residual_max{};    // max kernel-entry gap per order
  std::array<double, 5> residual_norm2{};  // squared tensor norm of the gap
  std::array<double, 5> oracle_norm2{};    // size of the oracle kernels
  double oracle_order0 = 0.0;              // constant term of the oracle
  double rhs_order0_otimes = 0.0;          // 2|f|^2 (tensor norm) + a_4(f o f)
  double rhs_order0_isometry = 0.0;        // 2|f|^2 (isometry norm) + a_4(f o f)
  double exact_second_moment = 0.0;        // |f|_A^2 + |a_1 f|^2
  GradedChaos oracle;
  std::array<SymTensor, 5> rhs_kernels{SymTensor(0), SymTensor(1), SymTensor(2), SymTensor(3),
                                       SymTensor(4)};
};

SquareDecompReport square_decomposition(const SymTensor& f, ModelPtr model, int n);

// Exact fourth moment of an increment Z_t - Z_s of the double integral of
// first_order(h1) against first_order(h2). The increment is a quadratic form
// with rank-one causal structure, so mixed moments of (partial sum, prefix)
// close under a per-cell recursion; no sampling and no truncation error.
struct GapMoment {
  double s = 0.0;
  double t = 0.0;
  double e2 = 0.0;          // E[(Z_t - Z_s)^2]
  double e4 = 0.0;          // E[(Z_t - Z_s)^4]
  double gap_ratio = 0.0;   // e4 / (t-s)^2
  double bound_ratio = 0.0; // e4 / (|h1|^4 |h2 1_gap|^4)
};

GapMoment fourth_moment_gap(const StepFn& h1, const StepFn& h2, double s, double t,
                            const BasisSpec& basis, const Model& model);

struct FourthMomentReport {
  std::vector<GapMoment> gaps;
  double loglog_slope = 0.0;       // least squares of log e4 against log (t-s)
  double ratio_spread = 0.0;       // max / min of gap_ratio
  double candidate_constant = 0.0; // 7/2 C(1,4) + C(2,4) + C(3,4) + C(4,4) + 2
  double empirical_constant = 0.0; // max bound_ratio over the gaps
};

FourthMomentReport fourth_moment_scaling(const StepFn& h1, const StepFn& h2,
                                         const std::vector<std::pair<double, double>>& gaps,
                                         const BasisSpec& basis, const Model& model);

// Pathwise quadratic-variation limit at horizon t:
//   term 1: integral of h2(s)^2 (first_order(h1 1_{]0,s]})(omega))^2 ds,
//           piecewise quadratic in s, integrated exactly per cell;
//   term 2: the skewness correction sum_j m3_j X_j weighted by the running
//           squared coefficient, same exact per-cell integration.
double qv_limit(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis,
                const Model& model, const Realization& omega, bool with_correction = true);

struct QVRow {
  int level = 0;
  double mesh = 0.0;
  double residual_mean = 0.0;         // E[(QV_sum - limit)^2]
  double residual_ci = 0.0;           // 1.96 SE half width
  double residual_nocorr_mean = 0.0;  // same with the correction term omitted
  double qv_mean = 0.0;
  double qv_se = 0.0;
  bool undersampled = false;          // relative CI half-width > 50%
};

struct QVReport {
  std::vector<QVRow> rows;
  std::uint64_t seed = 0;
  int replicates = 0;
  std::string model_tag;
};

QVReport qv_convergence(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis,
                        ModelPtr model, const std::vector<int>& levels, int replicates,
                        std::uint64_t seed, int threads = 0);

// Tensor norm of the sum over partition cells of f_k o f_k for the increment
// kernels f_k; decreases with the mesh at the half-power rate. Exact, no
// randomness.
double increment_square_kernel_norm(const StepFn& h1, const StepFn& h2, double t,
                                    const BasisSpec& basis, int partition_level);

}  // namespace chaosint
