#pragma once

#include "chaosint/chaos_ops.hpp"
#include "chaosint/graded.hpp"
#include "chaosint/grid.hpp"

namespace chaosint {

// Inputs of the double integral of first_order(h) against first_order(g) up
// to horizon t (a grid point of the basis grid).
struct IntegralSpec {
  StepFn h;
  StepFn g;
  double t = 1.0;
  BasisSpec basis;
  ModelPtr model;
};

// Raw second-order element c0 + sum_j d_j (X_j^2 - 1) + sum_{i<j} c_ij X_i X_j.
// This is the natural output basis of the integral constructions; exact
// second moments are closed form here.
class RawQuadratic {
 public:
  RawQuadratic() = default;
  explicit RawQuadratic(int n);

  int size() const { return n_; }
  double constant() const { return c0_; }
  void set_constant(double c) { c0_ = c; }
  double diag(int j) const { return d_[static_cast<std::size_t>(j)]; }
  double& diag(int j) { return d_[static_cast<std::size_t>(j)]; }
  double cross(int i, int j) const { return c_[pair_index(i, j)]; }  // i < j
  double& cross(int i, int j) { return c_[pair_index(i, j)]; }

  RawQuadratic operator-(const RawQuadratic& o) const;

  // E[(.)^2] = (c0 - E)^2 ... with centered parts orthogonal:
  //   c0^2 is excluded; returns E[(Z - c0)^2] + c0^2 i.e. the plain second
  //   moment sum_j d_j^2 (m4_j - 1) + sum c_ij^2 + c0^2.
  double second_moment(const Model& model) const;

  double evaluate(const Realization& omega) const;
  MultiPoly to_poly() const;
  GradedChaos to_graded(ModelPtr model) const;
  double max_abs_entry() const;

 private:
  std::size_t pair_index(int i, int j) const;
  int n_ = 0;
  double c0_ = 0.0;
  std::vector<double> d_;
  std::vector<double> c_;  // packed strictly-upper pairs i < j
};

// The double integral as a raw quadratic: diagonal from the causal kernel,
// cross coefficients h_earlier * g_later.
RawQuadratic double_integral_raw(const IntegralSpec& spec);
GradedChaos double_integral(const IntegralSpec& spec);

// Left-point Riemann approximant on the dyadic partition of [0, t] at
// `partition_level` (any level; partitions finer than the basis grid use the
// exact partial-cell brackets).
RawQuadratic riemann_sum_raw(const IntegralSpec& spec, int partition_level);
GradedChaos riemann_sum(const IntegralSpec& spec, int partition_level);

// Exact E[(A - B)^2] for two raw quadratics over the same model.
double mean_square_diff(const RawQuadratic& a, const RawQuadratic& b, const Model& model);

// Product minus both integrals minus <h, g>, regraded; the zero element for
// grid-adapted step functions.
GradedChaos ibp_residual(const StepFn& h, const StepFn& g, const BasisSpec& basis, ModelPtr model);

// Second moment of the double integral two ways: `direct` via the polynomial
// oracle, `formula` as exact causal-kernel norm plus the fourth-moment
// correction sum_j <h (x) g 1_C, e_j (x) e_j>^2 (m4_j - 3).
struct SecondMoment {
  double direct = 0.0;
  double formula = 0.0;
};
SecondMoment second_moment(const IntegralSpec& spec);

// Z_{t_k}(omega) at every partition point (partition points must lie on the
// basis grid); Z_0 = 0.
std::vector<double> integral_path(const IntegralSpec& spec, const Realization& omega,
                                  const Grid& partition);

}  // namespace chaosint
