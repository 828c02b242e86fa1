#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chaosint/multipoly.hpp"
#include "chaosint/sym_tensor.hpp"

namespace chaosint {

// One draw of the driving variables, with its stream provenance.
struct Realization {
  std::vector<double> x;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::string model_tag;
};

struct NullStratumFlag {
  int order = 0;
  IndexTuple idx;
};

// A random variable written as orders 0..4 of symmetric kernels under the
// multiple-integral map: order n kernel f contributes
//   sum over orbits of lambda * prod_i P_{alpha_i}(X_{j_i}).
// Orders with all-zero kernels are absent from the map.
class GradedChaos {
 public:
  GradedChaos() = default;
  explicit GradedChaos(ModelPtr model, double constant = 0.0);

  const ModelPtr& model() const { return model_; }
  double constant() const { return constant_; }
  void set_constant(double c) { constant_ = c; }

  bool has_order(int n) const { return kernels_.count(n) > 0; }
  const SymTensor& kernel(int n) const;
  void set_kernel(SymTensor k);  // order taken from the tensor
  const std::map<int, SymTensor>& kernels() const { return kernels_; }
  int max_order() const;

  GradedChaos& operator+=(const GradedChaos& o);
  GradedChaos operator+(const GradedChaos& o) const;
  GradedChaos operator-(const GradedChaos& o) const;
  GradedChaos& scale(double c);

  // Exact polynomial reconstruction through the orthogonal polynomials.
  MultiPoly to_poly() const;

  // Pointwise evaluation via the three-term recurrences.
  double evaluate(const Realization& omega) const;

  // Zeroes every kernel entry touching an index >= n.
  GradedChaos truncated(int n) const;

  // Kernel components living on strata with vanishing quadratic norm
  // (atomic families); they evaluate to zero a.s. but are kept and flagged.
  std::vector<NullStratumFlag> null_strata() const;

  double max_kernel_entry() const;

  // Debug serialization: per-order sparse kernel entries with multi-indices.
  std::string debug_json() const;

 private:
  double constant_ = 0.0;
  std::map<int, SymTensor> kernels_;
  ModelPtr model_;
};

// Unique rewrite of a polynomial (per-variable degree <= 4) as a graded
// element; reconstruction reproduces the polynomial exactly.
GradedChaos regrade(const MultiPoly& p, ModelPtr model);

}  // namespace chaosint
