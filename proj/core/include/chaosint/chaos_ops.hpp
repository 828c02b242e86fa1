#pragma once

#include "chaosint/graded.hpp"
#include "chaosint/grid.hpp"

namespace chaosint {

// Order-1 element sum_k <h, e_k> X_k; E[.^2] = |h|^2 exactly.
GradedChaos first_order(const StepFn& h, const BasisSpec& basis, ModelPtr model);
GradedChaos first_order(const std::vector<double>& coeffs, ModelPtr model);

// Diagonal quadratic sum_j f_jj (X_j^2 - 1), returned regraded (an order-2
// kernel plus, for skewed families, an order-1 remainder m3_j f_jj X_j).
GradedChaos diagonal_quadratic(const Kernel2& f, ModelPtr model);

// Strictly-lower quadratic sum_{k<j} f_jk X_k X_j. Upper-triangular and
// diagonal coefficients are ignored; symmetric inputs must be pre-split.
GradedChaos cross_quadratic(const Kernel2& f, ModelPtr model);

// The three parts of a product of order-1 elements; they sum to
// first_order(h) * first_order(g) exactly and `constant` equals <h, g>.
struct ProductParts {
  GradedChaos diag_part;
  GradedChaos cross_part;
  double constant = 0.0;
};
ProductParts product_decompose(const StepFn& h, const StepFn& g, const BasisSpec& basis,
                               ModelPtr model);

// Multiple integral of a symmetric kernel: pure order-n element mapping each
// orbit to lambda * prod_i P_{alpha_i}(X_{j_i}). Distinct orders are
// orthogonal and E[.^2] equals the isometry norm of the kernel.
GradedChaos multiple_integral(const SymTensor& f, ModelPtr model);

}  // namespace chaosint
