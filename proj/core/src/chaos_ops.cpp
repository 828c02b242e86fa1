#include "chaosint/chaos_ops.hpp"

#include <stdexcept>

namespace chaosint {

GradedChaos first_order(const std::vector<double>& coeffs, ModelPtr model) {
  GradedChaos z(model);
  z.set_kernel(SymTensor::from_vector(coeffs));
  return z;
}

GradedChaos first_order(const StepFn& h, const BasisSpec& basis, ModelPtr model) {
  return first_order(project(h, basis), std::move(model));
}

GradedChaos diagonal_quadratic(const Kernel2& f, ModelPtr model) {
  GradedChaos z(model);
  SymTensor order2(2);
  SymTensor order1(1);
  for (int j = 0; j < f.size(); ++j) {
    const double d = f.at(j, j);
    if (d == 0.0) continue;
    // X^2 - 1 = P_2(X) + m3 X
    order2.set({j, j}, d);
    const double skew = model->m(j, 3);
    if (skew != 0.0) order1.add({j}, d * skew);
  }
  if (!order2.empty()) z.set_kernel(std::move(order2));
  if (!order1.empty()) z.set_kernel(std::move(order1));
  return z;
}

GradedChaos cross_quadratic(const Kernel2& f, ModelPtr model) {
  GradedChaos z(model);
  SymTensor order2(2);
  for (int j = 1; j < f.size(); ++j)
    for (int k = 0; k < j; ++k) {
      const double c = f.at(j, k);
      if (c != 0.0) order2.add_lambda({k, j}, c);  // X_k X_j = P_1 P_1
    }
  if (!order2.empty()) z.set_kernel(std::move(order2));
  return z;
}

ProductParts product_decompose(const StepFn& h, const StepFn& g, const BasisSpec& basis,
                               ModelPtr model) {
  const auto hc = project(h, basis);
  const auto gc = project(g, basis);
  const int n = basis.size();
  Kernel2 hg(n);   // h (x) g
  Kernel2 symm(n); // h (x) g + g (x) h
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      hg.at(j, k) = hc[static_cast<std::size_t>(j)] * gc[static_cast<std::size_t>(k)];
      symm.at(j, k) = hc[static_cast<std::size_t>(j)] * gc[static_cast<std::size_t>(k)] +
                      gc[static_cast<std::size_t>(j)] * hc[static_cast<std::size_t>(k)];
    }
  ProductParts out{diagonal_quadratic(hg, model), cross_quadratic(symm, model), inner(h, g)};
  return out;
}

GradedChaos multiple_integral(const SymTensor& f, ModelPtr model) {
  if (f.order() < 1 || f.order() > 4)
    throw std::invalid_argument("multiple_integral: order must be in [1, 4]");
  GradedChaos z(model);
  SymTensor copy = f;
  copy.prune();
  if (!copy.empty()) z.set_kernel(std::move(copy));
  return z;
}

}  // namespace chaosint
