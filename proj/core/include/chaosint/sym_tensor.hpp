#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "chaosint/distributions.hpp"
#include "chaosint/grid.hpp"

namespace chaosint {

// Sorted variable-index tuple; its length is the tensor order.
using IndexTuple = std::vector<int>;

// Number of distinct arrangements of the (sorted) tuple: n! / prod(mult!).
long orbit_size(const IndexTuple& sorted);

// Multiplicities of the distinct indices in a sorted tuple.
std::vector<int> multiplicities(const IndexTuple& sorted);

// Symmetric tensor of order n <= 4 in full-tensor representation: the stored
// value at a sorted tuple is the common coefficient at every permutation of
// it. The lambda coordinate of an orbit is the coefficient of the symmetric
// basis element (e_{j1}^{o a1} o ... o e_{jr}^{o ar}):
//   lambda = value * n! / prod(alpha_i!).
class SymTensor {
 public:
  SymTensor() = default;
  explicit SymTensor(int order);

  int order() const { return order_; }

  double at(IndexTuple t) const;                 // any permutation
  void set(IndexTuple sorted, double v);         // full-tensor value
  void add(IndexTuple sorted, double v);
  double lambda(const IndexTuple& sorted) const;
  void add_lambda(IndexTuple sorted, double lam);

  bool empty() const { return v_.empty(); }
  std::size_t orbit_count() const { return v_.size(); }
  const std::map<IndexTuple, double>& entries() const { return v_; }

  SymTensor& operator+=(const SymTensor& o);
  SymTensor operator+(const SymTensor& o) const;
  SymTensor operator-(const SymTensor& o) const;
  SymTensor& scale(double c);
  SymTensor scaled(double c) const;
  SymTensor& prune(double eps = 0.0);

  double otimes_inner(const SymTensor& o) const;  // full-tensor inner product
  double otimes_norm2() const { return otimes_inner(*this); }
  double max_abs() const;

  // Order-2 helpers.
  static SymTensor from_matrix(const Kernel2& symmetric);
  static SymTensor from_vector(const std::vector<double>& coeffs);  // order 1
  static SymTensor scalar(double v);                                // order 0
  Kernel2 to_matrix(int n) const;  // order-2 full-tensor coefficient matrix

 private:
  int order_ = 0;
  std::map<IndexTuple, double> v_;
};

// Orthogonal symmetrization of an arbitrary tensor given as additive
// (tuple, value) entries; entries at permuted tuples are averaged.
SymTensor sym(int order, const std::vector<std::pair<IndexTuple, double>>& entries);

// Symmetric tensor product: circ(f, g) = sym(f (x) g); commutative, bilinear.
SymTensor circ(const SymTensor& f, const SymTensor& g);

// Inner product under which the multiple integral is an isometry:
//   <f,g> = n! <Af, Ag>_(x),  A scaling the e^{o alpha} stratum by
//   sqrt(prod q_{alpha_i} / prod alpha_i!).
double isometry_inner(const SymTensor& f, const SymTensor& g, const Model& model);
double isometry_norm2(const SymTensor& f, const Model& model);

// One-argument contraction of an order-2 kernel: the A-scaled coefficient
// matrix times its own transpose (the basis is orthonormal, so the measure
// integral is the coefficient contraction). Positive semidefinite.
Kernel2 contract1(const SymTensor& f, const Model& model, int n);

// Orthogonal projection onto span{e_j o e_j}: keeps diagonal entries.
SymTensor diagonal_projection(const SymTensor& f);

// Degree-lowering operator of total drop k driven by the gap between the
// family's connection coefficients and the Hermite reference:
//   e^{o alpha} -> sum over k-decompositions of
//     prod_{k_i != 0} (gamma_{a_i, a_i-k_i} - Gamma_{a_i, a_i-k_i}) 1[a_i >= k_i]
//   applied stratum-wise. Identically zero for Gaussian models.
SymTensor lowering(const SymTensor& f, int k, const Model& model);

// Exhaustive maxima over compositions of n (and drops k) of the lowering
// products C(k, n) and of the stratum scale factors A(n).
struct SupConstants {
  std::array<double, 5> C{};  // index k = 0..4; C[0] unused
  double A = 0.0;             // sup over strata of prod q / prod alpha!
};
SupConstants sup_constants(const Model& model, int n);

}  // namespace chaosint
