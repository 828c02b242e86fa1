#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chaosint {

// Dyadic grid on ]0, T]: 2^level equal cells I_k = ]k*T/2^L, (k+1)*T/2^L].
struct Grid {
  double T = 1.0;
  int level = 0;

  Grid() = default;
  Grid(double horizon, int lvl);

  int cells() const { return 1 << level; }
  double cell_len() const { return T / static_cast<double>(cells()); }
  double point(std::int64_t k) const {
    return T * static_cast<double>(k) / static_cast<double>(cells());
  }

  // True if this grid subdivides `coarser` (same horizon, level >= coarser's).
  bool refines(const Grid& coarser) const;

  // Exact grid index of time s in [0, T], or nullopt if s is not a grid point.
  std::optional<std::int64_t> index_of(double s) const;

  bool operator==(const Grid&) const = default;
};

// Piecewise-constant function on a dyadic grid. Values are per cell; the
// function is representable on any refinement with identical pointwise values.
class StepFn {
 public:
  StepFn() = default;
  StepFn(Grid g, std::vector<double> values);

  static StepFn constant(Grid g, double c);
  // CSV with a required "cell_index,value" header; missing cells are zero.
  static StepFn from_csv(Grid g, const std::string& path);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double at(int cell) const { return values_[static_cast<std::size_t>(cell)]; }

  // Cell values after refining to `level` (must be >= own level).
  std::vector<double> values_at_level(int level) const;

  double l2_norm2() const;  // integral of the square over ]0,T]

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Exact inner product in L2(]0,T]); both functions refined to a common grid.
double inner(const StepFn& a, const StepFn& b);

// Orthonormal indicator basis e_k = 1_{I_k} / sqrt|I_k| on a dyadic grid.
struct BasisSpec {
  Grid grid;

  BasisSpec() = default;
  explicit BasisSpec(Grid g) : grid(g) {}

  int size() const { return grid.cells(); }
  double cell_len() const { return grid.cell_len(); }
  // <e_j, e_k> in closed form; no quadrature anywhere.
  double inner_ee(int j, int k) const { return j == k ? 1.0 : 0.0; }
};

// Basis coefficients <h, e_k> = value_k * sqrt|I_k|.
// Requires h's grid to be the basis grid or a coarsening of it.
std::vector<double> project(const StepFn& h, const BasisSpec& basis);

// Step function with the given basis coefficients (inverse of project).
StepFn reconstruct(const std::vector<double>& coeffs, const BasisSpec& basis);

// Coefficients <h * 1_{]0,s]}, e_k> for arbitrary s in [0, T]. Cells fully
// left of s contribute their whole bracket, the cell containing s a partial
// one; everything is closed form.
std::vector<double> prefix_coeffs(const StepFn& h, const BasisSpec& basis, double s);

// Coefficient array of a kernel in H (x) H over the indicator basis, plus the
// exact pre-projection L2 norm when known analytically.
class Kernel2 {
 public:
  Kernel2() = default;
  explicit Kernel2(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double at(int j, int k) const { return a_[idx(j, k)]; }
  double& at(int j, int k) { return a_[idx(j, k)]; }

  Kernel2 transposed() const;
  Kernel2& operator+=(const Kernel2& o);
  Kernel2 operator+(const Kernel2& o) const;
  Kernel2& scale(double c);

  double frobenius_norm2() const;  // squared norm of the projected kernel
  double max_abs() const;

  bool has_exact_norm2() const { return exact_norm2_.has_value(); }
  double exact_norm2() const { return exact_norm2_.value(); }
  void set_exact_norm2(double v) { exact_norm2_ = v; }

 private:
  std::size_t idx(int j, int k) const {
    return static_cast<std::size_t>(j) * n_ + k;
  }
  int n_ = 0;
  std::vector<double> a_;
  std::optional<double> exact_norm2_;
};

// Coefficients of h (x) g restricted to {x < y}:
//   F_jk = h_j g_k sqrt(|I_j||I_k|)   for j < k,
//   F_jj = h_j g_j |I_j| / 2          (exact triangle value),
//   F_jk = 0                          for j > k.
// The attached exact norm is the L2 norm of the un-projected kernel.
Kernel2 causal_kernel(const StepFn& h, const StepFn& g, const BasisSpec& basis);

// h * 1_{]0,s]} represented on `grid` (a refinement of h's grid); s must be a
// grid point of `grid`, otherwise the call is rejected.
StepFn restrict_to(const StepFn& h, double s, const Grid& grid);

}  // namespace chaosint
