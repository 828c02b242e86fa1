#include "chaosint/integral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chaosint {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

RawQuadratic::RawQuadratic(int n)
    : n_(n),
      d_(static_cast<std::size_t>(n), 0.0),
      c_(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0) {}

std::size_t RawQuadratic::pair_index(int i, int j) const {
  // packed strictly-upper storage, i < j
  return static_cast<std::size_t>(j) * (j - 1) / 2 + static_cast<std::size_t>(i);
}

RawQuadratic RawQuadratic::operator-(const RawQuadratic& o) const {
  require(n_ == o.n_, "RawQuadratic: size mismatch");
  RawQuadratic r(n_);
  r.c0_ = c0_ - o.c0_;
  for (std::size_t i = 0; i < d_.size(); ++i) r.d_[i] = d_[i] - o.d_[i];
  for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] - o.c_[i];
  return r;
}

double RawQuadratic::second_moment(const Model& model) const {
  // centered parts are mutually orthogonal under independence
  double s = c0_ * c0_;
  for (int j = 0; j < n_; ++j) {
    const double dj = d_[static_cast<std::size_t>(j)];
    if (dj != 0.0) s += dj * dj * (model.m(j, 4) - 1.0);
  }
  for (double c : c_) s += c * c;
  return s;
}

double RawQuadratic::evaluate(const Realization& omega) const {
  require(omega.x.size() >= static_cast<std::size_t>(n_),
          "RawQuadratic::evaluate: realization too short");
  double s = c0_;
  for (int j = 0; j < n_; ++j) {
    const double xj = omega.x[static_cast<std::size_t>(j)];
    s += d_[static_cast<std::size_t>(j)] * (xj * xj - 1.0);
    for (int i = 0; i < j; ++i) {
      const double c = c_[pair_index(i, j)];
      if (c != 0.0) s += c * omega.x[static_cast<std::size_t>(i)] * xj;
    }
  }
  return s;
}

MultiPoly RawQuadratic::to_poly() const {
  MultiPoly p = MultiPoly::constant(c0_);
  for (int j = 0; j < n_; ++j) {
    const double dj = d_[static_cast<std::size_t>(j)];
    if (dj != 0.0) {
      p.add_term({{j, 2}}, dj);
      p.add_term({}, -dj);
    }
    for (int i = 0; i < j; ++i) {
      const double c = c_[pair_index(i, j)];
      if (c != 0.0) p.add_term({{i, 1}, {j, 1}}, c);
    }
  }
  return p;
}

GradedChaos RawQuadratic::to_graded(ModelPtr model) const {
  GradedChaos z(model, c0_);
  SymTensor order2(2);
  SymTensor order1(1);
  for (int j = 0; j < n_; ++j) {
    const double dj = d_[static_cast<std::size_t>(j)];
    if (dj != 0.0) {
      order2.set({j, j}, dj);
      const double skew = model->m(j, 3);
      if (skew != 0.0) order1.add({j}, dj * skew);
    }
    for (int i = 0; i < j; ++i) {
      const double c = c_[pair_index(i, j)];
      if (c != 0.0) order2.add_lambda({i, j}, c);
    }
  }
  if (!order2.empty()) z.set_kernel(std::move(order2));
  if (!order1.empty()) z.set_kernel(std::move(order1));
  return z;
}

double RawQuadratic::max_abs_entry() const {
  double m = std::abs(c0_);
  for (double v : d_) m = std::max(m, std::abs(v));
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

RawQuadratic double_integral_raw(const IntegralSpec& spec) {
  require(spec.model != nullptr, "double_integral: model must not be null");
  require(spec.model->size() >= spec.basis.size(), "double_integral: model smaller than basis");
  require(spec.basis.grid.index_of(spec.t).has_value(),
          "double_integral: horizon t must be a basis grid point");
  const StepFn g_t = restrict_to(spec.g, spec.t, spec.basis.grid);
  const Kernel2 K = causal_kernel(spec.h, g_t, spec.basis);
  const int n = spec.basis.size();
  RawQuadratic z(n);
  for (int j = 0; j < n; ++j) {
    z.diag(j) = K.at(j, j);
    for (int i = 0; i < j; ++i) z.cross(i, j) = K.at(i, j);
  }
  return z;
}

GradedChaos double_integral(const IntegralSpec& spec) {
  return double_integral_raw(spec).to_graded(spec.model);
}

RawQuadratic riemann_sum_raw(const IntegralSpec& spec, int partition_level) {
  require(spec.model != nullptr, "riemann_sum: model must not be null");
  require(partition_level >= 0 && partition_level <= 24, "riemann_sum: bad partition level");
  require(spec.basis.grid.index_of(spec.t).has_value(),
          "riemann_sum: horizon t must be a basis grid point");
  const int n = spec.basis.size();
  const int cells = 1 << partition_level;
  // partition of [0, t]
  RawQuadratic s(n);
  std::vector<double> g_prev = prefix_coeffs(spec.g, spec.basis, 0.0);
  for (int k = 0; k < cells; ++k) {
    const double tk = spec.t * static_cast<double>(k) / cells;
    const double tk1 = spec.t * static_cast<double>(k + 1) / cells;
    const auto u = prefix_coeffs(spec.h, spec.basis, tk);      // <h 1_{]0,tk]}, e_i>
    const auto g_hi = prefix_coeffs(spec.g, spec.basis, tk1);  // prefix at tk1
    // Each term is the projected expansion of the product of the exact
    // functions h 1_{]0,tk]} and g 1_{]tk,tk1]}: kernel brackets u_i v_j and a
    // constant <h 1_{]0,tk]}, g 1_{]tk,tk1]}> that vanishes (disjoint supports).
    for (int j = 0; j < n; ++j) {
      const double vj = g_hi[static_cast<std::size_t>(j)] - g_prev[static_cast<std::size_t>(j)];
      if (vj == 0.0) continue;
      const double uj = u[static_cast<std::size_t>(j)];
      if (uj != 0.0) s.diag(j) += uj * vj;
      for (int i = 0; i < j; ++i) {
        const double ui = u[static_cast<std::size_t>(i)];
        if (ui != 0.0) s.cross(i, j) += ui * vj;
      }
      // pairs with the increment at the earlier index cannot occur for
      // left-point sums: the prefix covers no cell past the increment
    }
    g_prev = g_hi;
  }
  return s;
}

GradedChaos riemann_sum(const IntegralSpec& spec, int partition_level) {
  return riemann_sum_raw(spec, partition_level).to_graded(spec.model);
}

double mean_square_diff(const RawQuadratic& a, const RawQuadratic& b, const Model& model) {
  return (a - b).second_moment(model);
}

GradedChaos ibp_residual(const StepFn& h, const StepFn& g, const BasisSpec& basis,
                         ModelPtr model) {
  const int n = basis.size();
  RawQuadratic prod(n);
  const auto hc = project(h, basis);
  const auto gc = project(g, basis);
  double coeff_inner = 0.0;
  for (int j = 0; j < n; ++j) {
    const double hg = hc[static_cast<std::size_t>(j)] * gc[static_cast<std::size_t>(j)];
    prod.diag(j) = hg;
    coeff_inner += hg;
    for (int i = 0; i < j; ++i)
      prod.cross(i, j) = hc[static_cast<std::size_t>(i)] * gc[static_cast<std::size_t>(j)] +
                         gc[static_cast<std::size_t>(i)] * hc[static_cast<std::size_t>(j)];
  }
  prod.set_constant(coeff_inner);
  IntegralSpec hg{h, g, basis.grid.T, basis, model};
  IntegralSpec gh{g, h, basis.grid.T, basis, model};
  RawQuadratic resid = prod - double_integral_raw(hg) - double_integral_raw(gh);
  resid.set_constant(resid.constant() - inner(h, g));
  return resid.to_graded(model);
}

SecondMoment second_moment(const IntegralSpec& spec) {
  SecondMoment out;
  const RawQuadratic z = double_integral_raw(spec);
  const MultiPoly p = z.to_poly();
  out.direct = expect(p * p, *spec.model);

  const StepFn g_t = restrict_to(spec.g, spec.t, spec.basis.grid);
  const Kernel2 K = causal_kernel(spec.h, g_t, spec.basis);
  double corr = 0.0;
  for (int j = 0; j < spec.basis.size(); ++j) {
    const double d = K.at(j, j);
    corr += d * d * (spec.model->m(j, 4) - 3.0);
  }
  out.formula = K.exact_norm2() + corr;
  return out;
}

std::vector<double> integral_path(const IntegralSpec& spec, const Realization& omega,
                                  const Grid& partition) {
  require(spec.basis.grid.refines(partition), "integral_path: partition points must lie on the grid");
  require(omega.x.size() >= static_cast<std::size_t>(spec.basis.size()),
          "integral_path: realization too short");
  const auto hc = project(spec.h, spec.basis);
  const auto gc = project(restrict_to(spec.g, spec.t, spec.basis.grid), spec.basis);
  const int n = spec.basis.size();
  // per-cell increments W_j = d_j (X_j^2 - 1) + b_j X_j V_j with V_j the
  // running prefix of the h-coefficients
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  double v = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a = hc[static_cast<std::size_t>(j)];
    const double b = gc[static_cast<std::size_t>(j)];
    const double xj = omega.x[static_cast<std::size_t>(j)];
    const double d = a * b / 2.0;
    w[static_cast<std::size_t>(j)] = d * (xj * xj - 1.0) + b * xj * v;
    v += a * xj;
  }
  const int step = 1 << (spec.basis.grid.level - partition.level);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(partition.cells()) + 1);
  out.push_back(0.0);
  double run = 0.0;
  int consumed = 0;
  for (int k = 0; k < partition.cells(); ++k) {
    const double tk1 = partition.point(k + 1);
    if (tk1 > spec.t + 1e-12 * spec.basis.grid.T) break;
    for (int r = 0; r < step; ++r) run += w[static_cast<std::size_t>(consumed++)];
    out.push_back(run);
  }
  return out;
}

}  // namespace chaosint
