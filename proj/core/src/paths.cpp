#include "chaosint/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosint/mc.hpp"

namespace chaosint {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double binom_small(int n, int k) {
  static const double table[9][9] = {
      {1, 0, 0, 0, 0, 0, 0, 0, 0},         {1, 1, 0, 0, 0, 0, 0, 0, 0},
      {1, 2, 1, 0, 0, 0, 0, 0, 0},         {1, 3, 3, 1, 0, 0, 0, 0, 0},
      {1, 4, 6, 4, 1, 0, 0, 0, 0},         {1, 5, 10, 10, 5, 1, 0, 0, 0},
      {1, 6, 15, 20, 15, 6, 1, 0, 0},      {1, 7, 21, 35, 35, 21, 7, 1, 0},
      {1, 8, 28, 56, 70, 56, 28, 8, 1}};
  return table[n][k];
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

SquareDecompReport square_decomposition(const SymTensor& f, ModelPtr model, int n) {
  require(f.order() == 2, "square_decomposition: order must be 2");
  require(model != nullptr, "square_decomposition: model must not be null");
  SquareDecompReport rep;

  // oracle: regrade of the squared element
  const SymTensor a1f = lowering(f, 1, *model);
  GradedChaos w = multiple_integral(f, model);
  if (!a1f.empty()) w += multiple_integral(a1f, model);
  const MultiPoly wp = w.to_poly();
  rep.oracle = regrade(wp * wp, model);
  rep.oracle_order0 = rep.oracle.constant();
  rep.exact_second_moment = isometry_norm2(f, *model) + a1f.otimes_norm2();

  // assembled right-hand side
  const SymTensor ff = circ(f, f);
  const SymTensor c1 = SymTensor::from_matrix(contract1(f, *model, n));
  rep.rhs_kernels[4] = ff;
  rep.rhs_kernels[3] = lowering(ff, 1, *model);
  rep.rhs_kernels[2] = c1.scaled(4.0) + lowering(ff, 2, *model);
  rep.rhs_kernels[1] = lowering(ff, 3, *model) + lowering(c1, 1, *model).scaled(4.0) +
                       lowering(diagonal_projection(c1), 1, *model).scaled(-6.0);
  const double a44 = lowering(ff, 4, *model).at({});
  rep.rhs_order0_otimes = 2.0 * f.otimes_norm2() + a44;
  rep.rhs_order0_isometry = 2.0 * isometry_norm2(f, *model) + a44;

  for (int order = 1; order <= 4; ++order) {
    SymTensor oracle_k =
        rep.oracle.has_order(order) ? rep.oracle.kernel(order) : SymTensor(order);
    rep.oracle_norm2[static_cast<std::size_t>(order)] = oracle_k.otimes_norm2();
    const SymTensor gap = oracle_k - rep.rhs_kernels[static_cast<std::size_t>(order)];
    rep.residual_max[static_cast<std::size_t>(order)] = gap.max_abs();
    rep.residual_norm2[static_cast<std::size_t>(order)] = gap.otimes_norm2();
  }
  rep.residual_max[0] = std::abs(rep.oracle_order0 - rep.rhs_order0_otimes);
  rep.residual_norm2[0] = rep.residual_max[0] * rep.residual_max[0];
  rep.oracle_norm2[0] = rep.oracle_order0 * rep.oracle_order0;
  return rep;
}

namespace {

// E[X^r (X^2 - 1)^s] from the raw moments.
double x_r_central_s(const MomentTable& mt, int r, int s) {
  double sum = 0.0;
  for (int i = 0; i <= s; ++i) {
    const double sign = ((s - i) % 2 == 0) ? 1.0 : -1.0;
    sum += binom_small(s, i) * sign * mt[r + 2 * i];
  }
  return sum;
}

// Mixed moments E[T^p V^q] with 2p + q <= 8, where T is the running increment
// sum and V the running prefix of the h1 coefficients. One cell advances
//   T += b X V + d (X^2 - 1),   V += a X.
struct TVMoments {
  double mu[5][9] = {};
  TVMoments() { mu[0][0] = 1.0; }

  void advance(double a, double b, double d, const MomentTable& mt) {
    TVMoments next;
    next.mu[0][0] = 0.0;
    for (int p = 0; p <= 4; ++p) {
      for (int q = 0; q + 2 * p <= 8; ++q) {
        double acc = 0.0;
        for (int p1 = 0; p1 <= p; ++p1) {
          for (int p2 = 0; p2 + p1 <= p; ++p2) {
            const int p3 = p - p1 - p2;
            if ((b == 0.0 && p2 > 0) || (d == 0.0 && p3 > 0)) continue;
            const double cp = binom_small(p, p1) * binom_small(p - p1, p2);
            for (int q1 = 0; q1 <= q; ++q1) {
              const int q2 = q - q1;
              if (a == 0.0 && q2 > 0) continue;
              const double mom = x_r_central_s(mt, p2 + q2, p3);
              if (mom == 0.0) continue;
              acc += cp * binom_small(q, q1) * ipow(b, p2) * ipow(d, p3) * ipow(a, q2) *
                     mu[p1][p2 + q1] * mom;
            }
          }
        }
        next.mu[p][q] = acc;
      }
    }
    *this = next;
  }
};

}  // namespace

GapMoment fourth_moment_gap(const StepFn& h1, const StepFn& h2, double s, double t,
                            const BasisSpec& basis, const Model& model) {
  require(s <= t, "fourth_moment_gap: need s <= t");
  const auto is = basis.grid.index_of(s);
  const auto it = basis.grid.index_of(t);
  require(is.has_value() && it.has_value(), "fourth_moment_gap: gap endpoints must be grid points");
  require(model.size() >= basis.size(), "fourth_moment_gap: model smaller than basis");

  const auto a = project(h1, basis);
  const auto b = project(h2, basis);
  GapMoment gm;
  gm.s = s;
  gm.t = t;
  TVMoments mom;
  for (std::int64_t j = 0; j < *it; ++j) {
    const double aj = a[static_cast<std::size_t>(j)];
    const bool in_gap = j >= *is;
    const double bj = in_gap ? b[static_cast<std::size_t>(j)] : 0.0;
    const double dj = in_gap ? aj * bj / 2.0 : 0.0;
    mom.advance(aj, bj, dj, model.mt(static_cast<int>(j)));
  }
  gm.e2 = mom.mu[2][0];
  gm.e4 = mom.mu[4][0];
  const double gap = t - s;
  gm.gap_ratio = gap > 0.0 ? gm.e4 / (gap * gap) : 0.0;
  double h2gap2 = 0.0;
  for (std::int64_t j = *is; j < *it; ++j)
    h2gap2 += b[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(j)];
  const double h1n2 = h1.l2_norm2();
  const double denom = h1n2 * h1n2 * h2gap2 * h2gap2;
  gm.bound_ratio = denom > 0.0 ? gm.e4 / denom : 0.0;
  return gm;
}

FourthMomentReport fourth_moment_scaling(const StepFn& h1, const StepFn& h2,
                                         const std::vector<std::pair<double, double>>& gaps,
                                         const BasisSpec& basis, const Model& model) {
  FourthMomentReport rep;
  rep.gaps.reserve(gaps.size());
  for (const auto& [s, t] : gaps) rep.gaps.push_back(fourth_moment_gap(h1, h2, s, t, basis, model));

  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (const auto& g : rep.gaps) {
    if (g.t > g.s && g.e4 > 0.0) {
      sx += std::log(g.t - g.s);
      sy += std::log(g.e4);
      ++n;
    }
  }
  if (n >= 2) {
    const double mx = sx / n, my = sy / n;
    double num = 0.0, den = 0.0;
    for (const auto& g : rep.gaps) {
      if (g.t > g.s && g.e4 > 0.0) {
        const double dx = std::log(g.t - g.s) - mx;
        num += dx * (std::log(g.e4) - my);
        den += dx * dx;
      }
    }
    rep.loglog_slope = den > 0.0 ? num / den : 0.0;
  }
  double rmin = 0.0, rmax = 0.0;
  bool first = true;
  for (const auto& g : rep.gaps) {
    if (g.t <= g.s) continue;
    if (first) {
      rmin = rmax = g.gap_ratio;
      first = false;
    } else {
      rmin = std::min(rmin, g.gap_ratio);
      rmax = std::max(rmax, g.gap_ratio);
    }
    rep.empirical_constant = std::max(rep.empirical_constant, g.bound_ratio);
  }
  rep.ratio_spread = rmin > 0.0 ? rmax / rmin : 0.0;
  const SupConstants sc = sup_constants(model, 4);
  rep.candidate_constant = 3.5 * sc.C[1] + sc.C[2] + sc.C[3] + sc.C[4] + 2.0;
  return rep;
}

namespace {

struct PathWork {
  std::vector<double> a;        // h1 coefficients
  std::vector<double> b;        // h2 coefficients restricted to ]0,t]
  std::vector<double> suffix;   // sum of h2_k^2 |I| over cells after j (up to t)
  std::vector<double> h2sq;     // h2_j^2 per cell
  double cell = 0.0;
  int cells_t = 0;              // cells covering ]0,t]
};

PathWork prepare_path(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis) {
  const auto it = basis.grid.index_of(t);
  require(it.has_value(), "qv: horizon t must be a basis grid point");
  PathWork w;
  w.a = project(h1, basis);
  w.b = project(restrict_to(h2, t, basis.grid), basis);
  w.cell = basis.cell_len();
  w.cells_t = static_cast<int>(*it);
  const auto h2v = h2.values_at_level(basis.grid.level);
  w.h2sq.resize(static_cast<std::size_t>(w.cells_t));
  for (int j = 0; j < w.cells_t; ++j)
    w.h2sq[static_cast<std::size_t>(j)] =
        h2v[static_cast<std::size_t>(j)] * h2v[static_cast<std::size_t>(j)];
  w.suffix.assign(static_cast<std::size_t>(w.cells_t) + 1, 0.0);
  for (int j = w.cells_t - 1; j >= 0; --j)
    w.suffix[static_cast<std::size_t>(j)] =
        w.suffix[static_cast<std::size_t>(j) + 1] + w.h2sq[static_cast<std::size_t>(j)] * w.cell;
  return w;
}

// Exact per-cell integration of the two limit terms plus the per-cell
// increments W_j, shared by qv_limit and qv_convergence.
struct PathEval {
  double term1 = 0.0;
  double term2 = 0.0;
  std::vector<double> w;  // per-cell increments of the integral path
};

PathEval eval_path(const PathWork& pw, const Model& model, const Realization& omega) {
  PathEval out;
  out.w.resize(static_cast<std::size_t>(pw.cells_t));
  double v = 0.0;  // running prefix sum of a_j x_j
  for (int j = 0; j < pw.cells_t; ++j) {
    const double aj = pw.a[static_cast<std::size_t>(j)];
    const double bj = pw.b[static_cast<std::size_t>(j)];
    const double xj = omega.x[static_cast<std::size_t>(j)];
    const double ax = aj * xj;
    // increment
    out.w[static_cast<std::size_t>(j)] = (aj * bj / 2.0) * (xj * xj - 1.0) + bj * xj * v;
    // term 1: h2_j^2 * integral over the cell of (v + ax * u/|I|)^2 du
    out.term1 += pw.h2sq[static_cast<std::size_t>(j)] * pw.cell * (v * v + v * ax + ax * ax / 3.0);
    // term 2: skewness-weighted running squared coefficient
    const double skew = model.m(j, 3);
    if (skew != 0.0) {
      const double a2 = aj * aj;
      out.term2 += skew * xj *
                   (pw.h2sq[static_cast<std::size_t>(j)] * a2 * pw.cell / 3.0 +
                    a2 * pw.suffix[static_cast<std::size_t>(j) + 1]);
    }
    v += ax;
  }
  return out;
}

}  // namespace

double qv_limit(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis,
                const Model& model, const Realization& omega, bool with_correction) {
  require(omega.x.size() >= static_cast<std::size_t>(basis.size()), "qv_limit: realization too short");
  const PathWork pw = prepare_path(h1, h2, t, basis);
  const PathEval pe = eval_path(pw, model, omega);
  return with_correction ? pe.term1 + pe.term2 : pe.term1;
}

QVReport qv_convergence(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis,
                        ModelPtr model, const std::vector<int>& levels, int replicates,
                        std::uint64_t seed, int threads) {
  require(model != nullptr, "qv_convergence: model must not be null");
  require(replicates >= 2, "qv_convergence: need at least 2 replicates");
  const PathWork pw = prepare_path(h1, h2, t, basis);
  for (int lvl : levels) {
    require(lvl >= 0 && lvl <= basis.grid.level, "qv_convergence: level must be <= basis level");
    require(pw.cells_t % (1 << lvl) == 0,
            "qv_convergence: partition points must be basis grid points");
  }

  const std::size_t nl = levels.size();
  const std::size_t m = static_cast<std::size_t>(replicates);
  std::vector<std::vector<double>> res(nl, std::vector<double>(m));
  std::vector<std::vector<double>> res_nc(nl, std::vector<double>(m));
  std::vector<std::vector<double>> qv(nl, std::vector<double>(m));

  parallel_replicates(replicates, resolve_threads(threads), [&](int r) {
    const Realization omega = sample(*model, basis.size(), seed, static_cast<std::uint64_t>(r));
    const PathEval pe = eval_path(pw, *model, omega);
    const double limit = pe.term1 + pe.term2;
    for (std::size_t li = 0; li < nl; ++li) {
      const int cells = 1 << levels[li];
      const int step = pw.cells_t / cells;
      double sum = 0.0;
      int j = 0;
      for (int k = 0; k < cells; ++k) {
        double dz = 0.0;
        for (int p = 0; p < step; ++p) dz += pe.w[static_cast<std::size_t>(j++)];
        sum += dz * dz;
      }
      const std::size_t idx = static_cast<std::size_t>(r);
      qv[li][idx] = sum;
      const double d = sum - limit;
      res[li][idx] = d * d;
      const double dn = sum - pe.term1;
      res_nc[li][idx] = dn * dn;
    }
  });

  QVReport rep;
  rep.seed = seed;
  rep.replicates = replicates;
  rep.model_tag = model->tag();
  for (std::size_t li = 0; li < nl; ++li) {
    QVRow row;
    row.level = levels[li];
    row.mesh = t / static_cast<double>(1 << levels[li]);
    const double mean = pairwise_sum(res[li]) / replicates;
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double d = res[li][i] - mean;
      sq[i] = d * d;
    }
    const double se = std::sqrt(pairwise_sum(sq) / (replicates - 1) / replicates);
    row.residual_mean = mean;
    row.residual_ci = 1.96 * se;
    row.residual_nocorr_mean = pairwise_sum(res_nc[li]) / replicates;
    row.qv_mean = pairwise_sum(qv[li]) / replicates;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = qv[li][i] - row.qv_mean;
      sq[i] = d * d;
    }
    row.qv_se = std::sqrt(pairwise_sum(sq) / (replicates - 1) / replicates);
    row.undersampled = mean != 0.0 && row.residual_ci > 0.5 * std::abs(mean);
    rep.rows.push_back(row);
  }
  return rep;
}

double increment_square_kernel_norm(const StepFn& h1, const StepFn& h2, double t,
                                    const BasisSpec& basis, int partition_level) {
  const auto it = basis.grid.index_of(t);
  require(it.has_value(), "increment_square_kernel_norm: t must be a grid point");
  const int cells = 1 << partition_level;
  require(*it % cells == 0, "increment_square_kernel_norm: partition must lie on the grid");
  const int step = static_cast<int>(*it) / cells;
  const auto h2v = h2.values_at_level(basis.grid.level);

  SymTensor total(4);
  for (int k = 0; k < cells; ++k) {
    // h2 windowed to the k-th partition cell
    std::vector<double> gv(static_cast<std::size_t>(basis.size()), 0.0);
    for (int j = k * step; j < (k + 1) * step; ++j)
      gv[static_cast<std::size_t>(j)] = h2v[static_cast<std::size_t>(j)];
    const StepFn gk(basis.grid, std::move(gv));
    const Kernel2 K = causal_kernel(h1, gk, basis);
    SymTensor fk(2);
    for (int i = 0; i < K.size(); ++i) {
      if (K.at(i, i) != 0.0) fk.set({i, i}, K.at(i, i));
      for (int j = i + 1; j < K.size(); ++j)
        if (K.at(i, j) != 0.0) fk.set({i, j}, K.at(i, j) / 2.0);
    }
    total += circ(fk, fk);
  }
  return std::sqrt(total.otimes_norm2());
}

}  // namespace chaosint
