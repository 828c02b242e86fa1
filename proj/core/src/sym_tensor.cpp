#include "chaosint/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace chaosint {

namespace {

constexpr std::array<long, 5> kFactorial = {1, 1, 2, 6, 24};

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

long mult_factorial(const IndexTuple& sorted) {
  long f = 1;
  for (int m : multiplicities(sorted)) f *= kFactorial[static_cast<std::size_t>(m)];
  return f;
}

}  // namespace

std::vector<int> multiplicities(const IndexTuple& sorted) {
  std::vector<int> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.push_back(static_cast<int>(j - i));
    i = j;
  }
  return out;
}

long orbit_size(const IndexTuple& sorted) {
  return kFactorial[sorted.size()] / mult_factorial(sorted);
}

SymTensor::SymTensor(int order) : order_(order) {
  require(order >= 0 && order <= 4, "SymTensor: order must be in [0, 4]");
}

double SymTensor::at(IndexTuple t) const {
  require(static_cast<int>(t.size()) == order_, "SymTensor::at: tuple size mismatch");
  std::sort(t.begin(), t.end());
  auto it = v_.find(t);
  return it == v_.end() ? 0.0 : it->second;
}

void SymTensor::set(IndexTuple sorted, double v) {
  require(static_cast<int>(sorted.size()) == order_, "SymTensor::set: tuple size mismatch");
  require(std::is_sorted(sorted.begin(), sorted.end()), "SymTensor::set: tuple must be sorted");
  if (v == 0.0)
    v_.erase(sorted);
  else
    v_[std::move(sorted)] = v;
}

void SymTensor::add(IndexTuple sorted, double v) {
  require(static_cast<int>(sorted.size()) == order_, "SymTensor::add: tuple size mismatch");
  require(std::is_sorted(sorted.begin(), sorted.end()), "SymTensor::add: tuple must be sorted");
  auto [it, inserted] = v_.try_emplace(std::move(sorted), v);
  if (!inserted) it->second += v;
}

double SymTensor::lambda(const IndexTuple& sorted) const {
  auto it = v_.find(sorted);
  if (it == v_.end()) return 0.0;
  return it->second * static_cast<double>(kFactorial[sorted.size()]) /
         static_cast<double>(mult_factorial(sorted));
}

void SymTensor::add_lambda(IndexTuple sorted, double lam) {
  const double v = lam * static_cast<double>(mult_factorial(sorted)) /
                   static_cast<double>(kFactorial[sorted.size()]);
  add(std::move(sorted), v);
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  require(order_ == o.order_, "SymTensor: order mismatch");
  for (const auto& [t, v] : o.v_) add(t, v);
  return *this;
}

SymTensor SymTensor::operator+(const SymTensor& o) const {
  SymTensor r = *this;
  r += o;
  return r;
}

SymTensor SymTensor::operator-(const SymTensor& o) const {
  SymTensor r = *this;
  SymTensor neg = o;
  neg.scale(-1.0);
  r += neg;
  return r;
}

SymTensor& SymTensor::scale(double c) {
  if (c == 0.0) {
    v_.clear();
    return *this;
  }
  for (auto& [t, v] : v_) v *= c;
  return *this;
}

SymTensor SymTensor::scaled(double c) const {
  SymTensor r = *this;
  r.scale(c);
  return r;
}

SymTensor& SymTensor::prune(double eps) {
  for (auto it = v_.begin(); it != v_.end();) {
    if (std::abs(it->second) <= eps)
      it = v_.erase(it);
    else
      ++it;
  }
  return *this;
}

double SymTensor::otimes_inner(const SymTensor& o) const {
  require(order_ == o.order_, "SymTensor: order mismatch");
  const auto *small = &v_, *big = &o.v_;
  if (small->size() > big->size()) std::swap(small, big);
  double s = 0.0;
  for (const auto& [t, v] : *small) {
    auto it = big->find(t);
    if (it != big->end()) s += static_cast<double>(orbit_size(t)) * v * it->second;
  }
  return s;
}

double SymTensor::max_abs() const {
  double m = 0.0;
  for (const auto& [t, v] : v_) m = std::max(m, std::abs(v));
  return m;
}

SymTensor SymTensor::from_matrix(const Kernel2& k) {
  SymTensor f(2);
  for (int i = 0; i < k.size(); ++i)
    for (int j = i; j < k.size(); ++j) {
      const double v = k.at(i, j);
      if (v != 0.0) f.set({i, j}, v);
    }
  return f;
}

SymTensor SymTensor::from_vector(const std::vector<double>& coeffs) {
  SymTensor f(1);
  for (int j = 0; j < static_cast<int>(coeffs.size()); ++j)
    if (coeffs[static_cast<std::size_t>(j)] != 0.0)
      f.set({j}, coeffs[static_cast<std::size_t>(j)]);
  return f;
}

SymTensor SymTensor::scalar(double v) {
  SymTensor f(0);
  if (v != 0.0) f.set({}, v);
  return f;
}

Kernel2 SymTensor::to_matrix(int n) const {
  require(order_ == 2, "SymTensor::to_matrix: order must be 2");
  Kernel2 k(n);
  for (const auto& [t, v] : v_) {
    k.at(t[0], t[1]) = v;
    k.at(t[1], t[0]) = v;
  }
  return k;
}

SymTensor sym(int order, const std::vector<std::pair<IndexTuple, double>>& entries) {
  SymTensor out(order);
  std::map<IndexTuple, double> acc;
  for (const auto& [t, v] : entries) {
    require(static_cast<int>(t.size()) == order, "sym: tuple size mismatch");
    IndexTuple key = t;
    std::sort(key.begin(), key.end());
    acc[std::move(key)] += v;
  }
  for (auto& [t, v] : acc) {
    const double value = v / static_cast<double>(orbit_size(t));
    if (value != 0.0) out.set(t, value);
  }
  return out;
}

SymTensor circ(const SymTensor& f, const SymTensor& g) {
  const int order = f.order() + g.order();
  require(order <= 4, "circ: combined order exceeds 4");
  SymTensor out(order);
  for (const auto& [tf, vf] : f.entries()) {
    const double lf = f.lambda(tf);
    for (const auto& [tg, vg] : g.entries()) {
      const double lg = g.lambda(tg);
      IndexTuple merged;
      merged.reserve(tf.size() + tg.size());
      std::merge(tf.begin(), tf.end(), tg.begin(), tg.end(), std::back_inserter(merged));
      out.add_lambda(std::move(merged), lf * lg);
    }
  }
  return out;
}

namespace {

// prod q_{alpha_i}(j_i) over the distinct indices of a sorted tuple.
double stratum_q(const IndexTuple& sorted, const Model& model) {
  double prod = 1.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    prod *= model.q(sorted[i], static_cast<int>(j - i));
    i = j;
  }
  return prod;
}

}  // namespace

double isometry_inner(const SymTensor& f, const SymTensor& g, const Model& model) {
  require(f.order() == g.order(), "isometry_inner: order mismatch");
  if (f.order() == 0) return f.at({}) * g.at({});
  // n! <Af, Ag> collapses to sum over orbits of lambda_f lambda_g prod q.
  double s = 0.0;
  for (const auto& [t, v] : f.entries()) {
    const double lg = g.lambda(t);
    if (lg == 0.0) continue;
    s += f.lambda(t) * lg * stratum_q(t, model);
  }
  return s;
}

double isometry_norm2(const SymTensor& f, const Model& model) {
  return isometry_inner(f, f, model);
}

Kernel2 contract1(const SymTensor& f, const Model& model, int n) {
  require(f.order() == 2, "contract1: order must be 2");
  // A-scaled coefficient matrix.
  Kernel2 m(n);
  for (const auto& [t, v] : f.entries()) {
    require(t[0] >= 0 && t[1] < n, "contract1: tensor index outside the basis");
    if (t[0] == t[1]) {
      m.at(t[0], t[0]) = v * std::sqrt(model.q(t[0], 2) / 2.0);
    } else {
      m.at(t[0], t[1]) = v;
      m.at(t[1], t[0]) = v;
    }
  }
  Kernel2 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += m.at(i, l) * m.at(j, l);
      out.at(i, j) = s;
    }
  return out;
}

SymTensor diagonal_projection(const SymTensor& f) {
  require(f.order() == 2, "diagonal_projection: order must be 2");
  SymTensor out(2);
  for (const auto& [t, v] : f.entries())
    if (t[0] == t[1]) out.set(t, v);
  return out;
}

namespace {

// gamma - Gamma gap for one index.
double conn_gap(const Model& model, int j, int alpha, int drop) {
  const auto& op = model.op(j);
  return op.gamma[alpha][alpha - drop] - op.Gamma[alpha][alpha - drop];
}

// Enumerate nonnegative integer vectors of length r summing to k.
void compositions_rec(int k, int r, std::vector<int>& cur,
                      const std::function<void(const std::vector<int>&)>& emit) {
  if (r == 1) {
    cur.push_back(k);
    emit(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= k; ++v) {
    cur.push_back(v);
    compositions_rec(k - v, r - 1, cur, emit);
    cur.pop_back();
  }
}

void for_each_composition(int k, int r, const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> cur;
  compositions_rec(k, r, cur, emit);
}

}  // namespace

SymTensor lowering(const SymTensor& f, int k, const Model& model) {
  const int n = f.order();
  require(k >= 1 && k <= n && n <= 4, "lowering: need 1 <= k <= order <= 4");
  SymTensor out(n - k);
  for (const auto& [t, v] : f.entries()) {
    const double lam = f.lambda(t);
    // distinct indices with multiplicities
    std::vector<int> js;
    std::vector<int> alpha;
    for (std::size_t i = 0; i < t.size();) {
      std::size_t j = i;
      while (j < t.size() && t[j] == t[i]) ++j;
      js.push_back(t[i]);
      alpha.push_back(static_cast<int>(j - i));
      i = j;
    }
    const int r = static_cast<int>(js.size());
    for_each_composition(k, r, [&](const std::vector<int>& drops) {
      double coef = 1.0;
      for (int i = 0; i < r && coef != 0.0; ++i) {
        if (drops[static_cast<std::size_t>(i)] == 0) continue;
        if (alpha[static_cast<std::size_t>(i)] < drops[static_cast<std::size_t>(i)]) {
          coef = 0.0;
          break;
        }
        coef *= conn_gap(model, js[static_cast<std::size_t>(i)],
                         alpha[static_cast<std::size_t>(i)], drops[static_cast<std::size_t>(i)]);
      }
      if (coef == 0.0) return;
      IndexTuple lowered;
      for (int i = 0; i < r; ++i)
        for (int c = 0; c < alpha[static_cast<std::size_t>(i)] - drops[static_cast<std::size_t>(i)];
             ++c)
          lowered.push_back(js[static_cast<std::size_t>(i)]);
      out.add_lambda(std::move(lowered), coef * lam);
    });
  }
  out.prune();
  return out;
}

SupConstants sup_constants(const Model& model, int n) {
  require(n >= 1 && n <= 4, "sup_constants: order must be in [1, 4]");
  SupConstants sc;
  for (const Family& fam : model.distinct()) {
    const auto mt = moments(fam);
    const auto op = orthopoly(mt, fam);
    for (int r = 1; r <= n; ++r) {
      // positive compositions of n into r parts
      for_each_composition(n - r, r, [&](const std::vector<int>& extra) {
        std::vector<int> alpha(extra.size());
        for (std::size_t i = 0; i < extra.size(); ++i) alpha[i] = extra[i] + 1;
        // stratum scale: prod q_{alpha_i} / prod alpha_i!
        double a = 1.0;
        for (int ai : alpha)
          a *= op.q[static_cast<std::size_t>(ai)] / static_cast<double>(kFactorial[ai]);
        sc.A = std::max(sc.A, a);
        for (int k = 1; k <= n; ++k) {
          for_each_composition(k, r, [&](const std::vector<int>& drops) {
            double c = 1.0;
            for (std::size_t i = 0; i < alpha.size() && c != 0.0; ++i) {
              if (drops[i] == 0) continue;
              if (alpha[i] < drops[i]) {
                c = 0.0;
                break;
              }
              c *= op.gamma[alpha[i]][alpha[i] - drops[i]] -
                   op.Gamma[alpha[i]][alpha[i] - drops[i]];
            }
            sc.C[static_cast<std::size_t>(k)] = std::max(sc.C[static_cast<std::size_t>(k)], c);
          });
        }
      });
    }
  }
  return sc;
}

}  // namespace chaosint
