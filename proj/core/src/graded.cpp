#include "chaosint/graded.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace chaosint {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

GradedChaos::GradedChaos(ModelPtr model, double constant)
    : constant_(constant), model_(std::move(model)) {
  require(model_ != nullptr, "GradedChaos: model must not be null");
}

const SymTensor& GradedChaos::kernel(int n) const {
  auto it = kernels_.find(n);
  require(it != kernels_.end(), "GradedChaos: missing order");
  return it->second;
}

void GradedChaos::set_kernel(SymTensor k) {
  require(k.order() >= 1 && k.order() <= 4, "GradedChaos: kernel order must be in [1, 4]");
  if (k.empty())
    kernels_.erase(k.order());
  else
    kernels_[k.order()] = std::move(k);
}

int GradedChaos::max_order() const {
  return kernels_.empty() ? 0 : kernels_.rbegin()->first;
}

GradedChaos& GradedChaos::operator+=(const GradedChaos& o) {
  require(model_ == o.model_ || (model_ && o.model_ && model_->tag() == o.model_->tag() &&
                                 model_->size() == o.model_->size()),
          "GradedChaos: model mismatch");
  constant_ += o.constant_;
  for (const auto& [n, k] : o.kernels_) {
    auto it = kernels_.find(n);
    if (it == kernels_.end()) {
      kernels_[n] = k;
    } else {
      it->second += k;
      if (it->second.empty()) kernels_.erase(it);
    }
  }
  return *this;
}

GradedChaos GradedChaos::operator+(const GradedChaos& o) const {
  GradedChaos r = *this;
  r += o;
  return r;
}

GradedChaos GradedChaos::operator-(const GradedChaos& o) const {
  GradedChaos neg = o;
  neg.scale(-1.0);
  GradedChaos r = *this;
  r += neg;
  return r;
}

GradedChaos& GradedChaos::scale(double c) {
  constant_ *= c;
  if (c == 0.0) {
    kernels_.clear();
    return *this;
  }
  for (auto& [n, k] : kernels_) k.scale(c);
  return *this;
}

namespace {

// P_{alpha}(X_j) as a polynomial in X_j.
MultiPoly p_poly(const Model& model, int j, int alpha) {
  const auto& coeffs = model.op(j).P[static_cast<std::size_t>(alpha)];
  MultiPoly out;
  for (int i = 0; i < static_cast<int>(coeffs.size()); ++i) {
    const double c = coeffs[static_cast<std::size_t>(i)];
    if (c != 0.0) out += MultiPoly::var(j, i).scaled(c);
  }
  return out;
}

}  // namespace

MultiPoly GradedChaos::to_poly() const {
  MultiPoly out = MultiPoly::constant(constant_);
  for (const auto& [n, k] : kernels_) {
    for (const auto& [t, v] : k.entries()) {
      const double lam = k.lambda(t);
      MultiPoly term = MultiPoly::constant(lam);
      for (std::size_t i = 0; i < t.size();) {
        std::size_t j = i;
        while (j < t.size() && t[j] == t[i]) ++j;
        term = term * p_poly(*model_, t[i], static_cast<int>(j - i));
        i = j;
      }
      out += term;
    }
  }
  return out;
}

double GradedChaos::evaluate(const Realization& omega) const {
  double sum = constant_;
  for (const auto& [n, k] : kernels_) {
    for (const auto& [t, v] : k.entries()) {
      double term = k.lambda(t);
      for (std::size_t i = 0; i < t.size();) {
        std::size_t j = i;
        while (j < t.size() && t[j] == t[i]) ++j;
        const int idx = t[i];
        if (idx < 0 || static_cast<std::size_t>(idx) >= omega.x.size())
          throw std::invalid_argument("GradedChaos::evaluate: realization does not cover index " +
                                      std::to_string(idx));
        term *= model_->op(idx).eval_P(static_cast<int>(j - i),
                                       omega.x[static_cast<std::size_t>(idx)]);
        i = j;
      }
      sum += term;
    }
  }
  return sum;
}

GradedChaos GradedChaos::truncated(int n) const {
  GradedChaos out(model_, constant_);
  for (const auto& [order, k] : kernels_) {
    SymTensor kept(order);
    for (const auto& [t, v] : k.entries()) {
      if (t.empty() || t.back() < n) kept.set(t, v);
    }
    if (!kept.empty()) out.set_kernel(std::move(kept));
  }
  return out;
}

std::vector<NullStratumFlag> GradedChaos::null_strata() const {
  std::vector<NullStratumFlag> out;
  for (const auto& [order, k] : kernels_) {
    for (const auto& [t, v] : k.entries()) {
      bool null = false;
      for (std::size_t i = 0; i < t.size();) {
        std::size_t j = i;
        while (j < t.size() && t[j] == t[i]) ++j;
        if (model_->op(t[i]).null_stratum[j - i]) {
          null = true;
          break;
        }
        i = j;
      }
      if (null) out.push_back({order, t});
    }
  }
  return out;
}

double GradedChaos::max_kernel_entry() const {
  double m = 0.0;
  for (const auto& [n, k] : kernels_) m = std::max(m, k.max_abs());
  return m;
}

std::string GradedChaos::debug_json() const {
  std::ostringstream os;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", constant_);
  os << "{\"constant\":" << buf << ",\"orders\":{";
  bool first_order = true;
  for (const auto& [n, k] : kernels_) {
    if (!first_order) os << ',';
    first_order = false;
    os << '"' << n << "\":[";
    bool first = true;
    for (const auto& [t, v] : k.entries()) {
      if (!first) os << ',';
      first = false;
      os << "{\"idx\":[";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ',';
        os << t[i];
      }
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << "],\"val\":" << buf << '}';
    }
    os << ']';
  }
  os << "}}";
  return os.str();
}

GradedChaos regrade(const MultiPoly& p, ModelPtr model) {
  require(model != nullptr, "regrade: model must not be null");
  require(p.max_var_degree() <= 4, "regrade: per-variable degree must be <= 4");

  GradedChaos out(model);
  // Expand each monomial prod x_j^{n_j} through x^n = sum gamma_{n,m} P_m(x),
  // collecting coefficients per multi-degree.
  std::map<IndexTuple, double> lambda_acc;  // key: index repeated per P-degree
  double constant = 0.0;
  for (const auto& [mono, coeff] : p.terms()) {
    // partial products over the variables
    std::vector<std::pair<IndexTuple, double>> acc = {{{}, coeff}};
    for (const auto& [j, pw] : mono) {
      const auto& op = model->op(j);
      std::vector<std::pair<IndexTuple, double>> next;
      next.reserve(acc.size() * static_cast<std::size_t>(pw + 1));
      for (const auto& [tuple, c] : acc) {
        for (int m = 0; m <= pw; ++m) {
          const double g = op.gamma[pw][m];
          if (g == 0.0) continue;
          IndexTuple t = tuple;
          for (int r = 0; r < m; ++r) t.push_back(j);
          next.emplace_back(std::move(t), c * g);
        }
      }
      acc = std::move(next);
    }
    for (auto& [tuple, c] : acc) {
      if (tuple.empty())
        constant += c;
      else
        lambda_acc[tuple] += c;
    }
  }

  out.set_constant(constant);
  std::array<SymTensor, 5> kernels = {SymTensor(0), SymTensor(1), SymTensor(2), SymTensor(3),
                                      SymTensor(4)};
  for (const auto& [tuple, lam] : lambda_acc) {
    if (lam == 0.0) continue;
    const int n = static_cast<int>(tuple.size());
    require(n <= 4, "regrade: total P-degree exceeded 4");
    kernels[static_cast<std::size_t>(n)].add_lambda(tuple, lam);
  }
  for (int n = 1; n <= 4; ++n) {
    kernels[static_cast<std::size_t>(n)].prune();
    if (!kernels[static_cast<std::size_t>(n)].empty())
      out.set_kernel(std::move(kernels[static_cast<std::size_t>(n)]));
  }
  return out;
}

}  // namespace chaosint
