#include "chaosint/multipoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace chaosint {

MultiPoly MultiPoly::constant(double c) {
  MultiPoly p;
  if (c != 0.0) p.t_[{}] = c;
  return p;
}

MultiPoly MultiPoly::var(int j, int power) {
  if (power < 0) throw std::invalid_argument("MultiPoly::var: negative power");
  MultiPoly p;
  if (power == 0)
    p.t_[{}] = 1.0;
  else
    p.t_[{{j, power}}] = 1.0;
  return p;
}

void MultiPoly::prune(const Monomial& mono) {
  auto it = t_.find(mono);
  if (it != t_.end() && it->second == 0.0) t_.erase(it);
}

void MultiPoly::add_term(const Monomial& mono, double coeff) {
  if (coeff == 0.0) return;
  t_[mono] += coeff;
  prune(mono);
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  for (const auto& [m, c] : o.t_) add_term(m, c);
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
  for (const auto& [m, c] : o.t_) add_term(m, -c);
  return *this;
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r = *this;
  r += o;
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const {
  MultiPoly r = *this;
  r -= o;
  return r;
}

namespace {

Monomial merge_monomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      out.push_back(a[i++]);
    } else if (a[i].first > b[j].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

}  // namespace

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r;
  for (const auto& [ma, ca] : t_)
    for (const auto& [mb, cb] : o.t_) r.add_term(merge_monomials(ma, mb), ca * cb);
  return r;
}

MultiPoly& MultiPoly::scale(double c) {
  if (c == 0.0) {
    t_.clear();
    return *this;
  }
  for (auto& [m, v] : t_) v *= c;
  return *this;
}

MultiPoly MultiPoly::scaled(double c) const {
  MultiPoly r = *this;
  r.scale(c);
  return r;
}

double MultiPoly::constant_term() const {
  auto it = t_.find({});
  return it == t_.end() ? 0.0 : it->second;
}

double MultiPoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mono, c] : t_) m = std::max(m, std::abs(c));
  return m;
}

int MultiPoly::max_var_degree() const {
  int d = 0;
  for (const auto& [mono, c] : t_)
    for (const auto& [j, p] : mono) d = std::max(d, p);
  return d;
}

std::set<int> MultiPoly::indices() const {
  std::set<int> s;
  for (const auto& [mono, c] : t_)
    for (const auto& [j, p] : mono) s.insert(j);
  return s;
}

double MultiPoly::evaluate(const std::vector<double>& x) const {
  double sum = 0.0;
  for (const auto& [mono, c] : t_) {
    double term = c;
    for (const auto& [j, p] : mono) {
      if (j < 0 || static_cast<std::size_t>(j) >= x.size())
        throw std::invalid_argument("MultiPoly::evaluate: realization does not cover index " +
                                    std::to_string(j));
      double b = x[static_cast<std::size_t>(j)];
      for (int k = 0; k < p; ++k) term *= b;
    }
    sum += term;
  }
  return sum;
}

std::string MultiPoly::dump() const {
  std::ostringstream os;
  for (const auto& [mono, c] : t_) {
    for (std::size_t i = 0; i < mono.size(); ++i) {
      if (i) os << ' ';
      os << mono[i].first << '^' << mono[i].second;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    os << ':' << buf << '\n';
  }
  return os.str();
}

double expect(const MultiPoly& p, const Model& model) {
  double sum = 0.0;
  for (const auto& [mono, c] : p.terms()) {
    double term = c;
    for (const auto& [j, pw] : mono) {
      if (pw > 8)
        throw std::invalid_argument("expect: variable degree exceeds 8 (moments unavailable)");
      term *= model.m(j, pw);
      if (term == 0.0) break;
    }
    sum += term;
  }
  return sum;
}

MultiPoly conditional_expect(const MultiPoly& p, const std::set<int>& keep, const Model& model) {
  MultiPoly out;
  for (const auto& [mono, c] : p.terms()) {
    double coeff = c;
    Monomial kept;
    for (const auto& [j, pw] : mono) {
      if (keep.count(j)) {
        kept.emplace_back(j, pw);
      } else {
        if (pw > 8)
          throw std::invalid_argument(
              "conditional_expect: variable degree exceeds 8 (moments unavailable)");
        coeff *= model.m(j, pw);
      }
    }
    out.add_term(kept, coeff);
  }
  return out;
}

}  // namespace chaosint
