#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chaosint/distributions.hpp"

namespace chaosint {

// Sparse multivariate polynomial in finitely many X_j. A monomial is a sorted
// list of (variable index, power >= 1); the empty monomial is the constant.
// This is the verification oracle for every identity in the engine.
using Monomial = std::vector<std::pair<int, int>>;

class MultiPoly {
 public:
  MultiPoly() = default;

  static MultiPoly constant(double c);
  static MultiPoly var(int j, int power = 1);

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator-=(const MultiPoly& o);
  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator-(const MultiPoly& o) const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly& scale(double c);
  MultiPoly scaled(double c) const;

  void add_term(const Monomial& mono, double coeff);

  std::size_t term_count() const { return t_.size(); }
  bool empty() const { return t_.empty(); }
  double constant_term() const;
  double max_abs_coeff() const;
  int max_var_degree() const;
  std::set<int> indices() const;

  double evaluate(const std::vector<double>& x) const;

  const std::map<Monomial, double>& terms() const { return t_; }

  // Sorted "exponents:coefficient" text lines for golden tests.
  std::string dump() const;

 private:
  void prune(const Monomial& mono);
  std::map<Monomial, double> t_;
};

// E[p] under the product measure; rejects per-variable degree > 8.
double expect(const MultiPoly& p, const Model& model);

// Integrates out every variable not in `keep`, monomial by monomial.
MultiPoly conditional_expect(const MultiPoly& p, const std::set<int>& keep, const Model& model);

}  // namespace chaosint
