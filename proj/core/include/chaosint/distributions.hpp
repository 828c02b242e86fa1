#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace chaosint {

// Driving-noise families. Every family has mean 0 and variance 1.
enum class Kind { Gaussian, Rademacher, Uniform, CenteredExponential, TwoPoint };

struct Family {
  Kind kind = Kind::Gaussian;
  double p = 0.5;  // TwoPoint success probability

  // Tags: gaussian | rademacher | uniform | cexp | twopoint:<p>
  static Family parse(const std::string& tag);
  std::string tag() const;

  bool atomic() const { return kind == Kind::Rademacher || kind == Kind::TwoPoint; }
  int atom_count() const { return atomic() ? 2 : 0; }

  bool operator==(const Family&) const = default;
};

// Raw moments m_0..m_8 of X, closed form per family.
struct MomentTable {
  std::array<double, 9> m{};
  double operator[](int k) const { return m[static_cast<std::size_t>(k)]; }
};

MomentTable moments(const Family& fam);

// Monic orthogonal polynomials P_0..P_4 with their three-term recurrence,
// quadratic norms q_n = E[P_n(X)^2], and connection coefficients
//   x^n = sum_{m<=n} gamma[n][m] P_m(x).
// Gamma is the same array for the probabilists' Hermite reference.
// For finitely atomic families, polynomials past the atom count are the monic
// representatives vanishing on the support; their q_n is exactly 0 and the
// stratum is flagged null. Operators must never divide by such a q_n.
struct OPolyTable {
  std::array<std::vector<double>, 5> P;  // P[n][i] = coefficient of x^i
  std::array<double, 5> q{};
  std::array<bool, 5> null_stratum{};
  std::array<double, 4> rec_a{};  // P_{n+1} = (x - a_n) P_n - b_n P_{n-1}
  std::array<double, 4> rec_b{};
  double gamma[5][5] = {};
  double Gamma[5][5] = {};

  // Three-term-recurrence evaluation (null strata continue with a = b = 0).
  double eval_P(int n, double x) const;
};

// Throws on a degenerate Hankel matrix unless the family is finitely atomic.
OPolyTable orthopoly(const MomentTable& mt, const Family& fam);
OPolyTable orthopoly(const MomentTable& mt);  // continuous families only

// Exact expectation of a polynomial pair product under the moment table.
double poly_expect(const std::vector<double>& coeffs, const MomentTable& mt);
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);

// Per-index family assignment, homogeneous or explicit, with cached tables.
class Model {
 public:
  Model(Family fam, int n);
  explicit Model(std::vector<Family> fams);

  int size() const { return n_; }
  const Family& family(int j) const;
  const MomentTable& mt(int j) const;
  const OPolyTable& op(int j) const;
  double m(int j, int order) const { return mt(j)[order]; }
  double q(int j, int deg) const { return op(j).q[static_cast<std::size_t>(deg)]; }

  bool homogeneous() const { return fams_.size() == 1; }
  std::string tag() const;

  // Distinct families present (for sup constants and reports).
  const std::vector<Family>& distinct() const { return distinct_; }

 private:
  int n_ = 0;
  std::vector<Family> fams_;  // size 1 (homogeneous) or n_
  std::vector<Family> distinct_;
  std::vector<MomentTable> mts_;       // parallel to distinct_
  std::vector<OPolyTable> ops_;        // parallel to distinct_
  std::vector<int> lookup_;            // family index per slot of fams_
  void build_caches();
};

using ModelPtr = std::shared_ptr<const Model>;

inline ModelPtr make_model(Family fam, int n) { return std::make_shared<Model>(fam, n); }
inline ModelPtr make_model(std::vector<Family> fams) {
  return std::make_shared<Model>(std::move(fams));
}

}  // namespace chaosint
