#include "chaosint/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chaosint {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

Family Family::parse(const std::string& tag) {
  std::string t = tag;
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "gaussian" || t == "normal") return {Kind::Gaussian, 0.5};
  if (t == "rademacher") return {Kind::Rademacher, 0.5};
  if (t == "uniform") return {Kind::Uniform, 0.5};
  if (t == "cexp" || t == "centered_exponential") return {Kind::CenteredExponential, 0.5};
  if (t.rfind("twopoint:", 0) == 0) {
    const double p = std::stod(t.substr(9));
    require(p > 0.0 && p < 1.0, "Family: twopoint parameter must lie in (0,1)");
    return {Kind::TwoPoint, p};
  }
  throw std::invalid_argument("Family: unknown tag '" + tag + "'");
}

std::string Family::tag() const {
  switch (kind) {
    case Kind::Gaussian: return "gaussian";
    case Kind::Rademacher: return "rademacher";
    case Kind::Uniform: return "uniform";
    case Kind::CenteredExponential: return "cexp";
    case Kind::TwoPoint: {
      std::ostringstream os;
      os << "twopoint:" << p;
      return os.str();
    }
  }
  return "?";
}

MomentTable moments(const Family& fam) {
  MomentTable t;
  switch (fam.kind) {
    case Kind::Gaussian:
      // m_{2k} = (2k-1)!!
      t.m = {1, 0, 1, 0, 3, 0, 15, 0, 105};
      break;
    case Kind::Rademacher:
      t.m = {1, 0, 1, 0, 1, 0, 1, 0, 1};
      break;
    case Kind::Uniform:
      // uniform on [-sqrt(3), sqrt(3)]: m_{2k} = 3^k / (2k+1)
      for (int k = 0; k <= 4; ++k)
        t.m[static_cast<std::size_t>(2 * k)] = std::pow(3.0, k) / (2 * k + 1);
      break;
    case Kind::CenteredExponential:
      // X = E - 1, E standard exponential: E[X^n] = sum_k C(n,k)(-1)^{n-k} k!
      for (int n = 0; n <= 8; ++n) {
        double s = 0.0;
        for (int k = 0; k <= n; ++k)
          s += binom(n, k) * ((n - k) % 2 == 0 ? 1.0 : -1.0) * factorial(k);
        t.m[static_cast<std::size_t>(n)] = s;
      }
      break;
    case Kind::TwoPoint: {
      const double u = std::sqrt((1.0 - fam.p) / fam.p);
      const double v = -std::sqrt(fam.p / (1.0 - fam.p));
      for (int n = 0; n <= 8; ++n)
        t.m[static_cast<std::size_t>(n)] =
            fam.p * std::pow(u, n) + (1.0 - fam.p) * std::pow(v, n);
      break;
    }
  }
  return t;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

double poly_expect(const std::vector<double>& coeffs, const MomentTable& mt) {
  require(coeffs.size() <= 9, "poly_expect: degree exceeds the available moments");
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * mt[static_cast<int>(i)];
  return s;
}

double OPolyTable::eval_P(int n, double x) const {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;  // P_1 = x for centered families
  for (int k = 1; k < n; ++k) {
    const double next = (x - rec_a[static_cast<std::size_t>(k)]) * cur -
                        rec_b[static_cast<std::size_t>(k)] * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// Connection coefficients against a monic triangular basis: v = x^n expanded,
// coefficients read off top-down.
void connect(const std::array<std::vector<double>, 5>& basis, double out[5][5]) {
  for (int n = 0; n <= 4; ++n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v[static_cast<std::size_t>(n)] = 1.0;
    for (int m = n; m >= 0; --m) {
      const double c = v[static_cast<std::size_t>(m)];
      out[n][m] = c;
      for (std::size_t i = 0; i < basis[static_cast<std::size_t>(m)].size(); ++i)
        v[i] -= c * basis[static_cast<std::size_t>(m)][i];
    }
  }
}

}  // namespace

OPolyTable orthopoly(const MomentTable& mt, const Family& fam) {
  require(std::abs(mt[0] - 1.0) < 1e-12 && std::abs(mt[1]) < 1e-12 &&
              std::abs(mt[2] - 1.0) < 1e-12,
          "orthopoly: moment table must have m0=1, m1=0, m2=1");

  OPolyTable t;
  t.P[0] = {1.0};
  t.P[1] = {0.0, 1.0};
  t.q[0] = 1.0;
  t.q[1] = 1.0;
  t.rec_a[0] = 0.0;
  t.rec_b[0] = 0.0;

  // Degeneracy threshold relative to the moment scale.
  double scale = 1.0;
  for (double v : mt.m) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale * scale;

  for (int n = 1; n <= 3; ++n) {
    const auto& Pn = t.P[static_cast<std::size_t>(n)];
    const double qn = t.q[static_cast<std::size_t>(n)];
    std::vector<double> next;
    if (qn > tol) {
      const auto Pn2 = poly_mul(Pn, Pn);
      std::vector<double> xPn2(Pn2.size() + 1, 0.0);
      for (std::size_t i = 0; i < Pn2.size(); ++i) xPn2[i + 1] = Pn2[i];
      const double a = poly_expect(xPn2, mt) / qn;
      const double b = qn / t.q[static_cast<std::size_t>(n - 1)];
      t.rec_a[static_cast<std::size_t>(n)] = a;
      t.rec_b[static_cast<std::size_t>(n)] = b;
      next.assign(Pn.size() + 1, 0.0);
      for (std::size_t i = 0; i < Pn.size(); ++i) {
        next[i + 1] += Pn[i];
        next[i] -= a * Pn[i];
      }
      const auto& Pm = t.P[static_cast<std::size_t>(n - 1)];
      for (std::size_t i = 0; i < Pm.size(); ++i) next[i] -= b * Pm[i];
    } else {
      // Null stratum: continue with the monic multiple vanishing on the atoms.
      require(fam.atomic(),
              "orthopoly: degenerate Hankel matrix for a continuous family (q_" +
                  std::to_string(n) + " ~ 0)");
      t.null_stratum[static_cast<std::size_t>(n)] = true;
      t.q[static_cast<std::size_t>(n)] = 0.0;
      t.rec_a[static_cast<std::size_t>(n)] = 0.0;
      t.rec_b[static_cast<std::size_t>(n)] = 0.0;
      next.assign(Pn.size() + 1, 0.0);
      for (std::size_t i = 0; i < Pn.size(); ++i) next[i + 1] = Pn[i];
    }
    t.P[static_cast<std::size_t>(n + 1)] = std::move(next);
    double qq = poly_expect(
        poly_mul(t.P[static_cast<std::size_t>(n + 1)], t.P[static_cast<std::size_t>(n + 1)]), mt);
    if (std::abs(qq) <= tol) qq = 0.0;
    require(qq >= 0.0, "orthopoly: negative quadratic norm (inconsistent moments)");
    t.q[static_cast<std::size_t>(n + 1)] = qq;
  }
  if (t.q[4] == 0.0) {
    require(fam.atomic(), "orthopoly: degenerate Hankel matrix for a continuous family (q_4 ~ 0)");
    t.null_stratum[4] = true;
  }

  connect(t.P, t.gamma);

  // Probabilists' Hermite reference: H_{n+1} = x H_n - n H_{n-1}.
  std::array<std::vector<double>, 5> H;
  H[0] = {1.0};
  H[1] = {0.0, 1.0};
  for (int n = 1; n <= 3; ++n) {
    std::vector<double> next(H[static_cast<std::size_t>(n)].size() + 1, 0.0);
    for (std::size_t i = 0; i < H[static_cast<std::size_t>(n)].size(); ++i)
      next[i + 1] += H[static_cast<std::size_t>(n)][i];
    for (std::size_t i = 0; i < H[static_cast<std::size_t>(n - 1)].size(); ++i)
      next[i] -= n * H[static_cast<std::size_t>(n - 1)][i];
    H[static_cast<std::size_t>(n + 1)] = std::move(next);
  }
  connect(H, t.Gamma);
  return t;
}

OPolyTable orthopoly(const MomentTable& mt) {
  return orthopoly(mt, Family{Kind::Gaussian, 0.5});
}

Model::Model(Family fam, int n) : n_(n), fams_{fam} {
  require(n > 0, "Model: size must be positive");
  build_caches();
}

Model::Model(std::vector<Family> fams) : n_(static_cast<int>(fams.size())), fams_(std::move(fams)) {
  require(n_ > 0, "Model: family list must be nonempty");
  build_caches();
}

void Model::build_caches() {
  lookup_.resize(fams_.size());
  for (std::size_t i = 0; i < fams_.size(); ++i) {
    int found = -1;
    for (std::size_t d = 0; d < distinct_.size(); ++d)
      if (distinct_[d] == fams_[i]) {
        found = static_cast<int>(d);
        break;
      }
    if (found < 0) {
      found = static_cast<int>(distinct_.size());
      distinct_.push_back(fams_[i]);
      mts_.push_back(moments(fams_[i]));
      ops_.push_back(orthopoly(mts_.back(), fams_[i]));
    }
    lookup_[i] = found;
  }
}

const Family& Model::family(int j) const {
  const std::size_t slot = fams_.size() == 1 ? 0 : static_cast<std::size_t>(j);
  return fams_[slot];
}

const MomentTable& Model::mt(int j) const {
  const std::size_t slot = fams_.size() == 1 ? 0 : static_cast<std::size_t>(j);
  return mts_[static_cast<std::size_t>(lookup_[slot])];
}

const OPolyTable& Model::op(int j) const {
  const std::size_t slot = fams_.size() == 1 ? 0 : static_cast<std::size_t>(j);
  return ops_[static_cast<std::size_t>(lookup_[slot])];
}

std::string Model::tag() const {
  if (fams_.size() == 1) return fams_[0].tag();
  std::string s = "mixed[";
  for (std::size_t i = 0; i < fams_.size(); ++i) {
    if (i) s += ",";
    s += fams_[i].tag();
  }
  return s + "]";
}

}  // namespace chaosint
