#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chaosint/chaos_ops.hpp"
#include "chaosint/mc.hpp"
#include "chaosint/multipoly.hpp"
#include "chaosint/sym_tensor.hpp"

using namespace chaosint;

namespace {

SymTensor e(int j) {
  SymTensor f(1);
  f.set({j}, 1.0);
  return f;
}

SymTensor random_sym(int order, int n, std::uint64_t seed) {
  SymTensor f(order);
  std::uint64_t idx = 0;
  std::vector<int> t(static_cast<std::size_t>(order), 0);
  while (true) {
    f.set(IndexTuple(t.begin(), t.end()), 2.0 * uniform01(seed, 77, idx++) - 1.0);
    int pos = order - 1;
    while (pos >= 0 && t[static_cast<std::size_t>(pos)] == n - 1) --pos;
    if (pos < 0) break;
    const int v = t[static_cast<std::size_t>(pos)] + 1;
    for (int q = pos; q < order; ++q) t[static_cast<std::size_t>(q)] = v;
  }
  return f;
}

}  // namespace

TEST_CASE("orbit bookkeeping") {
  CHECK(orbit_size({0, 1}) == 2);
  CHECK(orbit_size({1, 1}) == 1);
  CHECK(orbit_size({0, 1, 1, 3}) == 12);
  CHECK(multiplicities({0, 0, 2, 2}) == std::vector<int>{2, 2});
}

TEST_CASE("symmetric product") {
  SUBCASE("mixed pair splits the weight") {
    const SymTensor f = circ(e(0), e(1));
    CHECK(f.at({0, 1}) == doctest::Approx(0.5));
    CHECK(f.at({1, 0}) == doctest::Approx(0.5));
    CHECK(f.lambda({0, 1}) == doctest::Approx(1.0));
  }
  SUBCASE("zero annihilates") {
    const SymTensor z(1);
    CHECK(circ(e(0), z).empty());
  }
  SUBCASE("commutative and bilinear") {
    const SymTensor a = random_sym(2, 3, 4);
    const SymTensor b = random_sym(2, 3, 5);
    const SymTensor ab = circ(a, b);
    const SymTensor ba = circ(b, a);
    CHECK((ab - ba).max_abs() < 1e-15);
    const SymTensor a2 = circ(a.scaled(2.0), b);
    CHECK((a2 - ab.scaled(2.0)).max_abs() < 1e-14);
  }
  SUBCASE("order overflow is rejected") {
    const SymTensor a = random_sym(3, 2, 6);
    CHECK_THROWS_AS(circ(a, random_sym(2, 2, 7)), std::invalid_argument);
  }
}

TEST_CASE("symmetrization of a raw tensor") {
  SUBCASE("outer product of basis elements") {
    const SymTensor s = sym(2, {{{0, 1}, 1.0}});
    CHECK(s.at({0, 1}) == doctest::Approx(0.5));
  }
  SUBCASE("already symmetric input is fixed") {
    const SymTensor s = sym(2, {{{0, 1}, 0.7}, {{1, 0}, 0.7}, {{1, 1}, -0.2}});
    CHECK(s.at({0, 1}) == doctest::Approx(0.7));
    CHECK(s.at({1, 1}) == doctest::Approx(-0.2));
  }
}

TEST_CASE("isometry norm") {
  SUBCASE("diagonal pair, gaussian") {
    const auto model = make_model(Family::parse("gaussian"), 2);
    const SymTensor f = circ(e(0), e(0));
    CHECK(isometry_norm2(f, *model) == doctest::Approx(2.0));
  }
  SUBCASE("diagonal pair, rademacher null stratum") {
    const auto model = make_model(Family::parse("rademacher"), 2);
    const SymTensor f = circ(e(0), e(0));
    CHECK(isometry_norm2(f, *model) == doctest::Approx(0.0));
  }
  SUBCASE("mixed pair has unit norm for every family") {
    for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
      const auto model = make_model(Family::parse(tag), 2);
      CHECK(isometry_norm2(circ(e(0), e(1)), *model) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("isometry against the oracle, all orders and families") {
  for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
    CAPTURE(tag);
    const auto model = make_model(Family::parse(tag), 3);
    for (int order = 1; order <= 4; ++order) {
      for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const SymTensor f = random_sym(order, 3, 100 * static_cast<std::uint64_t>(order) + rep);
        const MultiPoly p = multiple_integral(f, model).to_poly();
        const double direct = expect(p * p, *model);
        CHECK(std::abs(direct - isometry_norm2(f, *model)) < 1e-9);
      }
    }
  }
}

TEST_CASE("one-argument contraction") {
  SUBCASE("mixed pair") {
    const auto model = make_model(Family::parse("gaussian"), 2);
    const Kernel2 c = contract1(circ(e(0), e(1)), *model, 2);
    CHECK(c.at(0, 0) == doctest::Approx(0.25));
    CHECK(c.at(1, 1) == doctest::Approx(0.25));
    CHECK(c.at(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("diagonal pair carries the stratum scale") {
    const auto model = make_model(Family::parse("gaussian"), 1);
    const Kernel2 c = contract1(circ(e(0), e(0)), *model, 1);
    CHECK(c.at(0, 0) == doctest::Approx(1.0));  // sqrt(q2/2) applied twice
  }
  SUBCASE("zero tensor") {
    const auto model = make_model(Family::parse("uniform"), 2);
    CHECK(contract1(SymTensor(2), *model, 2).max_abs() == 0.0);
  }
  SUBCASE("positive semidefinite") {
    const auto model = make_model(Family::parse("cexp"), 3);
    const Kernel2 c = contract1(random_sym(2, 3, 42), *model, 3);
    // diagonal dominance check via quadratic forms on a few vectors
    for (std::uint64_t s = 0; s < 10; ++s) {
      double q = 0.0;
      std::vector<double> v(3);
      for (int i = 0; i < 3; ++i)
        v[static_cast<std::size_t>(i)] = 2.0 * uniform01(s, 9, static_cast<std::uint64_t>(i)) - 1.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          q += v[static_cast<std::size_t>(i)] * c.at(i, j) * v[static_cast<std::size_t>(j)];
      CHECK(q >= -1e-12);
    }
  }
}

TEST_CASE("diagonal projection") {
  const SymTensor d = circ(e(0), e(0));
  CHECK((diagonal_projection(d) - d).max_abs() < 1e-15);
  CHECK(diagonal_projection(circ(e(0), e(1))).empty());
  const SymTensor f = random_sym(2, 3, 11);
  const SymTensor once = diagonal_projection(f);
  CHECK((diagonal_projection(once) - once).max_abs() < 1e-15);
}

TEST_CASE("lowering operator") {
  SUBCASE("gaussian models lower to zero") {
    const auto model = make_model(Family::parse("gaussian"), 3);
    for (int order = 1; order <= 4; ++order) {
      const SymTensor f = random_sym(order, 3, 50 + static_cast<std::uint64_t>(order));
      for (int k = 1; k <= order; ++k) CHECK(lowering(f, k, *model).max_abs() < 1e-14);
    }
  }
  SUBCASE("skewed diagonal pair lowers by the third moment") {
    const auto model = make_model(Family::parse("cexp"), 1);
    const SymTensor out = lowering(circ(e(0), e(0)), 1, *model);
    CHECK(out.order() == 1);
    CHECK(out.at({0}) == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("mixed pair lowers to zero for every family") {
    for (const char* tag : {"rademacher", "uniform", "cexp", "twopoint:0.2"}) {
      const auto model = make_model(Family::parse(tag), 2);
      CHECK(lowering(circ(e(0), e(1)), 1, *model).max_abs() == 0.0);
    }
  }
  SUBCASE("order bounds") {
    const auto model = make_model(Family::parse("cexp"), 2);
    CHECK_THROWS_AS(lowering(random_sym(2, 2, 1), 3, *model), std::invalid_argument);
    CHECK_THROWS_AS(lowering(random_sym(2, 2, 1), 0, *model), std::invalid_argument);
  }
}

TEST_CASE("rewrite calibration: order-2 map plus lowering equals the raw diagonal sum") {
  // the connection-coefficient convention is pinned by this identity
  for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
    CAPTURE(tag);
    const auto model = make_model(Family::parse(tag), 4);
    Kernel2 diag(4);
    SymTensor f(2);
    for (int j = 0; j < 4; ++j) {
      const double v = 2.0 * uniform01(31, 13, static_cast<std::uint64_t>(j)) - 1.0;
      diag.at(j, j) = v;
      f.set({j, j}, v);
    }
    GradedChaos lhs = multiple_integral(f, model);
    const SymTensor low = lowering(f, 1, *model);
    if (!low.empty()) lhs += multiple_integral(low, model);
    const MultiPoly resid = lhs.to_poly() - diagonal_quadratic(diag, model).to_poly();
    CHECK(resid.max_abs_coeff() < 1e-10);
  }
}

TEST_CASE("sup constants") {
  SUBCASE("gaussian is flat zero") {
    const auto model = make_model(Family::parse("gaussian"), 2);
    for (int n = 1; n <= 4; ++n) {
      const auto sc = sup_constants(*model, n);
      for (int k = 1; k <= n; ++k) CHECK(sc.C[static_cast<std::size_t>(k)] == 0.0);
    }
  }
  SUBCASE("rademacher single drop at order 2 vanishes by symmetry") {
    const auto model = make_model(Family::parse("rademacher"), 2);
    CHECK(sup_constants(*model, 2).C[1] == 0.0);
  }
  SUBCASE("centered exponential single drop equals the skewness") {
    const auto model = make_model(Family::parse("cexp"), 2);
    CHECK(sup_constants(*model, 2).C[1] == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("stratum scale bound at order 2") {
    const auto model = make_model(Family::parse("gaussian"), 2);
    // strata of order 2: q2/2! = 1 and q1 q1 = 1
    CHECK(sup_constants(*model, 2).A == doctest::Approx(1.0));
  }
}

TEST_CASE("tensor inner products") {
  const SymTensor f = circ(e(0), e(1));
  CHECK(f.otimes_norm2() == doctest::Approx(0.5));  // two entries of 1/2
  const SymTensor d = circ(e(0), e(0));
  CHECK(d.otimes_norm2() == doctest::Approx(1.0));
  CHECK(f.otimes_inner(d) == 0.0);
}
