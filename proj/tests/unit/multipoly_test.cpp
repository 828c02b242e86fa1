#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chaosint/graded.hpp"
#include "chaosint/multipoly.hpp"

using namespace chaosint;

namespace {

MultiPoly x(int j, int p = 1) { return MultiPoly::var(j, p); }

MultiPoly random_poly(std::uint64_t seed, int nvars, int terms, int max_total_deg) {
  // deterministic scrambled coefficients, no RNG framework needed
  MultiPoly p;
  std::uint64_t s = seed;
  auto next = [&s]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return s >> 11;
  };
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    int budget = max_total_deg;
    for (int j = 0; j < nvars && budget > 0; ++j) {
      const int d = static_cast<int>(next() % static_cast<std::uint64_t>(budget + 1));
      if (d > 0) m.emplace_back(j, d);
      budget -= d;
    }
    p.add_term(m, static_cast<double>(next() % 2000) / 1000.0 - 1.0);
  }
  return p;
}

}  // namespace

TEST_CASE("arithmetic basics") {
  const MultiPoly p = x(0) * x(1) + MultiPoly::constant(2.0);
  const MultiPoly q = p * p;
  CHECK(q.constant_term() == doctest::Approx(4.0));
  CHECK(q.terms().at({{0, 2}, {1, 2}}) == doctest::Approx(1.0));
  CHECK(q.terms().at({{0, 1}, {1, 1}}) == doctest::Approx(4.0));
  CHECK((p - p).empty());
  CHECK(p.max_var_degree() == 1);
  CHECK(q.max_var_degree() == 2);
}

TEST_CASE("expectation under the product measure") {
  const auto gauss = make_model(Family::parse("gaussian"), 4);
  const auto rad = make_model(Family::parse("rademacher"), 4);

  SUBCASE("independence with unit variances") {
    const MultiPoly p = x(0, 2) * x(1, 2);
    CHECK(expect(p, *gauss) == doctest::Approx(1.0));
    CHECK(expect(p, *rad) == doctest::Approx(1.0));
  }
  SUBCASE("centered square") {
    const MultiPoly p = (x(0, 2) - MultiPoly::constant(1.0)) * (x(0, 2) - MultiPoly::constant(1.0));
    CHECK(expect(p, *gauss) == doctest::Approx(2.0));
    CHECK(expect(p, *rad) == doctest::Approx(0.0));
  }
  SUBCASE("degree cap") {
    CHECK_THROWS_AS(expect(x(0, 9), *gauss), std::invalid_argument);
    CHECK_NOTHROW(expect(x(0, 8), *gauss));
  }
}

TEST_CASE("conditional expectation") {
  const auto model = make_model(Family::parse("cexp"), 4);
  SUBCASE("mean-zero factors vanish") {
    CHECK(conditional_expect(x(0) * x(1), {0}, *model).empty());
    const MultiPoly p = x(0) * (x(1, 2) - MultiPoly::constant(1.0));
    CHECK(conditional_expect(p, {0}, *model).empty());
  }
  SUBCASE("unit variance passes through") {
    const MultiPoly r = conditional_expect(x(0, 2) * x(1, 2), {0}, *model);
    CHECK(r.terms().size() == 1);
    CHECK(r.terms().at({{0, 2}}) == doctest::Approx(1.0));
  }
  SUBCASE("keeping everything is the identity, keeping nothing is expect") {
    const MultiPoly p = random_poly(5, 3, 6, 2);
    CHECK((conditional_expect(p, {0, 1, 2}, *model) - p).max_abs_coeff() < 1e-15);
    const MultiPoly e = conditional_expect(p, {}, *model);
    CHECK(e.max_var_degree() == 0);
    CHECK(e.constant_term() == doctest::Approx(expect(p, *model)).epsilon(1e-13));
  }
}

TEST_CASE("regrade examples") {
  SUBCASE("pure square, gaussian") {
    const auto model = make_model(Family::parse("gaussian"), 2);
    const GradedChaos z = regrade(x(0, 2), model);
    CHECK(z.constant() == doctest::Approx(1.0));
    CHECK(z.has_order(2));
    CHECK(z.kernel(2).at({0, 0}) == doctest::Approx(1.0));
    CHECK(!z.has_order(1));
  }
  SUBCASE("cross product is a symmetrized mixed kernel") {
    const auto model = make_model(Family::parse("uniform"), 2);
    const GradedChaos z = regrade(x(0) * x(1), model);
    CHECK(z.constant() == 0.0);
    CHECK(z.kernel(2).at({0, 1}) == doctest::Approx(0.5));
    CHECK(z.kernel(2).lambda({0, 1}) == doctest::Approx(1.0));
  }
  SUBCASE("cube under a skewed family uses the connection coefficients") {
    const auto model = make_model(Family::parse("cexp"), 1);
    const auto& op = model->op(0);
    const GradedChaos z = regrade(x(0, 3), model);
    CHECK(z.kernel(3).lambda({0, 0, 0}) == doctest::Approx(1.0));
    CHECK(z.kernel(2).lambda({0, 0}) == doctest::Approx(op.gamma[3][2]).epsilon(1e-13));
    CHECK(z.kernel(1).lambda({0}) == doctest::Approx(op.gamma[3][1]).epsilon(1e-13));
    CHECK(z.constant() == doctest::Approx(op.gamma[3][0]).epsilon(1e-13));
    // round trip back to monomials
    CHECK((z.to_poly() - x(0, 3)).max_abs_coeff() < 1e-12);
  }
  SUBCASE("per-variable degree cap") {
    const auto model = make_model(Family::parse("gaussian"), 1);
    CHECK_THROWS_AS(regrade(x(0, 5), model), std::invalid_argument);
  }
}

TEST_CASE("regrade invariants") {
  for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
    CAPTURE(tag);
    const auto model = make_model(Family::parse(tag), 3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const MultiPoly p = random_poly(seed, 3, 5, 4);  // total graded degree <= 4
      const GradedChaos z = regrade(p, model);
      // order-0 consistency
      CHECK(z.constant() == doctest::Approx(expect(p, *model)).epsilon(1e-10));
      // reconstruction
      CHECK((z.to_poly() - p).max_abs_coeff() < 1e-10);
    }
  }
}

TEST_CASE("graded orthogonality under exact moments") {
  for (const char* tag : {"gaussian", "uniform", "cexp", "twopoint:0.2"}) {
    CAPTURE(tag);
    const auto model = make_model(Family::parse(tag), 3);
    // pure-order elements of different orders are uncorrelated
    const MultiPoly p1 = x(0) + x(1).scaled(0.5) - x(2).scaled(1.5);
    const GradedChaos g2 = regrade(x(0) * x(1) + x(1, 2), model);
    const GradedChaos g3 = regrade(x(0) * x(1) * x(2) + x(2, 3), model);
    GradedChaos only2(model);
    only2.set_kernel(g2.kernel(2));
    GradedChaos only3(model);
    only3.set_kernel(g3.kernel(3));
    CHECK(std::abs(expect(p1 * only2.to_poly(), *model)) < 1e-10);
    CHECK(std::abs(expect(p1 * only3.to_poly(), *model)) < 1e-10);
    CHECK(std::abs(expect(only2.to_poly() * only3.to_poly(), *model)) < 1e-10);
  }
}

TEST_CASE("debug dump is sorted and stable") {
  const MultiPoly p = x(1) * x(0) + MultiPoly::constant(0.25);
  CHECK(p.dump() == ":0.25\n0^1 1^1:1\n");
}
