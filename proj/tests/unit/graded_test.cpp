#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "chaosint/chaos_ops.hpp"
#include "chaosint/mc.hpp"

using namespace chaosint;

namespace {

StepFn random_step(const Grid& g, std::uint64_t seed, std::uint64_t tag) {
  std::vector<double> v(static_cast<std::size_t>(g.cells()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * uniform01(seed, tag, i) - 1.0;
  return StepFn(g, std::move(v));
}

}  // namespace

TEST_CASE("first order elements") {
  const Grid g1(1.0, 1);
  const BasisSpec basis(g1);
  const auto model = make_model(Family::parse("gaussian"), 2);

  SUBCASE("basis element is a single variable") {
    const StepFn e0(g1, {std::sqrt(2.0), 0.0});
    const GradedChaos z = first_order(e0, basis, model);
    CHECK((z.to_poly() - MultiPoly::var(0)).max_abs_coeff() < 1e-14);
  }
  SUBCASE("constant function spreads evenly, unit second moment") {
    const GradedChaos z = first_order(StepFn::constant(g1, 1.0), basis, model);
    CHECK(z.kernel(1).at({0}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    const MultiPoly p = z.to_poly();
    CHECK(expect(p * p, *model) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("zero function is the zero element") {
    const GradedChaos z = first_order(StepFn::constant(g1, 0.0), basis, model);
    CHECK(z.to_poly().empty());
    CHECK(z.max_order() == 0);
  }
}

TEST_CASE("diagonal and cross quadratics") {
  const auto model = make_model(Family::parse("gaussian"), 2);
  Kernel2 e00(2), e10(2), e01(2);
  e00.at(0, 0) = 1.0;
  e10.at(1, 0) = 1.0;
  e01.at(0, 1) = 1.0;

  SUBCASE("single diagonal coefficient") {
    const GradedChaos z = diagonal_quadratic(e00, model);
    const MultiPoly expected = MultiPoly::var(0, 2) - MultiPoly::constant(1.0);
    CHECK((z.to_poly() - expected).max_abs_coeff() < 1e-14);
  }
  SUBCASE("strictly lower is read, upper is ignored") {
    CHECK((cross_quadratic(e10, model).to_poly() - MultiPoly::var(0) * MultiPoly::var(1))
              .max_abs_coeff() < 1e-14);
    CHECK(cross_quadratic(e01, model).to_poly().empty());
  }
  SUBCASE("diagonal and cross parts are orthogonal for every family") {
    for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
      CAPTURE(tag);
      const auto m = make_model(Family::parse(tag), 4);
      Kernel2 f(4), g(4);
      std::uint64_t idx = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          f.at(a, b) = 2.0 * uniform01(3, 21, idx) - 1.0;
          g.at(a, b) = 2.0 * uniform01(4, 22, idx++) - 1.0;
        }
      const MultiPoly prod = diagonal_quadratic(f, m).to_poly() * cross_quadratic(g, m).to_poly();
      CHECK(std::abs(expect(prod, *m)) < 1e-12);
    }
  }
}

TEST_CASE("product decomposition") {
  const Grid g1(1.0, 1);
  const BasisSpec basis(g1);

  SUBCASE("coincident basis elements") {
    const auto model = make_model(Family::parse("uniform"), 2);
    const StepFn e0(g1, {std::sqrt(2.0), 0.0});
    const auto parts = product_decompose(e0, e0, basis, model);
    CHECK(parts.constant == doctest::Approx(1.0).epsilon(1e-14));
    const MultiPoly sum = parts.diag_part.to_poly() + parts.cross_part.to_poly() +
                          MultiPoly::constant(parts.constant);
    CHECK((sum - MultiPoly::var(0, 2)).max_abs_coeff() < 1e-13);
  }
  SUBCASE("disjoint basis elements") {
    const auto model = make_model(Family::parse("uniform"), 2);
    const StepFn e0(g1, {std::sqrt(2.0), 0.0});
    const StepFn e1(g1, {0.0, std::sqrt(2.0)});
    const auto parts = product_decompose(e0, e1, basis, model);
    CHECK(parts.constant == doctest::Approx(0.0));
    CHECK(parts.diag_part.to_poly().empty());
    CHECK((parts.cross_part.to_poly() - MultiPoly::var(0) * MultiPoly::var(1)).max_abs_coeff() <
          1e-13);
  }
  SUBCASE("random pairs across families") {
    const Grid g3(1.0, 3);
    const BasisSpec b3(g3);
    double worst = 0.0;
    for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
      const auto model = make_model(Family::parse(tag), b3.size());
      for (std::uint64_t i = 0; i < 10; ++i) {
        const StepFn h = random_step(g3, 5, 100 + 2 * i);
        const StepFn g = random_step(g3, 5, 101 + 2 * i);
        const auto parts = product_decompose(h, g, b3, model);
        MultiPoly resid = parts.diag_part.to_poly() + parts.cross_part.to_poly() +
                          MultiPoly::constant(parts.constant) -
                          first_order(h, b3, model).to_poly() *
                              first_order(g, b3, model).to_poly();
        worst = std::max(worst, resid.max_abs_coeff());
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("multiple integral examples") {
  SUBCASE("diagonal pair under gaussian and skewed families") {
    SymTensor f(2);
    f.set({0, 0}, 1.0);
    const auto gauss = make_model(Family::parse("gaussian"), 1);
    const MultiPoly h2 = MultiPoly::var(0, 2) - MultiPoly::constant(1.0);
    CHECK((multiple_integral(f, gauss).to_poly() - h2).max_abs_coeff() < 1e-14);

    const auto cexp = make_model(Family::parse("cexp"), 1);
    const MultiPoly p2 = MultiPoly::var(0, 2) - MultiPoly::var(0).scaled(2.0) -
                         MultiPoly::constant(1.0);
    CHECK((multiple_integral(f, cexp).to_poly() - p2).max_abs_coeff() < 1e-13);
  }
  SUBCASE("mixed pair is the plain product for any family") {
    SymTensor f(2);
    f.set({0, 1}, 0.5);
    for (const char* tag : {"gaussian", "rademacher", "cexp"}) {
      const auto model = make_model(Family::parse(tag), 2);
      CHECK((multiple_integral(f, model).to_poly() - MultiPoly::var(0) * MultiPoly::var(1))
                .max_abs_coeff() < 1e-14);
    }
  }
  SUBCASE("null strata are flagged, not dropped") {
    SymTensor f(2);
    f.set({0, 0}, 1.0);
    f.set({0, 1}, 0.25);
    const auto rad = make_model(Family::parse("rademacher"), 2);
    const GradedChaos z = multiple_integral(f, rad);
    const auto flags = z.null_strata();
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].order == 2);
    CHECK(flags[0].idx == IndexTuple{0, 0});
    // the flagged component evaluates to zero on the support; the mixed orbit
    // carries lambda = 2 * 0.25
    Realization w;
    w.x = {1.0, -1.0};
    CHECK(z.evaluate(w) == doctest::Approx(-0.5));
  }
}

TEST_CASE("evaluation and truncation") {
  const auto model = make_model(Family::parse("gaussian"), 3);
  Kernel2 k(3);
  k.at(0, 0) = 1.0;
  const GradedChaos z = diagonal_quadratic(k, model);

  SUBCASE("pointwise value") {
    Realization w;
    w.x = {2.0, 0.0, 0.0};
    CHECK(z.evaluate(w) == doctest::Approx(3.0));
  }
  SUBCASE("missing indices are rejected") {
    Realization w;
    w.x = {};
    CHECK_THROWS_AS(z.evaluate(w), std::invalid_argument);
  }
  SUBCASE("truncation to zero keeps only the constant") {
    GradedChaos c = z;
    c.set_constant(4.0);
    const GradedChaos t = c.truncated(0);
    CHECK(t.constant() == 4.0);
    CHECK(t.max_order() == 0);
  }
  SUBCASE("evaluation agrees with the polynomial reconstruction") {
    for (const char* tag : {"cexp", "twopoint:0.3", "uniform"}) {
      const auto m = make_model(Family::parse(tag), 3);
      SymTensor f(3);
      f.set({0, 1, 2}, 0.5);
      f.set({0, 0, 1}, -0.25);
      f.set({2, 2, 2}, 1.5);
      const GradedChaos g = multiple_integral(f, m);
      const Realization w = sample(*m, 3, 17, 0);
      CHECK(g.evaluate(w) == doctest::Approx(g.to_poly().evaluate(w.x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("martingale property of truncation tails") {
  const std::set<int> keep = {0, 1, 2};
  for (const char* tag : {"gaussian", "rademacher", "uniform", "cexp", "twopoint:0.2"}) {
    CAPTURE(tag);
    const auto model = make_model(Family::parse(tag), 6);
    std::vector<GradedChaos> elems;
    Kernel2 k(6);
    std::uint64_t idx = 0;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) k.at(a, b) = 2.0 * uniform01(9, 40, idx++) - 1.0;
    elems.push_back(diagonal_quadratic(k, model));
    elems.push_back(cross_quadratic(k, model));
    for (int order = 1; order <= 4; ++order) {
      SymTensor f(order);
      IndexTuple t(static_cast<std::size_t>(order), 0);
      t.back() = 5;  // guarantee tail content
      f.set(t, 1.25);
      if (order >= 2) {
        IndexTuple t2(static_cast<std::size_t>(order), 1);
        f.set(t2, -0.5);
      }
      elems.push_back(multiple_integral(f, model));
    }
    for (const auto& z : elems) {
      const GradedChaos tail = z - z.truncated(3);
      CHECK(conditional_expect(tail.to_poly(), keep, *model).max_abs_coeff() < 1e-12);
    }
  }
}

TEST_CASE("debug serialization") {
  const auto model = make_model(Family::parse("gaussian"), 2);
  GradedChaos z(model, 0.5);
  SymTensor f(2);
  f.set({0, 1}, 0.25);
  z.set_kernel(f);
  CHECK(z.debug_json() ==
        "{\"constant\":0.5,\"orders\":{\"2\":[{\"idx\":[0,1],\"val\":0.25}]}}");
}
