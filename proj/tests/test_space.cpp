#include <random>

#include "catch_amalgamated.hpp"
#include "riskenv/space.hpp"
#include "support/generators.hpp"

using namespace riskenv;
using Catch::Approx;

TEST_CASE("expectation on small instances") {
  ProbabilitySpace half({0.5, 0.5});
  CHECK(expectation(half, RandomVariable{{0.0, 10.0}}) == Approx(5.0));

  ProbabilitySpace single({1.0});
  CHECK(expectation(single, RandomVariable{{-3.25}}) == -3.25);

  ProbabilitySpace third = ProbabilitySpace::uniform(3);
  CHECK(expectation(third, RandomVariable{{-1.0, 0.0, 1.0}}) == Approx(0.0).margin(1e-15));
}

TEST_CASE("reweighted expectation") {
  ProbabilitySpace half({0.5, 0.5});
  RandomVariable x{{0.0, 10.0}};
  CHECK(expectation_under(half, x, Density{{0.0, 2.0}}) == Approx(10.0));

  // Q0 from the three-atom segment fixture pairs to zero with (-1, 0, 1).
  ProbabilitySpace third = ProbabilitySpace::uniform(3);
  CHECK(expectation_under(third, RandomVariable{{-1.0, 0.0, 1.0}},
                          Density{{0.75, 1.5, 0.75}}) == Approx(0.0).margin(1e-15));
}

TEST_CASE("unit density reproduces the base expectation") {
  std::mt19937_64 rng(1001);
  for (int t = 0; t < 1000; ++t) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 8);
    RandomVariable x = testgen::random_variable(rng, sp.atom_count());
    const double base = expectation(sp, x);
    CHECK(std::abs(expectation_under(sp, x, unit_density(sp)) - base) <= 1e-12);
    CHECK(ess_inf(sp, x) <= base + 1e-12);
    CHECK(base <= ess_sup(sp, x) + 1e-12);
  }
}

TEST_CASE("essential bounds") {
  ProbabilitySpace third = ProbabilitySpace::uniform(3);
  RandomVariable x{{1.0, 2.0, 3.0}};
  CHECK(ess_sup(third, x) == 3.0);
  CHECK(ess_inf(third, x) == 1.0);

  RandomVariable c{{4.5, 4.5, 4.5}};
  CHECK(ess_sup(third, c) == 4.5);
  CHECK(ess_inf(third, c) == 4.5);

  ProbabilitySpace half({0.5, 0.5});
  CHECK(ess_sup(half, RandomVariable{{0.0, 10.0}}) == 10.0);
}

TEST_CASE("cdf is a right-continuous step function") {
  ProbabilitySpace half({0.5, 0.5});
  RandomVariable x{{0.0, 10.0}};
  CHECK(cdf(half, x, -1.0) == 0.0);
  CHECK(cdf(half, x, 10.0) == 1.0);
  CHECK(cdf(half, x, 25.0) == 1.0);
  CHECK(cdf(half, x, 0.0) == Approx(0.5));

  std::mt19937_64 rng(1002);
  for (int t = 0; t < 100; ++t) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 6);
    RandomVariable y = testgen::random_variable(rng, sp.atom_count());
    double prev = -1.0;
    for (double z = -11.0; z <= 11.0; z += 0.5) {
      const double f = cdf(sp, y, z);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(cdf(sp, y, ess_sup(sp, y)) == Approx(1.0));
  }
}

TEST_CASE("space construction rejects bad inputs") {
  CHECK_THROWS_AS(ProbabilitySpace({0.5, 0.0, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(ProbabilitySpace({0.7, -0.2, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(ProbabilitySpace({0.5, 0.6}), InvalidSpec);
  CHECK_THROWS_AS(ProbabilitySpace(Vec{}), InvalidSpec);
}

TEST_CASE("dimension mismatches are reported") {
  ProbabilitySpace half({0.5, 0.5});
  CHECK_THROWS_AS(expectation(half, RandomVariable{{1.0, 2.0, 3.0}}), DimensionMismatch);
  CHECK_THROWS_AS(
      expectation_under(half, RandomVariable{{1.0, 2.0}}, Density{{1.0}}),
      DimensionMismatch);
  CHECK_THROWS_AS(cdf(half, RandomVariable{{1.0}}, 0.0), DimensionMismatch);
}

TEST_CASE("density validation") {
  ProbabilitySpace half({0.5, 0.5});
  CHECK(is_valid_density(half, Density{{0.0, 2.0}}));
  CHECK(is_valid_density(half, Density{{1.0, 1.0}}));
  CHECK_FALSE(is_valid_density(half, Density{{-0.5, 2.5}}));   // negative weight
  CHECK_FALSE(is_valid_density(half, Density{{0.5, 2.0}}));    // mean 1.25
  CHECK(is_valid_density(half, Density{{-0.5e-9, 2.0 + 1e-9}}));  // within slack
  CHECK_THROWS_AS(validate_density(half, Density{{3.0, 3.0}}), InvalidSpec);
}
