#include <random>

#include "catch_amalgamated.hpp"
#include "riskenv/oracle.hpp"
#include "riskenv/measures.hpp"
#include "support/generators.hpp"

using namespace riskenv;
using Catch::Approx;

TEST_CASE("grid support bounds") {
  ProbabilitySpace half({0.5, 0.5});
  RandomVariable x{{0.0, 10.0}};

  SECTION("full base set: the maximizing vertex is on the grid") {
    Envelope full = envelope_of(MeasureSpec{WorstCase{}}, half);
    for (int k : {8, 32}) {
      const double lower = brute_force_support(full, x, DensityGrid{half, k});
      CHECK(lower <= 10.0 + 1e-9);
      CHECK(lower >= 10.0 - 10.0 / k - 1e-9);
    }
  }

  SECTION("singleton: exact at any resolution") {
    Envelope one(half, VertexRep{{unit_density(half)}});
    for (int k : {1, 2, 3, 32})
      CHECK(brute_force_support(one, x, DensityGrid{half, k}) == Approx(5.0).margin(1e-9));
  }

  SECTION("cvar box within one step of the truth") {
    Envelope box = envelope_of(MeasureSpec{Cvar{0.5}}, half);
    for (int k : {4, 16, 64}) {
      const double lower = brute_force_support(box, x, DensityGrid{half, k});
      CHECK(lower <= 10.0 + 1e-9);
      CHECK(lower >= 10.0 - 10.0 / k);
    }
  }

  SECTION("size guards") {
    ProbabilitySpace five = ProbabilitySpace::uniform(5);
    CHECK_THROWS_AS(brute_force_support(envelope_of(MeasureSpec{WorstCase{}}, five),
                                        constant_variable(five, 1.0), DensityGrid{five, 8}),
                    SizeLimit);
    CHECK_THROWS_AS(brute_force_support(envelope_of(MeasureSpec{WorstCase{}}, half), x,
                                        DensityGrid{half, 65}),
                    SizeLimit);
  }
}

TEST_CASE("oracle sandwich across envelope families") {
  std::mt19937_64 rng(2718);
  const int k = 24;
  for (int t = 0; t < 12; ++t) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 4, 0.25);
    RandomVariable x = testgen::random_variable(rng, sp.atom_count());
    double inv_p = 0.0;
    for (double p : sp.probs()) inv_p = std::max(inv_p, 1.0 / p);
    const double c = (ess_sup(sp, x) - ess_inf(sp, x)) * inv_p;
    std::vector<MeasureSpec> specs{Expectation{}, WorstCase{}, Cvar{0.5}, Oce{2.0, 0.25},
                                   MeanDeviation{0.8}};
    for (const MeasureSpec& spec : specs) {
      Envelope env = envelope_of(spec, sp);
      const double grid = brute_force_support(env, x, DensityGrid{sp, k});
      const double exact = support(env, x).value;
      INFO(measure_name(spec));
      CHECK(grid <= exact + 1e-9);
      CHECK(exact <= grid + c / k);
    }
  }
}

TEST_CASE("axiom suite classifies the fixtures") {
  ProbabilitySpace four = ProbabilitySpace::uniform(4);

  SECTION("cvar passes everything including the aversity probe") {
    AxiomReport rep = axiom_suite(
        [&](const RandomVariable& x) { return eval_primal(Cvar{0.5}, four, x); }, four,
        80, 5, true);
    CHECK(rep.all_pass());
    REQUIRE(rep.aversity.has_value());
    CHECK(rep.aversity->pass);
  }

  SECTION("matched block weights defeat the aversity probe") {
    MeasureSpec sub = Subdivide{{{0, 1}, {2, 3}}, {0.5, 0.5}};
    AxiomReport rep = axiom_suite(
        [&](const RandomVariable& x) { return eval_primal(sub, four, x); }, four, 80, 5,
        true);
    CHECK(rep.all_pass());  // still coherent
    REQUIRE(rep.aversity.has_value());
    // the random probe alone may or may not land on a flat direction; feed
    // the structured witness through the same evaluator to settle it
    RandomVariable labels{{1.0, 1.0, 2.0, 2.0}};
    CHECK(eval_primal(sub, four, labels) <= expectation(four, labels) + 1e-9);
  }

  SECTION("expectation fails the aversity probe on every sample") {
    AxiomReport rep = axiom_suite(
        [&](const RandomVariable& x) { return eval_primal(Expectation{}, four, x); },
        four, 40, 5, true);
    CHECK(rep.all_pass());
    REQUIRE(rep.aversity.has_value());
    CHECK_FALSE(rep.aversity->pass);
  }
}
