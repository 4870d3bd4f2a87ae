#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "riskenv/json_io.hpp"
#include "riskenv/riskenv.hpp"

namespace riskenv {

struct SelftestResult {
  json report;
  bool all_pass = true;
};

namespace selfdetail {

struct Runner {
  json checks = json::array();
  bool all_pass = true;

  void check(const std::string& name, bool pass, const std::string& detail = "") {
    json entry{{"name", name}, {"pass", pass}};
    if (!detail.empty()) entry["detail"] = detail;
    checks.push_back(std::move(entry));
    all_pass = all_pass && pass;
  }
};

inline bool uncertainty_subset(const UncertaintySet& small, const UncertaintySet& big) {
  UncertaintySet sv = to_vertex_form(small);
  for (const Vec& z : std::get<UncertaintyVertices>(sv.rep()).points)
    if (!contains_point(big, z, 1e-8)) return false;
  return true;
}

inline bool envelope_subset(const Envelope& small, const Envelope& big) {
  Envelope sv = to_vertex_rep(small);
  for (const Density& v : std::get<VertexRep>(sv.rep()).vertices)
    if (!contains(big, v, 1e-8)) return false;
  return true;
}

}  // namespace selfdetail

/// Built-in verification suite exercised by the `selftest` CLI command:
/// the worked fixtures for the aversity counterexamples, the envelope /
/// uncertainty-set correspondence, the coherence axioms for every built-in
/// measure and a few compounds, and a primal/dual agreement smoke pass.
inline SelftestResult run_selftest(std::uint64_t seed = 42) {
  selfdetail::Runner r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uval(-10.0, 10.0);

  // --- Segment envelope conv{1, Q0} on a uniform 3-atom space: the unit
  // density is contained but sits on the boundary, so the max-of-two-means
  // measure is not averse and X = (-1, 0, 1) certifies it.
  {
    ProbabilitySpace sp = ProbabilitySpace::uniform(3);
    Envelope segment(sp, VertexRep{{unit_density(sp), Density{{0.75, 1.5, 0.75}}}});
    RandomVariable x{{-1.0, 0.0, 1.0}};
    const double rx = support(segment, x).value;
    r.check("segment_fixture_value", std::abs(rx) <= 1e-12 &&
                                         std::abs(expectation(sp, x)) <= 1e-12,
            "R(X) = 0 = E(X)");
    AversityReport rep = is_averse_finite(segment, 2000, seed);
    bool ce_ok = rep.counterexample.has_value();
    if (ce_ok) {
      const RandomVariable& ce = *rep.counterexample;
      ce_ok = support(segment, ce).value <= expectation(sp, ce) + 1e-9;
    }
    r.check("segment_fixture_not_averse",
            rep.verdict == AversityVerdict::NotAverse && rep.necessary_holds && ce_ok,
            "necessary condition holds yet the measure is not averse");
  }

  // --- Two-point densities that approach 1 in L2 while escaping the CVaR
  // box: the box stays full-dimensional on any fixed finite space even
  // though no uniform L2 ball around 1 fits inside it.
  for (double delta : {0.1, 0.5, 0.9}) {
    const double d2 = delta * delta;
    ProbabilitySpace sp({d2 / (16.0 + d2), 16.0 / (16.0 + d2)});
    Density qt{{3.0, 1.0 - d2 / 8.0}};
    double mean = dot(sp.probs(), qt.weights);
    Vec dev{qt.weights[0] - 1.0, qt.weights[1] - 1.0};
    const double nrm = l2_norm(sp, dev);
    Envelope box = envelope_of(MeasureSpec{Cvar{0.5}}, sp);
    const bool ok = std::abs(mean - 1.0) <= 1e-12 && std::abs(nrm - delta / 2.0) <= 1e-12 &&
                    !contains(box, qt, 1e-9) && check_relative_interior(box);
    char name[64];
    std::snprintf(name, sizeof(name), "escaping_density_delta_%.1f", delta);
    r.check(name, ok, "E(Q)=1, ||Q-1||_2 = delta/2, Q outside the box");
  }

  // --- Subdividing the future with weights equal to the block
  // probabilities: the block labelling X = sum k 1_{block k} has R(X) = E(X).
  {
    ProbabilitySpace sp = ProbabilitySpace::uniform(4);
    MeasureSpec sub = Subdivide{{{0, 1}, {2, 3}}, {0.5, 0.5}};
    RandomVariable labels{{1.0, 1.0, 2.0, 2.0}};
    const double rx = eval_primal(sub, sp, labels);
    AversityReport rep = is_averse_finite(sub, sp, 2000, seed);
    r.check("subdivide_block_witness",
            std::abs(rx - expectation(sp, labels)) <= 1e-12 &&
                rep.verdict == AversityVerdict::NotAverse &&
                rep.counterexample.has_value(),
            "R(X) = E(X) for the block labelling");
  }

  // --- CVaR and mean-deviation are averse (relative-interior test).
  {
    ProbabilitySpace sp({0.2, 0.3, 0.5});
    AversityReport c = is_averse_finite(MeasureSpec{Cvar{0.5}}, sp, 500, seed);
    AversityReport m = is_averse_finite(MeasureSpec{MeanDeviation{0.8}}, sp, 500, seed);
    r.check("cvar_averse", c.verdict == AversityVerdict::Averse && c.necessary_holds);
    r.check("meandev_averse", m.verdict == AversityVerdict::Averse && m.necessary_holds);
  }

  // --- Envelope / uncertainty-set correspondence on a fixed family.
  {
    ProbabilitySpace sp({0.2, 0.3, 0.5});
    AffineFamily fam(sp, {RandomVariable{{1.0, -1.0, 0.0}}, RandomVariable{{0.0, 2.0, -1.0}}});
    Envelope full = envelope_of(MeasureSpec{WorstCase{}}, sp);

    UncertaintySet u_p = image_set(full, fam);
    Envelope pre = preimage_envelope(u_p, fam);
    bool ok = true;
    for (int t = 0; t < 50 && ok; ++t) {
      Vec a{uval(rng), uval(rng)};
      RandomVariable x = fam.member(uval(rng), a);
      ok = std::abs(support(pre, x).value - support(full, x).value) <= 1e-7;
    }
    r.check("preimage_of_full_image_is_base_set", ok);

    UncertaintySet u = canonical_uncertainty_set(MeasureSpec{Cvar{0.6}}, fam);
    UncertaintySet round = image_set(preimage_envelope(u, fam), fam);
    ok = true;
    for (int t = 0; t < 40 && ok; ++t) {
      Vec dir{uval(rng), uval(rng)};
      ok = std::abs(support_value(round, dir) - support_value(u, dir)) <= 1e-7;
    }
    r.check("image_preimage_roundtrip", ok);

    Envelope box = envelope_of(MeasureSpec{Cvar{0.6}}, sp);
    r.check("envelope_inside_preimage_of_its_image",
            selfdetail::envelope_subset(box, preimage_envelope(u, fam)));

    UncertaintySet u_single = image_set(envelope_of(MeasureSpec{Expectation{}}, sp),
                                        AffineFamily(sp, {fam.basis()[0]}));
    Envelope pre_single =
        preimage_envelope(u_single, AffineFamily(sp, {fam.basis()[0]}));
    r.check("single_point_preimage_exceeds_unit_density", check_necessary(pre_single),
            "densities matching one moment need not be the unit density");

    UncertaintySet u_small = canonical_uncertainty_set(MeasureSpec{Cvar{0.3}}, fam);
    UncertaintySet u_big = canonical_uncertainty_set(MeasureSpec{Cvar{0.7}}, fam);
    Envelope q_small = preimage_envelope(u_small, fam);
    Envelope q_big = preimage_envelope(u_big, fam);
    r.check("nested_envelopes_give_nested_images",
            selfdetail::uncertainty_subset(u_small, u_big) &&
                !selfdetail::uncertainty_subset(u_big, u_small));
    r.check("nested_images_give_nested_preimages",
            selfdetail::envelope_subset(q_small, q_big) &&
                !selfdetail::envelope_subset(q_big, q_small));
  }

  // --- Coherence axioms for every built-in and a few compounds.
  {
    ProbabilitySpace sp({0.1, 0.2, 0.3, 0.4});
    std::vector<std::pair<std::string, std::function<double(const RandomVariable&)>>> zoo;
    auto add_measure = [&](const std::string& name, MeasureSpec spec) {
      zoo.emplace_back(name, [spec, sp](const RandomVariable& x) {
        return eval_primal(spec, sp, x);
      });
    };
    add_measure("expectation", Expectation{});
    add_measure("worstcase", WorstCase{});
    add_measure("subdivide", Subdivide{{{0, 1}, {2, 3}}, {0.4, 0.6}});
    add_measure("oce", Oce{2.0, 0.25});
    add_measure("cvar", Cvar{0.5});
    add_measure("meandev", MeanDeviation{0.7});
    std::vector<std::pair<std::string, MeasureExpr>> compounds;
    compounds.emplace_back("max_expectation_cvar",
                           MeasureExpr::max_of({MeasureExpr::leaf(Expectation{}),
                                                MeasureExpr::leaf(Cvar{0.5})}));
    compounds.emplace_back(
        "combo_expectation_worstcase",
        MeasureExpr::combo({0.5, 0.5}, {MeasureExpr::leaf(Expectation{}),
                                        MeasureExpr::leaf(WorstCase{})}));
    compounds.emplace_back("infconv_cvar_cvar",
                           MeasureExpr::inf_conv({MeasureExpr::leaf(Cvar{0.5}),
                                                  MeasureExpr::leaf(Cvar{0.9})}));
    for (const auto& [name, expr] : compounds) {
      zoo.emplace_back(name, [expr, sp](const RandomVariable& x) {
        return eval(expr, sp, x);
      });
    }
    for (const auto& [name, evaluator] : zoo) {
      AxiomReport rep = axiom_suite(evaluator, sp, 40, seed);
      r.check("axioms_" + name, rep.all_pass());
    }
  }

  // --- Grid densities bound the support value from below.
  {
    ProbabilitySpace sp({0.5, 0.5});
    RandomVariable x{{0.0, 10.0}};
    DensityGrid grid{sp, 32};
    bool ok = true;
    for (MeasureSpec spec : {MeasureSpec{WorstCase{}}, MeasureSpec{Cvar{0.5}},
                             MeasureSpec{MeanDeviation{1.0}}}) {
      Envelope env = envelope_of(spec, sp);
      const double lower = brute_force_support(env, x, grid);
      const double exact = support(env, x).value;
      ok = ok && lower <= exact + 1e-9 && exact <= lower + 20.0 / grid.resolution;
    }
    r.check("grid_support_bounds", ok);
  }

  // --- Primal/dual agreement smoke pass.
  {
    ProbabilitySpace sp({0.25, 0.35, 0.4});
    std::vector<MeasureSpec> specs{Expectation{}, WorstCase{},
                                   Subdivide{{{0}, {1, 2}}, {0.3, 0.7}},
                                   Oce{2.0, 0.25}, Cvar{0.5}, MeanDeviation{0.5}};
    bool ok = true;
    double worst = 0.0;
    for (const MeasureSpec& spec : specs) {
      Envelope env = envelope_of(spec, sp);
      for (int t = 0; t < 10; ++t) {
        RandomVariable x{Vec(3)};
        for (double& v : x.values) v = uval(rng);
        const double gap = std::abs(eval_primal(spec, sp, x) - support(env, x).value);
        worst = std::max(worst, gap);
        ok = ok && gap <= 1e-7;
      }
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "worst gap %.3g", worst);
    r.check("primal_dual_agreement", ok, detail);
  }

  json report{{"checks", r.checks}, {"all_pass", r.all_pass}};
  return SelftestResult{std::move(report), r.all_pass};
}

}  // namespace riskenv
