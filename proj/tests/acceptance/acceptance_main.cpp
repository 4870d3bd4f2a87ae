// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <sys/wait.h>
#include <variant>
#include <vector>

#include "riskenv/riskenv.hpp"
#include "riskenv/selftest.hpp"
#include "../support/generators.hpp"

using namespace riskenv;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int number, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number, title,
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// 1. Primal/dual agreement for every built-in measure over random spaces.
void criterion_primal_dual() {
  Timer timer;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int evals = 0;
  bool pass = true;
  for (int s = 0; s < 20; ++s) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 8);
    std::vector<MeasureSpec> specs{Expectation{},
                                   WorstCase{},
                                   MeasureSpec{testgen::random_subdivide(rng, sp)},
                                   Oce{2.0, 0.25},
                                   Cvar{0.1},
                                   Cvar{0.5},
                                   Cvar{0.9},
                                   MeanDeviation{0.0},
                                   MeanDeviation{0.5},
                                   MeanDeviation{1.0}};
    for (const MeasureSpec& spec : specs) {
      Envelope env = envelope_of(spec, sp);
      for (int t = 0; t < 25; ++t) {
        RandomVariable x = testgen::random_variable(rng, sp.atom_count());
        const double gap = std::abs(eval_primal(spec, sp, x) - support(env, x).value);
        worst = std::max(worst, gap);
        pass = pass && gap <= 1e-7;
        ++evals;
      }
    }
  }
  const double secs = timer.seconds();
  pass = pass && secs < 10.0;
  report(1, "primal/dual master suite", pass,
         fmt("%d evaluations, worst gap %.3g, %.2fs", evals, worst, secs));
}

// 2. Closed-form quantile minimizer vs grid minimization of the objective.
void criterion_beta_star() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> g1d(1.1, 4.0), g2d(0.0, 0.9);
  double worst = 0.0;
  bool pass = true;
  for (int t = 0; t < 100; ++t) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 6);
    RandomVariable x = testgen::random_variable(rng, sp.atom_count());
    for (double& v : x.values) v = std::round(v * 1e4) / 1e4;  // align atoms to the grid
    const double g1 = g1d(rng), g2 = g2d(rng);
    const double closed = eval_primal(Oce{g1, g2}, sp, x);
    const double grid = testgen::grid_min_quantile_objective(sp, x, g1, g2, 1e-4);
    const double gap = std::abs(closed - grid);
    worst = std::max(worst, gap);
    pass = pass && gap <= 1e-6;
  }
  report(2, "quantile minimizer vs grid search", pass, fmt("100 instances, worst %.3g", worst));
}

// 3. Mean-deviation maximizer feasibility and optimality.
void criterion_mean_dev() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> ld(0.0, 1.0);
  bool pass = true;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 8);
    RandomVariable x = testgen::random_variable(rng, sp.atom_count());
    const double lambda = ld(rng);
    Density q0 = mean_dev_maximizer(sp, x, lambda);
    double mean = 0.0, lo = kInf;
    for (std::size_t i = 0; i < q0.weights.size(); ++i) {
      pass = pass && q0.weights[i] >= -1e-9;
      mean += sp.prob(i) * q0.weights[i];
      lo = std::min(lo, q0.weights[i]);
    }
    Vec dev(q0.weights.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = q0.weights[i] - lo;
    const double norm_gap = std::abs(l2_norm(sp, dev) - lambda);
    const double mean_gap = std::abs(mean - 1.0);
    const double opt_gap = std::abs(expectation_under(sp, x, q0) -
                                    eval_primal(MeanDeviation{lambda}, sp, x));
    worst = std::max({worst, norm_gap, mean_gap, opt_gap});
    pass = pass && norm_gap <= 1e-9 && mean_gap <= 1e-9 && opt_gap <= 1e-9;
  }
  report(3, "mean-deviation maximizer", pass, fmt("100 instances, worst residual %.3g", worst));
}

// 4. Set-operation theorems: max, convex combination, intersection sandwich.
void criterion_set_operations() {
  std::mt19937_64 rng(104);
  bool pass = true;
  double worst = 0.0;
  std::vector<MeasureSpec> leaves{Expectation{}, Cvar{0.4}, Oce{2.0, 0.25}, WorstCase{}};
  for (int s = 0; s < 8; ++s) {
    ProbabilitySpace sp = testgen::random_space(rng, 2, 4);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      for (std::size_t j = i + 1; j < leaves.size(); ++j) {
        MeasureExpr a = MeasureExpr::leaf(leaves[i]);
        MeasureExpr b = MeasureExpr::leaf(leaves[j]);
        MeasureExpr top = MeasureExpr::max_of({a, b});
        MeasureExpr combo = MeasureExpr::combo({0.35, 0.65}, {a, b});
        Envelope top_env = envelope_of(top, sp);
        Envelope combo_env = envelope_of(combo, sp);
        for (int t = 0; t < 10; ++t) {
          RandomVariable x = testgen::random_variable(rng, sp.atom_count());
          const double gap_top = std::abs(eval(top, sp, x) - support(top_env, x).value);
          const double gap_combo =
              std::abs(eval(combo, sp, x) - support(combo_env, x).value);
          worst = std::max({worst, gap_top, gap_combo});
          pass = pass && gap_top <= 1e-7 && gap_combo <= 1e-7;
        }
      }
    }

    // intersection: two-sided sandwich on small spaces
    std::vector<std::pair<MeasureSpec, MeasureSpec>> pairs{
        {Cvar{0.5}, Cvar{0.9}}, {Cvar{0.4}, Oce{2.0, 0.25}}};
    for (const auto& [ma, mb] : pairs) {
      MeasureExpr inter = MeasureExpr::inf_conv({MeasureExpr::leaf(ma), MeasureExpr::leaf(mb)});
      for (int t = 0; t < 3; ++t) {
        RandomVariable x = testgen::random_variable(rng, sp.atom_count(), -5.0, 5.0);
        const double via_env = eval(inter, sp, x);
        const double min_children = std::min(eval_primal(ma, sp, x), eval_primal(mb, sp, x));
        const int k = sp.atom_count() <= 2 ? 121 : 33;
        const double oracle = inf_convolution_oracle(ma, mb, sp, x, k);
        const double step =
            3.0 * (ess_sup(sp, x) - ess_inf(sp, x)) / static_cast<double>(k - 1);
        pass = pass && via_env <= min_children + 1e-9;
        pass = pass && oracle >= via_env - 1e-9;
        pass = pass && via_env >= oracle - step - 1e-6;
      }
    }
  }
  report(4, "envelope set-operation theorems", pass, fmt("worst materialized gap %.3g", worst));
}

// 5. Aversity fixtures.
void criterion_aversity_fixtures() {
  bool pass = true;
  std::string detail;

  {  // (a) segment fixture
    ProbabilitySpace sp = ProbabilitySpace::uniform(3);
    Envelope seg(sp, VertexRep{{unit_density(sp), Density{{0.75, 1.5, 0.75}}}});
    RandomVariable x{{-1.0, 0.0, 1.0}};
    AversityReport rep = is_averse_finite(seg, 2000, 5);
    pass = pass && std::abs(support(seg, x).value) <= 1e-12 &&
           std::abs(expectation(sp, x)) <= 1e-12 &&
           rep.verdict == AversityVerdict::NotAverse && rep.necessary_holds;
  }
  {  // (b) block labelling witness when weights match block probabilities
    ProbabilitySpace sp({0.1, 0.3, 0.2, 0.4});
    MeasureSpec sub = Subdivide{{{0, 1}, {2, 3}}, {0.4, 0.6}};
    RandomVariable labels{{1.0, 1.0, 2.0, 2.0}};
    pass = pass && std::abs(eval_primal(sub, sp, labels) - expectation(sp, labels)) <= 1e-12;
    pass = pass && is_averse_finite(sub, sp, 500, 5).verdict == AversityVerdict::NotAverse;
  }
  {  // (c) escaping densities
    for (double delta : {0.1, 0.5, 0.9}) {
      const double d2 = delta * delta;
      ProbabilitySpace sp({d2 / (16.0 + d2), 16.0 / (16.0 + d2)});
      Density qt{{3.0, 1.0 - d2 / 8.0}};
      Vec dev{qt.weights[0] - 1.0, qt.weights[1] - 1.0};
      Envelope box = envelope_of(MeasureSpec{Cvar{0.5}}, sp);
      pass = pass && std::abs(dot(sp.probs(), qt.weights) - 1.0) <= 1e-12;
      pass = pass && std::abs(l2_norm(sp, dev) - delta / 2.0) <= 1e-12;
      pass = pass && !contains(box, qt, 1e-9);
    }
  }
  {  // (d) relative-interior verdicts
    ProbabilitySpace sp({0.2, 0.3, 0.5});
    for (double alpha : {0.25, 0.5, 0.9})
      pass = pass &&
             is_averse_finite(MeasureSpec{Cvar{alpha}}, sp).verdict == AversityVerdict::Averse;
    pass = pass && is_averse_finite(MeasureSpec{MeanDeviation{0.5}}, sp).verdict ==
                       AversityVerdict::Averse;
  }
  report(5, "aversity fixtures", pass, "segment, block labelling, escaping densities, verdicts");
}

// 6. Envelope / uncertainty-set correspondence.
void criterion_uncertainty() {
  Timer timer;
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  bool pass = true;
  double worst = 0.0;

  {  // image/preimage correspondence properties on a fixed family
    ProbabilitySpace sp({0.2, 0.3, 0.5});
    AffineFamily fam(sp,
                     {RandomVariable{{1.0, -1.0, 0.0}}, RandomVariable{{0.0, 2.0, -1.0}}});
    Envelope full = envelope_of(MeasureSpec{WorstCase{}}, sp);
    Envelope pre_full = preimage_envelope(image_set(full, fam), fam);
    for (int t = 0; t < 50; ++t) {
      RandomVariable x = fam.member(coef(rng), {coef(rng), coef(rng)});
      const double gap = std::abs(support(pre_full, x).value - support(full, x).value);
      worst = std::max(worst, gap);
      pass = pass && gap <= 1e-7;
    }
    UncertaintySet u = canonical_uncertainty_set(MeasureSpec{Cvar{0.6}}, fam);
    UncertaintySet round = image_set(preimage_envelope(u, fam), fam);
    for (int t = 0; t < 50; ++t) {
      Vec dir{coef(rng), coef(rng)};
      const double gap = std::abs(support_value(round, dir) - support_value(u, dir));
      worst = std::max(worst, gap);
      pass = pass && gap <= 1e-7;
    }
    Envelope box = envelope_of(MeasureSpec{Cvar{0.6}}, sp);
    pass = pass && selfdetail::envelope_subset(box, preimage_envelope(u, fam));
    UncertaintySet u_small = canonical_uncertainty_set(MeasureSpec{Cvar{0.3}}, fam);
    UncertaintySet u_big = canonical_uncertainty_set(MeasureSpec{Cvar{0.7}}, fam);
    pass = pass && selfdetail::uncertainty_subset(u_small, u_big);
    pass = pass && !selfdetail::uncertainty_subset(u_big, u_small);
    pass = pass && selfdetail::envelope_subset(preimage_envelope(u_small, fam),
                                               preimage_envelope(u_big, fam));
    pass = pass && !selfdetail::envelope_subset(preimage_envelope(u_big, fam),
                                                preimage_envelope(u_small, fam));
  }

  // robust evaluation agreement across measures and random families
  for (int s = 0; s < 2; ++s) {
    ProbabilitySpace sp = testgen::random_space(rng, 4, 6);
    std::vector<RandomVariable> basis;
    for (int i = 0; i < 3; ++i) basis.push_back(testgen::random_variable(rng, sp.atom_count()));
    AffineFamily fam(sp, basis);
    std::vector<MeasureSpec> specs{Expectation{}, WorstCase{},
                                   MeasureSpec{testgen::random_subdivide(rng, sp)},
                                   Oce{2.0, 0.25}, Cvar{0.5}};
    for (const MeasureSpec& spec : specs) {
      UncertaintySet u = canonical_uncertainty_set(spec, fam);
      for (int t = 0; t < 200; ++t) {
        const double a0 = coef(rng);
        Vec a{coef(rng), coef(rng), coef(rng)};
        const double gap =
            std::abs(eval_on_affine(a0, a, u) - eval_primal(spec, sp, fam.member(a0, a)));
        worst = std::max(worst, gap);
        pass = pass && gap <= 1e-7;
      }
    }
  }
  const double secs = timer.seconds();
  pass = pass && secs < 30.0;
  report(6, "uncertainty-set correspondence", pass, fmt("worst gap %.3g, %.2fs", worst, secs));
}

// 7. LP engine against brute-force vertex enumeration.
void criterion_lp_engine() {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> coefd(-2.0, 2.0);
  std::uniform_real_distribution<double> rhsd(-0.5, 3.0);
  std::uniform_int_distribution<std::size_t> nd(2, 6);
  std::uniform_int_distribution<std::size_t> md(2, 6);
  bool pass = true;
  int cycling_failures = 0, optimal = 0, infeasible = 0;
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = nd(rng);
    const std::size_t m = md(rng);
    LinearProgram lp;
    lp.objective.resize(n);
    for (double& c : lp.objective) c = coefd(rng);
    for (std::size_t r = 0; r < m; ++r) {
      Vec row(n);
      for (double& v : row) v = coefd(rng);
      lp.le_rows.push_back(std::move(row));
      lp.le_rhs.push_back(rhsd(rng));
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec row(n, 0.0);
      row[i] = 1.0;
      lp.le_rows.push_back(std::move(row));
      lp.le_rhs.push_back(4.0);
    }

    LpResult res;
    try {
      res = maximize(lp);
    } catch (const NumericFailure&) {
      ++cycling_failures;
      pass = false;
      continue;
    }

    LinearSystem sys{lp.eq_rows, lp.eq_rhs, lp.le_rows, lp.le_rhs};
    for (std::size_t i = 0; i < n; ++i) {
      Vec row(n, 0.0);
      row[i] = -1.0;
      sys.le_rows.push_back(std::move(row));
      sys.le_rhs.push_back(0.0);
    }
    bool feasible = false;
    double brute = 0.0;
    for (const Vec& v : enumerate_vertex_points(sys, n)) {
      const double val = dot(lp.objective, v);
      if (!feasible || val > brute) brute = val;
      feasible = true;
    }
    if (res.status == LpStatus::Optimal) {
      ++optimal;
      if (!feasible) {
        pass = false;
        continue;
      }
      const double gap = std::abs(res.value - brute);
      worst = std::max(worst, gap);
      pass = pass && gap <= 1e-7;
    } else {
      ++infeasible;
      pass = pass && res.status == LpStatus::Infeasible && !feasible;
    }
  }
  report(7, "solver vs vertex enumeration", pass,
         fmt("500 instances (%d optimal, %d infeasible), worst gap %.3g, %d cycling failures",
             optimal, infeasible, worst, cycling_failures));
}

// 8. Axiom suites for all built-ins and compounds; CLI selftest exits clean.
void criterion_axioms_selftest() {
  bool pass = true;
  ProbabilitySpace sp({0.1, 0.2, 0.3, 0.4});
  std::vector<std::pair<std::string, std::function<double(const RandomVariable&)>>> zoo;
  std::vector<MeasureSpec> specs{Expectation{}, WorstCase{},
                                 Subdivide{{{0, 1}, {2, 3}}, {0.4, 0.6}},
                                 Oce{2.0, 0.25}, Cvar{0.5}, MeanDeviation{0.7}};
  for (const MeasureSpec& spec : specs)
    zoo.emplace_back(measure_name(spec), [spec, sp](const RandomVariable& x) {
      return eval_primal(spec, sp, x);
    });
  std::vector<MeasureExpr> compounds{
      MeasureExpr::max_of({MeasureExpr::leaf(Expectation{}), MeasureExpr::leaf(Cvar{0.5})}),
      MeasureExpr::combo({0.5, 0.5},
                         {MeasureExpr::leaf(Expectation{}), MeasureExpr::leaf(WorstCase{})}),
      MeasureExpr::inf_conv({MeasureExpr::leaf(Cvar{0.5}), MeasureExpr::leaf(Cvar{0.9})})};
  for (const MeasureExpr& expr : compounds)
    zoo.emplace_back("compound", [expr, sp](const RandomVariable& x) {
      return eval(expr, sp, x);
    });
  for (const auto& [name, evaluator] : zoo) {
    AxiomReport rep = axiom_suite(evaluator, sp, 50, 108);
    pass = pass && rep.all_pass();
  }

  Timer timer;
  const std::string cmd = std::string(RISKENV_CLI_PATH) + " --command selftest >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  const double secs = timer.seconds();
  const bool selftest_ok = WIFEXITED(rc) && WEXITSTATUS(rc) == 0 && secs < 60.0;
  pass = pass && selftest_ok;
  report(8, "axiom suites and CLI selftest", pass,
         fmt("selftest exit %d in %.2fs", WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, secs));
}

}  // namespace

int main() {
  criterion_primal_dual();
  criterion_beta_star();
  criterion_mean_dev();
  criterion_set_operations();
  criterion_aversity_fixtures();
  criterion_uncertainty();
  criterion_lp_engine();
  criterion_axioms_selftest();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
