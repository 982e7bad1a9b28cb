#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "afp/metrics.hpp"
#include "afp/model.hpp"
#include "afp/optimizer.hpp"
#include "afp/serialize.hpp"
#include "afp/targets.hpp"

using namespace afp;

namespace {

// Small enough to solve in milliseconds, big enough to be nontrivial.
DesignProblem small_hop(DriveRegime regime = DriveRegime::Arbitrary) {
  DesignProblem p;
  p.target = permutation_power(2, 1);
  p.grid = ModeGrid(16, 2, 7, 4);
  p.structure = {3, regime, 1, false};
  p.objective = Objective::max_success(0.95);
  p.budget = {4, 150, 7, 1};
  return p;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("parameters round-trip through pack and unpack") {
  DesignProblem arb = small_hop(DriveRegime::Arbitrary);
  CHECK(parameter_count(arb) == 36);
  AfpDesign za = zero_design(arb);
  std::vector<double> pa = pack_parameters(za);
  REQUIRE(static_cast<int>(pa.size()) == 36);
  for (double v : pa) CHECK(v == 0.0);
  CHECK((channel_matrix(za) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-14);

  DesignProblem ton = small_hop(DriveRegime::Tonal);
  ton.structure.tones = 2;
  CHECK(parameter_count(ton) == 12);
  std::vector<double> p(12, 0.0);
  p[0] = 1.3;   // amplitude, harmonic 1
  p[1] = -0.4;  // phase
  p[2] = 0.7;   // amplitude, harmonic 2
  p[3] = 2.0;
  p[4] = 0.5;  // shaper phases
  p[5] = -2.5;
  p[6] = 1.0;
  p[7] = 3.0;
  p[8] = 2.2;
  p[9] = 0.1;
  p[10] = 0.0;
  p[11] = 1.1;
  AfpDesign d = unpack_parameters(p, ton);
  CHECK(d.elements[0].modulation.tones[0].amplitude == 1.3);
  CHECK(d.elements[0].modulation.tones[1].harmonic == 2);
  CHECK(d.elements[1].shaper_phases[1] == -2.5);
  CHECK(pack_parameters(d) == p);

  CHECK_THROWS_AS(unpack_parameters(std::vector<double>(11, 0.0), ton),
                  std::invalid_argument);
}

TEST_CASE("unpack folds negative amplitudes into phase shifts") {
  DesignProblem ton = small_hop(DriveRegime::Tonal);
  std::vector<double> p(parameter_count(ton), 0.0);
  p[0] = -2.0;  // amplitude of the harmonic-1 tone
  p[1] = 0.3;
  AfpDesign d = unpack_parameters(p, ton);
  CHECK(d.elements[0].modulation.tones[0].amplitude == 2.0);
  CHECK(d.elements[0].modulation.tones[0].phase ==
        doctest::Approx(0.3 - kPi).epsilon(1e-15));

  // Folding and wrapping leave the realized drive unchanged.
  std::vector<double> canon = pack_parameters(d);
  for (double lambda : {10.0, 1000.0})
    CHECK(objective_fp(canon, ton, lambda) ==
          doctest::Approx(objective_fp(p, ton, lambda)).epsilon(1e-10));
}

TEST_CASE("identity cascade scores a known penalized objective") {
  DesignProblem p = small_hop();
  p.objective = Objective::max_success(0.99);
  std::vector<double> zeros(parameter_count(p), 0.0);
  // The identity keeps all light in the window (success 1) but has zero
  // overlap with the swap, so the penalty term is lambda * f_min^2.
  CHECK(objective_fp(zeros, p, 10.0) ==
        doctest::Approx(1.0 - 10.0 * 0.99 * 0.99).epsilon(1e-12));
}

TEST_CASE("problem validation rejects inconsistent pieces") {
  DesignProblem ok = small_hop();
  CHECK_NOTHROW(validate_problem(ok));

  DesignProblem bad = ok;
  bad.grid = ModeGrid(16, 3, 6, 4);
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.target.matrix(0, 0) = 2.0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.target.hop_map = {0, 0};
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.structure.depth = 0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.structure.depth = 4;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);
  bad.structure.allow_even_depth = true;
  CHECK_NOTHROW(validate_problem(bad));

  bad = ok;
  bad.structure.regime = DriveRegime::Tonal;
  bad.structure.tones = 0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);
  bad.structure.tones = 5;  // > m_total / 4 on the 16-mode grid
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.objective.f_min = 0.0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);
  bad.objective.f_min = 1.5;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.objective.kind = Objective::Kind::MaxMinMi;
  bad.objective.noise.reset();
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);

  bad = ok;
  bad.budget.restarts = 0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);
  bad = ok;
  bad.budget.max_iterations = 0;
  CHECK_THROWS_AS(validate_problem(bad), std::invalid_argument);
}

TEST_CASE("objective evaluators insist on the matching objective kind") {
  DesignProblem fp = small_hop();
  DesignProblem mi = small_hop();
  mi.objective = Objective::max_min_mi(NoiseModel::from_mu_eff(200.0));
  std::vector<double> zeros(parameter_count(fp), 0.0);
  CHECK_THROWS_AS(objective_fp(zeros, mi, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(objective_mi(zeros, fp, 10.0), std::invalid_argument);
}

TEST_CASE("search finds a feasible swap on the small grid") {
  DesignProblem p = small_hop();
  Solution sol = optimize(p);
  CHECK(sol.feasible);
  CHECK(sol.report.fidelity >= p.objective.f_min - 1e-4);
  CHECK(sol.report.success > 0.2);
  CHECK(sol.report.success <= 1.0 + 1e-12);
  CHECK(sol.design.depth() == 3);

  // Trace bookkeeping.
  REQUIRE(sol.trace.restart_scores.size() == 4);
  REQUIRE(sol.trace.restart_feasible.size() == 4);
  CHECK(sol.trace.seed == 7);
  REQUIRE(sol.trace.winner_restart >= 0);
  REQUIRE(sol.trace.winner_restart < 4);
  CHECK(sol.trace.iterations > 0);
  CHECK(sol.trace.evaluations >= sol.trace.iterations);

  // The winner is the best restart in the strongest feasibility class.
  bool any_feasible = false;
  for (bool f : sol.trace.restart_feasible) any_feasible = any_feasible || f;
  CHECK(any_feasible == sol.feasible);
  double best = -1e300;
  for (std::size_t r = 0; r < sol.trace.restart_scores.size(); ++r)
    if (sol.trace.restart_feasible[r] == any_feasible)
      best = std::max(best, sol.trace.restart_scores[r]);
  CHECK(sol.trace.restart_scores[sol.trace.winner_restart] ==
        doctest::Approx(best).epsilon(1e-15));
  CHECK(sol.trace.restart_feasible[sol.trace.winner_restart] == any_feasible);

  // The stored score is the recomputed success probability.
  CHECK(sol.trace.restart_scores[sol.trace.winner_restart] ==
        doctest::Approx(sol.report.success).epsilon(1e-9));
}

TEST_CASE("search results are bitwise reproducible") {
  // The worker count is echoed inside the serialized budget, so it is
  // masked before comparing runs that differ only in parallelism.
  auto dump_masked = [](const Solution& s) {
    nlohmann::json j = solution_to_json(s);
    j["problem"]["budget"].erase("workers");
    return j.dump();
  };
  DesignProblem p = small_hop();
  std::string once = dump_masked(optimize(p));
  std::string twice = dump_masked(optimize(p));
  CHECK(once == twice);

  // Worker count must not affect the result, only the wall time.
  DesignProblem par = p;
  par.budget.workers = 2;
  CHECK(dump_masked(optimize(par)) == once);

  // A different seed explores different starts.
  DesignProblem other = p;
  other.budget.seed = 8;
  Solution alt = optimize(other);
  CHECK(alt.trace.seed == 8);
  CHECK(dump_masked(alt) != once);
}

TEST_CASE("a single modulator cannot reach a broadcast") {
  // The channel block of one temporal-phase modulator is constant along
  // its diagonals, and the two-channel splitter needs unequal diagonal
  // entries; fidelity is capped at 1/2, so the search must come back
  // infeasible no matter how hard it tries.
  DesignProblem p;
  p.target = dft_target(2);
  p.grid = ModeGrid(16, 2, 7, 4);
  p.structure = {1, DriveRegime::Arbitrary, 1, false};
  p.objective = Objective::max_success(0.99);
  p.budget = {3, 120, 5, 1};
  Solution sol = optimize(p);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.report.fidelity <= 0.51);
  for (bool f : sol.trace.restart_feasible) CHECK_FALSE(f);
}

TEST_CASE("rate search reports the worst-pair rate it maximized") {
  DesignProblem p = small_hop();
  p.objective = Objective::max_min_mi(NoiseModel::from_mu_eff(200.0));
  p.budget = {3, 120, 11, 1};
  Solution sol = optimize(p);
  CHECK(sol.feasible);  // rate problems are unconstrained
  REQUIRE(sol.report.mi.has_value());
  CHECK(sol.report.mi->mi_min > 1.0);
  CHECK(sol.trace.restart_scores[sol.trace.winner_restart] ==
        doctest::Approx(sol.report.mi->mi_min).epsilon(1e-9));
}

TEST_CASE("warm start extends a shallow solution to a deeper cascade") {
  DesignProblem p3 = small_hop();
  Solution base = optimize(p3);
  REQUIRE(base.feasible);

  DesignProblem p5 = p3;
  p5.structure.depth = 5;
  Solution deeper = warm_start(p5, base);
  CHECK(deeper.feasible);
  CHECK(deeper.design.depth() == 5);
  CHECK(deeper.report.success >= base.report.success - 0.01);

  // Shape mismatches are rejected up front.
  DesignProblem tonal = p5;
  tonal.structure.regime = DriveRegime::Tonal;
  CHECK_THROWS_AS(warm_start(tonal, base), std::invalid_argument);

  DesignProblem shallower = p3;
  shallower.structure.depth = 1;
  CHECK_THROWS_AS(warm_start(shallower, deeper), std::invalid_argument);

  DesignProblem other_grid = p5;
  other_grid.grid = ModeGrid(32, 2, 15, 8);
  CHECK_THROWS_AS(warm_start(other_grid, base), std::invalid_argument);
}

}  // TEST_SUITE
