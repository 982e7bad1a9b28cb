#include "afp/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "afp/lbfgs.hpp"
#include "evaluator.hpp"

namespace afp {

namespace {

// Continuation schedules: the fidelity penalty weight ramps up so early
// stages can trade fidelity for success probability, and the softmin
// sharpness ramps up so early stages see a smooth worst-pair rate.
constexpr double kLambdaStages[] = {10.0, 100.0, 1000.0, 10000.0};
constexpr double kBetaStages[] = {1.0, 10.0, 100.0};

// The final penalty stage leaves solutions a hair below the constraint
// boundary, so the search aims slightly above f_min and feasibility is
// judged against f_min itself.
constexpr double kFidelityMargin = 2e-3;
constexpr double kFeasibilitySlack = 1e-4;

int resolve_workers(const SearchBudget& budget) {
  if (budget.workers > 0) return budget.workers;
  if (const char* env = std::getenv("AFP_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct RestartResult {
  std::vector<double> params;
  double score = -std::numeric_limits<double>::infinity();
  bool feasible = false;
  long long iterations = 0;
  long long evaluations = 0;
};

std::vector<double> random_start(const DesignProblem& problem,
                                 std::uint64_t seed) {
  const auto slices = detail::parameter_layout(problem);
  int n_params = 0;
  for (const auto& sl : slices) n_params += sl.count;
  std::vector<double> params(n_params);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_real_distribution<double> amp(0.0, 3.0 * kPi);
  const bool tonal = problem.structure.regime == DriveRegime::Tonal;
  for (const auto& sl : slices) {
    if (sl.modulator && tonal) {
      for (int t = 0; t < problem.structure.tones; ++t) {
        params[sl.offset + 2 * t] = amp(rng);
        params[sl.offset + 2 * t + 1] = phase(rng);
      }
    } else {
      for (int i = 0; i < sl.count; ++i) params[sl.offset + i] = phase(rng);
    }
  }
  return params;
}

RestartResult run_restart(const DesignProblem& problem,
                          std::vector<double> params) {
  detail::Evaluator eval(problem);
  const bool fp = problem.objective.kind == Objective::Kind::MaxSuccess;
  if (fp)
    eval.set_f_min(std::min(1.0, problem.objective.f_min + kFidelityMargin));

  RestartResult res;
  LbfgsOptions opts;
  opts.max_iterations = problem.budget.max_iterations;
  auto fg = [&eval](double stage) {
    return [&eval, stage](const std::vector<double>& x,
                          std::vector<double>& grad) {
      double value = eval.value_and_gradient(x, stage, &grad);
      for (double& g : grad) g = -g;
      return -value;
    };
  };
  double last_stage = 0.0;
  auto run_stages = [&](auto const& stages) {
    for (double stage : stages) {
      LbfgsResult r = lbfgs_minimize(fg(stage), std::move(params), opts);
      params = std::move(r.x);
      res.iterations += r.iterations;
      res.evaluations += r.evaluations;
      last_stage = stage;
    }
  };
  if (fp)
    run_stages(kLambdaStages);
  else
    run_stages(kBetaStages);

  detail::Evaluator::Scores sc = eval.scores(params);
  if (fp) {
    res.feasible =
        sc.fidelity >= problem.objective.f_min - kFeasibilitySlack;
    res.score = res.feasible
                    ? sc.success
                    : eval.value_and_gradient(params, last_stage, nullptr);
  } else {
    res.feasible = true;
    res.score = sc.min_mi;
  }
  res.params = std::move(params);
  return res;
}

Solution run_search(const DesignProblem& problem,
                    const AfpDesign* warm_design) {
  validate_problem(problem);
  auto t0 = std::chrono::steady_clock::now();

  const int restarts = problem.budget.restarts;
  std::vector<RestartResult> results(restarts);
  std::atomic<int> next{0};
  int workers = std::min(resolve_workers(problem.budget), restarts);

  auto worker = [&]() {
    for (;;) {
      int r = next.fetch_add(1);
      if (r >= restarts) return;
      std::vector<double> start =
          (r == 0 && warm_design != nullptr)
              ? pack_parameters(*warm_design)
              : random_start(problem,
                             derive_seed(problem.budget.seed,
                                         static_cast<std::uint64_t>(r)));
      results[r] = run_restart(problem, std::move(start));
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Winner: best feasible score, falling back to best infeasible score.
  int winner = -1;
  bool any_feasible = false;
  for (int r = 0; r < restarts; ++r) {
    const RestartResult& rr = results[r];
    if (winner < 0 || (rr.feasible && !any_feasible) ||
        (rr.feasible == any_feasible && rr.score > results[winner].score)) {
      winner = r;
      any_feasible = any_feasible || rr.feasible;
    }
  }

  Solution sol;
  sol.problem = problem;
  sol.design = unpack_parameters(results[winner].params, problem);
  sol.feasible = results[winner].feasible;
  Mat w = channel_matrix(sol.design);
  const NoiseModel* noise =
      problem.objective.noise ? &*problem.objective.noise : nullptr;
  sol.report = evaluate_report(w, problem.target, noise);

  sol.trace.seed = problem.budget.seed;
  sol.trace.winner_restart = winner;
  for (const RestartResult& rr : results) {
    sol.trace.restart_scores.push_back(rr.score);
    sol.trace.restart_feasible.push_back(rr.feasible);
    sol.trace.iterations += rr.iterations;
    sol.trace.evaluations += rr.evaluations;
  }
  sol.trace.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return sol;
}

}  // namespace

Objective Objective::max_success(double f_min) {
  Objective o;
  o.kind = Kind::MaxSuccess;
  o.f_min = f_min;
  return o;
}

Objective Objective::max_min_mi(NoiseModel noise) {
  Objective o;
  o.kind = Kind::MaxMinMi;
  o.noise = noise;
  return o;
}

void validate_problem(const DesignProblem& problem) {
  const TargetTransform& t = problem.target;
  if (t.n_channels != problem.grid.n_channels)
    throw std::invalid_argument(
        "DesignProblem: target and grid disagree on n_channels");
  if (t.matrix.rows() != t.n_channels || t.matrix.cols() != t.n_channels)
    throw std::invalid_argument("DesignProblem: target matrix has wrong shape");
  if (!(unitarity_defect(t.matrix) <= 1e-12))
    throw std::invalid_argument("DesignProblem: target matrix is not unitary");
  if (t.scenario == Scenario::Hop) {
    if (static_cast<int>(t.hop_map.size()) != t.n_channels)
      throw std::invalid_argument("DesignProblem: hop target needs a hop_map");
    std::vector<bool> seen(t.n_channels, false);
    for (int l : t.hop_map) {
      if (l < 0 || l >= t.n_channels || seen[l])
        throw std::invalid_argument(
            "DesignProblem: hop_map must be a bijection on channels");
      seen[l] = true;
    }
  }
  const CascadeStructure& st = problem.structure;
  if (st.depth < 1)
    throw std::invalid_argument("DesignProblem: depth must be >= 1");
  if (st.depth % 2 == 0 && !st.allow_even_depth)
    throw std::invalid_argument(
        "DesignProblem: canonical cascades have odd depth; set "
        "allow_even_depth to search trailing-shaper cascades");
  if (st.regime == DriveRegime::Tonal &&
      (st.tones < 1 || st.tones > problem.grid.m_total / 4))
    throw std::invalid_argument(
        "DesignProblem: tones must be in [1, m_total/4]");
  const Objective& obj = problem.objective;
  if (obj.kind == Objective::Kind::MaxSuccess) {
    if (!(obj.f_min > 0.0) || obj.f_min > 1.0)
      throw std::invalid_argument("DesignProblem: f_min must be in (0, 1]");
  } else if (!obj.noise) {
    throw std::invalid_argument(
        "DesignProblem: rate objective needs a noise model");
  }
  const SearchBudget& b = problem.budget;
  if (b.restarts < 1 || b.max_iterations < 1 || b.workers < 0)
    throw std::invalid_argument("DesignProblem: budget must be positive");
}

AfpDesign zero_design(const DesignProblem& problem) {
  validate_problem(problem);
  std::vector<Element> elements;
  for (int e = 0; e < problem.structure.depth; ++e) {
    if (e % 2 == 1) {
      elements.push_back(Element::shaper(
          std::vector<double>(problem.grid.shaper_support, 0.0)));
    } else if (problem.structure.regime == DriveRegime::Arbitrary) {
      elements.push_back(Element::modulator(Modulation::arbitrary(
          std::vector<double>(problem.grid.m_total, 0.0))));
    } else {
      std::vector<Tone> tones;
      for (int t = 0; t < problem.structure.tones; ++t)
        tones.push_back({t + 1, 0.0, 0.0});
      elements.push_back(Element::modulator(Modulation::tonal(tones)));
    }
  }
  return AfpDesign(std::move(elements), problem.grid,
                   problem.structure.allow_even_depth);
}

int parameter_count(const DesignProblem& problem) {
  int n = 0;
  for (const auto& sl : detail::parameter_layout(problem)) n += sl.count;
  return n;
}

std::vector<double> pack_parameters(const AfpDesign& design) {
  std::vector<double> params;
  for (const Element& e : design.elements) {
    if (e.kind == Element::Kind::Shaper) {
      params.insert(params.end(), e.shaper_phases.begin(),
                    e.shaper_phases.end());
    } else if (e.modulation.kind == Modulation::Kind::Arbitrary) {
      params.insert(params.end(), e.modulation.phases.begin(),
                    e.modulation.phases.end());
    } else {
      for (const Tone& t : e.modulation.tones) {
        params.push_back(t.amplitude);
        params.push_back(t.phase);
      }
    }
  }
  return params;
}

AfpDesign unpack_parameters(const std::vector<double>& params,
                            const DesignProblem& problem) {
  const auto slices = detail::parameter_layout(problem);
  int n_params = 0;
  for (const auto& sl : slices) n_params += sl.count;
  if (static_cast<int>(params.size()) != n_params)
    throw std::invalid_argument(
        "unpack_parameters: expected " + std::to_string(n_params) +
        " parameters, got " + std::to_string(params.size()));
  std::vector<Element> elements;
  for (const auto& sl : slices) {
    const double* p = params.data() + sl.offset;
    if (!sl.modulator) {
      elements.push_back(
          Element::shaper(std::vector<double>(p, p + sl.count)));
    } else if (problem.structure.regime == DriveRegime::Arbitrary) {
      elements.push_back(Element::modulator(
          Modulation::arbitrary(std::vector<double>(p, p + sl.count))));
    } else {
      std::vector<Tone> tones;
      for (int t = 0; t < problem.structure.tones; ++t) {
        double a = p[2 * t];
        double theta = wrap_phase(p[2 * t + 1]);
        if (a < 0.0) {
          a = -a;
          theta = (theta > 0.0) ? theta - kPi : theta + kPi;
        }
        tones.push_back({t + 1, a, theta});
      }
      elements.push_back(Element::modulator(Modulation::tonal(tones)));
    }
  }
  return AfpDesign(std::move(elements), problem.grid,
                   problem.structure.allow_even_depth);
}

double objective_fp(const std::vector<double>& params,
                    const DesignProblem& problem, double lambda) {
  validate_problem(problem);
  if (problem.objective.kind != Objective::Kind::MaxSuccess)
    throw std::invalid_argument("objective_fp: problem has a rate objective");
  detail::Evaluator eval(problem);
  return eval.value_and_gradient(params, lambda, nullptr);
}

double objective_mi(const std::vector<double>& params,
                    const DesignProblem& problem, double beta) {
  validate_problem(problem);
  if (problem.objective.kind != Objective::Kind::MaxMinMi)
    throw std::invalid_argument("objective_mi: problem has a success objective");
  detail::Evaluator eval(problem);
  return eval.value_and_gradient(params, beta, nullptr);
}

double softmin(const std::vector<double>& values, double beta) {
  if (values.empty())
    throw std::invalid_argument("softmin: needs at least one value");
  if (!(beta > 0.0)) throw std::invalid_argument("softmin: beta must be > 0");
  double mn = *std::min_element(values.begin(), values.end());
  double z = 0.0;
  for (double v : values) z += std::exp(-beta * (v - mn));
  return mn - std::log(z) / beta;
}

std::vector<double> objective_gradient(const std::vector<double>& params,
                                       const DesignProblem& problem,
                                       double stage) {
  validate_problem(problem);
  detail::Evaluator eval(problem);
  std::vector<double> grad;
  eval.value_and_gradient(params, stage, &grad);
  return grad;
}

Solution optimize(const DesignProblem& problem) {
  return run_search(problem, nullptr);
}

Solution warm_start(const DesignProblem& problem, const Solution& prior) {
  validate_problem(problem);
  if (!(prior.design.grid == problem.grid))
    throw std::invalid_argument("warm_start: prior solved a different grid");
  if (prior.design.depth() > problem.structure.depth)
    throw std::invalid_argument("warm_start: prior cascade is deeper than the "
                                "requested structure");

  AfpDesign extended = prior.design;
  extended.allow_even_depth = problem.structure.allow_even_depth;
  const AfpDesign zero = zero_design(problem);
  for (int e = prior.design.depth(); e < problem.structure.depth; ++e)
    extended.elements.push_back(zero.elements[e]);

  // The packed layout must line up with the problem's shape.
  const auto slices = detail::parameter_layout(problem);
  for (std::size_t e = 0; e < slices.size(); ++e) {
    const Element& el = extended.elements[e];
    bool is_mod = el.kind == Element::Kind::Modulator;
    if (is_mod != slices[e].modulator)
      throw std::invalid_argument("warm_start: prior cascade shape is "
                                  "incompatible with the problem");
    if (is_mod) {
      bool tonal = el.modulation.kind == Modulation::Kind::Tonal;
      if (tonal != (problem.structure.regime == DriveRegime::Tonal))
        throw std::invalid_argument("warm_start: prior drive regime differs");
      if (tonal) {
        if (static_cast<int>(el.modulation.tones.size()) !=
            problem.structure.tones)
          throw std::invalid_argument("warm_start: prior tone count differs");
        for (int t = 0; t < problem.structure.tones; ++t)
          if (el.modulation.tones[t].harmonic != t + 1)
            throw std::invalid_argument(
                "warm_start: prior harmonics are not 1..tones");
      }
    }
  }
  return run_search(problem, &extended);
}

}  // namespace afp
