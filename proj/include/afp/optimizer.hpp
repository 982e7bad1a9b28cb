#pragma once
// Design search: flatten a cascade into a real parameter vector, score it
// against a target, and run a deterministic multi-start quasi-Newton
// search with analytic gradients.

#include <cstdint>
#include <optional>
#include <vector>

#include "afp/metrics.hpp"
#include "afp/model.hpp"
#include "afp/targets.hpp"

namespace afp {

/// Family of modulator drives the search optimizes over.
enum class DriveRegime { Arbitrary, Tonal };

/// Shape of the cascade being searched: element count, drive family, and
/// (for tonal drives) harmonics 1..tones on every modulator.
struct CascadeStructure {
  int depth = 3;
  DriveRegime regime = DriveRegime::Arbitrary;
  int tones = 1;
  bool allow_even_depth = false;
};

struct Objective {
  enum class Kind {
    MaxSuccess,  // maximize success probability subject to fidelity >= f_min
    MaxMinMi,    // maximize the worst scored-pair information rate
  };

  Kind kind = Kind::MaxSuccess;
  double f_min = 0.99;              // MaxSuccess only
  std::optional<NoiseModel> noise;  // MaxMinMi only

  static Objective max_success(double f_min = 0.99);
  static Objective max_min_mi(NoiseModel noise);
};

struct SearchBudget {
  int restarts = 16;
  int max_iterations = 400;  // per continuation stage of each restart
  std::uint64_t seed = 1;
  int workers = 0;  // 0: use AFP_WORKERS or the hardware thread count
};

struct DesignProblem {
  TargetTransform target;
  ModeGrid grid;
  CascadeStructure structure;
  Objective objective;
  SearchBudget budget;
};

/// Throws unless target, grid, structure, objective, and budget are
/// mutually consistent.
void validate_problem(const DesignProblem& problem);

/// A design of the problem's shape with every phase and amplitude zero
/// (an identity cascade).
AfpDesign zero_design(const DesignProblem& problem);

/// Length of the search vector for the problem's cascade shape.
int parameter_count(const DesignProblem& problem);

/// Flattens a design into the search vector: elements in cascade order;
/// an arbitrary modulator contributes its time samples, a tonal one an
/// (amplitude, phase) pair per harmonic in harmonic order, a shaper its
/// support phases.
std::vector<double> pack_parameters(const AfpDesign& design);

/// Inverse of pack_parameters for the problem's shape. Phases are
/// wrapped to (-pi, pi]; a negative tone amplitude is folded to |A| with
/// its phase shifted by pi (the same drive). Exact inverse on packed
/// canonical designs.
AfpDesign unpack_parameters(const std::vector<double>& params,
                            const DesignProblem& problem);

/// Penalized success objective, to be maximized:
/// P - lambda * max(0, f_min - F)^2 (minus an out-of-range amplitude
/// penalty in the tonal regime). Equals P when the constraint holds.
double objective_fp(const std::vector<double>& params,
                    const DesignProblem& problem, double lambda);

/// Smoothed worst-pair rate, to be maximized: softmin of the scored-pair
/// rates with sharpness beta (minus the same amplitude penalty).
double objective_mi(const std::vector<double>& params,
                    const DesignProblem& problem, double beta);

/// -(1/beta) * ln(sum_i exp(-beta * v_i)): a smooth lower bound on
/// min(values) that tightens as beta grows.
double softmin(const std::vector<double>& values, double beta);

/// Analytic gradient of the staged objective with respect to the packed
/// parameters (stage is lambda for MaxSuccess, beta for MaxMinMi).
std::vector<double> objective_gradient(const std::vector<double>& params,
                                       const DesignProblem& problem,
                                       double stage);

struct SearchTrace {
  std::uint64_t seed = 0;
  int winner_restart = -1;
  std::vector<double> restart_scores;  // the ranking key of each restart
  std::vector<bool> restart_feasible;
  long long iterations = 0;   // summed over restarts and stages
  long long evaluations = 0;  // objective/gradient evaluations
  double wall_ms = 0.0;       // informational; never serialized
};

struct Solution {
  DesignProblem problem;
  AfpDesign design;
  bool feasible = false;
  MetricReport report;
  SearchTrace trace;
};

/// Multi-start search. Bitwise deterministic for a fixed problem and
/// seed, independent of worker count. For MaxSuccess the winner is the
/// feasible restart with the largest success probability; if no restart
/// is feasible the largest penalized objective wins and the solution is
/// flagged infeasible. For MaxMinMi the winner has the largest hard
/// minimum rate. The returned report is recomputed from the dense
/// cascade operator of the winning design.
Solution optimize(const DesignProblem& problem);

/// optimize() with restart 0 seeded from a prior solution's design
/// instead of random phases. The prior must share the grid, regime, and
/// tone count; a shallower prior is extended with identity elements.
Solution warm_start(const DesignProblem& problem, const Solution& prior);

}  // namespace afp
