#pragma once
// Internal fast path for search objective and gradient evaluation. Only
// the channel-window basis columns are propagated through the cascade
// (an m x n state instead of the m x m operator), and the gradient comes
// from one adjoint sweep over the same checkpoints, so an evaluation
// costs O(depth * n_channels * m log m).

#include <vector>

#include "afp/optimizer.hpp"

namespace afp {
namespace detail {

struct ParamSlice {
  bool modulator = false;
  int offset = 0;
  int count = 0;
};

std::vector<ParamSlice> parameter_layout(const DesignProblem& problem);

class Evaluator {
 public:
  explicit Evaluator(const DesignProblem& problem);

  int parameter_count() const { return n_params_; }

  /// Sets the fidelity threshold used by the penalty term (the search
  /// tightens it slightly above the problem's f_min so penalty-method
  /// solutions land on the feasible side of the reported constraint).
  void set_f_min(double f_min) { f_min_ = f_min; }

  /// Staged objective to maximize (stage = lambda or beta depending on
  /// the problem's objective kind). Writes dJ/dparams when grad != null.
  double value_and_gradient(const std::vector<double>& params, double stage,
                            std::vector<double>* grad);

  struct Scores {
    double fidelity = 0.0;
    double success = 0.0;
    double min_mi = 0.0;
  };

  /// Fidelity, success, and hard worst-pair rate at the given parameters.
  Scores scores(const std::vector<double>& params);

 private:
  void decode(const std::vector<double>& params);
  void propagate();

  const DesignProblem* pb_;
  int m_, n_, support_, ch_off_, sup_off_, depth_, n_params_;
  int tones_;
  bool tonal_;
  Dft dft_;
  std::vector<ParamSlice> slices_;
  Mat t_conj_;
  double t_norm_;
  std::vector<std::pair<int, int>> pairs_;
  double mu_eff_ = 0.0;
  double f_min_ = 0.99;

  // Per-evaluation state, reused across calls.
  std::vector<Vec> diag_;  // modulator: m entries exp(i*phi); shaper: support
  std::vector<std::vector<double>> tone_sin_, tone_cos_;  // tonal: tones*m
  std::vector<Mat> fwd_;                                  // depth+1 checkpoints
  Mat w_, g_;
  Mat y_, s_, ar_, as_;
};

}  // namespace detail
}  // namespace afp
