#pragma once
// Figures of merit for a realized channel matrix against a target:
// fidelity, success probability, per-channel budgets, selectivity, and
// information rates under a photon-starved direct-detection noise model.

#include <optional>
#include <vector>

#include "afp/targets.hpp"

namespace afp {

/// Detection model: mean photon number mu per symbol, end-to-end
/// transmission eta, and added electronic noise d_elec (dark counts per
/// symbol, in shot-noise units). Only the combination
/// mu_eff = eta*mu/(1 + d_elec) enters the information rates.
struct NoiseModel {
  double mu = 1.0;
  double eta = 1.0;
  double d_elec = 0.0;

  NoiseModel() = default;
  NoiseModel(double mu, double eta, double d_elec);

  double mu_eff() const { return mu_eff_; }

  /// Model with the stated effective photon number (eta = 1, d_elec = 0).
  static NoiseModel from_mu_eff(double mu_eff);

 private:
  double mu_eff_ = 1.0;
};

/// |Tr(W^dag T)|^2 / (Tr(W^dag W) * Tr(T^dag T)): how well the channel
/// matrix matches the target shape, ignoring overall scale. 1 iff W is a
/// (nonzero) scalar multiple of T. Requires W != 0.
double fidelity(const Mat& w, const TargetTransform& target);

/// Tr(W^dag W) / Tr(T^dag T): the fraction of input light that stays in
/// the channel window.
double success_probability(const Mat& w, const TargetTransform& target);

/// P_k = sum_n |W_kn|^2: light arriving at output channel k.
double channel_probability(const Mat& w, int k);

/// C_kl = |W_kl|^2 / P_k: fraction of output k's light that came from
/// input l. Undefined (throws) when P_k = 0.
double selectivity(const Mat& w, int k, int l);

/// Signal-to-noise ratio of the (k, l) link: the unwanted inputs on
/// output k count as noise alongside shot and electronic noise.
double snr(const Mat& w, int k, int l, const NoiseModel& noise);

/// Information rate (bits/symbol) of the (k, l) link when output k
/// listens to input l only: log2(1 + snr). Requires P_k > 0.
double mi_hop(const Mat& w, int k, int l, const NoiseModel& noise);

/// Information rate of the (k, l) link when each output decodes its own
/// copy: log2(1 + mu_eff * |W_kl|^2).
double mi_broadcast(const Mat& w, int k, int l, const NoiseModel& noise);

struct MiEntry {
  int out_channel = 0;
  int in_channel = 0;
  double bits = 0.0;
};

struct MiAggregate {
  std::vector<MiEntry> entries;  // one per scored pair of the target
  double mi_min = 0.0;
  double mi_mean = 0.0;
};

/// Rates for every scored pair of the target, with their min and mean.
MiAggregate mi_aggregate(const Mat& w, const TargetTransform& target,
                         const NoiseModel& noise);

struct MuSweepRow {
  double mu_eff = 0.0;
  MiAggregate mi;
};

/// mi_aggregate at each effective photon number in the grid. Rates are
/// nondecreasing in mu_eff.
std::vector<MuSweepRow> mu_sweep(const Mat& w, const TargetTransform& target,
                                 const std::vector<double>& mu_eff_grid);

/// Everything above in one report; information rates only when a noise
/// model is supplied.
struct MetricReport {
  double fidelity = 0.0;
  double success = 0.0;
  std::vector<double> channel_probs;
  RealMat selectivities;  // (k, l); rows with P_k = 0 are filled with NaN
  std::optional<double> mu_eff;
  std::optional<MiAggregate> mi;
};

MetricReport evaluate_report(const Mat& w, const TargetTransform& target,
                             const NoiseModel* noise = nullptr);

}  // namespace afp
