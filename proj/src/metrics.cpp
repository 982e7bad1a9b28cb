#include "afp/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace afp {

namespace {

void check_shapes(const Mat& w, const TargetTransform& target,
                  const char* who) {
  if (w.rows() != target.n_channels || w.cols() != target.n_channels)
    throw std::invalid_argument(std::string(who) +
                                ": channel matrix must be n_channels square");
}

void check_index(const Mat& w, int k, int l, const char* who) {
  if (k < 0 || k >= w.rows() || l < 0 || l >= w.cols())
    throw std::invalid_argument(std::string(who) + ": channel index out of range");
}

double target_norm(const TargetTransform& target) {
  return target.matrix.squaredNorm();  // Tr(T^dag T), = n for unitary targets
}

}  // namespace

NoiseModel::NoiseModel(double mu_, double eta_, double d_elec_)
    : mu(mu_), eta(eta_), d_elec(d_elec_) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("NoiseModel: mu must be positive");
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("NoiseModel: eta must be in (0, 1]");
  if (!(d_elec >= 0.0) || !std::isfinite(d_elec))
    throw std::invalid_argument("NoiseModel: d_elec must be >= 0");
  mu_eff_ = eta * mu / (1.0 + d_elec);
}

NoiseModel NoiseModel::from_mu_eff(double mu_eff) {
  return NoiseModel(mu_eff, 1.0, 0.0);
}

double fidelity(const Mat& w, const TargetTransform& target) {
  check_shapes(w, target, "fidelity");
  double s = w.squaredNorm();
  if (!(s > 0.0))
    throw std::domain_error("fidelity: channel matrix is zero");
  Cplx overlap = w.conjugate().cwiseProduct(target.matrix).sum();
  return std::norm(overlap) / (s * target_norm(target));
}

double success_probability(const Mat& w, const TargetTransform& target) {
  check_shapes(w, target, "success_probability");
  return w.squaredNorm() / target_norm(target);
}

double channel_probability(const Mat& w, int k) {
  check_index(w, k, 0, "channel_probability");
  return w.row(k).squaredNorm();
}

double selectivity(const Mat& w, int k, int l) {
  check_index(w, k, l, "selectivity");
  double pk = w.row(k).squaredNorm();
  if (!(pk > 0.0))
    throw std::domain_error(
        "selectivity: no light reaches output channel " + std::to_string(k));
  return std::norm(w(k, l)) / pk;
}

double snr(const Mat& w, int k, int l, const NoiseModel& noise) {
  check_index(w, k, l, "snr");
  double signal = std::norm(w(k, l));
  double crosstalk = w.row(k).squaredNorm() - signal;
  if (crosstalk < 0.0) crosstalk = 0.0;
  return noise.eta * noise.mu * signal /
         (1.0 + noise.d_elec + noise.eta * noise.mu * crosstalk);
}

double mi_hop(const Mat& w, int k, int l, const NoiseModel& noise) {
  check_index(w, k, l, "mi_hop");
  double pk = w.row(k).squaredNorm();
  if (!(pk > 0.0))
    throw std::domain_error(
        "mi_hop: no light reaches output channel " + std::to_string(k));
  return std::log2(1.0 + snr(w, k, l, noise));
}

double mi_broadcast(const Mat& w, int k, int l, const NoiseModel& noise) {
  check_index(w, k, l, "mi_broadcast");
  return std::log2(1.0 + noise.mu_eff() * std::norm(w(k, l)));
}

MiAggregate mi_aggregate(const Mat& w, const TargetTransform& target,
                         const NoiseModel& noise) {
  check_shapes(w, target, "mi_aggregate");
  MiAggregate agg;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  for (auto [k, l] : target.scored_pairs()) {
    double bits = (target.scenario == Scenario::Hop)
                      ? mi_hop(w, k, l, noise)
                      : mi_broadcast(w, k, l, noise);
    agg.entries.push_back({k, l, bits});
    sum += bits;
    if (bits < min) min = bits;
  }
  agg.mi_min = min;
  agg.mi_mean = sum / static_cast<double>(agg.entries.size());
  return agg;
}

std::vector<MuSweepRow> mu_sweep(const Mat& w, const TargetTransform& target,
                                 const std::vector<double>& mu_eff_grid) {
  std::vector<MuSweepRow> rows;
  rows.reserve(mu_eff_grid.size());
  for (double mu_eff : mu_eff_grid) {
    if (!(mu_eff > 0.0))
      throw std::invalid_argument("mu_sweep: mu_eff grid values must be positive");
    rows.push_back({mu_eff, mi_aggregate(w, target, NoiseModel::from_mu_eff(mu_eff))});
  }
  return rows;
}

MetricReport evaluate_report(const Mat& w, const TargetTransform& target,
                             const NoiseModel* noise) {
  check_shapes(w, target, "evaluate_report");
  MetricReport report;
  report.fidelity = fidelity(w, target);
  report.success = success_probability(w, target);
  const int n = target.n_channels;
  report.channel_probs.resize(n);
  report.selectivities = RealMat::Constant(
      n, n, std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < n; ++k) {
    double pk = channel_probability(w, k);
    report.channel_probs[k] = pk;
    if (pk > 0.0)
      for (int l = 0; l < n; ++l)
        report.selectivities(k, l) = std::norm(w(k, l)) / pk;
  }
  if (noise != nullptr) {
    report.mu_eff = noise->mu_eff();
    report.mi = mi_aggregate(w, target, *noise);
  }
  return report;
}

}  // namespace afp
