#pragma once
// Monte Carlo end-to-end check of the analytic information rates: draw
// coherent-state symbols, push them through the channel matrix with shot
// and electronic noise, and re-estimate each link's rate by regression.

#include <cstdint>

#include "afp/metrics.hpp"
#include "afp/targets.hpp"

namespace afp {

/// A block of complex Gaussian symbols, one row per input channel. Each
/// symbol has mean photon number mu (variance mu/2 per quadrature).
struct SymbolBlock {
  int n_channels = 0;
  long n_symbols = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  Mat symbols;  // n_channels x n_symbols
};

SymbolBlock generate_symbols(int n_channels, long n_symbols,
                             const NoiseModel& noise, std::uint64_t seed);

/// y = sqrt(eta) * W x + w, with unit shot noise plus electronic noise
/// (total variance (1 + d_elec)/2 per quadrature).
struct ReceivedBlock {
  std::uint64_t seed = 0;
  Mat received;  // n_channels x n_symbols
};

ReceivedBlock transmit(const SymbolBlock& block, const Mat& w,
                       const NoiseModel& noise, std::uint64_t noise_seed);

/// Rate estimate (bits/symbol) for the (k, l) link: fit the complex gain
/// from input l to output k by least squares, count everything else as
/// noise. Knows nothing of the channel matrix or the analytic formulas.
double estimate_mi(const SymbolBlock& block, const ReceivedBlock& received,
                   int k, int l);

struct ValidationRow {
  int out_channel = 0;
  int in_channel = 0;
  double analytic = 0.0;
  double empirical = 0.0;
  double rel_dev = 0.0;
};

struct ValidationTable {
  std::vector<ValidationRow> rows;
  double max_rel_dev = 0.0;
};

/// Compares analytic and simulated rates on every scored pair of the
/// target. Hop pairs run with all inputs live (crosstalk acts as noise);
/// broadcast pairs run one input at a time, as each receiver decodes its
/// own copy.
ValidationTable validate_model(const Mat& w, const TargetTransform& target,
                               const NoiseModel& noise, long n_symbols,
                               std::uint64_t seed);

}  // namespace afp
