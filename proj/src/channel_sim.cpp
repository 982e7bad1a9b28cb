#include "afp/channel_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "afp/linalg.hpp"

namespace afp {

SymbolBlock generate_symbols(int n_channels, long n_symbols,
                             const NoiseModel& noise, std::uint64_t seed) {
  if (n_channels < 1)
    throw std::invalid_argument("generate_symbols: n_channels must be >= 1");
  if (n_symbols < 1)
    throw std::invalid_argument("generate_symbols: n_symbols must be >= 1");
  SymbolBlock block;
  block.n_channels = n_channels;
  block.n_symbols = n_symbols;
  block.mu = noise.mu;
  block.seed = seed;
  block.symbols.resize(n_channels, n_symbols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> quad(0.0, std::sqrt(noise.mu / 2.0));
  for (int ch = 0; ch < n_channels; ++ch)
    for (long t = 0; t < n_symbols; ++t) {
      double re = quad(rng);
      double im = quad(rng);
      block.symbols(ch, t) = Cplx(re, im);
    }
  return block;
}

ReceivedBlock transmit(const SymbolBlock& block, const Mat& w,
                       const NoiseModel& noise, std::uint64_t noise_seed) {
  if (w.rows() != block.n_channels || w.cols() != block.n_channels)
    throw std::invalid_argument("transmit: channel matrix shape mismatch");
  ReceivedBlock out;
  out.seed = noise_seed;
  out.received = std::sqrt(noise.eta) * (w * block.symbols);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> quad(0.0,
                                        std::sqrt((1.0 + noise.d_elec) / 2.0));
  for (int k = 0; k < block.n_channels; ++k)
    for (long t = 0; t < block.n_symbols; ++t) {
      double re = quad(rng);
      double im = quad(rng);
      out.received(k, t) += Cplx(re, im);
    }
  return out;
}

double estimate_mi(const SymbolBlock& block, const ReceivedBlock& received,
                   int k, int l) {
  if (k < 0 || k >= block.n_channels || l < 0 || l >= block.n_channels)
    throw std::invalid_argument("estimate_mi: channel index out of range");
  if (received.received.rows() != block.n_channels ||
      received.received.cols() != block.n_symbols)
    throw std::invalid_argument("estimate_mi: block shape mismatch");
  const long n = block.n_symbols;
  Cplx num = 0.0;
  double den = 0.0;
  for (long t = 0; t < n; ++t) {
    Cplx x = block.symbols(l, t);
    num += received.received(k, t) * std::conj(x);
    den += std::norm(x);
  }
  if (!(den > 0.0))
    throw std::domain_error("estimate_mi: input channel carries no symbols");
  Cplx gain = num / den;
  double resid = 0.0;
  for (long t = 0; t < n; ++t) {
    Cplx r = received.received(k, t) - gain * block.symbols(l, t);
    resid += std::norm(r);
  }
  // Residual variance per quadrature; the fitted link then looks like a
  // scalar Gaussian channel with SNR |gain|^2 * (mu/2) / v.
  double v = resid / (2.0 * static_cast<double>(n));
  return std::log2(1.0 + std::norm(gain) * (block.mu / 2.0) / v);
}

ValidationTable validate_model(const Mat& w, const TargetTransform& target,
                               const NoiseModel& noise, long n_symbols,
                               std::uint64_t seed) {
  if (w.rows() != target.n_channels || w.cols() != target.n_channels)
    throw std::invalid_argument("validate_model: channel matrix shape mismatch");
  ValidationTable table;
  const int n = target.n_channels;
  std::uint64_t trial = 0;
  auto run_pair = [&](const SymbolBlock& block, const ReceivedBlock& rx, int k,
                      int l, double analytic) {
    double empirical = estimate_mi(block, rx, k, l);
    double rel =
        std::fabs(empirical - analytic) / std::max(std::fabs(analytic), 1e-12);
    table.rows.push_back({k, l, analytic, empirical, rel});
    table.max_rel_dev = std::max(table.max_rel_dev, rel);
  };

  if (target.scenario == Scenario::Hop) {
    SymbolBlock block =
        generate_symbols(n, n_symbols, noise, derive_seed(seed, trial++));
    ReceivedBlock rx = transmit(block, w, noise, derive_seed(seed, trial++));
    for (int k = 0; k < n; ++k) {
      int l = target.hop_map[k];
      run_pair(block, rx, k, l, mi_hop(w, k, l, noise));
    }
  } else {
    for (int l = 0; l < n; ++l) {
      SymbolBlock block =
          generate_symbols(n, n_symbols, noise, derive_seed(seed, trial++));
      for (int ch = 0; ch < n; ++ch)
        if (ch != l) block.symbols.row(ch).setZero();
      ReceivedBlock rx = transmit(block, w, noise, derive_seed(seed, trial++));
      for (int k = 0; k < n; ++k)
        run_pair(block, rx, k, l, mi_broadcast(w, k, l, noise));
    }
  }
  return table;
}

}  // namespace afp
