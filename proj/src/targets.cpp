#include "afp/targets.hpp"

#include <stdexcept>
#include <string>

#include "afp/spectral.hpp"

namespace afp {

namespace {

int positive_mod(long long a, int n) {
  long long r = a % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

void check_channel_count(int n_channels, const char* who) {
  if (n_channels < 1)
    throw std::invalid_argument(std::string(who) + ": n_channels must be >= 1");
}

void check_unitary(const Mat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  double defect = unitarity_defect(m);
  if (!(defect <= 1e-12))
    throw std::invalid_argument(std::string(who) +
                                ": matrix is not unitary (defect " +
                                std::to_string(defect) + ")");
}

}  // namespace

std::vector<std::pair<int, int>> TargetTransform::scored_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  if (scenario == Scenario::Hop) {
    pairs.reserve(n_channels);
    for (int k = 0; k < n_channels; ++k) pairs.emplace_back(k, hop_map[k]);
  } else {
    pairs.reserve(static_cast<std::size_t>(n_channels) * n_channels);
    for (int k = 0; k < n_channels; ++k)
      for (int l = 0; l < n_channels; ++l) pairs.emplace_back(k, l);
  }
  return pairs;
}

TargetTransform TargetTransform::custom_hop(Mat matrix,
                                            std::vector<int> hop_map) {
  check_unitary(matrix, "custom_hop");
  int n = static_cast<int>(matrix.rows());
  if (static_cast<int>(hop_map.size()) != n)
    throw std::invalid_argument("custom_hop: hop_map must have one entry per output");
  std::vector<bool> seen(n, false);
  for (int l : hop_map) {
    if (l < 0 || l >= n || seen[l])
      throw std::invalid_argument("custom_hop: hop_map must be a bijection on channels");
    seen[l] = true;
  }
  TargetTransform t;
  t.n_channels = n;
  t.matrix = std::move(matrix);
  t.scenario = Scenario::Hop;
  t.hop_map = std::move(hop_map);
  return t;
}

TargetTransform TargetTransform::custom_broadcast(Mat matrix) {
  check_unitary(matrix, "custom_broadcast");
  TargetTransform t;
  t.n_channels = static_cast<int>(matrix.rows());
  t.matrix = std::move(matrix);
  t.scenario = Scenario::Broadcast;
  return t;
}

TargetTransform permutation_power(int n_channels, int power) {
  check_channel_count(n_channels, "permutation_power");
  TargetTransform t;
  t.n_channels = n_channels;
  t.matrix = Mat::Zero(n_channels, n_channels);
  t.scenario = Scenario::Hop;
  t.hop_map.resize(n_channels);
  for (int k = 0; k < n_channels; ++k) {
    int l = positive_mod(static_cast<long long>(k) - power, n_channels);
    t.matrix(k, l) = 1.0;
    t.hop_map[k] = l;
  }
  return t;
}

TargetTransform dft_target(int n_channels) {
  check_channel_count(n_channels, "dft_target");
  TargetTransform t;
  t.n_channels = n_channels;
  t.matrix = dft_matrix(n_channels);
  t.scenario = Scenario::Broadcast;
  return t;
}

Mat roots_diagonal(int n_channels, int power) {
  check_channel_count(n_channels, "roots_diagonal");
  Mat d = Mat::Zero(n_channels, n_channels);
  for (int m = 0; m < n_channels; ++m) {
    int k = positive_mod(static_cast<long long>(m) * power, n_channels);
    double angle = 2.0 * kPi * k / n_channels;
    d(m, m) = Cplx(std::cos(angle), std::sin(angle));
  }
  return d;
}

std::vector<int> unique_hop_powers(int n_channels) {
  check_channel_count(n_channels, "unique_hop_powers");
  std::vector<int> powers;
  for (int p = 1; p <= n_channels / 2; ++p) powers.push_back(p);
  return powers;
}

}  // namespace afp
