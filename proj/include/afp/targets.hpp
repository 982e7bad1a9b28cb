#pragma once
// Target transformations on the channel window: cyclic frequency-hop
// permutations, the DFT broadcast, and user-supplied unitaries.

#include <utility>
#include <vector>

#include "afp/linalg.hpp"

namespace afp {

/// How the target routes information, which decides how it is scored:
/// a hop concentrates each output on one input, a broadcast spreads every
/// input over every output.
enum class Scenario { Hop, Broadcast };

struct TargetTransform {
  int n_channels = 0;
  Mat matrix;  // n_channels x n_channels, unitary
  Scenario scenario = Scenario::Hop;
  /// Hop only: hop_map[k] is the input channel that output k listens to.
  std::vector<int> hop_map;

  /// The (output, input) pairs that are scored: one per output for a hop,
  /// every combination for a broadcast.
  std::vector<std::pair<int, int>> scored_pairs() const;

  /// User-supplied hop target; f must be a bijection on [0, n) and the
  /// matrix unitary to 1e-12.
  static TargetTransform custom_hop(Mat matrix, std::vector<int> hop_map);
  /// User-supplied broadcast target; the matrix must be unitary to 1e-12.
  static TargetTransform custom_broadcast(Mat matrix);
};

/// n-th power of the cyclic single-step hop on n_channels channels.
/// The single step maps input n to output n+1 (mod n_channels); entry
/// (m, n) of the power-p matrix is 1 when m = n + p (mod n_channels).
/// Scored as a hop with hop_map[k] = (k - p) mod n_channels.
TargetTransform permutation_power(int n_channels, int power);

/// The n_channels-point DFT as a broadcast target.
TargetTransform dft_target(int n_channels);

/// Diagonal of the power-p roots-of-unity phases: entry (m, m) is
/// exp(+2*pi*i*m*p/n_channels). Conjugating it by the channel DFT gives
/// the power-p hop: S^p = F^dag D^p F.
Mat roots_diagonal(int n_channels, int power);

/// Hop powers worth solving directly: 1..floor(n/2). Higher powers are
/// duals of these (S^(n-p) is the adjoint of S^p), and power 0 is the
/// identity.
std::vector<int> unique_hop_powers(int n_channels);

}  // namespace afp
