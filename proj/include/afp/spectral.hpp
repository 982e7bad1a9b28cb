#pragma once
// Discrete frequency-mode substrate: the mode grid bookkeeping, the DFT
// matrix in the +i convention, and a transform helper that applies the DFT
// to matrix columns (radix-2 FFT for power-of-two sizes, dense otherwise).

#include <vector>

#include "afp/linalg.hpp"

namespace afp {

/// Layout of the discrete frequency comb. The full simulation basis has
/// m_total modes; the computational channels are a contiguous window of
/// n_channels modes starting at channel_offset; programmable line-by-line
/// phases are restricted to a support window of shaper_support modes,
/// centered on the channel window and clamped to the grid.
struct ModeGrid {
  int m_total = 0;
  int n_channels = 0;
  int channel_offset = 0;
  int shaper_support = 0;

  ModeGrid() = default;
  ModeGrid(int m_total, int n_channels, int channel_offset, int shaper_support);

  /// Grid with the channel window centered on the simulation basis.
  static ModeGrid centered(int m_total, int n_channels, int shaper_support);

  /// First mode of the shaper support window. Centered on the channel
  /// window and clamped so the support stays inside the grid; the channel
  /// window is always contained in the support window.
  int support_offset() const;

  bool operator==(const ModeGrid&) const = default;
};

/// dim x dim unitary DFT, entry (m, n) = exp(+2*pi*i*m*n/dim) / sqrt(dim).
/// Symmetric; its adjoint equals its conjugate.
Mat dft_matrix(int dim);

/// max |(V^dag V - I)_{mp}|. Zero exactly when v is unitary.
double unitarity_defect(const Mat& v);

/// The n_channels x n_channels channel block of a full-basis operator.
Mat extract_submatrix(const Mat& v, const ModeGrid& grid);

/// Applies the unitary DFT (and its adjoint) to the columns of a matrix.
/// Uses an in-place radix-2 FFT when the size is a power of two and falls
/// back to a dense product otherwise. Both paths agree to ~1e-14.
class Dft {
 public:
  explicit Dft(int size);

  int size() const { return size_; }

  /// a <- F a, where F is dft_matrix(size).
  void apply(Mat& a) const;
  /// a <- F^dag a.
  void apply_adjoint(Mat& a) const;

 private:
  void fft_columns(Mat& a, bool adjoint) const;

  int size_ = 0;
  int levels_ = -1;  // log2(size) for the FFT path, -1 for dense fallback
  std::vector<int> bitrev_;
  std::vector<Cplx> twiddle_;  // exp(+2*pi*i*k/size), k in [0, size/2)
  Mat dense_;                  // populated only on the dense path
};

}  // namespace afp
