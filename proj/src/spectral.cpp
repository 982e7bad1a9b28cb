#include "afp/spectral.hpp"

#include <stdexcept>
#include <string>

namespace afp {

ModeGrid::ModeGrid(int m_total_, int n_channels_, int channel_offset_,
                   int shaper_support_)
    : m_total(m_total_),
      n_channels(n_channels_),
      channel_offset(channel_offset_),
      shaper_support(shaper_support_) {
  if (m_total < 1) throw std::invalid_argument("ModeGrid: m_total must be >= 1");
  if (n_channels < 1)
    throw std::invalid_argument("ModeGrid: n_channels must be >= 1");
  if (channel_offset < 0 || channel_offset + n_channels > m_total)
    throw std::invalid_argument(
        "ModeGrid: channel window [" + std::to_string(channel_offset) + ", " +
        std::to_string(channel_offset + n_channels) +
        ") does not fit in a grid of " + std::to_string(m_total) + " modes");
  if (shaper_support < n_channels)
    throw std::invalid_argument(
        "ModeGrid: shaper_support must cover all n_channels channels");
  if (4 * shaper_support > m_total)
    throw std::invalid_argument(
        "ModeGrid: shaper_support is capped at a quarter of m_total so the "
        "cascade has guard modes on both sides");
}

ModeGrid ModeGrid::centered(int m_total, int n_channels, int shaper_support) {
  return ModeGrid(m_total, n_channels, (m_total - n_channels) / 2,
                  shaper_support);
}

int ModeGrid::support_offset() const {
  int start = channel_offset - (shaper_support - n_channels) / 2;
  if (start < 0) start = 0;
  if (start > m_total - shaper_support) start = m_total - shaper_support;
  return start;
}

Mat dft_matrix(int dim) {
  if (dim < 1) throw std::invalid_argument("dft_matrix: dim must be >= 1");
  Mat f(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n <= m; ++n) {
      // Reduce m*n mod dim before forming the angle; the kernel is periodic
      // and the reduced product keeps the argument small and accurate.
      long long k = (static_cast<long long>(m) * n) % dim;
      double angle = 2.0 * kPi * static_cast<double>(k) / dim;
      Cplx v = scale * Cplx(std::cos(angle), std::sin(angle));
      f(m, n) = v;
      f(n, m) = v;
    }
  }
  return f;
}

double unitarity_defect(const Mat& v) {
  if (v.rows() != v.cols())
    throw std::invalid_argument("unitarity_defect: matrix must be square");
  Mat g = v.adjoint() * v;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

Mat extract_submatrix(const Mat& v, const ModeGrid& grid) {
  if (v.rows() != grid.m_total || v.cols() != grid.m_total)
    throw std::invalid_argument(
        "extract_submatrix: operator must be m_total x m_total");
  return v.block(grid.channel_offset, grid.channel_offset, grid.n_channels,
                 grid.n_channels);
}

Dft::Dft(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("Dft: size must be >= 1");
  int levels = 0;
  while ((1 << levels) < size) ++levels;
  if ((1 << levels) == size) {
    levels_ = levels;
    bitrev_.resize(size);
    for (int i = 0; i < size; ++i) {
      int r = 0;
      for (int b = 0; b < levels; ++b) r |= ((i >> b) & 1) << (levels - 1 - b);
      bitrev_[i] = r;
    }
    twiddle_.resize(size / 2 > 0 ? size / 2 : 1);
    for (int k = 0; k < size / 2; ++k) {
      double angle = 2.0 * kPi * k / size;
      twiddle_[k] = Cplx(std::cos(angle), std::sin(angle));
    }
  } else {
    dense_ = dft_matrix(size);
  }
}

void Dft::fft_columns(Mat& a, bool adjoint) const {
  const int n = size_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int c = 0; c < a.cols(); ++c) {
    Cplx* x = a.col(c).data();
    for (int i = 0; i < n; ++i) {
      int j = bitrev_[i];
      if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
      int half = len >> 1;
      int step = n / len;
      for (int base = 0; base < n; base += len) {
        for (int j = 0; j < half; ++j) {
          Cplx w = twiddle_[j * step];
          if (adjoint) w = std::conj(w);
          Cplx u = x[base + j];
          Cplx t = x[base + j + half] * w;
          x[base + j] = u + t;
          x[base + j + half] = u - t;
        }
      }
    }
    for (int i = 0; i < n; ++i) x[i] *= scale;
  }
}

void Dft::apply(Mat& a) const {
  if (a.rows() != size_)
    throw std::invalid_argument("Dft::apply: row count must match size");
  if (levels_ >= 0) {
    fft_columns(a, false);
  } else {
    a = dense_ * a;
  }
}

void Dft::apply_adjoint(Mat& a) const {
  if (a.rows() != size_)
    throw std::invalid_argument("Dft::apply_adjoint: row count must match size");
  if (levels_ >= 0) {
    fft_columns(a, true);
  } else {
    a = dense_.adjoint() * a;
  }
}

}  // namespace afp
