#pragma once
// Shared numeric aliases and small helpers used across the library.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>

namespace afp {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Wraps an angle to (-pi, pi]. Exact identity for values already inside.
inline double wrap_phase(double x) {
  if (x > -kPi && x <= kPi) return x;
  double y = std::fmod(x, 2.0 * kPi);
  if (y <= -kPi)
    y += 2.0 * kPi;
  else if (y > kPi)
    y -= 2.0 * kPi;
  return y;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Independent child seed for restart/trial `index` under a master seed.
/// Thread-schedule independent: depends only on (master, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ull * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace afp
