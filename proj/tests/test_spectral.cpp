#include <doctest.h>

#include <random>

#include "afp/spectral.hpp"

using namespace afp;

namespace {

Mat random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Cplx(u(rng), u(rng));
  return m;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("wrap_phase maps onto (-pi, pi] and fixes interior points") {
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(1.25) == 1.25);
  CHECK(wrap_phase(-3.0) == -3.0);
  CHECK(wrap_phase(kPi) == kPi);
  CHECK(wrap_phase(-kPi) == kPi);
  CHECK(wrap_phase(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_phase(-3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_phase(2.5 * kPi) == doctest::Approx(0.5 * kPi).epsilon(1e-15));
  CHECK(wrap_phase(2.0 * kPi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  for (double x : {-6.9, -0.1, 0.7, 9.4, 100.3}) {
    double w = wrap_phase(x);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::remainder(w - x, 2.0 * kPi) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dft matrix entries follow the +i kernel") {
  Mat f = dft_matrix(4);
  CHECK(f(0, 0) == Cplx(0.5, 0.0));
  CHECK(f(1, 1).real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(f(1, 1).imag() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f(2, 3).real() == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(f(2, 3).imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(dft_matrix(0), std::invalid_argument);
}

TEST_CASE("dft matrix is symmetric and unitary") {
  for (int d : {1, 2, 3, 5, 8, 16, 31, 64, 128, 256}) {
    Mat f = dft_matrix(d);
    CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(unitarity_defect(f) <= 1e-12);
    CHECK((f.adjoint() - f.conjugate()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dft matrix stays unitary at large sizes (sampled columns)") {
  const int d = 4096;
  Mat f = dft_matrix(d);
  for (int j : {0, 1, 17, 1024, 4095}) {
    Vec col = f.col(j);
    Vec back = f.adjoint() * col;
    back(j) -= 1.0;
    CHECK(back.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("unitarity defect is zero exactly for unitaries and positive otherwise") {
  CHECK(unitarity_defect(Mat::Identity(5, 5)) == 0.0);
  Mat scaled = 1.1 * Mat::Identity(3, 3);
  CHECK(unitarity_defect(scaled) == doctest::Approx(0.21).epsilon(1e-12));
  CHECK_THROWS_AS(unitarity_defect(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("unitarity defect stays tiny under change of basis") {
  // Products and conjugations of unitaries must look unitary too.
  Mat f = dft_matrix(8);
  Mat d = Mat::Identity(8, 8);
  for (int i = 0; i < 8; ++i)
    d(i, i) = std::polar(1.0, 0.3 * i * i - 1.0);
  Mat v = f * d * f.adjoint();
  CHECK(unitarity_defect(v) <= 1e-14);
  CHECK(unitarity_defect(f.adjoint() * v * f) <= 1e-13);
}

TEST_CASE("mode grid validates its windows") {
  ModeGrid g(128, 3, 62, 32);
  CHECK(g.support_offset() == 48);
  ModeGrid c = ModeGrid::centered(128, 3, 32);
  CHECK(c.channel_offset == 62);
  CHECK(c == g);

  CHECK_THROWS_AS(ModeGrid(0, 1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ModeGrid(128, 0, 0, 32), std::invalid_argument);
  CHECK_THROWS_AS(ModeGrid(128, 3, 126, 32), std::invalid_argument);
  CHECK_THROWS_AS(ModeGrid(128, 3, -1, 32), std::invalid_argument);
  CHECK_THROWS_AS(ModeGrid(128, 5, 0, 4), std::invalid_argument);   // support < channels
  CHECK_THROWS_AS(ModeGrid(128, 3, 0, 33), std::invalid_argument);  // support > m/4
}

TEST_CASE("support window is clamped to the grid and contains the channels") {
  for (const ModeGrid& g :
       {ModeGrid(128, 2, 0, 32), ModeGrid(128, 2, 126, 32),
        ModeGrid(128, 2, 63, 32), ModeGrid(16, 2, 7, 4), ModeGrid(8, 2, 3, 2)}) {
    int s0 = g.support_offset();
    CHECK(s0 >= 0);
    CHECK(s0 + g.shaper_support <= g.m_total);
    CHECK(s0 <= g.channel_offset);
    CHECK(g.channel_offset + g.n_channels <= s0 + g.shaper_support);
  }
  CHECK(ModeGrid(128, 2, 0, 32).support_offset() == 0);
  CHECK(ModeGrid(128, 2, 126, 32).support_offset() == 96);
}

TEST_CASE("channel submatrix extraction") {
  ModeGrid g(8, 2, 3, 2);
  Mat v = Mat::Identity(8, 8);
  Mat w = extract_submatrix(v, g);
  CHECK(w.rows() == 2);
  CHECK((w - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  v(3, 4) = 0.5;
  w = extract_submatrix(v, g);
  CHECK(w(0, 0) == Cplx(1.0, 0.0));
  CHECK(w(0, 1) == Cplx(0.5, 0.0));
  CHECK(w(1, 0) == Cplx(0.0, 0.0));
  CHECK(w(1, 1) == Cplx(1.0, 0.0));

  CHECK_THROWS_AS(extract_submatrix(Mat::Identity(4, 4), g),
                  std::invalid_argument);
}

TEST_CASE("fast transform agrees with the dense matrix") {
  for (int d : {1, 2, 4, 8, 64, 128, 3, 12}) {
    Dft dft(d);
    Mat f = dft_matrix(d);
    Mat a = random_matrix(d, 3, 100 + d);
    Mat fast = a;
    dft.apply(fast);
    CHECK((fast - f * a).cwiseAbs().maxCoeff() <= 1e-12);
    Mat adj = a;
    dft.apply_adjoint(adj);
    CHECK((adj - f.adjoint() * a).cwiseAbs().maxCoeff() <= 1e-12);
    dft.apply(adj);  // round trip
    CHECK((adj - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(Dft(0), std::invalid_argument);
  Dft dft(8);
  Mat wrong = Mat::Zero(4, 2);
  CHECK_THROWS_AS(dft.apply(wrong), std::invalid_argument);
}

}  // TEST_SUITE
