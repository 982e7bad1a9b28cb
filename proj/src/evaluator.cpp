#include "evaluator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace afp {
namespace detail {

namespace {

constexpr double kAmpBound = 3.0 * kPi;
constexpr double kAmpPenalty = 100.0;
constexpr double kDegenerate = -1e12;
const double kLn2 = std::log(2.0);

}  // namespace

std::vector<ParamSlice> parameter_layout(const DesignProblem& problem) {
  std::vector<ParamSlice> slices;
  int offset = 0;
  for (int e = 0; e < problem.structure.depth; ++e) {
    ParamSlice sl;
    sl.modulator = (e % 2 == 0);
    sl.offset = offset;
    if (!sl.modulator) {
      sl.count = problem.grid.shaper_support;
    } else if (problem.structure.regime == DriveRegime::Arbitrary) {
      sl.count = problem.grid.m_total;
    } else {
      sl.count = 2 * problem.structure.tones;
    }
    offset += sl.count;
    slices.push_back(sl);
  }
  return slices;
}

Evaluator::Evaluator(const DesignProblem& problem)
    : pb_(&problem),
      m_(problem.grid.m_total),
      n_(problem.grid.n_channels),
      support_(problem.grid.shaper_support),
      ch_off_(problem.grid.channel_offset),
      sup_off_(problem.grid.support_offset()),
      depth_(problem.structure.depth),
      tones_(problem.structure.tones),
      tonal_(problem.structure.regime == DriveRegime::Tonal),
      dft_(problem.grid.m_total),
      slices_(parameter_layout(problem)),
      t_conj_(problem.target.matrix.conjugate()),
      t_norm_(problem.target.matrix.squaredNorm()),
      pairs_(problem.target.scored_pairs()),
      f_min_(problem.objective.f_min) {
  n_params_ = 0;
  for (const ParamSlice& sl : slices_) n_params_ += sl.count;
  if (problem.objective.noise) mu_eff_ = problem.objective.noise->mu_eff();

  diag_.resize(depth_);
  tone_sin_.resize(depth_);
  tone_cos_.resize(depth_);
  for (int e = 0; e < depth_; ++e) {
    diag_[e] = Vec::Zero(slices_[e].modulator ? m_ : support_);
    if (slices_[e].modulator && tonal_) {
      tone_sin_[e].resize(static_cast<std::size_t>(tones_) * m_);
      tone_cos_[e].resize(static_cast<std::size_t>(tones_) * m_);
    }
  }
  fwd_.assign(depth_ + 1, Mat::Zero(m_, n_));
  w_ = Mat::Zero(n_, n_);
  g_ = Mat::Zero(n_, n_);
  y_ = Mat::Zero(m_, n_);
  s_ = Mat::Zero(m_, n_);
  ar_ = Mat::Zero(m_, n_);
  as_ = Mat::Zero(m_, n_);
}

void Evaluator::decode(const std::vector<double>& params) {
  if (static_cast<int>(params.size()) != n_params_)
    throw std::invalid_argument("Evaluator: parameter vector has wrong length");
  for (int e = 0; e < depth_; ++e) {
    const ParamSlice& sl = slices_[e];
    const double* p = params.data() + sl.offset;
    if (!sl.modulator) {
      for (int b = 0; b < support_; ++b)
        diag_[e][b] = Cplx(std::cos(p[b]), std::sin(p[b]));
    } else if (!tonal_) {
      for (int j = 0; j < m_; ++j)
        diag_[e][j] = Cplx(std::cos(p[j]), std::sin(p[j]));
    } else {
      std::vector<double>& sv = tone_sin_[e];
      std::vector<double>& cv = tone_cos_[e];
      for (int j = 0; j < m_; ++j) {
        double phi = 0.0;
        for (int t = 0; t < tones_; ++t) {
          double arg = 2.0 * kPi * (t + 1) * j / m_ + p[2 * t + 1];
          double s = std::sin(arg), c = std::cos(arg);
          sv[static_cast<std::size_t>(t) * m_ + j] = s;
          cv[static_cast<std::size_t>(t) * m_ + j] = c;
          phi += p[2 * t] * s;
        }
        diag_[e][j] = Cplx(std::cos(phi), std::sin(phi));
      }
    }
  }
}

void Evaluator::propagate() {
  Mat& x0 = fwd_[0];
  x0.setZero();
  for (int l = 0; l < n_; ++l) x0(ch_off_ + l, l) = 1.0;
  for (int e = 0; e < depth_; ++e) {
    Mat& x = fwd_[e + 1];
    x = fwd_[e];
    if (slices_[e].modulator) {
      dft_.apply_adjoint(x);
      x.array().colwise() *= diag_[e].array();
      dft_.apply(x);
    } else {
      for (int b = 0; b < support_; ++b) x.row(sup_off_ + b) *= diag_[e][b];
    }
  }
  w_ = fwd_[depth_].middleRows(ch_off_, n_);
}

double Evaluator::value_and_gradient(const std::vector<double>& params,
                                     double stage, std::vector<double>* grad) {
  decode(params);
  propagate();
  if (grad != nullptr) {
    grad->assign(n_params_, 0.0);
  }

  double j_val = 0.0;
  bool degenerate = false;

  if (pb_->objective.kind == Objective::Kind::MaxSuccess) {
    const double lambda = stage;
    double s = w_.squaredNorm();
    if (!(s > 0.0)) {
      degenerate = true;
      j_val = kDegenerate;
    } else {
      Cplx z = t_conj_.cwiseProduct(w_).sum();
      double p = s / t_norm_;
      double f = std::norm(z) / (s * t_norm_);
      double viol = f_min_ - f;
      j_val = p - (viol > 0.0 ? lambda * viol * viol : 0.0);
      if (grad != nullptr) {
        g_ = w_.conjugate() / t_norm_;
        if (viol > 0.0) {
          double c = 2.0 * lambda * viol;
          g_ += c * (std::conj(z) / (s * t_norm_)) * t_conj_ -
                Cplx(c * f / s) * w_.conjugate();
        }
      }
    }
  } else {
    const double beta = stage;
    const double mu = mu_eff_;
    const std::size_t np = pairs_.size();
    std::vector<double> rate(np), xs(np), cs(np);
    for (std::size_t q = 0; q < np; ++q) {
      auto [k, l] = pairs_[q];
      double x = std::norm(w_(k, l));
      double c = 0.0;
      for (int col = 0; col < n_; ++col)
        if (col != l) c += std::norm(w_(k, col));
      xs[q] = x;
      cs[q] = c;
      if (pb_->target.scenario == Scenario::Hop) {
        if (!(c + x > 0.0)) {
          degenerate = true;
          break;
        }
        rate[q] = std::log2((1.0 + mu * (c + x)) / (1.0 + mu * c));
      } else {
        rate[q] = std::log2(1.0 + mu * x);
      }
    }
    if (degenerate) {
      j_val = kDegenerate;
    } else {
      double rate_min = rate[0];
      for (double r : rate) rate_min = std::min(rate_min, r);
      double z = 0.0;
      for (double r : rate) z += std::exp(-beta * (r - rate_min));
      j_val = rate_min - std::log(z) / beta;
      if (grad != nullptr) {
        g_.setZero();
        for (std::size_t q = 0; q < np; ++q) {
          auto [k, l] = pairs_[q];
          double wq = std::exp(-beta * (rate[q] - rate_min)) / z;
          if (pb_->target.scenario == Scenario::Hop) {
            double a1 = mu / ((1.0 + mu * (cs[q] + xs[q])) * kLn2);
            double a2 = mu / ((1.0 + mu * cs[q]) * kLn2);
            for (int col = 0; col < n_; ++col) {
              double coeff = (col == l) ? a1 : (a1 - a2);
              g_(k, col) += wq * coeff * std::conj(w_(k, col));
            }
          } else {
            double a = mu / ((1.0 + mu * xs[q]) * kLn2);
            g_(k, l) += wq * a * std::conj(w_(k, l));
          }
        }
      }
    }
  }

  // Out-of-range tonal amplitudes are discouraged by a quadratic penalty;
  // unpack_parameters later folds the sign into the tone phase.
  if (tonal_) {
    for (int e = 0; e < depth_; ++e) {
      if (!slices_[e].modulator) continue;
      const ParamSlice& sl = slices_[e];
      for (int t = 0; t < tones_; ++t) {
        double a = params[sl.offset + 2 * t];
        double excess = std::fabs(a) - kAmpBound;
        if (excess > 0.0) {
          j_val -= kAmpPenalty * excess * excess;
          if (grad != nullptr)
            (*grad)[sl.offset + 2 * t] -=
                2.0 * kAmpPenalty * excess * (a < 0.0 ? -1.0 : 1.0);
        }
      }
    }
  }

  if (degenerate || grad == nullptr) return j_val;

  // Adjoint sweep: y holds the transposed tail product applied to the
  // channel columns; one rank-n contraction per element yields the
  // diagonal sensitivity of that element's operator.
  y_.setZero();
  for (int l = 0; l < n_; ++l) y_(ch_off_ + l, l) = 1.0;
  for (int e = depth_ - 1; e >= 0; --e) {
    const ParamSlice& sl = slices_[e];
    s_.noalias() = y_ * g_;
    const Mat& xin = fwd_[e];
    if (!sl.modulator) {
      for (int b = 0; b < support_; ++b) {
        int row = sup_off_ + b;
        Cplx bgg = 0.0;
        for (int l = 0; l < n_; ++l) bgg += xin(row, l) * s_(row, l);
        (*grad)[sl.offset + b] += -2.0 * std::imag(diag_[e][b] * bgg);
      }
    } else {
      ar_ = xin;
      dft_.apply_adjoint(ar_);
      as_ = s_;
      dft_.apply(as_);
      if (!tonal_) {
        for (int j = 0; j < m_; ++j) {
          Cplx t = 0.0;
          for (int l = 0; l < n_; ++l) t += ar_(j, l) * as_(j, l);
          (*grad)[sl.offset + j] += -2.0 * std::imag(diag_[e][j] * t);
        }
      } else {
        const std::vector<double>& sv = tone_sin_[e];
        const std::vector<double>& cv = tone_cos_[e];
        for (int j = 0; j < m_; ++j) {
          Cplx t = 0.0;
          for (int l = 0; l < n_; ++l) t += ar_(j, l) * as_(j, l);
          double gphi = -2.0 * std::imag(diag_[e][j] * t);
          for (int tn = 0; tn < tones_; ++tn) {
            double a = params[sl.offset + 2 * tn];
            (*grad)[sl.offset + 2 * tn] +=
                gphi * sv[static_cast<std::size_t>(tn) * m_ + j];
            (*grad)[sl.offset + 2 * tn + 1] +=
                gphi * a * cv[static_cast<std::size_t>(tn) * m_ + j];
          }
        }
      }
    }
    if (e > 0) {
      // y <- op^T y; the modulator transpose swaps the roles of the two
      // transforms, the shaper transpose is itself.
      if (!sl.modulator) {
        for (int b = 0; b < support_; ++b) y_.row(sup_off_ + b) *= diag_[e][b];
      } else {
        dft_.apply(y_);
        y_.array().colwise() *= diag_[e].array();
        dft_.apply_adjoint(y_);
      }
    }
  }
  return j_val;
}

Evaluator::Scores Evaluator::scores(const std::vector<double>& params) {
  decode(params);
  propagate();
  Scores sc;
  double s = w_.squaredNorm();
  sc.success = s / t_norm_;
  if (s > 0.0) {
    Cplx z = t_conj_.cwiseProduct(w_).sum();
    sc.fidelity = std::norm(z) / (s * t_norm_);
  }
  if (pb_->objective.kind == Objective::Kind::MaxMinMi) {
    double mn = std::numeric_limits<double>::infinity();
    for (auto [k, l] : pairs_) {
      double x = std::norm(w_(k, l));
      double c = 0.0;
      for (int col = 0; col < n_; ++col)
        if (col != l) c += std::norm(w_(k, col));
      double r;
      if (pb_->target.scenario == Scenario::Hop) {
        r = (c + x > 0.0)
                ? std::log2((1.0 + mu_eff_ * (c + x)) / (1.0 + mu_eff_ * c))
                : 0.0;
      } else {
        r = std::log2(1.0 + mu_eff_ * x);
      }
      mn = std::min(mn, r);
    }
    sc.min_mi = mn;
  }
  return sc;
}

}  // namespace detail
}  // namespace afp
