#include "afp/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace afp {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

LbfgsResult lbfgs_minimize(
    const std::function<double(const std::vector<double>&,
                               std::vector<double>&)>& fg,
    std::vector<double> x0, const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);

  std::vector<double> g(n, 0.0), g_new(n, 0.0), d(n, 0.0), x_new(n, 0.0);
  double f = fg(res.x, g);
  ++res.evaluations;

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (max_abs(g) <= options.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion: d = -H g.
    d = g;
    std::vector<double> alpha(history.size());
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      alpha[i] = history[i].rho * dot(history[i].s, d);
      for (std::size_t j = 0; j < n; ++j) d[j] -= alpha[i] * history[i].y[j];
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      double beta = history[i].rho * dot(history[i].y, d);
      for (std::size_t j = 0; j < n; ++j)
        d[j] += (alpha[i] - beta) * history[i].s[j];
    }
    for (double& v : d) v = -v;

    double gd = dot(g, d);
    if (!(gd < 0.0)) {  // not a descent direction; fall back to steepest
      for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
      gd = -dot(g, g);
      history.clear();
    }

    double step = history.empty() ? std::min(1.0, 1.0 / std::max(1.0, max_abs(g)))
                                  : 1.0;
    const double c1 = 1e-4;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = res.x[j] + step * d[j];
      f_new = fg(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= f + c1 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search collapsed; current x is the answer

    Pair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      pair.s[j] = x_new[j] - res.x[j];
      pair.y[j] = g_new[j] - g[j];
    }
    double sy = dot(pair.s, pair.y);
    double sn = std::sqrt(dot(pair.s, pair.s));
    double yn = std::sqrt(dot(pair.y, pair.y));
    if (sy > 1e-10 * sn * yn && sy > 0.0) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > options.memory)
        history.pop_front();
    }

    double df = std::fabs(f - f_new);
    res.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    ++res.iterations;
    if (df <= options.f_rel_tol * (std::fabs(f) + 1.0)) {
      res.converged = true;
      break;
    }
  }

  res.f = f;
  return res;
}

}  // namespace afp
