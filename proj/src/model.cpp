#include "afp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afp {

namespace {

void validate_design(const AfpDesign& design) {
  if (design.elements.empty())
    throw std::invalid_argument("AfpDesign: cascade needs at least one element");
  for (std::size_t i = 0; i < design.elements.size(); ++i) {
    Element::Kind expected =
        (i % 2 == 0) ? Element::Kind::Modulator : Element::Kind::Shaper;
    if (design.elements[i].kind != expected)
      throw std::invalid_argument(
          "AfpDesign: elements must alternate modulator/shaper starting "
          "with a modulator");
  }
  if (design.elements.size() % 2 == 0 && !design.allow_even_depth)
    throw std::invalid_argument(
        "AfpDesign: canonical cascades have odd depth (modulators on both "
        "ends); set allow_even_depth to permit a trailing shaper");
  for (const Element& e : design.elements) {
    if (e.kind == Element::Kind::Shaper) {
      if (static_cast<int>(e.shaper_phases.size()) != design.grid.shaper_support)
        throw std::invalid_argument(
            "AfpDesign: shaper needs one phase per support mode (" +
            std::to_string(design.grid.shaper_support) + ")");
    } else if (e.modulation.kind == Modulation::Kind::Arbitrary) {
      if (static_cast<int>(e.modulation.phases.size()) != design.grid.m_total)
        throw std::invalid_argument(
            "AfpDesign: arbitrary modulation needs one phase per time bin (" +
            std::to_string(design.grid.m_total) + ")");
    }
  }
}

}  // namespace

Modulation Modulation::arbitrary(std::vector<double> phases) {
  Modulation m;
  m.kind = Kind::Arbitrary;
  for (double& p : phases) {
    if (!std::isfinite(p))
      throw std::invalid_argument("Modulation: phases must be finite");
    p = wrap_phase(p);
  }
  m.phases = std::move(phases);
  return m;
}

Modulation Modulation::tonal(std::vector<Tone> tones) {
  std::vector<int> harmonics;
  for (Tone& t : tones) {
    if (t.harmonic < 1)
      throw std::invalid_argument("Modulation: tone harmonics must be >= 1");
    if (!std::isfinite(t.amplitude) || t.amplitude < 0.0)
      throw std::invalid_argument(
          "Modulation: tone amplitudes must be finite and >= 0");
    if (!std::isfinite(t.phase))
      throw std::invalid_argument("Modulation: tone phases must be finite");
    t.phase = wrap_phase(t.phase);
    harmonics.push_back(t.harmonic);
  }
  std::sort(harmonics.begin(), harmonics.end());
  if (std::adjacent_find(harmonics.begin(), harmonics.end()) != harmonics.end())
    throw std::invalid_argument("Modulation: tone harmonics must be distinct");
  Modulation m;
  m.kind = Kind::Tonal;
  m.tones = std::move(tones);
  return m;
}

Element Element::modulator(Modulation m) {
  Element e;
  e.kind = Kind::Modulator;
  e.modulation = std::move(m);
  return e;
}

Element Element::shaper(std::vector<double> phases) {
  Element e;
  e.kind = Kind::Shaper;
  for (double& p : phases) {
    if (!std::isfinite(p))
      throw std::invalid_argument("Element: shaper phases must be finite");
    p = wrap_phase(p);
  }
  e.shaper_phases = std::move(phases);
  return e;
}

AfpDesign::AfpDesign(std::vector<Element> elements_, ModeGrid grid_,
                     bool allow_even_depth_)
    : elements(std::move(elements_)),
      grid(grid_),
      allow_even_depth(allow_even_depth_) {
  validate_design(*this);
}

std::vector<double> modulator_phase_profile(const Element& e,
                                            const ModeGrid& grid) {
  if (e.kind != Element::Kind::Modulator)
    throw std::invalid_argument("modulator_phase_profile: not a modulator");
  const int m = grid.m_total;
  if (e.modulation.kind == Modulation::Kind::Arbitrary) {
    if (static_cast<int>(e.modulation.phases.size()) != m)
      throw std::invalid_argument(
          "modulator_phase_profile: expected one phase per time bin");
    return e.modulation.phases;
  }
  std::vector<double> phi(m, 0.0);
  for (const Tone& t : e.modulation.tones) {
    for (int j = 0; j < m; ++j)
      phi[j] += t.amplitude * std::sin(2.0 * kPi * t.harmonic * j / m + t.phase);
  }
  return phi;
}

Mat modulator_operator(const Element& e, const ModeGrid& grid) {
  std::vector<double> phi = modulator_phase_profile(e, grid);
  const int m = grid.m_total;
  Mat f = dft_matrix(m);
  Mat d = f.adjoint();  // reuse as scratch: D F^dag, rows scaled in place
  for (int j = 0; j < m; ++j)
    d.row(j) *= Cplx(std::cos(phi[j]), std::sin(phi[j]));
  return f * d;
}

Mat shaper_operator(const Element& e, const ModeGrid& grid) {
  if (e.kind != Element::Kind::Shaper)
    throw std::invalid_argument("shaper_operator: not a shaper");
  if (static_cast<int>(e.shaper_phases.size()) != grid.shaper_support)
    throw std::invalid_argument(
        "shaper_operator: expected one phase per support mode");
  Mat op = Mat::Identity(grid.m_total, grid.m_total);
  const int start = grid.support_offset();
  for (int b = 0; b < grid.shaper_support; ++b) {
    double theta = e.shaper_phases[b];
    op(start + b, start + b) = Cplx(std::cos(theta), std::sin(theta));
  }
  return op;
}

Mat cascade_operator(const AfpDesign& design) {
  validate_design(design);
  Mat v = Mat::Identity(design.grid.m_total, design.grid.m_total);
  for (const Element& e : design.elements) {
    Mat op = (e.kind == Element::Kind::Modulator)
                 ? modulator_operator(e, design.grid)
                 : shaper_operator(e, design.grid);
    v = op * v;
  }
  return v;
}

Mat channel_matrix(const AfpDesign& design) {
  return extract_submatrix(cascade_operator(design), design.grid);
}

AfpDesign dual_design(const AfpDesign& design) {
  validate_design(design);
  std::vector<Element> reversed(design.elements.rbegin(),
                                design.elements.rend());
  for (Element& e : reversed) {
    if (e.kind == Element::Kind::Shaper) {
      for (double& p : e.shaper_phases) p = wrap_phase(-p);
    } else if (e.modulation.kind == Modulation::Kind::Arbitrary) {
      for (double& p : e.modulation.phases) p = wrap_phase(-p);
    } else {
      // -A*sin(x + theta) = A*sin(x + theta - pi): shift the tone phase by
      // pi, staying inside (-pi, pi].
      for (Tone& t : e.modulation.tones)
        t.phase = (t.phase > 0.0) ? t.phase - kPi : t.phase + kPi;
    }
  }
  // A reversed odd cascade still starts with a modulator; a reversed even
  // cascade starts with a shaper, which the alternation rule rejects, so
  // duals are only defined for odd depth.
  if (design.elements.size() % 2 == 0)
    throw std::invalid_argument(
        "dual_design: only odd-depth cascades have a dual in the same "
        "alternation scheme");
  return AfpDesign(std::move(reversed), design.grid, design.allow_even_depth);
}

}  // namespace afp
