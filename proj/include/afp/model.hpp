#pragma once
// The processor model: an alternating cascade of temporal phase modulators
// and line-by-line spectral phase shapers acting on the mode grid.

#include <vector>

#include "afp/spectral.hpp"

namespace afp {

/// One sinusoidal drive term of a modulator: amplitude * sin(2*pi*harmonic*
/// j/m_total + phase) evaluated at time sample j. Harmonic h completes h
/// cycles per temporal period.
struct Tone {
  int harmonic = 1;
  double amplitude = 0.0;
  double phase = 0.0;  // wrapped to (-pi, pi] at construction
};

/// Temporal phase profile of a modulator: either a free sample per time bin
/// or a sum of sinusoidal tones.
struct Modulation {
  enum class Kind { Arbitrary, Tonal };

  Kind kind = Kind::Arbitrary;
  std::vector<double> phases;  // Arbitrary: one sample per time bin
  std::vector<Tone> tones;     // Tonal: distinct positive harmonics

  /// Free profile; samples are wrapped to (-pi, pi].
  static Modulation arbitrary(std::vector<double> phases);
  /// Sinusoidal profile; amplitudes must be finite and >= 0, harmonics
  /// distinct and >= 1. Tone phases are wrapped to (-pi, pi].
  static Modulation tonal(std::vector<Tone> tones);
};

struct Element {
  enum class Kind { Modulator, Shaper };

  Kind kind = Kind::Modulator;
  Modulation modulation;              // Modulator only
  std::vector<double> shaper_phases;  // Shaper only, one per support mode

  static Element modulator(Modulation m);
  /// Phases are wrapped to (-pi, pi]; size must equal the grid's
  /// shaper_support (checked when the element meets a grid).
  static Element shaper(std::vector<double> phases);
};

/// A processor design: the element sequence plus the grid it acts on.
/// Elements alternate between modulators and shapers, starting with a
/// modulator. The canonical depth is odd (modulators on both ends);
/// even-depth cascades ending in a shaper are allowed only when
/// allow_even_depth is set.
struct AfpDesign {
  std::vector<Element> elements;
  ModeGrid grid;
  bool allow_even_depth = false;

  AfpDesign() = default;
  AfpDesign(std::vector<Element> elements, ModeGrid grid,
            bool allow_even_depth = false);

  int depth() const { return static_cast<int>(elements.size()); }
};

/// Temporal phase samples phi_j, j = 0..m_total-1, for a modulator element.
std::vector<double> modulator_phase_profile(const Element& e,
                                            const ModeGrid& grid);

/// Full-basis operator of one modulator: F diag(exp(i*phi)) F^dag, where
/// the diagonal holds the temporal phase samples. Conjugation by the DFT
/// moves the pointwise temporal action into the frequency basis.
Mat modulator_operator(const Element& e, const ModeGrid& grid);

/// Full-basis operator of one shaper: diagonal exp(i*theta) on the support
/// window and 1 elsewhere.
Mat shaper_operator(const Element& e, const ModeGrid& grid);

/// Product of all element operators, first listed element acting first on
/// the input state (so it is the rightmost factor).
Mat cascade_operator(const AfpDesign& design);

/// The channel-window block of the cascade.
Mat channel_matrix(const AfpDesign& design);

/// Design whose cascade is the adjoint of the input's: element order is
/// reversed and every applied phase profile is negated. For tonal drives
/// the negation shifts each tone phase by pi, which flips the sine without
/// touching the amplitude.
AfpDesign dual_design(const AfpDesign& design);

}  // namespace afp
