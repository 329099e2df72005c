#pragma once
// Rotationally symmetric damping coefficients a(x). Shared between the
// geodesic GCC checker (which only needs the region {a > 0} in ell) and the
// wave solver (which samples a on the chart grid).

#include <string>

#include "zoll/geometry.hpp"

namespace zoll {

enum class DampingKind {
  None,
  IndicatorUpper,     // 1_{x > 0}, upper hemi-surface
  HalfNeighborhood,   // delta * 1_{0 < ell - ell0 < width}
  SmoothVanishing,    // tanh(x)^power on x > 0, vanishes at the equator
  Uniform             // a = 1 everywhere
};

struct DampingSpec {
  DampingKind kind = DampingKind::None;
  double delta = 1.0;   // half_neighborhood amplitude
  double width = 0.3;   // half_neighborhood width, measured in ell
  int power = 2;        // smooth_vanishing vanishing order

  // pointwise coefficient on the chart; the x = 0 node of an indicator gets
  // the symmetric value 1/2 (half-weight interface treatment)
  double value_at_x(double x, const IsothermalChart& chart) const;

  // open region {a > 0} in the ell coordinate
  bool positive_at_ell(double ell, double ell0) const;

  static DampingSpec parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace zoll
