#include "zoll/damping.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace zoll {

double DampingSpec::value_at_x(double x, const IsothermalChart& chart) const {
  switch (kind) {
    case DampingKind::None:
      return 0.0;
    case DampingKind::Uniform:
      return 1.0;
    case DampingKind::IndicatorUpper:
      if (x > 0.0) return 1.0;
      return (x == 0.0) ? 0.5 : 0.0;
    case DampingKind::HalfNeighborhood: {
      double wx = chart.x_from_ell(chart.ell0 + width);
      if (x > 0.0 && x < wx) return delta;
      return (x == 0.0 || x == wx) ? 0.5 * delta : 0.0;
    }
    case DampingKind::SmoothVanishing: {
      if (x <= 0.0) return 0.0;
      double t = std::tanh(x);
      return std::pow(t, power);
    }
  }
  return 0.0;
}

bool DampingSpec::positive_at_ell(double ell, double ell0) const {
  switch (kind) {
    case DampingKind::None:
      return false;
    case DampingKind::Uniform:
      return true;
    case DampingKind::IndicatorUpper:
    case DampingKind::SmoothVanishing:
      return ell > ell0;
    case DampingKind::HalfNeighborhood:
      return ell > ell0 && ell < ell0 + width;
  }
  return false;
}

DampingSpec DampingSpec::parse(const std::string& text) {
  DampingSpec d;
  auto args_of = [&](std::size_t open) {
    std::size_t close = text.rfind(')');
    if (close == std::string::npos || close <= open)
      throw std::invalid_argument("damping: malformed argument list in '" + text + "'");
    return text.substr(open + 1, close - open - 1);
  };
  if (text == "none") {
    d.kind = DampingKind::None;
  } else if (text == "uniform") {
    d.kind = DampingKind::Uniform;
  } else if (text == "indicator_upper") {
    d.kind = DampingKind::IndicatorUpper;
  } else if (text.rfind("half_neighborhood", 0) == 0) {
    d.kind = DampingKind::HalfNeighborhood;
    std::size_t open = text.find('(');
    if (open != std::string::npos) {
      if (std::sscanf(args_of(open).c_str(), "%lf , %lf", &d.delta, &d.width) != 2)
        throw std::invalid_argument("damping: expected half_neighborhood(delta, width)");
    }
    if (d.delta <= 0 || d.width <= 0)
      throw std::invalid_argument("damping: half_neighborhood needs positive delta, width");
  } else if (text.rfind("smooth_vanishing", 0) == 0) {
    d.kind = DampingKind::SmoothVanishing;
    std::size_t open = text.find('(');
    if (open != std::string::npos) {
      if (std::sscanf(args_of(open).c_str(), "%d", &d.power) != 1)
        throw std::invalid_argument("damping: expected smooth_vanishing(power)");
    }
    if (d.power < 1) throw std::invalid_argument("damping: power must be >= 1");
  } else {
    throw std::invalid_argument("damping: unknown kind '" + text + "'");
  }
  return d;
}

std::string DampingSpec::to_string() const {
  char buf[64];
  switch (kind) {
    case DampingKind::None:
      return "none";
    case DampingKind::Uniform:
      return "uniform";
    case DampingKind::IndicatorUpper:
      return "indicator_upper";
    case DampingKind::HalfNeighborhood:
      std::snprintf(buf, sizeof(buf), "half_neighborhood(%g, %g)", delta, width);
      return buf;
    case DampingKind::SmoothVanishing:
      std::snprintf(buf, sizeof(buf), "smooth_vanishing(%d)", power);
      return buf;
  }
  return "none";
}

}  // namespace zoll
