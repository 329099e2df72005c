// Serial-reference vs parallel timing for the two hot paths: spectrum
// assembly (per-k solves) and the geodesic region check (per-orbit flows).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "zoll/geodesics.hpp"
#include "zoll/geometry.hpp"
#include "zoll/par.hpp"
#include "zoll/spectral.hpp"

using namespace zoll;

namespace {
double seconds(auto fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}
}  // namespace

int main() {
  auto p = std::make_shared<const SurfaceProfile>(
      validate_profile(std::vector<double>{0.1}, 4097));
  auto ch = build_chart(p, 8.0, 4097);
  DampingSpec region = DampingSpec::parse("indicator_upper");

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");
  {
    par::set_threads(1);
    double ts = seconds([&] { assemble_spectrum(ch, 12, 1.0); });
    par::set_threads(0);
    double tp = seconds([&] { assemble_spectrum(ch, 12, 1.0); });
    std::printf("%-28s %9.3fs %9.3fs %7.2fx\n", "assemble_spectrum(n=12)", ts, tp,
                ts / tp);
  }
  {
    par::set_threads(1);
    double ts = seconds([&] { check_gcc(*p, region, 60); });
    par::set_threads(0);
    double tp = seconds([&] { check_gcc(*p, region, 60); });
    std::printf("%-28s %9.3fs %9.3fs %7.2fx\n", "check_gcc(60 orbits)", ts, tp,
                ts / tp);
  }
  par::set_threads(0);
  return 0;
}
