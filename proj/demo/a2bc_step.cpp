// Splits a 1x4 step into cartoon, texture and noise.
#include <cstdio>

#include "hjd/models/models.hpp"

int main() {
  using namespace hjd;
  const ImageGrid x(1, 4, (Vector(4) << 0, 0, 1, 1).finished());
  ModelOptions opt;
  opt.variant = TvVariant::full;  // a single row has no differences otherwise
  const DecompositionResult r = a2bc(x, 0.05, 0.1, opt);

  auto row = [](const char* name, const Vector& v) {
    std::printf("%-3s", name);
    for (Index i = 0; i < v.size(); ++i) std::printf(" %8.4f", v[i]);
    std::printf("\n");
  };
  row("u", r.residual);
  row("v", r.components[0]);
  row("w", r.components[1]);
  row("p", *r.momentum);
  std::printf("S = %.10f  gap = %.2e  iterations = %ld\n", r.value, r.duality_gap, r.iterations);
  return r.converged ? 0 : 1;
}
