#pragma once

#include "spdelab/green_kernel.hpp"
#include "spdelab/solvers.hpp"

namespace spdelab::oracle {

// Fixed-point iteration of the mild form
//   U(t) = int G_t(.,y) eta(y) dy + J_G(f(U)) - J_{dyG}(g(U))
// with trapezoid/left-rectangle quadrature on the grid of `p`.
inline PathField mild_picard(const SimParams& p, int iterations) {
  const GridSpec& g = p.grid;
  const KernelConfig kc;
  PathField free(g);
  free.set_frame(0, p.initial);
  for (std::size_t n = 1; n < free.frames(); ++n) {
    auto dst = free.interior(n);
    for (std::size_t i = 0; i < g.nx(); ++i) {
      double s = 0.0;
      for (std::size_t j = 1; j <= g.nx(); ++j) s += green(g.t(n), g.x(i + 1), g.x(j), kc) * p.initial[j];
      dst[i] = s * g.dx();
    }
  }
  PathField u = free;
  for (int k = 0; k < iterations; ++k) {
    PathField fu(g), gu(g);
    for (std::size_t n = 0; n < u.frames(); ++n) {
      auto src = u.interior(n);
      auto a = fu.interior(n);
      auto b = gu.interior(n);
      for (std::size_t i = 0; i < g.nx(); ++i) {
        a[i] = p.coefficients.f(g.t(n), g.x(i + 1), src[i]);
        b[i] = p.coefficients.g(g.t(n), g.x(i + 1), src[i]);
      }
    }
    u = free + apply_J(fu, KernelKind::G, kc) - apply_J(gu, KernelKind::DyG, kc);
  }
  return u;
}

}  // namespace spdelab::oracle
