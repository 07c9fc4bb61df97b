#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "riverflow/errors.hpp"

namespace riverflow {

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence (machine precision).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  static const GaussLegendre& order(int n);
};

namespace detail {

template <class F>
auto gl_panel(F&& f, double a, double b, const GaussLegendre& gl) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  using R = decltype(f(mid));
  R sum{};
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
  }
  return R(half * sum);
}

// Panel value with an embedded lower-order error estimate.
template <class F, class R>
void adapt(F& f, double a, double b, double tol, const GaussLegendre& gl,
           const GaussLegendre& gl_low, int depth, R& acc) {
  const R high = gl_panel(f, a, b, gl);
  const R low = gl_panel(f, a, b, gl_low);
  const double mid = 0.5 * (a + b);
  // Below the rounding floor further refinement only measures noise.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(high);
  if (std::abs(high - low) <= std::max(tol, noise) || mid <= a || mid >= b) {
    acc += high;
    return;
  }
  if (depth <= 0) throw NumericsError("adaptive quadrature failed to converge");
  adapt(f, a, mid, 0.5 * tol, gl, gl_low, depth - 1, acc);
  adapt(f, mid, b, 0.5 * tol, gl, gl_low, depth - 1, acc);
}

}  // namespace detail

struct AdaptiveOptions {
  double rtol = 1e-10;
  double abs_floor = 0.0;  // absolute tolerance floor for near-zero integrals
  int gl_order = 32;
  int max_depth = 48;
};

/// Adaptive composite Gauss-Legendre integration of f over [a, b].
/// Seed breakpoints may be supplied to pre-split the interval when the
/// integrand has widely separated scales.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt = {},
                        const std::vector<double>& breakpoints = {}) {
  using R = decltype(f(a));
  const GaussLegendre& gl = GaussLegendre::order(opt.gl_order);
  const GaussLegendre& gl_low = GaussLegendre::order(opt.gl_order / 2);

  std::vector<double> edges;
  edges.push_back(a);
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);

  // Pilot pass fixes the absolute tolerance for every sub-panel.
  R pilot{};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    pilot += detail::gl_panel(f, edges[i], edges[i + 1], gl_low);
  }
  const double tol = std::max(opt.rtol * std::abs(pilot), opt.abs_floor);
  const double panel_tol = tol / static_cast<double>(edges.size() - 1);

  R acc{};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    detail::adapt(f, edges[i], edges[i + 1], panel_tol, gl, gl_low, opt.max_depth, acc);
  }
  return acc;
}

/// Geometric breakpoints {b/2, b/4, ...} down to roughly `finest`; a good
/// seed split for exponentially decaying integrands on [0, b].
std::vector<double> geometric_breakpoints(double b, double finest);

/// Integral of f over [0, upper] through the substitution t = w^2, which
/// regularizes endpoint behavior t^alpha (alpha > 0) at t = 0. `finest`
/// sets the smallest seed panel in t-units.
template <class F>
auto integrate_sqrt_sub(F&& f, double upper, const AdaptiveOptions& opt, double finest) {
  const double w_max = std::sqrt(upper);
  const auto g = [&](double w) { return 2.0 * w * f(w * w); };
  return integrate_adaptive(g, 0.0, w_max, opt,
                            geometric_breakpoints(w_max, std::sqrt(std::min(finest, upper))));
}

}  // namespace riverflow
