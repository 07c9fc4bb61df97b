#include "riverflow/moments.hpp"

#include <cmath>

#include "riverflow/quadrature.hpp"

namespace riverflow {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Depth-first enumeration over index vectors j with sum j_i = k and
// sum i j_i = n; each contributes n! / prod(j_i! (i!)^{j_i}) prod x_i^{j_i}.
void enumerate_bell(int n, int k, std::span<const double> x, int i, int parts_left,
                    int weight_left, double coeff, double& total) {
  if (parts_left == 0) {
    if (weight_left == 0) total += coeff;
    return;
  }
  const int max_i = static_cast<int>(x.size());
  if (i > max_i) return;
  // Remaining parts must be able to reach the remaining weight.
  if (weight_left < parts_left * i || weight_left > parts_left * max_i) return;
  for (int j = 0; j * i <= weight_left && j <= parts_left; ++j) {
    double c = coeff;
    for (int r = 0; r < j; ++r) c *= x[i - 1] / factorial(i);
    c /= factorial(j);
    enumerate_bell(n, k, x, i + 1, parts_left - j, weight_left - j * i, c, total);
  }
}

}  // namespace

double bell_polynomial(int n, int k, std::span<const double> x) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("bell polynomial requires 1 <= k <= n");
  if (static_cast<int>(x.size()) < n - k + 1) {
    throw std::invalid_argument("bell polynomial needs n-k+1 arguments");
  }
  double total = 0.0;
  enumerate_bell(n, k, x.first(static_cast<std::size_t>(n - k + 1)), 1, k, n, 1.0, total);
  return factorial(n) * total;
}

MomentEngine::MomentEngine(const RiverNetwork& net, const HydraulicParams& params,
                           double quad_rtol)
    : net_(net), params_(params), rtol_(quad_rtol), kernel_(net, params) {
  a_total_ = net.total_area();
  Kr_ = params.K[net.root_index()];
  beta_atilde_ = params.H.cwiseProduct(net.areas()) / (Kr_ * a_total_);
}

double MomentEngine::c_coefficient(int e, double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("c_alpha requires alpha > 0");
  // Integrand ~ exp(-alpha kappa tau) in the tail for alpha < 1.
  const double tau_max =
      std::log(1.0 / 1e-14) / (kernel_.kappa_min() * std::min(alpha, 1.0));
  const auto integrand = [&](double tau) {
    return std::pow(beta_atilde_.dot(kernel_.m_column(e, tau)), alpha);
  };
  AdaptiveOptions opt;
  opt.rtol = rtol_;
  return kernel_.Hr() *
         integrate_sqrt_sub(integrand, tau_max, opt, 0.1 / kernel_.fastest_rate());
}

MomentResult MomentEngine::moment(const RainfallModel& rain, int e, int n) const {
  if (n < 1) throw std::invalid_argument("moment order must be >= 1");
  if (rain.mode != SpatialMode::Uniform) {
    throw ModelError("moment formulas require spatially uniform rainfall");
  }
  const MarkDistribution& mark = rain.mark(0);
  if (!mark.has_finite_moment(n)) return {0.0, true};

  // Dimensionless inner sum first; the (a K_r)^n scale is applied last.
  std::vector<double> args(n);  // m_P^(i) c_i in m^i
  for (int i = 1; i <= n; ++i) args[i - 1] = mark.moment(i) * c_coefficient(e, i);
  const double rate_ratio = rain.lambda_per_s / kernel_.Hr();
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    sum += std::pow(rate_ratio, k) *
           bell_polynomial(n, k, std::span<const double>(args.data(), n - k + 1));
  }
  return {std::pow(a_total_ * Kr_, n) * sum, false};
}

double MomentEngine::M_star(int e) const {
  double u_star = 0.0;
  return M_star(e, &u_star);
}

double MomentEngine::M_star(int e, double* u_star) const {
  const double Hr = kernel_.Hr();
  const auto value = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return kernel_.M_profile(e, -std::log(u) / Hr);
  };

  const int grid = 1024;
  int best = 0;
  double best_val = -1.0;
  for (int i = 1; i < grid; ++i) {
    const double v = value(static_cast<double>(i) / grid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = (best - 1.0) / grid;
  double hi = (best + 1.0) / grid;

  // Golden-section refinement to 1e-10 in u.
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = value(x1);
    }
  }
  if (u_star) *u_star = 0.5 * (lo + hi);
  return value(0.5 * (lo + hi));
}

double c_coefficient(const RiverNetwork& net, const HydraulicParams& params, int e, double alpha) {
  return MomentEngine(net, params).c_coefficient(e, alpha);
}

MomentResult moment_n(const RiverNetwork& net, const HydraulicParams& params,
                      const RainfallModel& rain, int e, int n) {
  return MomentEngine(net, params).moment(rain, e, n);
}

ParetoTail pareto_tail(const RiverNetwork& net, const HydraulicParams& params,
                       const RainfallModel& rain, int e) {
  if (rain.mode != SpatialMode::Uniform) {
    throw ModelError("tail formulas require spatially uniform rainfall");
  }
  const MarkDistribution& mark = rain.mark(0);
  if (mark.family() != MarkFamily::Pareto) {
    throw ModelError("pareto_tail requires Pareto marks");
  }
  const double alpha = mark.param1();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ModelError("pareto tail asymptotics require 0 < alpha < 1");
  }
  MomentEngine engine(net, params);
  const double k = mark.param2();
  const double Kr = params.K[net.root_index()];
  const double Hr = params.H[net.root_index()];
  ParetoTail tail;
  tail.exponent = alpha;
  tail.coefficient = rain.lambda_per_s * std::pow(k * net.total_area() * Kr, alpha) *
                     engine.c_coefficient(e, alpha) / Hr;
  return tail;
}

double exp_tail_rate(const RiverNetwork& net, const HydraulicParams& params,
                     const RainfallModel& rain, int e) {
  if (rain.mode != SpatialMode::Uniform) {
    throw ModelError("tail formulas require spatially uniform rainfall");
  }
  const MarkDistribution& mark = rain.mark(0);
  if (mark.family() != MarkFamily::Exponential) {
    throw ModelError("exp_tail_rate requires exponential marks");
  }
  const double sigma = 1.0 / mark.param1();
  return sigma / MomentEngine(net, params).M_star(e);
}

}  // namespace riverflow
