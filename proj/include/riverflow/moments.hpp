#pragma once

#include <span>
#include <vector>

#include "riverflow/dynamics.hpp"
#include "riverflow/network.hpp"
#include "riverflow/rainfall.hpp"

namespace riverflow {

/// Partial (exponential) Bell polynomial B_{n,k}(x_1..x_{n-k+1}) by exact
/// enumeration of the index vectors with sum j_i = k and sum i j_i = n.
double bell_polynomial(int n, int k, std::span<const double> x);

struct MomentResult {
  double value = 0.0;
  bool infinite = false;
};

/// Shared engine for the geomorphological coefficients c_alpha and the
/// invariant moments of discharge. Uniform-rainfall machinery.
class MomentEngine {
 public:
  MomentEngine(const RiverNetwork& net, const HydraulicParams& params, double quad_rtol = 1e-12);

  /// c_alpha at edge e: int_0^1 [beta a~ . m_e(u)]^alpha du/u, alpha > 0.
  double c_coefficient(int e, double alpha) const;

  /// n-th invariant moment of Q_e under uniform rainfall, in (m^3/s)^n;
  /// flagged infinite when the mark lacks an n-th moment.
  MomentResult moment(const RainfallModel& rain, int e, int n) const;

  /// Maximum of M_e(u) = H a . m_e(u) over u in [0, 1] (attained strictly
  /// inside), by 1024-point scan plus golden-section refinement.
  double M_star(int e) const;
  double M_star(int e, double* u_star) const;

  const GeomorphKernel& kernel() const { return kernel_; }

 private:
  const RiverNetwork& net_;
  const HydraulicParams& params_;
  double rtol_;
  GeomorphKernel kernel_;
  double a_total_, Kr_;
  Eigen::VectorXd beta_atilde_;  // (H_e/K_r) (a_e/a)
};

double c_coefficient(const RiverNetwork& net, const HydraulicParams& params, int e, double alpha);

MomentResult moment_n(const RiverNetwork& net, const HydraulicParams& params,
                      const RainfallModel& rain, int e, int n);

struct ParetoTail {
  double coefficient = 0.0;  // C in P(Q_e > x) ~ C x^{-alpha}
  double exponent = 0.0;     // alpha
};

/// Power-law tail of the invariant discharge for Pareto(alpha, k) marks,
/// 0 < alpha < 1, under uniform rainfall.
ParetoTail pareto_tail(const RiverNetwork& net, const HydraulicParams& params,
                       const RainfallModel& rain, int e);

/// Exponential decay rate sigma / M_e* of log P(Q_e > x) for exponential
/// marks under uniform rainfall (1/(m^3/s)).
double exp_tail_rate(const RiverNetwork& net, const HydraulicParams& params,
                     const RainfallModel& rain, int e);

}  // namespace riverflow
