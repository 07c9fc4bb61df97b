#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

#include "riverflow/dynamics.hpp"
#include "riverflow/network.hpp"
#include "riverflow/rainfall.hpp"
#include "riverflow/zakian.hpp"

namespace riverflow {

struct TransformSettings {
  double rtol = 1e-10;        // relative quadrature tolerance
  double trunc_eps = 1e-14;   // tail truncation level for the tau integral
};

/// Laplace transforms of the transition law and the invariant law of the
/// state X = [Q; R], evaluated by adaptive Gauss-Legendre quadrature in
/// tau-space (u = exp(-H_r tau)). Immutable inputs; the internal kernel
/// cache makes evaluation single-threaded.
class TransformEvaluator {
 public:
  TransformEvaluator(const RiverNetwork& net, const HydraulicParams& params,
                     const RainfallModel& rain, TransformSettings settings = {});

  /// Invariant transform E_g[exp(-s . X)] at real s >= 0 componentwise.
  double g_tilde(const Eigen::VectorXd& s) const;

  /// Invariant transform of the discharge Q_e alone.
  double ge_tilde(int e, double s) const;
  std::complex<double> ge_tilde(int e, std::complex<double> s) const;

  /// Transition transform E_x[exp(-s . X(t))].
  double p_tilde(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& s) const;

  /// Invariant density of Q_e on a positive grid via Zakian inversion.
  /// Requires complex-evaluable marks (not Pareto) and a passing gate.
  InversionResult density_profile(int e, std::span<const double> x_grid) const;

  double tau_max() const { return tau_max_; }
  const GeomorphKernel& kernel() const { return kernel_; }

 private:
  template <class Scalar>
  Scalar mark_aggregate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v2) const;
  template <class Scalar>
  Scalar ge_exponent(int e, Scalar s) const;

  const RiverNetwork& net_;
  const HydraulicParams& params_;
  const RainfallModel& rain_;
  TransformSettings settings_;
  GeomorphKernel kernel_;
  double tau_max_;
};

}  // namespace riverflow
