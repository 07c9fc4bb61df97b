#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "riverflow/dynamics.hpp"
#include "riverflow/network.hpp"
#include "riverflow/rainfall.hpp"

namespace riverflow {

/// Event-indexed sample path of the state X = [Q; R]. Between events the
/// path follows the deterministic flow map exactly; at each storm the R
/// components jump by H_e a_e P_e while Q stays continuous.
struct StatePath {
  const RiverNetwork* net = nullptr;
  const HydraulicParams* params = nullptr;
  std::vector<double> times;               // T0 = 0, then storm times <= horizon
  std::vector<Eigen::VectorXd> states;     // post-jump states at `times`
  std::vector<Eigen::VectorXd> depths;     // storm depth vectors (size times-1)
  double horizon = 0.0;

  int storm_count() const { return static_cast<int>(times.size()) - 1; }
};

/// Exact event-driven simulation: storm times from a Poisson process of
/// rate lambda, deterministic flow between storms (no stepping error).
StatePath simulate(const RiverNetwork& net, const HydraulicParams& params,
                   const RainfallModel& rain, double horizon_s, const Eigen::VectorXd& x0,
                   std::uint64_t seed);

/// States at arbitrary times in [0, horizon]; one column per time.
Eigen::MatrixXd sample_path(const StatePath& path, const std::vector<double>& times);

/// States on the uniform grid t_i = (i + 1/2) horizon / count, advanced
/// incrementally inside each inter-event interval.
Eigen::MatrixXd sample_uniform_grid(const StatePath& path, int count);

/// Invariant mean [lambda Lambda^-1 (a o EP); lambda (a o EP)].
Eigen::VectorXd invariant_mean(const RiverNetwork& net, const HydraulicParams& params,
                               const RainfallModel& rain);

/// Time average of w . X(t) over [0, horizon]; the between-event integral
/// uses the closed form M^-1 (flow(dt) - I) exactly.
double ergodic_average_linear(const StatePath& path, const Eigen::VectorXd& w);

/// Time average of f(X(t)) with fixed-order Gauss-Legendre integration
/// on each inter-event interval.
double ergodic_average(const StatePath& path,
                       const std::function<double(const Eigen::VectorXd&)>& observable,
                       int gl_order = 16);

/// Relative residual of the storage-outflow balance
///   S(T) - S(0) + int Q_r dt = total rained volume,
/// with storage S = sum_e (Q_e/K_e + R_e/H_e). Zero for exact paths.
double volume_balance_residual(const StatePath& path);

}  // namespace riverflow
