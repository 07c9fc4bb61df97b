#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "riverflow/network.hpp"

namespace riverflow {

/// Per-edge inverse residence times (1/s): K for streams, H for hillslopes.
struct HydraulicParams {
  Eigen::VectorXd K;
  Eigen::VectorXd H;

  void validate(int n_edges) const;
};

/// Drift matrix of the coupled stream/hillslope system,
///   [ -K Lambda   K ]
///   [     O      -H ]
/// block upper triangular with spectrum {-K_e} U {-H_e}.
Eigen::MatrixXd build_system_matrix(const RiverNetwork& net, const HydraulicParams& params);

/// Deterministic flow map exp(M t) for t >= 0.
Eigen::MatrixXd flow_map(const Eigen::MatrixXd& system_matrix, double t);

/// Geomorphological kernel m(u): the lower-left n x n block of
/// exp(tau M^T) with tau = -ln(u)/H_r, u in (0, 1]. Column e mediates
/// between the rainfall transform and the discharge transform at edge e.
Eigen::MatrixXd m_matrix(const RiverNetwork& net, const HydraulicParams& params, double u);

/// Closed form of m(u) for spatially uniform parameters (K_e = K_r,
/// H_e = H_r, beta = H_r/K_r):  {[Lambda - beta I]^-1 [u I - u^{Lambda/beta}]}^T.
Eigen::MatrixXd m_homogeneous(const RiverNetwork& net, double beta, double u);

/// Small-beta linear approximation m0(u) = (Lambda^-1)^T u.
Eigen::MatrixXd m_zero(const RiverNetwork& net, double u);

/// M_e(u) = H a . m_e(u) evaluated on a u-grid; vanishes at both endpoints.
Eigen::VectorXd M_e_profile(const RiverNetwork& net, const HydraulicParams& params, int e,
                            const std::vector<double>& u_grid);

/// Unit hydrographs Theta(t) = exp(M t) [0; H a / a] for an instantaneous
/// unit depth falling uniformly on every hillslope.
Eigen::VectorXd hydrograph_exp(const RiverNetwork& net, const HydraulicParams& params, double t);

/// Same discharge hydrograph at edge e assembled from travel-time
/// convolutions along each flow path (hypoexponential closed form).
double hydrograph_conv(const RiverNetwork& net, const HydraulicParams& params, int e, double t);

/// Cached evaluator for m-columns along the tau axis, shared by the
/// transform and moment machinery. Single-threaded use.
class GeomorphKernel {
 public:
  GeomorphKernel(const RiverNetwork& net, const HydraulicParams& params);

  int n() const { return n_; }
  double Hr() const { return Hr_; }
  /// Slowest relaxation rate, min_e min(K_e, H_e); sets truncation spans.
  double kappa_min() const { return kappa_min_; }
  double fastest_rate() const { return rate_max_; }
  const Eigen::MatrixXd& system_matrix() const { return M_; }
  const Eigen::VectorXd& Ha() const { return Ha_; }

  /// Column e of m at tau = -ln(u)/H_r (cached per edge).
  const Eigen::VectorXd& m_column(int e, double tau) const;
  /// M_e = Ha . m_e at tau.
  double M_profile(int e, double tau) const;

 private:
  Eigen::VectorXd column_direct(int e, double tau) const;
  Eigen::VectorXd column_block(int e, double tau) const;

  int n_;
  double Hr_, kappa_min_, rate_max_;
  Eigen::MatrixXd M_, Mt_;
  Eigen::VectorXd Ha_, K_, H_;
  Eigen::MatrixXd A_;     // stream block -K Lambda
  bool block_path_ = false;
  mutable std::vector<Eigen::MatrixXd> row_solves_;  // per edge: columns w_j
  mutable std::vector<std::map<double, Eigen::VectorXd>> cache_;
};

}  // namespace riverflow
