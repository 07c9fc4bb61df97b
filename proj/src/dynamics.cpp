#include "riverflow/dynamics.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "riverflow/expm.hpp"

namespace riverflow {

void HydraulicParams::validate(int n_edges) const {
  if (K.size() != n_edges || H.size() != n_edges) {
    throw std::invalid_argument("hydraulic parameter dimensions do not match the network");
  }
  if ((K.array() <= 0.0).any() || (H.array() <= 0.0).any()) {
    throw std::invalid_argument("inverse residence times must be positive");
  }
}

Eigen::MatrixXd build_system_matrix(const RiverNetwork& net, const HydraulicParams& params) {
  const int n = net.size();
  params.validate(n);
  const Eigen::MatrixXd lambda = incidence_matrix(net).cast<double>();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -(params.K.asDiagonal() * lambda);
  m.topRightCorner(n, n).diagonal() = params.K;
  m.bottomRightCorner(n, n).diagonal() = -params.H;
  return m;
}

Eigen::MatrixXd flow_map(const Eigen::MatrixXd& system_matrix, double t) {
  if (t < 0.0) throw std::invalid_argument("flow map requires t >= 0");
  if (t == 0.0) {
    return Eigen::MatrixXd::Identity(system_matrix.rows(), system_matrix.cols());
  }
  return expm(system_matrix * t);
}

Eigen::MatrixXd m_matrix(const RiverNetwork& net, const HydraulicParams& params, double u) {
  if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("m(u) requires u in (0, 1]");
  const int n = net.size();
  params.validate(n);
  const double Hr = params.H[net.root_index()];
  const double tau = -std::log(u) / Hr;
  const Eigen::MatrixXd mt = build_system_matrix(net, params).transpose();
  return expm(mt * tau).bottomLeftCorner(n, n);
}

Eigen::MatrixXd m_homogeneous(const RiverNetwork& net, double beta, double u) {
  if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("m(u) requires u in (0, 1]");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const int n = net.size();
  // Lambda has all eigenvalues equal to 1, so beta = 1 is singular.
  if (std::abs(beta - 1.0) < 1e-12) {
    throw NumericsError("m_homogeneous is singular at beta = 1");
  }
  const Eigen::MatrixXd lambda = incidence_matrix(net).cast<double>();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd u_pow = expm(lambda * (std::log(u) / beta));
  const Eigen::MatrixXd lhs = lambda - beta * id;
  return lhs.partialPivLu().solve(u * id - u_pow).transpose();
}

Eigen::MatrixXd m_zero(const RiverNetwork& net, double u) {
  if (u < 0.0 || u > 1.0) throw std::invalid_argument("m0(u) requires u in [0, 1]");
  return u * incidence_inverse(net).cast<double>().transpose();
}

Eigen::VectorXd M_e_profile(const RiverNetwork& net, const HydraulicParams& params, int e,
                            const std::vector<double>& u_grid) {
  const int n = net.size();
  params.validate(n);
  if (e < 0 || e >= n) throw std::out_of_range("edge index out of range");
  const Eigen::VectorXd ha = params.H.cwiseProduct(net.areas());
  Eigen::VectorXd out(static_cast<Eigen::Index>(u_grid.size()));
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double u = u_grid[i];
    if (u < 0.0 || u > 1.0) throw std::invalid_argument("u grid must lie in [0, 1]");
    // m(u) -> 0 as u -> 0, so the u = 0 endpoint is exactly zero.
    out[i] = (u == 0.0) ? 0.0 : ha.dot(m_matrix(net, params, u).col(e));
  }
  return out;
}

Eigen::VectorXd hydrograph_exp(const RiverNetwork& net, const HydraulicParams& params, double t) {
  if (t < 0.0) throw std::invalid_argument("hydrograph requires t >= 0");
  const int n = net.size();
  params.validate(n);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * n);
  x0.tail(n) = params.H.cwiseProduct(net.areas()) / net.total_area();
  if (t == 0.0) return x0;
  return expm(build_system_matrix(net, params) * t) * x0;
}

namespace {

// Density at t of a sum of independent exponentials with the given
// distinct rates, by partial fractions. Colliding rates are spread by
// relative 2e-6 steps so the distinct-rate formula stays valid; the
// cancellation error of the spread weights stays below 1e-4 of the
// peak even for triple collisions, which a 1e-9 spread does not.
double hypoexponential_density(std::vector<double> rates, double t) {
  static bool warned = false;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(rates[i] - rates[j]) <= 2e-6 * std::max(rates[i], rates[j])) {
        rates[i] = rates[j] * (1.0 + 2e-6);
        if (!warned) {
          std::cerr << "note: colliding travel-time rates perturbed by 2e-6 relative\n";
          warned = true;
        }
      }
    }
  }
  double density = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
      if (j != i) w *= rates[j] / (rates[j] - rates[i]);
    }
    density += w * rates[i] * std::exp(-rates[i] * t);
  }
  return density;
}

}  // namespace

double hydrograph_conv(const RiverNetwork& net, const HydraulicParams& params, int e, double t) {
  if (t < 0.0) throw std::invalid_argument("hydrograph requires t >= 0");
  const int n = net.size();
  params.validate(n);
  if (e < 0 || e >= n) throw std::out_of_range("edge index out of range");

  const double a_total = net.total_area();
  double theta = 0.0;
  for (int src : subnetwork_indices(net, e)) {
    // Travel path: hillslope of src, then the streams from src down to e.
    std::vector<double> rates{params.H[src]};
    for (int cur = src;; cur = *net.edge(cur).parent) {
      rates.push_back(params.K[cur]);
      if (cur == e) break;
    }
    theta += net.edge(src).area_m2 / a_total * hypoexponential_density(std::move(rates), t);
  }
  return theta;
}

GeomorphKernel::GeomorphKernel(const RiverNetwork& net, const HydraulicParams& params)
    : n_(net.size()) {
  params.validate(n_);
  Hr_ = params.H[net.root_index()];
  kappa_min_ = std::min(params.K.minCoeff(), params.H.minCoeff());
  rate_max_ = std::max(params.K.maxCoeff(), params.H.maxCoeff());
  M_ = build_system_matrix(net, params);
  Mt_ = M_.transpose();
  K_ = params.K;
  H_ = params.H;
  Ha_ = params.H.cwiseProduct(net.areas());
  A_ = M_.topLeftCorner(n_, n_);
  cache_.resize(n_);
  row_solves_.resize(n_);

  // The cheap block evaluation needs the shifts A + H_j I nonsingular and
  // well conditioned, i.e. no stream rate close to a hillslope rate.
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) min_gap = std::min(min_gap, std::abs(K_[i] - H_[j]));
  }
  block_path_ = min_gap > 1e-6 * rate_max_;
}

// Full 2n x 2n matrix exponential; always valid.
Eigen::VectorXd GeomorphKernel::column_direct(int e, double tau) const {
  return expm(Mt_ * tau).block(n_, 0, n_, n_).col(e);
}

// With M = [[A, K], [0, -H]] the needed column is a row of the coupling
// block: m(tau)_{j,e} = K_j w_{e,j} . (exp(tau A) - exp(-tau H_j) I) e_j
// with (A + H_j I)^T w_{e,j} = e_e, so each tau costs one n x n
// exponential plus dot products.
Eigen::VectorXd GeomorphKernel::column_block(int e, double tau) const {
  Eigen::MatrixXd& w = row_solves_[e];
  if (w.size() == 0) {
    w.resize(n_, n_);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n_);
    unit[e] = 1.0;
    for (int j = 0; j < n_; ++j) {
      const Eigen::MatrixXd shifted =
          (A_ + H_[j] * Eigen::MatrixXd::Identity(n_, n_)).transpose();
      // Lower triangular in canonical order.
      w.col(j) = shifted.triangularView<Eigen::Lower>().solve(unit);
    }
  }
  const Eigen::MatrixXd et = expm(A_ * tau);
  Eigen::VectorXd col(n_);
  for (int j = 0; j < n_; ++j) {
    col[j] = K_[j] * (w.col(j).dot(et.col(j)) - std::exp(-tau * H_[j]) * w(j, j));
  }
  return col;
}

const Eigen::VectorXd& GeomorphKernel::m_column(int e, double tau) const {
  if (e < 0 || e >= n_) throw std::out_of_range("edge index out of range");
  auto& cache = cache_[e];
  auto it = cache.find(tau);
  if (it == cache.end()) {
    it = cache.emplace(tau, block_path_ ? column_block(e, tau) : column_direct(e, tau)).first;
  }
  return it->second;
}

double GeomorphKernel::M_profile(int e, double tau) const {
  return Ha_.dot(m_column(e, tau));
}

}  // namespace riverflow
