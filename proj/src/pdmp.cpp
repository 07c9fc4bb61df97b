#include "riverflow/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "riverflow/expm.hpp"
#include "riverflow/quadrature.hpp"

namespace riverflow {

StatePath simulate(const RiverNetwork& net, const HydraulicParams& params,
                   const RainfallModel& rain, double horizon_s, const Eigen::VectorXd& x0,
                   std::uint64_t seed) {
  const int n = net.size();
  params.validate(n);
  if (!(horizon_s > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (x0.size() != 2 * n) throw std::invalid_argument("x0 must have dimension 2n");
  if ((x0.array() < 0.0).any()) throw std::invalid_argument("x0 must be nonnegative");

  const Eigen::MatrixXd m = build_system_matrix(net, params);
  const Eigen::VectorXd ha = params.H.cwiseProduct(net.areas());
  const double mean_gap = 1.0 / rain.lambda_per_s;

  StatePath path;
  path.net = &net;
  path.params = &params;
  path.horizon = horizon_s;
  path.times.push_back(0.0);
  path.states.push_back(x0);

  RngStream arrivals(seed, stream_key(streams::kStormTimes));
  double t = arrivals.exponential(mean_gap);
  std::uint64_t storm = 0;
  while (t <= horizon_s) {
    const double gap = t - path.times.back();
    Eigen::VectorXd state = expm(m * gap) * path.states.back();
    const Eigen::VectorXd depth = sample_storm(rain, n, seed, storm);
    state.tail(n) += ha.cwiseProduct(depth);
    path.times.push_back(t);
    path.states.push_back(std::move(state));
    path.depths.push_back(depth);
    t += arrivals.exponential(mean_gap);
    ++storm;
  }
  return path;
}

namespace {

// Index of the last event at or before t.
std::size_t interval_of(const StatePath& path, double t) {
  auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  return static_cast<std::size_t>(std::distance(path.times.begin(), it)) - 1;
}

}  // namespace

Eigen::MatrixXd sample_path(const StatePath& path, const std::vector<double>& times) {
  const Eigen::MatrixXd m = build_system_matrix(*path.net, *path.params);
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < 0.0 || t > path.horizon) throw std::out_of_range("sample time outside [0, horizon]");
    const std::size_t k = interval_of(path, t);
    const double dt = t - path.times[k];
    out.col(i) = dt == 0.0 ? path.states[k] : (expm(m * dt) * path.states[k]).eval();
  }
  return out;
}

Eigen::MatrixXd sample_uniform_grid(const StatePath& path, int count) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const Eigen::MatrixXd m = build_system_matrix(*path.net, *path.params);
  const double dt = path.horizon / count;
  const Eigen::MatrixXd step = expm(m * dt);

  Eigen::MatrixXd out(m.rows(), count);
  Eigen::VectorXd current;
  std::size_t interval = 0;
  for (int i = 0; i < count; ++i) {
    const double t = (i + 0.5) * dt;
    const std::size_t k = interval_of(path, t);
    if (i == 0 || k != interval) {
      interval = k;
      current = expm(m * (t - path.times[k])) * path.states[k];
    } else {
      current = step * current;
    }
    out.col(i) = current;
  }
  return out;
}

Eigen::VectorXd invariant_mean(const RiverNetwork& net, const HydraulicParams& params,
                               const RainfallModel& rain) {
  const int n = net.size();
  params.validate(n);
  Eigen::VectorXd mean_depth(n);
  for (int e = 0; e < n; ++e) {
    const double m1 = rain.mark(e).moment(1);
    if (!std::isfinite(m1)) {
      throw ModelError("invariant mean does not exist: mark distribution has no mean");
    }
    mean_depth[e] = m1;
  }
  const Eigen::VectorXd a_ep = net.areas().cwiseProduct(mean_depth);
  Eigen::VectorXd mean(2 * n);
  mean.head(n) = rain.lambda_per_s * (incidence_inverse(net).cast<double>() * a_ep);
  mean.tail(n) = rain.lambda_per_s * a_ep;
  return mean;
}

double ergodic_average_linear(const StatePath& path, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd m = build_system_matrix(*path.net, *path.params);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m.rows(), m.cols());

  double integral = 0.0;
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const double t1 = path.times[k];
    const double t2 = k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
    if (t2 <= t1) continue;
    const Eigen::VectorXd iflow = lu.solve((expm(m * (t2 - t1)) - id) * path.states[k]);
    integral += w.dot(iflow);
  }
  return integral / path.horizon;
}

double ergodic_average(const StatePath& path,
                       const std::function<double(const Eigen::VectorXd&)>& observable,
                       int gl_order) {
  if (path.storm_count() < 100) {
    std::cerr << "warning: ergodic average over only " << path.storm_count()
              << " storms; horizon may be too short\n";
  }
  const Eigen::MatrixXd m = build_system_matrix(*path.net, *path.params);
  const GaussLegendre& gl = GaussLegendre::order(gl_order);
  // Panels capped at one e-fold of the fastest rate keep the fixed-order
  // rule accurate across long dry spells.
  const double rate_max = std::max(path.params->K.maxCoeff(), path.params->H.maxCoeff());
  const double max_width = 1.0 / rate_max;

  double integral = 0.0;
  std::vector<Eigen::MatrixXd> node_maps(gl.nodes.size());
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const double t1 = path.times[k];
    const double t2 = k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
    if (t2 <= t1) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((t2 - t1) / max_width)));
    const double width = (t2 - t1) / panels;
    const double half = 0.5 * width;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      node_maps[q] = expm(m * (half * (1.0 + gl.nodes[q])));
    }
    const Eigen::MatrixXd step = expm(m * width);
    Eigen::VectorXd start = path.states[k];
    for (int panel = 0; panel < panels; ++panel) {
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        integral += half * gl.weights[q] * observable(node_maps[q] * start);
      }
      if (panel + 1 < panels) start = step * start;
    }
  }
  return integral / path.horizon;
}

double volume_balance_residual(const StatePath& path) {
  const RiverNetwork& net = *path.net;
  const HydraulicParams& params = *path.params;
  const int n = net.size();

  const auto storage = [&](const Eigen::VectorXd& x) {
    return x.head(n).cwiseQuotient(params.K).sum() + x.tail(n).cwiseQuotient(params.H).sum();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * n);
  w[net.root_index()] = 1.0;
  const double outflow_volume = ergodic_average_linear(path, w) * path.horizon;

  const Eigen::MatrixXd m = build_system_matrix(net, params);
  const Eigen::VectorXd final_state =
      expm(m * (path.horizon - path.times.back())) * path.states.back();

  double rained = 0.0;
  for (const auto& depth : path.depths) {
    rained += net.areas().dot(depth);
  }

  const double lhs = storage(final_state) - storage(path.states.front()) + outflow_volume;
  const double scale = std::max({std::abs(rained), storage(path.states.front()), 1e-300});
  return std::abs(lhs - rained) / scale;
}

}  // namespace riverflow
