#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "riverflow/network.hpp"
#include "riverflow/rng.hpp"

namespace riverflow {

enum class MarkFamily { Exponential, Pareto, Gamma, Deterministic };

/// Marginal distribution of a storm depth (metres of water column).
class MarkDistribution {
 public:
  static MarkDistribution exponential_mean(double mean_m);
  /// Survival (k/x)^alpha for x >= k.
  static MarkDistribution pareto(double alpha, double k_m);
  static MarkDistribution gamma(double shape, double scale_m);
  static MarkDistribution deterministic(double depth_m);

  MarkFamily family() const { return family_; }
  double param1() const { return p1_; }  // mean / alpha / shape / depth
  double param2() const { return p2_; }  // - / k / scale / -

  /// Laplace transform E[exp(-s P)] at real s >= 0.
  double transform(double s) const;
  /// Complex transform on Re(s) >= 0; not available for Pareto.
  std::complex<double> transform(std::complex<double> s) const;
  bool complex_transform_supported() const { return family_ != MarkFamily::Pareto; }

  /// i-th raw moment in m^i; +infinity when it does not exist.
  double moment(int i) const;
  bool has_finite_moment(int i) const;
  /// Finite for every supported family (log-moment condition).
  bool has_finite_log_moment() const { return true; }

  double sample(RngStream& rng) const;

  std::string describe() const;

 private:
  MarkDistribution(MarkFamily f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}
  MarkFamily family_;
  double p1_, p2_;
};

enum class SpatialMode { Uniform, Independent };

/// Compound-Poisson storm model: arrival rate plus depth marks, either
/// one shared draw per storm (uniform) or independent draws per edge.
struct RainfallModel {
  double lambda_per_s = 0.0;
  SpatialMode mode = SpatialMode::Uniform;
  std::vector<MarkDistribution> marks;  // size 1, or one per edge

  const MarkDistribution& mark(int e) const {
    return marks.size() == 1 ? marks.front() : marks.at(e);
  }
  bool complex_transform_supported() const;
  std::string describe() const;
};

/// Parses the key=value rainfall block:
///   lambda_per_hour=..., spatial=uniform|independent,
///   marginal=exp|pareto|gamma|det, mean_mm=, alpha=, k_mm=,
///   shape=, scale_mm=, depth_mm=
RainfallModel parse_rainfall(const std::string& text);
RainfallModel load_rainfall(const std::string& path);

/// Depth vector (m) for storm number `storm_index`, drawn from streams
/// keyed on (seed, edge, storm) so paths replay exactly.
Eigen::VectorXd sample_storm(const RainfallModel& model, int n_edges, std::uint64_t seed,
                             std::uint64_t storm_index);

/// Existence condition for the invariant law: finite log-moment of the
/// jump vector. Holds for every built-in mark family.
bool check_invariance_condition(const RiverNetwork& net, const RainfallModel& model);

}  // namespace riverflow
