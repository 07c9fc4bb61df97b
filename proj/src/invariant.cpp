#include "riverflow/invariant.hpp"

#include <cmath>

#include "riverflow/expm.hpp"
#include "riverflow/quadrature.hpp"

namespace riverflow {

TransformEvaluator::TransformEvaluator(const RiverNetwork& net, const HydraulicParams& params,
                                       const RainfallModel& rain, TransformSettings settings)
    : net_(net), params_(params), rain_(rain), settings_(settings), kernel_(net, params) {
  if (!check_invariance_condition(net, rain)) {
    throw ModelError("invariant distribution does not exist for this rainfall model");
  }
  // The integrand decays like exp(-kappa tau); truncate where the tail
  // drops below trunc_eps.
  tau_max_ = std::log(1.0 / settings_.trunc_eps) / kernel_.kappa_min();
}

template <class Scalar>
Scalar TransformEvaluator::mark_aggregate(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v2) const {
  const Eigen::VectorXd& ha = kernel_.Ha();
  if (rain_.mode == SpatialMode::Uniform) {
    Scalar dot{};
    for (int e = 0; e < kernel_.n(); ++e) dot += ha[e] * v2[e];
    return rain_.mark(0).transform(dot);
  }
  Scalar prod{1.0};
  for (int e = 0; e < kernel_.n(); ++e) {
    prod *= rain_.mark(e).transform(Scalar(ha[e] * v2[e]));
  }
  return prod;
}

double TransformEvaluator::g_tilde(const Eigen::VectorXd& s) const {
  const int n = kernel_.n();
  if (s.size() != 2 * n) throw std::invalid_argument("argument must have dimension 2n");
  if ((s.array() < 0.0).any()) throw std::invalid_argument("argument must be nonnegative");

  const Eigen::MatrixXd mt = kernel_.system_matrix().transpose();
  const auto integrand = [&](double tau) {
    const Eigen::VectorXd v2 = (expm(mt * tau) * s).tail(n);
    return 1.0 - mark_aggregate<double>(v2);
  };
  AdaptiveOptions opt;
  opt.rtol = settings_.rtol;
  const double integral =
      integrate_sqrt_sub(integrand, tau_max_, opt, 0.1 / kernel_.fastest_rate());
  return std::exp(-rain_.lambda_per_s * integral);
}

template <class Scalar>
Scalar TransformEvaluator::ge_exponent(int e, Scalar s) const {
  const auto integrand = [&](double tau) {
    const auto& col = kernel_.m_column(e, tau);
    return Scalar(1.0) - mark_aggregate<Scalar>(col.template cast<Scalar>() * s);
  };
  AdaptiveOptions opt;
  opt.rtol = settings_.rtol;
  return rain_.lambda_per_s *
         integrate_sqrt_sub(integrand, tau_max_, opt, 0.1 / kernel_.fastest_rate());
}

double TransformEvaluator::ge_tilde(int e, double s) const {
  if (s < 0.0) throw std::invalid_argument("argument must be nonnegative");
  return std::exp(-ge_exponent<double>(e, s));
}

std::complex<double> TransformEvaluator::ge_tilde(int e, std::complex<double> s) const {
  if (s.real() < 0.0) throw std::invalid_argument("argument must have Re(s) >= 0");
  if (!rain_.complex_transform_supported()) {
    throw ModelError("complex transform evaluation is not supported for Pareto marks");
  }
  return std::exp(-ge_exponent<std::complex<double>>(e, s));
}

double TransformEvaluator::p_tilde(double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& s) const {
  if (t < 0.0) throw std::invalid_argument("transition transform requires t >= 0");
  const int n = kernel_.n();
  if (x.size() != 2 * n || s.size() != 2 * n) {
    throw std::invalid_argument("arguments must have dimension 2n");
  }
  const Eigen::MatrixXd& m = kernel_.system_matrix();
  const double drift_term = (flow_map(m, t) * x).dot(s);
  if (t == 0.0) return std::exp(-drift_term);

  const Eigen::MatrixXd mt = m.transpose();
  const auto integrand = [&](double tau) {
    const Eigen::VectorXd v2 = (expm(mt * tau) * s).tail(n);
    return 1.0 - mark_aggregate<double>(v2);
  };
  AdaptiveOptions opt;
  opt.rtol = settings_.rtol;
  const double upper = std::min(t, tau_max_);
  const double integral =
      integrate_sqrt_sub(integrand, upper, opt, 0.1 / kernel_.fastest_rate());
  return std::exp(-drift_term - rain_.lambda_per_s * integral);
}

InversionResult TransformEvaluator::density_profile(int e, std::span<const double> x_grid) const {
  if (!rain_.complex_transform_supported()) {
    throw ModelError("density inversion is not supported for Pareto marks");
  }
  ensure_zakian_gate();
  for (double x : x_grid) {
    if (!(x > 0.0)) throw std::invalid_argument("density grid must be strictly positive");
  }
  const auto transform = [&](std::complex<double> s) { return ge_tilde(e, s); };
  return invert_density(transform, x_grid);
}

}  // namespace riverflow
