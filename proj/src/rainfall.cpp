#include "riverflow/rainfall.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "riverflow/quadrature.hpp"
#include "riverflow/units.hpp"

namespace riverflow {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// Standard gamma(shape >= 1) sampler of Marsaglia and Tsang; the
// shape < 1 case is boosted through gamma(shape+1) * U^{1/shape}.
double sample_gamma(double shape, double scale, RngStream& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, scale, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

// Upper-incomplete-gamma series for the Pareto transform at small k*s:
// E[e^{-sP}] = 1 - Gamma(1-a) (ks)^a - a * sum_{j>=1} (-ks)^j / (j! (j - a)).
double pareto_transform_series(double alpha, double ks) {
  double sum = 0.0;
  double term = 1.0;  // (-ks)^j / j!
  for (int j = 1; j < 80; ++j) {
    term *= -ks / j;
    const double add = term / (j - alpha);
    sum += add;
    if (std::abs(add) < 1e-18) break;
  }
  return 1.0 - std::tgamma(1.0 - alpha) * std::pow(ks, alpha) - alpha * sum;
}

}  // namespace

MarkDistribution MarkDistribution::exponential_mean(double mean_m) {
  require_positive(mean_m, "exponential mean depth");
  return MarkDistribution(MarkFamily::Exponential, mean_m, 0.0);
}

MarkDistribution MarkDistribution::pareto(double alpha, double k_m) {
  require_positive(alpha, "pareto alpha");
  require_positive(k_m, "pareto k");
  return MarkDistribution(MarkFamily::Pareto, alpha, k_m);
}

MarkDistribution MarkDistribution::gamma(double shape, double scale_m) {
  require_positive(shape, "gamma shape");
  require_positive(scale_m, "gamma scale");
  return MarkDistribution(MarkFamily::Gamma, shape, scale_m);
}

MarkDistribution MarkDistribution::deterministic(double depth_m) {
  require_positive(depth_m, "deterministic depth");
  return MarkDistribution(MarkFamily::Deterministic, depth_m, 0.0);
}

double MarkDistribution::transform(double s) const {
  if (s < 0.0) throw std::invalid_argument("mark transform requires s >= 0");
  if (s == 0.0) return 1.0;
  switch (family_) {
    case MarkFamily::Exponential:
      return 1.0 / (1.0 + p1_ * s);
    case MarkFamily::Gamma:
      return std::pow(1.0 + p2_ * s, -p1_);
    case MarkFamily::Deterministic:
      return std::exp(-s * p1_);
    case MarkFamily::Pareto: {
      const double alpha = p1_;
      const double ks = p2_ * s;
      if (ks <= 1e-3) return pareto_transform_series(alpha, ks);
      // alpha * int_0^1 v^{alpha-1} exp(-ks/v) dv  (x = k/v).
      AdaptiveOptions opt;
      opt.rtol = 1e-10;
      const auto f = [&](double v) { return std::pow(v, alpha - 1.0) * std::exp(-ks / v); };
      return alpha * integrate_adaptive(f, 0.0, 1.0, opt, geometric_breakpoints(1.0, 1e-12));
    }
  }
  return 0.0;
}

std::complex<double> MarkDistribution::transform(std::complex<double> s) const {
  if (s.real() < 0.0) throw std::invalid_argument("mark transform requires Re(s) >= 0");
  if (s == std::complex<double>(0.0, 0.0)) return 1.0;
  switch (family_) {
    case MarkFamily::Exponential:
      return 1.0 / (1.0 + p1_ * s);
    case MarkFamily::Gamma:
      return std::pow(std::complex<double>(1.0, 0.0) + p2_ * s, -p1_);
    case MarkFamily::Deterministic:
      return std::exp(-s * p1_);
    case MarkFamily::Pareto:
      throw ModelError("Pareto mark transform is not available at complex arguments");
  }
  return 0.0;
}

double MarkDistribution::moment(int i) const {
  if (i < 1) throw std::invalid_argument("moment order must be >= 1");
  switch (family_) {
    case MarkFamily::Exponential:
      return std::tgamma(i + 1.0) * std::pow(p1_, i);
    case MarkFamily::Gamma: {
      double m = 1.0;
      for (int j = 0; j < i; ++j) m *= (p1_ + j) * p2_;
      return m;
    }
    case MarkFamily::Deterministic:
      return std::pow(p1_, i);
    case MarkFamily::Pareto:
      if (i >= p1_) return std::numeric_limits<double>::infinity();
      return p1_ * std::pow(p2_, i) / (p1_ - i);
  }
  return 0.0;
}

bool MarkDistribution::has_finite_moment(int i) const {
  return std::isfinite(moment(i));
}

double MarkDistribution::sample(RngStream& rng) const {
  switch (family_) {
    case MarkFamily::Exponential:
      return rng.exponential(p1_);
    case MarkFamily::Gamma:
      return sample_gamma(p1_, p2_, rng);
    case MarkFamily::Deterministic:
      return p1_;
    case MarkFamily::Pareto:
      return p2_ * std::pow(rng.uniform(), -1.0 / p1_);
  }
  return 0.0;
}

std::string MarkDistribution::describe() const {
  char buf[96];
  switch (family_) {
    case MarkFamily::Exponential:
      std::snprintf(buf, sizeof(buf), "exp(mean_mm=%g)", units::m_to_mm(p1_));
      break;
    case MarkFamily::Pareto:
      std::snprintf(buf, sizeof(buf), "pareto(alpha=%g, k_mm=%g)", p1_, units::m_to_mm(p2_));
      break;
    case MarkFamily::Gamma:
      std::snprintf(buf, sizeof(buf), "gamma(shape=%g, scale_mm=%g)", p1_, units::m_to_mm(p2_));
      break;
    case MarkFamily::Deterministic:
      std::snprintf(buf, sizeof(buf), "det(depth_mm=%g)", units::m_to_mm(p1_));
      break;
  }
  return buf;
}

bool RainfallModel::complex_transform_supported() const {
  for (const auto& m : marks) {
    if (!m.complex_transform_supported()) return false;
  }
  return true;
}

std::string RainfallModel::describe() const {
  std::ostringstream out;
  out << "lambda_per_hour=" << units::per_second_to_per_hour(lambda_per_s)
      << " spatial=" << (mode == SpatialMode::Uniform ? "uniform" : "independent")
      << " marginal=" << marks.front().describe();
  return out.str();
}

RainfallModel parse_rainfall(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto get = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "missing rainfall key '" + key + "'");
    return it->second;
  };
  auto get_num = [&](const std::string& key) { return std::stod(get(key)); };

  RainfallModel model;
  model.lambda_per_s = units::per_hour_to_per_second(get_num("lambda_per_hour"));
  require_positive(model.lambda_per_s, "lambda");

  const std::string spatial = get("spatial");
  if (spatial == "uniform") {
    model.mode = SpatialMode::Uniform;
  } else if (spatial == "independent") {
    model.mode = SpatialMode::Independent;
  } else {
    throw ParseError(0, "spatial must be 'uniform' or 'independent', got '" + spatial + "'");
  }

  const std::string marginal = get("marginal");
  if (marginal == "exp") {
    model.marks.push_back(MarkDistribution::exponential_mean(units::mm_to_m(get_num("mean_mm"))));
  } else if (marginal == "pareto") {
    model.marks.push_back(
        MarkDistribution::pareto(get_num("alpha"), units::mm_to_m(get_num("k_mm"))));
  } else if (marginal == "gamma") {
    model.marks.push_back(
        MarkDistribution::gamma(get_num("shape"), units::mm_to_m(get_num("scale_mm"))));
  } else if (marginal == "det") {
    model.marks.push_back(MarkDistribution::deterministic(units::mm_to_m(get_num("depth_mm"))));
  } else {
    throw ParseError(0, "unknown marginal '" + marginal + "'");
  }
  return model;
}

RainfallModel load_rainfall(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open rainfall file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rainfall(ss.str());
}

Eigen::VectorXd sample_storm(const RainfallModel& model, int n_edges, std::uint64_t seed,
                             std::uint64_t storm_index) {
  Eigen::VectorXd depths(n_edges);
  if (model.mode == SpatialMode::Uniform) {
    RngStream rng(seed, stream_key(streams::kMarks, 0, storm_index));
    depths.setConstant(model.mark(0).sample(rng));
  } else {
    for (int e = 0; e < n_edges; ++e) {
      RngStream rng(seed, stream_key(streams::kMarks, 1 + e, storm_index));
      depths[e] = model.mark(e).sample(rng);
    }
  }
  return depths;
}

bool check_invariance_condition(const RiverNetwork& net, const RainfallModel& model) {
  (void)net;
  // E[log(1 + |Y2|)] <= log(1 + max_e H_e a_e) + E[log(1 + max_e P_e)],
  // and every supported family has a finite log-moment.
  for (int e = 0; e < net.size(); ++e) {
    if (!model.mark(e).has_finite_log_moment()) return false;
  }
  return model.lambda_per_s > 0.0;
}

}  // namespace riverflow
