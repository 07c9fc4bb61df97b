// Command-line front end: validates configurations, runs simulations and
// evaluates invariant densities, moments, tails and hydrographs as CSV.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riverflow/dynamics.hpp"
#include "riverflow/errors.hpp"
#include "riverflow/invariant.hpp"
#include "riverflow/moments.hpp"
#include "riverflow/network.hpp"
#include "riverflow/pdmp.hpp"
#include "riverflow/rainfall.hpp"
#include "riverflow/rng.hpp"
#include "riverflow/units.hpp"

namespace {

using namespace riverflow;

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CommonOptions {
  std::string network_path;
  std::string rain_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct Inputs {
  ParsedNetwork parsed;
  HydraulicParams params;
  RainfallModel rain;
  std::string config_digest;
};

Inputs load_inputs(const CommonOptions& opt, const std::string& command,
                   const std::string& extra_options) {
  Inputs in{load_network(opt.network_path), {}, {}, {}};
  in.params.K = in.parsed.K_per_s;
  in.params.H = in.parsed.H_per_s;
  std::uint64_t h = fnv1a64(command);
  h = fnv1a64(read_file(opt.network_path), h);
  if (!opt.rain_path.empty()) {
    in.rain = load_rainfall(opt.rain_path);
    h = fnv1a64(read_file(opt.rain_path), h);
  }
  h = fnv1a64(extra_options + " seed=" + std::to_string(opt.seed), h);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  in.config_digest = buf;
  return in;
}

std::ofstream open_csv(const CommonOptions& opt, const Inputs& in, const std::string& command) {
  std::filesystem::create_directories(opt.out_dir);
  const std::string path = opt.out_dir + "/" + command + ".csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# riverflow " << kVersion << "\n";
  out << "# command: " << command << "\n";
  out << "# network: " << opt.network_path << " (n=" << in.parsed.net.size() << ")\n";
  if (!opt.rain_path.empty()) out << "# rain: " << in.rain.describe() << "\n";
  out << "# seed: " << opt.seed << "\n";
  out << "# config_hash: " << in.config_digest << "\n";
  std::cout << "wrote " << path << "\n";
  return out;
}

std::vector<int> resolve_edges(const RiverNetwork& net, const std::string& spec,
                               bool default_all) {
  std::vector<int> edges;
  if (spec.empty()) {
    if (default_all) {
      for (int e = 0; e < net.size(); ++e) edges.push_back(e);
    } else {
      edges.push_back(net.root_index());
    }
    return edges;
  }
  std::istringstream ss(spec);
  std::string id;
  while (std::getline(ss, id, ',')) {
    const int e = net.edge_index(id);
    if (e < 0) throw std::invalid_argument("unknown edge id '" + id + "'");
    edges.push_back(e);
  }
  return edges;
}

int cmd_validate(const CommonOptions& opt) {
  const Inputs in = load_inputs(opt, "validate", "");
  const RiverNetwork& net = in.parsed.net;
  int warnings = 0;

  std::cout << "network: " << net.size() << " edges, root '" << net.edge(0).id << "', total area "
            << fmt(units::m2_to_km2(net.total_area())) << " km2\n";
  const auto orders = horton_orders(net);
  std::cout << "horton order at root: " << orders[net.root_index()] << "\n";
  if (!net.is_binary()) {
    std::cout << "warning: network has junctions with more than two tributaries\n";
    ++warnings;
  }
  for (int e = 0; e < net.size(); ++e) {
    const double ratio = in.params.H[e] / in.params.K[e];
    if (ratio < 1e-3 || ratio > 1.0) {
      std::cout << "warning: edge '" << net.edge(e).id << "' has H/K = " << fmt(ratio)
                << " outside the typical range [1e-3, 1]\n";
      ++warnings;
    }
  }
  if (!opt.rain_path.empty()) {
    for (int e = 0; e < net.size(); ++e) {
      const double ratio = in.rain.lambda_per_s / in.params.H[e];
      if (ratio < 1e-3 || ratio > 1.0) {
        std::cout << "warning: edge '" << net.edge(e).id << "' has lambda/H = " << fmt(ratio)
                  << " outside the typical range [1e-3, 1]\n";
        ++warnings;
        break;
      }
    }
    if (!check_invariance_condition(net, in.rain)) {
      std::cout << "error: invariance condition fails for this rainfall model\n";
      return 1;
    }
    std::cout << "invariance condition: OK\n";
  }
  std::cout << "validation OK (" << warnings << " warning(s))\n";
  return 0;
}

int cmd_simulate(const CommonOptions& opt, double horizon_hours, int samples) {
  const Inputs in = load_inputs(opt, "simulate",
                                "horizon=" + fmt(horizon_hours) + " samples=" + std::to_string(samples));
  const RiverNetwork& net = in.parsed.net;
  const int n = net.size();
  const double horizon = units::hours_to_seconds(horizon_hours);

  Eigen::VectorXd x0;
  try {
    x0 = invariant_mean(net, in.params, in.rain);
  } catch (const ModelError&) {
    x0 = Eigen::VectorXd::Zero(2 * n);  // no invariant mean (heavy-tailed marks)
  }
  const StatePath path = simulate(net, in.params, in.rain, horizon, x0, opt.seed);

  // Uniform grid plus the storm instants themselves.
  std::vector<double> times;
  std::vector<int> flags;
  for (int i = 0; i < samples; ++i) {
    times.push_back(horizon * i / (samples - 1.0));
    flags.push_back(0);
  }
  for (std::size_t k = 1; k < path.times.size(); ++k) {
    times.push_back(path.times[k]);
    flags.push_back(1);
  }
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b] || (times[a] == times[b] && flags[a] < flags[b]);
  });

  std::ofstream out = open_csv(opt, in, "simulate");
  out << "t_hours,storm_flag";
  for (int e = 0; e < n; ++e) {
    out << "," << net.edge(e).id << ":Q_lps," << net.edge(e).id << ":R_lps";
  }
  out << "\n";
  const Eigen::MatrixXd states = sample_path(path, times);
  for (std::size_t i : order) {
    out << fmt(units::seconds_to_hours(times[i])) << "," << flags[i];
    for (int e = 0; e < n; ++e) {
      out << "," << fmt(units::m3s_to_lps(states(e, static_cast<Eigen::Index>(i)))) << ","
          << fmt(units::m3s_to_lps(states(n + e, static_cast<Eigen::Index>(i))));
    }
    out << "\n";
  }
  return 0;
}

int cmd_density(const CommonOptions& opt, const std::string& edges_spec, int points,
                double xmax_factor) {
  const Inputs in = load_inputs(opt, "density",
                                "edges=" + edges_spec + " points=" + std::to_string(points) +
                                    " xmax_factor=" + fmt(xmax_factor));
  const RiverNetwork& net = in.parsed.net;
  const std::vector<int> edges = resolve_edges(net, edges_spec, false);
  const Eigen::VectorXd mean = invariant_mean(net, in.params, in.rain);
  const TransformEvaluator eval(net, in.params, in.rain);

  std::ofstream out = open_csv(opt, in, "density");
  out << "edge_id,x_lps,density_per_lps\n";
  for (int e : edges) {
    const double xmax = xmax_factor * mean[e];
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = xmax * (i + 1.0) / points;
    const InversionResult res = eval.density_profile(e, grid);
    if (res.clipped > 0) {
      std::cerr << "note: " << res.clipped << " negative density value(s) clipped at edge '"
                << net.edge(e).id << "'\n";
    }
    for (int i = 0; i < points; ++i) {
      out << net.edge(e).id << "," << fmt(units::m3s_to_lps(grid[i])) << ","
          << fmt(res.values[i] / units::kLpsPerM3s) << "\n";
    }
  }
  return 0;
}

int cmd_moments(const CommonOptions& opt, const std::string& edges_spec, int nmax) {
  const Inputs in = load_inputs(opt, "moments",
                                "edges=" + edges_spec + " nmax=" + std::to_string(nmax));
  const RiverNetwork& net = in.parsed.net;
  const std::vector<int> edges = resolve_edges(net, edges_spec, true);
  const MomentEngine engine(net, in.params);

  std::ofstream out = open_csv(opt, in, "moments");
  out << "edge_id,n,moment_si,c_n\n";
  for (int e : edges) {
    for (int order = 1; order <= nmax; ++order) {
      const MomentResult m = engine.moment(in.rain, e, order);
      out << net.edge(e).id << "," << order << ","
          << (m.infinite ? "inf" : fmt(m.value)) << "," << fmt(engine.c_coefficient(e, order))
          << "\n";
    }
  }
  return 0;
}

int cmd_tails(const CommonOptions& opt, const std::string& edges_spec) {
  const Inputs in = load_inputs(opt, "tails", "edges=" + edges_spec);
  const RiverNetwork& net = in.parsed.net;
  const std::vector<int> edges = resolve_edges(net, edges_spec, true);

  std::ofstream out = open_csv(opt, in, "tails");
  out << "edge_id,model,coefficient_or_rate,exponent\n";
  const MarkFamily family = in.rain.mark(0).family();
  for (int e : edges) {
    if (family == MarkFamily::Pareto) {
      const ParetoTail tail = pareto_tail(net, in.params, in.rain, e);
      // P(Q > x) ~ C x^{-alpha} with x in L/s.
      const double c_lps = tail.coefficient * std::pow(units::kLpsPerM3s, tail.exponent);
      out << net.edge(e).id << ",pareto," << fmt(c_lps) << "," << fmt(tail.exponent) << "\n";
    } else if (family == MarkFamily::Exponential) {
      const double rate = exp_tail_rate(net, in.params, in.rain, e);
      out << net.edge(e).id << ",exp," << fmt(rate / units::kLpsPerM3s) << ",1\n";
    } else {
      throw ModelError("tail asymptotics are available for pareto and exp marks only");
    }
  }
  return 0;
}

int cmd_hydrograph(const CommonOptions& opt, const std::string& edges_spec, double tmax_hours,
                   int points) {
  const Inputs in = load_inputs(opt, "hydrograph",
                                "edges=" + edges_spec + " tmax=" + fmt(tmax_hours) +
                                    " points=" + std::to_string(points));
  const RiverNetwork& net = in.parsed.net;
  const int n = net.size();
  const std::vector<int> edges = resolve_edges(net, edges_spec, true);

  std::ofstream out = open_csv(opt, in, "hydrograph");
  out << "t_hours,edge_id,theta_Q_per_hour,theta_R_per_hour\n";
  for (int i = 0; i < points; ++i) {
    const double t_h = tmax_hours * i / (points - 1.0);
    const Eigen::VectorXd theta = hydrograph_exp(net, in.params, units::hours_to_seconds(t_h));
    for (int e : edges) {
      out << fmt(t_h) << "," << net.edge(e).id << ","
          << fmt(units::kSecondsPerHour * theta[e]) << ","
          << fmt(units::kSecondsPerHour * theta[n + e]) << "\n";
    }
  }
  return 0;
}

int cmd_heterogeneity(const CommonOptions& opt, const std::string& edges_spec, double eps_lo,
                      double eps_hi, int points, double ymax) {
  const Inputs in = load_inputs(opt, "heterogeneity",
                                "edges=" + edges_spec + " eps=" + fmt(eps_lo) + ":" + fmt(eps_hi) +
                                    " points=" + std::to_string(points) + " ymax=" + fmt(ymax));
  const RiverNetwork& net = in.parsed.net;
  if (in.rain.mark(0).family() != MarkFamily::Exponential) {
    throw ModelError("heterogeneity experiment requires exponential marks");
  }
  if (!(eps_hi >= eps_lo) || !(eps_lo > 0.0)) {
    throw std::invalid_argument("multiplier range must satisfy 0 < lo <= hi");
  }
  const std::vector<int> edges = resolve_edges(net, edges_spec, false);

  // Per-edge multipliers from the heterogeneity stream.
  HydraulicParams params = in.params;
  for (int e = 0; e < net.size(); ++e) {
    RngStream rng(opt.seed, stream_key(streams::kHeterogeneity, e));
    params.K[e] *= eps_lo + (eps_hi - eps_lo) * rng.uniform();
    params.H[e] *= eps_lo + (eps_hi - eps_lo) * rng.uniform();
  }

  const Eigen::VectorXd mean = invariant_mean(net, params, in.rain);
  const TransformEvaluator eval(net, params, in.rain);

  std::ofstream out = open_csv(opt, in, "heterogeneity");
  out << "edge_id,y,gamma\n";
  for (int e : edges) {
    std::vector<double> grid(points), ys(points);
    for (int i = 0; i < points; ++i) {
      ys[i] = ymax * (i + 1.0) / points;
      grid[i] = ys[i] * mean[e];
    }
    const InversionResult res = eval.density_profile(e, grid);
    for (int i = 0; i < points; ++i) {
      out << net.edge(e).id << "," << fmt(ys[i]) << "," << fmt(res.values[i] * mean[e]) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"River-network drainage under compound-Poisson rainfall"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string edges_spec;
  double horizon_hours = 240.0;
  int samples = 2000;
  int points = 200;
  double xmax_factor = 10.0;
  int nmax = 4;
  double tmax_hours = 48.0;
  double eps_lo = 0.5, eps_hi = 1.5;
  double ymax = 4.0;

  const auto add_common = [&](CLI::App* cmd, bool rain_required) {
    cmd->add_option("--network", common.network_path, "network file")->required();
    auto* rain = cmd->add_option("--rain", common.rain_path, "rainfall config file");
    if (rain_required) rain->required();
    cmd->add_option("--seed", common.seed, "random seed");
    cmd->add_option("--out", common.out_dir, "output directory");
  };

  auto* validate = app.add_subcommand("validate", "check a configuration");
  add_common(validate, false);

  auto* simulate = app.add_subcommand("simulate", "simulate a sample path");
  add_common(simulate, true);
  simulate->add_option("--horizon-hours", horizon_hours, "simulation horizon");
  simulate->add_option("--samples", samples, "uniform sample count");

  auto* density = app.add_subcommand("density", "invariant discharge density");
  add_common(density, true);
  density->add_option("--edges", edges_spec, "comma-separated edge ids (default: root)");
  density->add_option("--points", points, "grid size");
  density->add_option("--xmax-factor", xmax_factor, "grid upper bound in multiples of the mean");

  auto* moments = app.add_subcommand("moments", "invariant moments of discharge");
  add_common(moments, true);
  moments->add_option("--edges", edges_spec, "comma-separated edge ids (default: all)");
  moments->add_option("--nmax", nmax, "highest moment order");

  auto* tails = app.add_subcommand("tails", "tail asymptotics of discharge");
  add_common(tails, true);
  tails->add_option("--edges", edges_spec, "comma-separated edge ids (default: all)");

  auto* hydrograph = app.add_subcommand("hydrograph", "unit hydrographs");
  add_common(hydrograph, false);
  hydrograph->add_option("--edges", edges_spec, "comma-separated edge ids (default: all)");
  hydrograph->add_option("--tmax-hours", tmax_hours, "time grid upper bound");
  hydrograph->add_option("--points", points, "time grid size");

  auto* heterogeneity = app.add_subcommand("heterogeneity", "normalized densities under random multipliers");
  add_common(heterogeneity, true);
  heterogeneity->add_option("--edges", edges_spec, "comma-separated edge ids (default: root)");
  heterogeneity->add_option("--eps-lo", eps_lo, "multiplier lower bound");
  heterogeneity->add_option("--eps-hi", eps_hi, "multiplier upper bound");
  heterogeneity->add_option("--points", points, "grid size");
  heterogeneity->add_option("--ymax", ymax, "normalized grid upper bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(common);
    if (simulate->parsed()) return cmd_simulate(common, horizon_hours, samples);
    if (density->parsed()) return cmd_density(common, edges_spec, points, xmax_factor);
    if (moments->parsed()) return cmd_moments(common, edges_spec, nmax);
    if (tails->parsed()) return cmd_tails(common, edges_spec);
    if (hydrograph->parsed()) return cmd_hydrograph(common, edges_spec, tmax_hours, points);
    if (heterogeneity->parsed()) {
      return cmd_heterogeneity(common, edges_spec, eps_lo, eps_hi, points, ymax);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
