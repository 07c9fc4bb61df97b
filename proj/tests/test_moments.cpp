#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "riverflow/dynamics.hpp"
#include "riverflow/invariant.hpp"
#include "riverflow/moments.hpp"
#include "riverflow/network.hpp"
#include "riverflow/pdmp.hpp"
#include "riverflow/rng.hpp"
#include "riverflow/units.hpp"
#include "test_util.hpp"

using namespace riverflow;

namespace {

// Brute-force partial Bell polynomial: enumerate every multiset of part
// sizes directly (independent of the library's index-vector walk).
double bell_brute(int n, int k, std::span<const double> x) {
  // iterate over all compositions of n into k parts with sizes in
  // [1, n-k+1], nondecreasing to avoid duplicates; multiply by the
  // multinomial count n! / (prod part! * prod multiplicity!)
  std::vector<int> parts(k, 1);
  double total = 0.0;
  const auto weight = [&](const std::vector<int>& p) {
    double logw = std::lgamma(n + 1.0);
    int run = 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      logw -= std::lgamma(p[i] + 1.0);
      if (i > 0 && p[i] == p[i - 1]) {
        ++run;
        logw -= std::log(run);
      } else {
        run = 1;
      }
    }
    double v = std::exp(logw);
    for (int part : p) v *= x[part - 1];
    return v;
  };
  // recursive enumeration of nondecreasing compositions
  const std::function<void(int, int, int)> rec = [&](int pos, int remaining, int min_part) {
    if (pos == k) {
      if (remaining == 0) total += weight(parts);
      return;
    }
    for (int part = min_part; part <= remaining - (k - pos - 1); ++part) {
      if (part > n - k + 1) break;
      parts[pos] = part;
      rec(pos + 1, remaining - part, part);
    }
  };
  rec(0, n, 1);
  return total;
}

struct Setup {
  RiverNetwork net;
  HydraulicParams params;
  RainfallModel rain;
};

Setup single_link(double K_per_h = 2.0, double H_per_h = 1.0) {
  Setup s;
  s.net = RiverNetwork::from_edges({{"r", {}, 0.6e6}});
  s.params.K = Eigen::VectorXd::Constant(1, units::per_hour_to_per_second(K_per_h));
  s.params.H = Eigen::VectorXd::Constant(1, units::per_hour_to_per_second(H_per_h));
  s.rain.lambda_per_s = units::per_hour_to_per_second(1.0 / 24.0);
  s.rain.mode = SpatialMode::Uniform;
  s.rain.marks.push_back(MarkDistribution::exponential_mean(0.005));
  return s;
}

}  // namespace

TEST_CASE("bell polynomial closed cases") {
  const std::vector<double> x{2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0};
  CHECK(bell_polynomial(3, 2, std::span<const double>(x.data(), 2)) ==
        doctest::Approx(3.0 * x[0] * x[1]));
  for (int n = 1; n <= 8; ++n) {
    CHECK(bell_polynomial(n, n, std::span<const double>(x.data(), 1)) ==
          doctest::Approx(std::pow(x[0], n)));
    CHECK(bell_polynomial(n, 1, std::span<const double>(x.data(), n)) ==
          doctest::Approx(x[n - 1]));
  }
  CHECK_THROWS_AS(bell_polynomial(3, 4, std::span<const double>(x.data(), 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(bell_polynomial(3, 0, std::span<const double>(x.data(), 2)),
                  std::invalid_argument);
}

TEST_CASE("bell polynomial agrees with brute-force enumeration") {
  const std::vector<double> x{1.7, -0.3, 2.9, 0.8, -1.1, 0.45, 2.2, -0.9, 1.3, 0.6};
  for (int n = 1; n <= 10; ++n) {
    for (int k = 1; k <= n; ++k) {
      const std::span<const double> args(x.data(), n - k + 1);
      CHECK(bell_polynomial(n, k, args) ==
            doctest::Approx(bell_brute(n, k, args)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bell polynomial satisfies the convolution recursion") {
  // B_{n,k} = sum_i binom(n-1, i-1) x_i B_{n-i, k-1}
  const std::vector<double> x{0.9, 1.4, -0.5, 2.1, 0.3, -1.7, 1.1, 0.8, 2.5, -0.2};
  const auto binom = [](int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
  };
  for (int n = 2; n <= 10; ++n) {
    for (int k = 2; k <= n; ++k) {
      double rhs = 0.0;
      for (int i = 1; i <= n - k + 1; ++i) {
        rhs += binom(n - 1, i - 1) * x[i - 1] *
               bell_polynomial(n - i, k - 1,
                               std::span<const double>(x.data(), (n - i) - (k - 1) + 1));
      }
      CHECK(bell_polynomial(n, k, std::span<const double>(x.data(), n - k + 1)) ==
            doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("c_1 at the root is exactly H_r over K_r") {
  Setup s = single_link();
  CHECK(c_coefficient(s.net, s.params, 0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));

  for (unsigned seed = 1; seed <= 20; ++seed) {
    const RiverNetwork net = generate_network(2 + seed % 3, seed);
    const int n = net.size();
    REQUIRE(n <= 64);
    RngStream rng(seed, stream_key(0xC1));
    HydraulicParams p;
    p.K.resize(n);
    p.H.resize(n);
    for (int e = 0; e < n; ++e) {
      p.K[e] = units::per_hour_to_per_second(0.5 + 3.5 * rng.uniform());
      p.H[e] = units::per_hour_to_per_second(std::pow(10.0, -2.5 + 2.0 * rng.uniform()));
    }
    const double c1 = c_coefficient(net, p, net.root_index(), 1.0);
    CHECK(c1 == doctest::Approx(p.H[0] / p.K[0]).epsilon(1e-8));
  }
}

TEST_CASE("single-link c_alpha closed forms") {
  Setup s = single_link();  // K = 2, H = 1: beta m(u) = u - u^2
  const MomentEngine engine(s.net, s.params);
  // c_2 = int (u - u^2)^2 / u du = 1/12
  CHECK(engine.c_coefficient(0, 2.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
  // c_{1/2} = int u^{-1/2} (1-u)^{1/2} du = B(1/2, 3/2) = pi/2
  CHECK(engine.c_coefficient(0, 0.5) == doctest::Approx(M_PI / 2.0).epsilon(1e-8));
  // independent Romberg oracle on the closed-form integrand (u = y^2)
  const double romberg_half = testutil::romberg(
      [](double y) { return 2.0 * std::sqrt(std::max(0.0, 1.0 - y * y)); }, 0.0, 1.0);
  CHECK(engine.c_coefficient(0, 0.5) == doctest::Approx(romberg_half).epsilon(1e-6));
  CHECK_THROWS_AS(engine.c_coefficient(0, -1.0), std::invalid_argument);
}

TEST_CASE("first moment reduces to the invariant mean") {
  Setup s = single_link();
  const MomentResult m1 = moment_n(s.net, s.params, s.rain, 0, 1);
  CHECK(!m1.infinite);
  const double expect = 0.6e6 * s.rain.lambda_per_s * 0.005;
  CHECK(m1.value == doctest::Approx(expect).epsilon(1e-12));

  // per-edge against the invariant-mean vector on a generated network
  const RiverNetwork net = generate_network(3, 4);
  const int n = net.size();
  RngStream rng(4, stream_key(0xC2));
  HydraulicParams p;
  p.K.resize(n);
  p.H.resize(n);
  for (int e = 0; e < n; ++e) {
    p.K[e] = units::per_hour_to_per_second(1.0 + rng.uniform());
    p.H[e] = units::per_hour_to_per_second(0.01 + 0.05 * rng.uniform());
  }
  const Eigen::VectorXd mean = invariant_mean(net, p, s.rain);
  const MomentEngine engine(net, p);
  for (int e = 0; e < n; ++e) {
    CHECK(engine.moment(s.rain, e, 1).value == doctest::Approx(mean[e]).epsilon(1e-12));
  }
}

TEST_CASE("moments are positive and log-convex in the order") {
  Setup s = single_link(2.0, 0.05);
  const MomentEngine engine(s.net, s.params);
  std::vector<double> moments(10);
  for (int n = 1; n <= 9; ++n) {
    const MomentResult m = engine.moment(s.rain, 0, n);
    REQUIRE(!m.infinite);
    CHECK(m.value > 0.0);
    moments[n] = m.value;
  }
  // Lyapunov: M_n^2 <= M_{n-1} M_{n+1}
  for (int n = 2; n <= 8; ++n) {
    CHECK(moments[n] * moments[n] <= moments[n - 1] * moments[n + 1] * (1.0 + 1e-9));
  }
  // Jensen at the bottom
  CHECK(moments[2] >= moments[1] * moments[1]);
}

TEST_CASE("moment formula matches transform derivatives and a simulation") {
  Setup s = single_link(2.0, 0.02);
  const MomentEngine engine(s.net, s.params);
  const double m1 = engine.moment(s.rain, 0, 1).value;
  const double m2 = engine.moment(s.rain, 0, 2).value;

  TransformSettings ts;
  ts.rtol = 1e-12;
  const TransformEvaluator eval(s.net, s.params, s.rain, ts);
  const double h = 0.02 / m1;
  // second derivative at 0 from a six-point forward stencil (order 4)
  const double c2[] = {15.0 / 4, -77.0 / 6, 107.0 / 6, -13.0, 61.0 / 12, -5.0 / 6};
  double d2 = 0.0;
  for (int j = 0; j < 6; ++j) d2 += c2[j] * eval.ge_tilde(0, j * h);
  CHECK(d2 / (h * h) == doctest::Approx(m2).epsilon(1e-3));

  const Eigen::VectorXd mean = invariant_mean(s.net, s.params, s.rain);
  const StatePath path =
      simulate(s.net, s.params, s.rain, 3000.0 / s.rain.lambda_per_s, mean, 2);
  const double sim2 =
      ergodic_average(path, [](const Eigen::VectorXd& x) { return x[0] * x[0]; });
  CHECK(sim2 == doctest::Approx(m2).epsilon(0.05));
}

TEST_CASE("moments inherit the finiteness of the marks") {
  Setup s = single_link();
  s.rain.marks.assign(1, MarkDistribution::pareto(2.5, 0.005));
  const MomentEngine engine(s.net, s.params);
  CHECK(!engine.moment(s.rain, 0, 1).infinite);
  CHECK(!engine.moment(s.rain, 0, 2).infinite);
  CHECK(engine.moment(s.rain, 0, 3).infinite);

  s.rain.mode = SpatialMode::Independent;
  CHECK_THROWS_AS(engine.moment(s.rain, 0, 1), ModelError);
}

TEST_CASE("pareto tail constant and scaling") {
  Setup s = single_link();
  s.rain.marks.assign(1, MarkDistribution::pareto(0.5, 0.005));
  const ParetoTail base = pareto_tail(s.net, s.params, s.rain, 0);
  CHECK(base.exponent == doctest::Approx(0.5));
  // C = lambda (k a K_r)^alpha c_alpha / H_r with c_{1/2} = pi/2 here
  const double expect = s.rain.lambda_per_s *
                        std::sqrt(0.005 * 0.6e6 * s.params.K[0]) * (M_PI / 2.0) /
                        s.params.H[0];
  CHECK(base.coefficient == doctest::Approx(expect).epsilon(1e-8));

  s.rain.marks.assign(1, MarkDistribution::pareto(0.5, 0.010));
  const ParetoTail doubled = pareto_tail(s.net, s.params, s.rain, 0);
  CHECK(doubled.coefficient ==
        doctest::Approx(base.coefficient * std::pow(2.0, 0.5)).epsilon(1e-10));

  s.rain.marks.assign(1, MarkDistribution::pareto(1.5, 0.005));
  CHECK_THROWS_AS(pareto_tail(s.net, s.params, s.rain, 0), ModelError);
  s.rain.marks.assign(1, MarkDistribution::exponential_mean(0.005));
  CHECK_THROWS_AS(pareto_tail(s.net, s.params, s.rain, 0), ModelError);
}

TEST_CASE("exponential tail rate from the kernel maximum") {
  Setup s = single_link();  // K = 2, H = 1
  const double ha = s.params.H[0] * 0.6e6;
  const MomentEngine engine(s.net, s.params);
  double u_star = 0.0;
  const double m_star = engine.M_star(0, &u_star);
  CHECK(m_star == doctest::Approx(0.5 * ha).epsilon(1e-8));
  CHECK(u_star == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(u_star > 0.0);
  CHECK(u_star < 1.0);

  const double sigma = 1.0 / 0.005;
  CHECK(exp_tail_rate(s.net, s.params, s.rain, 0) ==
        doctest::Approx(sigma / (0.5 * ha)).epsilon(1e-8));

  s.rain.marks.assign(1, MarkDistribution::gamma(2.0, 0.005));
  CHECK_THROWS_AS(exp_tail_rate(s.net, s.params, s.rain, 0), ModelError);
}

TEST_CASE("tail rate is symmetric under relabeling equal-parameter leaves") {
  // two identical leaves feeding the root: swapping them is a relabeling
  const char* text_a = "edge r - 1 2 0.04\nedge p r 1 1.5 0.03\nedge q r 1 1.5 0.03\n";
  const ParsedNetwork a = parse_network(text_a);
  HydraulicParams pa{a.K_per_s, a.H_per_s};
  RainfallModel rain;
  rain.lambda_per_s = units::per_hour_to_per_second(1.0 / 24.0);
  rain.mode = SpatialMode::Uniform;
  rain.marks.push_back(MarkDistribution::exponential_mean(0.005));
  const double r1 = exp_tail_rate(a.net, pa, rain, 1);
  const double r2 = exp_tail_rate(a.net, pa, rain, 2);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("kernel power series in the homogeneous-hillslope case") {
  // With H = H_r I the n-th series coefficient collapses to a geometric
  // sum K [I - Lambda K / H]^{-1} [I - (Lambda K / H)^n] H^{n-1}; the
  // printed variant with [I - Lambda K H]^{-1} does not reproduce the
  // matrix exponential.
  const ParsedNetwork p =
      parse_network("edge r - 1 2.1 1.0\nedge a r 1 1.6 1.0\nedge b r 1 2.8 1.0\n");
  HydraulicParams pp{p.K_per_s, p.H_per_s};
  const double Hr = pp.H[0];
  const Eigen::MatrixXd lambda = incidence_matrix(p.net).cast<double>();
  const Eigen::MatrixXd Kd = pp.K.asDiagonal();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd lk_over_h = lambda * Kd / Hr;

  const auto series = [&](double u, bool corrected) {
    const Eigen::MatrixXd base = corrected ? (id - lk_over_h).eval()
                                           : (id - lambda * Kd * Hr).eval();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(base);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd power = lk_over_h;  // (Lambda K / H)^n
    double log_pow = 1.0;               // log(u)^n / n!
    for (int n = 1; n <= 60; ++n) {
      log_pow *= std::log(u) / n;
      sum -= log_pow / Hr * (Kd * lu.solve(id - power)).transpose();
      power = power * lk_over_h;
    }
    return sum;
  };

  for (double u : {0.5, 0.8}) {
    const Eigen::MatrixXd exact = m_matrix(p.net, pp, u);
    CHECK((series(u, true) - exact).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((series(u, false) - exact).cwiseAbs().maxCoeff() > 1e-3);
  }
}
