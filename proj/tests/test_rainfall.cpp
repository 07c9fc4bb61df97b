#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "riverflow/network.hpp"
#include "riverflow/rainfall.hpp"
#include "riverflow/units.hpp"
#include "test_util.hpp"

using namespace riverflow;

namespace {

const std::vector<MarkDistribution> kFamilies = {
    MarkDistribution::exponential_mean(0.005), MarkDistribution::pareto(0.5, 0.005),
    MarkDistribution::gamma(2.0, 0.0025), MarkDistribution::deterministic(0.005)};

}  // namespace

TEST_CASE("transform normalization at s = 0") {
  for (const auto& mark : kFamilies) {
    CHECK(mark.transform(0.0) == 1.0);
  }
  CHECK_THROWS_AS(kFamilies[0].transform(-1.0), std::invalid_argument);
}

TEST_CASE("exponential transform closed form") {
  const auto mark = MarkDistribution::exponential_mean(0.005);
  CHECK(mark.transform(200.0) == doctest::Approx(0.5).epsilon(1e-14));
  const std::complex<double> z = mark.transform(std::complex<double>(200.0, 100.0));
  const std::complex<double> expect = 1.0 / std::complex<double>(2.0, 0.5);
  CHECK(std::abs(z - expect) < 1e-14);
}

TEST_CASE("pareto transform matches its small-s expansion") {
  const double alpha = 0.5, k = 0.005;
  const auto mark = MarkDistribution::pareto(alpha, k);
  // quadrature branch (k s > 1e-3) against 1 - Gamma(1-a)(ks)^a + o(s^a);
  // the o(s^a) remainder is of order (ks)^{1-a} relative to the lead term
  for (double ks : {2e-3, 1e-2}) {
    const double lead = std::tgamma(1.0 - alpha) * std::pow(ks, alpha);
    const double got = 1.0 - mark.transform(ks / k);
    CHECK(std::abs(got / lead - 1.0) < 2.0 * std::pow(ks, 1.0 - alpha));
  }
  // series and quadrature branches against a Romberg oracle: with
  // alpha = 1/2 and v = y^2 the transform is int_0^1 exp(-ks/y^2) dy.
  for (double ks : {9e-4, 1.2e-3, 5e-3}) {
    const double got = mark.transform(ks / k);
    const double oracle = testutil::romberg(
        [&](double y) { return y == 0.0 ? 0.0 : std::exp(-ks / (y * y)); }, 0.0, 1.0);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
  }
  CHECK_THROWS_AS(mark.transform(std::complex<double>(1.0, 1.0)), ModelError);
}

TEST_CASE("complete monotonicity on a grid") {
  for (const auto& mark : kFamilies) {
    double prev = 1.0, prev_diff = 0.0;
    bool first = true;
    for (int i = 1; i <= 40; ++i) {
      const double v = mark.transform(i * 50.0);
      CHECK(v >= 0.0);
      CHECK(v <= prev);
      const double diff = v - prev;
      if (!first) CHECK(diff >= prev_diff - 1e-12);  // convex: increments grow
      prev_diff = diff;
      prev = v;
      first = false;
    }
  }
}

TEST_CASE("transform slope at zero matches the first moment") {
  for (const auto& mark : kFamilies) {
    if (mark.family() == MarkFamily::Pareto) continue;  // no mean at alpha = 0.5
    const double h = 1e-6 / 0.005;
    const double slope = (mark.transform(h) - 1.0) / h;  // one-sided at the boundary
    CHECK(slope == doctest::Approx(-mark.moment(1)).epsilon(1e-4));
    const double h2 = 1e-9 / 0.005;
    const double slope2 = (mark.transform(h2) - 1.0) / h2;
    CHECK(slope2 == doctest::Approx(-mark.moment(1)).epsilon(1e-6));
  }
}

TEST_CASE("moments") {
  const auto exp_mark = MarkDistribution::exponential_mean(0.005);
  CHECK(exp_mark.moment(1) == doctest::Approx(0.005));
  CHECK(exp_mark.moment(2) == doctest::Approx(5e-5));  // 2! mu^2
  CHECK(exp_mark.moment(3) == doctest::Approx(6.0 * std::pow(0.005, 3)));

  const auto det = MarkDistribution::deterministic(0.004);
  CHECK(det.moment(3) == doctest::Approx(6.4e-8));

  const auto gamma = MarkDistribution::gamma(2.0, 0.0025);
  CHECK(gamma.moment(1) == doctest::Approx(0.005));
  CHECK(gamma.moment(2) == doctest::Approx(2.0 * 3.0 * 0.0025 * 0.0025));

  const auto pareto = MarkDistribution::pareto(0.5, 0.005);
  CHECK(!pareto.has_finite_moment(1));
  CHECK(std::isinf(pareto.moment(1)));
  const auto pareto3 = MarkDistribution::pareto(3.5, 0.005);
  CHECK(pareto3.has_finite_moment(3));
  CHECK(!pareto3.has_finite_moment(4));
  CHECK(pareto3.moment(1) == doctest::Approx(3.5 * 0.005 / 2.5));
}

TEST_CASE("invariance condition holds for every built-in family") {
  const RiverNetwork net = RiverNetwork::from_edges({{"r", {}, 1e6}});
  for (const auto& mark : kFamilies) {
    RainfallModel model;
    model.lambda_per_s = 1e-5;
    model.mode = SpatialMode::Uniform;
    model.marks.push_back(mark);
    CHECK(check_invariance_condition(net, model));
  }
}

TEST_CASE("storm sampling modes") {
  RainfallModel model;
  model.lambda_per_s = 1e-5;
  model.mode = SpatialMode::Uniform;
  model.marks.push_back(MarkDistribution::exponential_mean(0.005));

  const Eigen::VectorXd uni = sample_storm(model, 6, 42, 0);
  for (int e = 1; e < 6; ++e) CHECK(uni[e] == uni[0]);

  model.mode = SpatialMode::Independent;
  const Eigen::VectorXd indep = sample_storm(model, 6, 42, 0);
  CHECK(indep[0] != indep[1]);

  model.marks.assign(1, MarkDistribution::deterministic(0.007));
  CHECK(sample_storm(model, 3, 1, 5) == Eigen::VectorXd::Constant(3, 0.007));

  // identical keys reproduce identical draws
  model.marks.assign(1, MarkDistribution::gamma(0.7, 0.005));
  CHECK(sample_storm(model, 3, 9, 4) == sample_storm(model, 3, 9, 4));
}

TEST_CASE("sample mean of a million exponential draws") {
  const auto mark = MarkDistribution::exponential_mean(0.005);
  RngStream rng(7, stream_key(streams::kMarks, 0, 0));
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += mark.sample(rng);
  CHECK(sum / n == doctest::Approx(0.005).epsilon(0.005));
}

TEST_CASE("empirical transform matches the analytic transform") {
  for (const auto& mark : kFamilies) {
    RngStream rng(11, stream_key(streams::kMarks, 3, 1));
    const int n = 200000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = mark.sample(rng);
    for (double s : {50.0, 100.0, 200.0, 400.0, 800.0}) {
      double acc = 0.0, acc2 = 0.0;
      for (double p : draws) {
        const double v = std::exp(-s * p);
        acc += v;
        acc2 += v * v;
      }
      const double mean = acc / n;
      const double se = std::sqrt(std::max(0.0, acc2 / n - mean * mean) / n);
      CHECK(std::abs(mean - mark.transform(s)) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("rainfall config parsing") {
  const RainfallModel m = parse_rainfall(
      "# comment\nlambda_per_hour=0.0417\nspatial=uniform\nmarginal=exp\nmean_mm=5\n");
  CHECK(m.lambda_per_s == doctest::Approx(0.0417 / 3600.0));
  CHECK(m.mode == SpatialMode::Uniform);
  CHECK(m.mark(0).family() == MarkFamily::Exponential);
  CHECK(m.mark(0).param1() == doctest::Approx(0.005));

  const RainfallModel pareto = parse_rainfall(
      "lambda_per_hour=1\nspatial=independent\nmarginal=pareto\nalpha=0.4\nk_mm=3\n");
  CHECK(pareto.mode == SpatialMode::Independent);
  CHECK(pareto.mark(5).param1() == doctest::Approx(0.4));

  CHECK_THROWS_AS(parse_rainfall("spatial=uniform\nmarginal=exp\nmean_mm=5\n"), ParseError);
  CHECK_THROWS_AS(
      parse_rainfall("lambda_per_hour=1\nspatial=blended\nmarginal=exp\nmean_mm=5\n"),
      ParseError);
  CHECK_THROWS_AS(parse_rainfall("lambda_per_hour=1\nspatial=uniform\nmarginal=cauchy\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_rainfall("lambda_per_hour=1 spatial=uniform\n"), ParseError);
}
