#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "riverflow/zakian.hpp"

using namespace riverflow;
using cd = std::complex<double>;

TEST_CASE("the three analytic transform pairs invert within 1e-4") {
  double worst = 0.0;
  CHECK(zakian_gate(&worst));
  CHECK(worst <= 1e-4);
  MESSAGE("gate worst relative error: ", worst);

  // spot values on the stated ranges
  for (double x : {0.1, 1.0, 10.0}) {
    CHECK(zakian_invert([](cd s) { return 1.0 / s; }, x) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(zakian_invert([](cd s) { return 1.0 / (s * s); }, x) ==
          doctest::Approx(x).epsilon(1e-4));
  }
  for (double x : {0.1, 2.0, 5.0}) {
    CHECK(zakian_invert([](cd s) { return 1.0 / (s + 1.0); }, x) ==
          doctest::Approx(std::exp(-x)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(zakian_invert([](cd s) { return 1.0 / s; }, 0.0), std::invalid_argument);
}

TEST_CASE("constants in the data file match the compiled table") {
  std::ifstream in(std::string(RIVERFLOW_SOURCE_DIR) + "/data/zakian_n5.csv");
  REQUIRE(in);
  auto alphas = zakian_alphas();
  auto weights = zakian_weights();
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double ar, ai, kr, ki;
    char comma;
    REQUIRE((ls >> ar >> comma >> ai >> comma >> kr >> comma >> ki));
    REQUIRE(row < alphas.size());
    CHECK(ar == alphas[row].real());
    CHECK(ai == alphas[row].imag());
    CHECK(kr == weights[row].real());
    CHECK(ki == weights[row].imag());
    ++row;
  }
  CHECK(row == alphas.size());
}

TEST_CASE("constants regenerate from the (9,10) Pade approximant of exp") {
  // P and Q coefficients of the [9/10] Pade approximant
  const int m = 9, n = 10;
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<double> p(m + 1), q(n + 1);
  for (int j = 0; j <= m; ++j) {
    p[j] = fact(m + n - j) * fact(m) / (fact(m + n) * fact(j) * fact(m - j));
  }
  for (int j = 0; j <= n; ++j) {
    q[j] = fact(m + n - j) * fact(n) / (fact(m + n) * fact(j) * fact(n - j));
    if (j % 2 == 1) q[j] = -q[j];
  }
  // roots of Q via the companion matrix
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -q[i] / q[n];
  const Eigen::VectorXcd roots = companion.eigenvalues();

  auto polyval = [](const std::vector<double>& c, cd z) {
    cd acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
  };
  std::vector<double> dq(n);
  for (int j = 1; j <= n; ++j) dq[j - 1] = j * q[j];

  auto alphas = zakian_alphas();
  auto weights = zakian_weights();
  int matched = 0;
  for (int i = 0; i < n; ++i) {
    const cd root = roots[i];
    if (root.imag() <= 0.0) continue;  // conjugate pairs; keep the upper half
    // find the tabulated pole closest to this root
    std::size_t best = 0;
    for (std::size_t j = 1; j < alphas.size(); ++j) {
      if (std::abs(alphas[j] - root) < std::abs(alphas[best] - root)) best = j;
    }
    CHECK(std::abs(root - alphas[best]) < 1e-6 * std::abs(root));
    const cd residue = -polyval(p, root) / polyval(dq, root);
    CHECK(std::abs(residue - weights[best]) < 1e-6 * std::abs(residue));
    ++matched;
  }
  CHECK(matched == 5);
}

TEST_CASE("negative inversion outputs are clipped and counted") {
  // exp(-x) - 0.6 is negative beyond x = ln(1/0.6) ~ 0.51
  const auto transform = [](cd s) { return 1.0 / (s + 1.0) - 0.6 / s; };
  const std::vector<double> grid{0.1, 0.3, 1.0, 2.0, 3.0};
  const InversionResult res = invert_density(transform, grid);
  REQUIRE(res.values.size() == 5);
  CHECK(res.clipped == 3);
  CHECK(res.values[0] == doctest::Approx(std::exp(-0.1) - 0.6).epsilon(1e-3));
  CHECK(res.values[2] == 0.0);
  CHECK(res.values[4] == 0.0);
}
