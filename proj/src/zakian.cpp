#include "riverflow/zakian.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include "riverflow/errors.hpp"

namespace riverflow {

namespace {

using cd = std::complex<double>;

// Upper-half-plane poles of the (9,10) Pade approximant to exp(s) and
// the negated residues of the partial-fraction expansion at those poles.
// See data/zakian_n5.csv for the regeneration recipe.
constexpr std::array<cd, 5> kAlphas = {
    cd{12.83767707781087, 1.6660625841623013}, cd{12.22613148416215, 5.0127192636768645},
    cd{10.93430343060001, 8.4096729960030917}, cd{8.7764346400826086, 11.921853898301214},
    cd{5.2254533673443613, 15.729529045639259}};

constexpr std::array<cd, 5> kWeights = {
    cd{-36902.046880025551, 196990.46352900364}, cd{61276.999705851506, -95408.598907324026},
    cd{-28916.572270324232, 18169.185100096442}, cd{4655.3608463981735, -1.9017730305830139},
    cd{-118.74140189989652, -141.30369232172347}};

}  // namespace

std::span<const cd> zakian_alphas() { return kAlphas; }
std::span<const cd> zakian_weights() { return kWeights; }

double zakian_invert(const std::function<cd(cd)>& transform, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("inversion abscissa must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < kAlphas.size(); ++i) {
    sum += (kWeights[i] * transform(kAlphas[i] / x)).real();
  }
  return 2.0 / x * sum;
}

InversionResult invert_density(const std::function<cd(cd)>& transform,
                               std::span<const double> x_grid) {
  InversionResult out;
  out.values.reserve(x_grid.size());
  for (double x : x_grid) {
    double v = zakian_invert(transform, x);
    if (v < 0.0) {
      v = 0.0;
      ++out.clipped;
    }
    out.values.push_back(v);
  }
  return out;
}

bool zakian_gate(double* worst_relative_error) {
  double worst = 0.0;
  const auto check = [&](const std::function<cd(cd)>& transform,
                         const std::function<double(double)>& exact, double lo, double hi) {
    for (int i = 0; i <= 40; ++i) {
      const double x = lo + (hi - lo) * i / 40.0;
      const double approx = zakian_invert(transform, x);
      worst = std::max(worst, std::abs(approx - exact(x)) / std::abs(exact(x)));
    }
  };
  check([](cd s) { return 1.0 / s; }, [](double) { return 1.0; }, 0.1, 10.0);
  check([](cd s) { return 1.0 / (s + 1.0); }, [](double x) { return std::exp(-x); }, 0.1, 5.0);
  check([](cd s) { return 1.0 / (s * s); }, [](double x) { return x; }, 0.1, 10.0);
  if (worst_relative_error) *worst_relative_error = worst;
  return worst <= 1e-4;
}

void ensure_zakian_gate() {
  static std::once_flag flag;
  static bool ok = false;
  static double worst = 0.0;
  std::call_once(flag, [] { ok = zakian_gate(&worst); });
  if (!ok) {
    throw NumericsError("Zakian inversion gate failed (worst relative error " +
                        std::to_string(worst) + ")");
  }
}

}  // namespace riverflow
