#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace riverflow {

/// The five conjugate pole/weight pairs of Zakian's N = 5 inversion
/// formula  f(x) ~ (2/x) sum_i Re[ K_i F(alpha_i / x) ].
/// The same values ship in data/zakian_n5.csv together with the
/// regeneration recipe; a unit test keeps file and code in agreement.
std::span<const std::complex<double>> zakian_alphas();
std::span<const std::complex<double>> zakian_weights();

/// Single-point inversion of a Laplace transform at x > 0.
double zakian_invert(const std::function<std::complex<double>(std::complex<double>)>& transform,
                     double x);

struct InversionResult {
  std::vector<double> values;
  int clipped = 0;  // number of negative outputs clipped to zero
};

/// Inversion over a grid of positive abscissae.
InversionResult invert_density(
    const std::function<std::complex<double>(std::complex<double>)>& transform,
    std::span<const double> x_grid);

/// Checks the three analytic transform pairs (1/s, 1/(s+1), 1/s^2)
/// against their known inverses at 1e-4 relative accuracy. Density
/// computations refuse to run until this gate has passed once.
bool zakian_gate(double* worst_relative_error = nullptr);

/// Runs the gate once per process and throws NumericsError on failure.
void ensure_zakian_gate();

}  // namespace riverflow
