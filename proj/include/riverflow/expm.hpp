#pragma once

#include <Eigen/Dense>

namespace riverflow {

/// Dense matrix exponential by scaling-and-squaring with a degree-13
/// Pade approximant. Accurate to machine precision for the stiff
/// rate ratios that arise here (eigenvalue spreads of 1e3 and more).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

}  // namespace riverflow
