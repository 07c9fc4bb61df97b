#include "riverflow/expm.hpp"

#include <cmath>

namespace riverflow {

namespace {

// Denominator/numerator coefficients of the (13,13) Pade approximant to exp.
constexpr double kB13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                           1187353796428800.0,  129060195264000.0,   10559470521600.0,
                           670442572800.0,      33522128640.0,       1323241920.0,
                           40840800.0,          960960.0,            16380.0,
                           182.0,               1.0};

// 1-norm threshold below which the degree-13 approximant is full precision.
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  using Eigen::MatrixXd;
  const Eigen::Index n = a.rows();

  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
  }
  const MatrixXd as = a / std::ldexp(1.0, squarings);

  const MatrixXd a2 = as * as;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a2 * a4;
  const MatrixXd id = MatrixXd::Identity(n, n);

  const MatrixXd u =
      as * (a6 * (kB13[13] * a6 + kB13[11] * a4 + kB13[9] * a2) + kB13[7] * a6 +
            kB13[5] * a4 + kB13[3] * a2 + kB13[1] * id);
  const MatrixXd v = a6 * (kB13[12] * a6 + kB13[10] * a4 + kB13[8] * a2) + kB13[6] * a6 +
                     kB13[4] * a4 + kB13[2] * a2 + kB13[0] * id;

  MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace riverflow
