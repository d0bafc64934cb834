// Minimal library walkthrough: max(x1, x2) on the line x1 + x2 = 0.
#include <iostream>

#include "clarke_kkt/clarke_kkt.hpp"

int main() {
  using namespace clarke_kkt;

  const auto prob = parse_problem(R"(
name max_on_line
dim 2
objective max(x1, x2)
eq x1 + x2
)");
  const Vector origin = Vector::Zero(2);

  // Generalized directional derivative along (1, 1): max is sublinear, so H = 1.
  const auto h = estimate_gen_dir_deriv(prob, origin, Vector::Ones(2));
  std::cout << "H_0((1,1)) ~ " << h.value << "\n";

  const auto report = verify_stationarity(prob, origin);
  std::cout << "verdict " << to_string(report.verdict) << ", z1 = " << report.certificate->z1.transpose()
            << ", residual = " << report.certificate->residual << "\n";

  const Vector probe{{1.0, -1.0}};
  const auto off = verify_stationarity(prob, probe);
  std::cout << "at (1, -1): verdict " << to_string(off.verdict) << ", residual = " << off.certificate->residual << "\n";
}
